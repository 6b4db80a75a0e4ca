//! Validates the shipped configuration files, then shows a catalog
//! warning and a hard failure on modified copies.

use std::io;
use std::path::Path;

use gantry_hopper::cli::cmd_validate;
use gantry_hopper::config::{load_robot, robot_to_toml};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let robot = root.join("nominal_robot.toml");
    for file in [&robot, &root.join("default_gait.toml")] {
        cmd_validate(file, &mut io::stdout())?;
        println!();
    }

    let dir = std::env::temp_dir().join("gantry_hopper_config_validation");
    std::fs::create_dir_all(&dir)?;
    let mut p = load_robot(&robot)?;
    p.hip_motor.gear_ratio = 500.0;
    let geared = dir.join("geared.toml");
    std::fs::write(&geared, robot_to_toml(&p)?)?;
    let report = cmd_validate(&geared, &mut io::sink())?;
    for w in report.warnings() {
        println!("warning only: {}: {}", w.rule, w.detail);
    }

    p.link3.mass = -0.1;
    let broken = dir.join("broken.toml");
    std::fs::write(&broken, robot_to_toml(&p)?)?;
    match cmd_validate(&broken, &mut io::sink()) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
