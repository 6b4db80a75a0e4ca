//! Sweeps the peak horizontal stance force and prints steady-state speed
//! and stance duration per run. Runs go through the same path as
//! `hopper sweep` and write their logs under the given directory.
//!
//!     cargo run --release --example speed_sweep -- [out_dir] [values]

use std::io;
use std::path::PathBuf;

use gantry_hopper::cli::{cmd_sweep, RunSpec, SweepAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "out/speed_sweep".into()));
    let values = args.next().unwrap_or_else(|| "0,10,20,30".into());
    let spec = RunSpec {
        robot: None,
        gait: None,
        duration: None,
        out_dir,
        sensor_mode: None,
        seed: None,
        sets: Vec::new(),
        sweep: Some(SweepAxis {
            param: "peak_horizontal_force".into(),
            values: values.split(',').map(|v| v.trim().to_string()).collect(),
        }),
    };
    let points = cmd_sweep(&spec, None, &mut io::stdout())?;

    println!("\nforce [N]  speed [m/s]  stance [s]");
    for p in &points {
        match &p.outcome {
            Ok(m) => println!("{:>9}  {:>11.3}  {:>10.3}", p.value, m.speed, m.mean_stance),
            Err(e) => println!("{:>9}  failed: {e}", p.value),
        }
    }
    Ok(())
}
