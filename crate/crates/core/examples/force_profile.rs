//! Tabulates the stance force profile over normalized stance time for the
//! default gait, as CSV on stdout.

use gantry_hopper::control::{bezier_force_profile, GaitParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut gait = GaitParams::default();
    if let Some(peak) = std::env::args().nth(1) {
        gait.peak_horizontal_force = peak.parse()?;
    }
    println!("s,t,f_radial,f_tangential,f_vertical");
    for i in 0..=20 {
        let s = i as f64 / 20.0;
        let f = bezier_force_profile(&gait, s)?;
        println!(
            "{s:.2},{:.4},{:.3},{:.3},{:.3}",
            s * gait.stance_duration,
            f.x,
            f.y,
            f.z
        );
    }
    Ok(())
}
