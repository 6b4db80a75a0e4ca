//! Torque-speed envelope of the hip drive at the supply limit, and what
//! happens when the controller asks for more than 12 V.

use gantry_hopper::dynamics::{motor_torque, voltage_for_torque};
use gantry_hopper::model::params::RobotParams;

fn main() {
    let p = RobotParams::default();
    let hip = p.hip_drive();
    let no_load = hip.v_max / (hip.torque_constant * hip.gear_ratio);
    println!(
        "hip drive: ratio {}, no-load speed {:.2} rad/s",
        hip.gear_ratio, no_load
    );
    println!("omega,torque_at_+vmax,current");
    for i in 0..=10 {
        let w = no_load * i as f64 / 10.0;
        let out = motor_torque(&hip, hip.v_max, w, p.coulomb_smoothing);
        println!("{w:.2},{:.3},{:.2}", out.torque, out.current);
    }

    println!("\nrequested,commanded_v,applied_v,drive_torque,saturated");
    for request in [1.0, 2.0, 4.0, 8.0] {
        let v = voltage_for_torque(&hip, request, 5.0);
        let out = motor_torque(&hip, v, 5.0, p.coulomb_smoothing);
        println!(
            "{request:.1},{v:.2},{:.2},{:.3},{}",
            out.voltage, out.drive_torque, out.voltage_saturated
        );
    }
}
