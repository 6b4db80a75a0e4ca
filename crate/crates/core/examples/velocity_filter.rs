//! Joint speed estimation from a coarse motor encoder: a sine-wave hip
//! motion is quantized to counts and differentiated by the filtered
//! derivative at the control rate.

use gantry_hopper::control::sensors::{decode, encode};
use gantry_hopper::control::{DerivativeFilter, GaitParams};
use gantry_hopper::model::params::RobotParams;

fn main() {
    let gait = GaitParams::default();
    let ratio = RobotParams::default().hip_drive().gear_ratio;
    let mut filter = DerivativeFilter::new(gait.filter_lambda, gait.control_period);
    println!(
        "lambda {} 1/s, T {} s, pole {:.5}",
        gait.filter_lambda,
        gait.control_period,
        filter.pole()
    );

    let (amp, w) = (0.3, 6.0);
    let mut prev = decode(encode(0.0, ratio), ratio);
    let mut err_sq = 0.0;
    let n = 2000;
    println!("t,true_speed,quantized_angle,estimate");
    for k in 1..=n {
        let t = k as f64 * gait.control_period;
        let angle = decode(encode(amp * (w * t).sin(), ratio), ratio);
        let est = filter.update(angle, prev);
        prev = angle;
        let truth = amp * w * (w * t).cos();
        if t > 1.0 {
            err_sq += (est - truth).powi(2);
        }
        if k % 50 == 0 {
            println!("{t:.3},{truth:.4},{angle:.5},{est:.4}");
        }
    }
    println!(
        "rms error after 1 s: {:.4} rad/s",
        (err_sq / (n / 2) as f64).sqrt()
    );
}
