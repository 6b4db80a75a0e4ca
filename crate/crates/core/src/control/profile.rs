//! Bézier ground-force profile over normalized stance time.

use nalgebra::Vector3;

use super::GaitParams;
use crate::error::{Error, Result};

/// Evaluate a scalar Bézier curve with de Casteljau's algorithm.
pub fn bezier(control_points: &[f64], s: f64) -> f64 {
    let mut pts = control_points.to_vec();
    let n = pts.len();
    for level in 1..n {
        for i in 0..n - level {
            pts[i] = (1.0 - s) * pts[i] + s * pts[i + 1];
        }
    }
    pts.first().copied().unwrap_or(0.0)
}

/// Control points of a symmetric profile of the given degree whose peak, at
/// s = 0.5, equals `peak`. End points are zero and all interior points share
/// one value c, which makes the curve c (1 − sⁿ − (1 − s)ⁿ).
pub fn control_points(degree: u32, peak: f64) -> Vec<f64> {
    let n = degree.max(2) as usize;
    let interior = peak / (1.0 - 0.5f64.powi(n as i32 - 1));
    let mut pts = vec![interior; n + 1];
    pts[0] = 0.0;
    pts[n] = 0.0;
    pts
}

/// Desired ground reaction force in the hip heading frame at normalized
/// stance time s: (lateral, horizontal, vertical). The lateral component is
/// always zero.
pub fn bezier_force_profile(gait: &GaitParams, s: f64) -> Result<Vector3<f64>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(s));
    }
    let shape = bezier(&control_points(gait.bezier_degree, 1.0), s);
    Ok(Vector3::new(
        0.0,
        gait.peak_horizontal_force * shape,
        gait.peak_vertical_force * shape,
    ))
}
