//! Guard functions and crossing-time refinement.

use crate::error::Result;

/// Default refinement tolerance on event times, s.
pub const EVENT_TOLERANCE: f64 = 1e-8;

/// Bisection on a guard that is positive at `t0` and non-positive at `t1`.
/// Returns the left end of the final bracket widened to `tol`; the guard is
/// non-positive at the returned time plus at most `tol`.
pub fn refine_crossing<F>(mut guard: F, t0: f64, t1: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (t0, t1);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if guard(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Touchdown test on foot height over one step of length `dt`. Only a
/// strict sign change (above the ground, then below it) counts, so grazing
/// contact is not an event. `height_at(τ)` re-integrates from the start of
/// the step; the refined offset into the step is returned.
pub fn detect_touchdown<F>(
    before: f64,
    after: f64,
    dt: f64,
    tol: f64,
    height_at: F,
) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if before > 0.0 && after < 0.0 {
        refine_crossing(height_at, 0.0, dt, tol).map(Some)
    } else {
        Ok(None)
    }
}

/// The ground can only push.
pub fn detect_liftoff(normal_force: f64) -> bool {
    normal_force <= 0.0
}
