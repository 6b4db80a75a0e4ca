//! Heuristic hopping controller: two-state machine, Bézier stance force
//! profile mapped through the contact Jacobian, task-space PD in flight, and
//! the discrete-time sensing path that feeds it.

pub mod controller;
pub mod filter;
pub mod fsm;
pub mod profile;
pub mod sensors;

use serde::{Deserialize, Serialize};

pub use controller::{aerial_torques, controller_step, stance_torques, ControlOutput, Observation};
pub use filter::DerivativeFilter;
pub use fsm::{fsm_step, ControllerState, Phase, PhaseEvent};
pub use profile::bezier_force_profile;
pub use sensors::{ContactSwitch, SensorFrame, ENCODER_CPR};

use crate::validate::{Check, Report};

/// Gait and controller tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitParams {
    /// Projected stance duration T_s, s.
    pub stance_duration: f64,
    /// N
    pub peak_vertical_force: f64,
    /// N, positive pushes the robot toward increasing gantry yaw.
    pub peak_horizontal_force: f64,
    pub bezier_degree: u32,
    /// Desired foot position relative to the hip at touchdown, hip heading
    /// frame (radial, tangential, vertical), m.
    pub foot_target: [f64; 3],
    /// Diagonal of K_p, N/m.
    pub kp: [f64; 3],
    /// Diagonal of K_d, N·s/m.
    pub kd: [f64; 3],
    /// λ of the filtered derivative, 1/s.
    pub filter_lambda: f64,
    /// Controller period T, s.
    pub control_period: f64,
    /// Stance is abandoned after this multiple of the stance duration.
    pub stance_timeout_factor: f64,
    /// Optional proportional outer loop on forward speed.
    pub speed_loop_enabled: bool,
    /// m/s
    pub target_speed: f64,
    /// N per m/s
    pub speed_gain: f64,
    /// Bound on the horizontal peak chosen by the speed loop, N.
    pub speed_loop_max_force: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            stance_duration: 0.15,
            peak_vertical_force: 80.0,
            peak_horizontal_force: 10.0,
            bezier_degree: 4,
            foot_target: [0.0, 0.0, -0.24],
            kp: [500.0; 3],
            kd: [50.0; 3],
            filter_lambda: 10.0,
            control_period: 1e-3,
            stance_timeout_factor: 2.0,
            speed_loop_enabled: false,
            target_speed: 0.0,
            speed_gain: 40.0,
            speed_loop_max_force: 60.0,
        }
    }
}

impl GaitParams {
    pub fn stance_timeout(&self) -> f64 {
        self.stance_timeout_factor * self.stance_duration
    }

    pub fn report(&self) -> Report {
        let mut r = Report::default();
        r.push(Check::require(
            "stance_duration > 0",
            self.stance_duration.is_finite() && self.stance_duration > 0.0,
            format!("stance_duration = {}", self.stance_duration),
        ));
        r.push(Check::require(
            "peak forces finite",
            self.peak_vertical_force.is_finite() && self.peak_horizontal_force.is_finite(),
            format!(
                "vertical = {}, horizontal = {}",
                self.peak_vertical_force, self.peak_horizontal_force
            ),
        ));
        r.push(Check::require(
            "bezier_degree >= 2",
            self.bezier_degree >= 2,
            format!("bezier_degree = {}", self.bezier_degree),
        ));
        r.push(Check::require(
            "foot_target finite",
            self.foot_target.iter().all(|v| v.is_finite()),
            format!("foot_target = {:?}", self.foot_target),
        ));
        r.push(Check::require(
            "Kp diagonal, non-negative",
            self.kp.iter().all(|v| v.is_finite() && *v >= 0.0),
            format!("kp = {:?}", self.kp),
        ));
        r.push(Check::require(
            "Kd diagonal, non-negative",
            self.kd.iter().all(|v| v.is_finite() && *v >= 0.0),
            format!("kd = {:?}", self.kd),
        ));
        r.push(Check::require(
            "control_period > 0",
            self.control_period.is_finite() && self.control_period > 0.0,
            format!("control_period = {}", self.control_period),
        ));
        r.push(Check::require(
            "filter_lambda > 0",
            self.filter_lambda.is_finite() && self.filter_lambda > 0.0,
            format!("filter_lambda = {}", self.filter_lambda),
        ));
        r.push(Check::require(
            "lambda * T < 2 (filter pole inside unit circle)",
            self.filter_lambda * self.control_period < 2.0,
            format!("lambda * T = {}", self.filter_lambda * self.control_period),
        ));
        r.push(Check::require(
            "stance_timeout_factor >= 1",
            self.stance_timeout_factor >= 1.0,
            format!("stance_timeout_factor = {}", self.stance_timeout_factor),
        ));
        r
    }
}
