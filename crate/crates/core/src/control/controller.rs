use nalgebra::{Matrix3, Vector2, Vector3};

use super::fsm::{fsm_step, ControllerState, Phase, PhaseEvent};
use super::profile::bezier_force_profile;
use super::sensors::{decode, SensorFrame};
use super::GaitParams;
use crate::dynamics::voltage_for_torque;
use crate::model::kinematics::{ChainFrames, JointState, JointVector};
use crate::model::params::RobotParams;

/// What the controller gets to see each tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    /// Exact joint state and contact flag straight from the simulator.
    Ideal { state: JointState, contact: bool },
    /// Encoder counts and contact switch only; the gantry joints are not
    /// measured and are taken as zero.
    Quantized(SensorFrame),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Clamped hip and knee voltage commands.
    pub voltage: [f64; 2],
    /// Joint torques the control law asked for.
    pub torque_request: [f64; 2],
    /// True where the requested voltage exceeded the supply.
    pub saturated: [bool; 2],
    pub event: Option<PhaseEvent>,
    /// Desired ground reaction force in the hip heading frame (stance only).
    pub desired_grf: Vector3<f64>,
}

/// u_st = leg rows of J_cᵀ F_d, with F_d the force the foot exerts on the
/// ground (world frame).
pub fn stance_torques(params: &RobotParams, q: &JointVector, f_d: &Vector3<f64>) -> Vector2<f64> {
    let frames = ChainFrames::new(params, q);
    let jc = frames.point_jacobian(4, &frames.foot);
    let tau = jc.transpose() * f_d;
    Vector2::new(tau[2], tau[3])
}

/// Task-space PD holding the foot at the touchdown target relative to the
/// hip: u_ar = J_legᵀ R_H [K_p (p_ref − p_f) − K_d ṗ_f].
pub fn aerial_torques(
    params: &RobotParams,
    q: &JointVector,
    qdot: &JointVector,
    gait: &GaitParams,
) -> Vector2<f64> {
    let frames = ChainFrames::new(params, q);
    let heading = frames.heading();
    let leg = frames
        .point_jacobian(4, &frames.foot)
        .fixed_columns::<2>(2)
        .into_owned();
    let leg_rates = Vector2::new(qdot[2], qdot[3]);

    let p_f = heading.transpose() * (frames.foot - frames.hip);
    let pdot_f = heading.transpose() * (leg * leg_rates);
    let kp = Matrix3::from_diagonal(&Vector3::from(gait.kp));
    let kd = Matrix3::from_diagonal(&Vector3::from(gait.kd));
    let force_h = kp * (Vector3::from(gait.foot_target) - p_f) - kd * pdot_f;
    leg.transpose() * (heading * force_h)
}

fn estimate(
    ctrl: &mut ControllerState,
    params: &RobotParams,
    obs: &Observation,
) -> (JointVector, JointVector, bool) {
    match obs {
        Observation::Ideal { state, contact } => {
            ctrl.filtered_qdot = [state.qdot[2], state.qdot[3]];
            (state.q, state.qdot, *contact)
        }
        Observation::Quantized(frame) => {
            let ratios = params.drives().map(|d| d.gear_ratio);
            let angles = [
                decode(frame.encoder_counts[0], ratios[0]),
                decode(frame.encoder_counts[1], ratios[1]),
            ];
            if let Some(prev) = ctrl.last_angles {
                for i in 0..2 {
                    ctrl.filtered_qdot[i] = ctrl.filters[i].update(angles[i], prev[i]);
                }
            }
            ctrl.last_angles = Some(angles);
            let q = JointVector::new(0.0, 0.0, angles[0], angles[1]);
            let qdot = JointVector::new(0.0, 0.0, ctrl.filtered_qdot[0], ctrl.filtered_qdot[1]);
            (q, qdot, frame.contact_switch)
        }
    }
}

/// One controller period: estimate, advance the phase machine, evaluate the
/// phase's control law and convert torques to clamped voltages through the
/// inverse motor model.
pub fn controller_step(
    ctrl: &ControllerState,
    params: &RobotParams,
    gait: &GaitParams,
    obs: &Observation,
) -> (ControlOutput, ControllerState) {
    let mut state = *ctrl;
    let (q, qdot, contact) = estimate(&mut state, params, obs);
    let (mut state, event) = {
        let (next, event) = fsm_step(&state, contact, gait.control_period);
        (next, event)
    };

    if event == Some(PhaseEvent::Touchdown) {
        state.horizontal_peak = if gait.speed_loop_enabled {
            (gait.peak_horizontal_force
                + gait.speed_gain * (gait.target_speed - state.speed_estimate))
                .clamp(-gait.speed_loop_max_force, gait.speed_loop_max_force)
        } else {
            gait.peak_horizontal_force
        };
    }

    let frames = ChainFrames::new(params, &q);
    let heading = frames.heading();
    let (torque, desired_grf) = match state.phase {
        Phase::Stance => {
            let s = (state.stance_clock / gait.stance_duration).clamp(0.0, 1.0);
            let shaped = GaitParams {
                peak_horizontal_force: state.horizontal_peak,
                ..gait.clone()
            };
            let grf = bezier_force_profile(&shaped, s).unwrap_or_else(|_| Vector3::zeros());
            // the foot pushes on the ground with the opposite of the wanted reaction
            let f_d = -(heading * grf);

            let leg = frames
                .point_jacobian(4, &frames.foot)
                .fixed_columns::<2>(2)
                .into_owned();
            let rel = heading.transpose() * (leg * Vector2::new(qdot[2], qdot[3]));
            state.speed_estimate += 0.05 * (-rel.y - state.speed_estimate);
            (stance_torques(params, &q, &f_d), grf)
        }
        Phase::Aerial => (aerial_torques(params, &q, &qdot, gait), Vector3::zeros()),
    };

    let drives = params.drives();
    let mut voltage = [0.0; 2];
    let mut saturated = [false; 2];
    for i in 0..2 {
        let v = voltage_for_torque(&drives[i], torque[i], qdot[2 + i]);
        saturated[i] = !(v.abs() <= drives[i].v_max);
        voltage[i] = if v.is_finite() {
            v.clamp(-drives[i].v_max, drives[i].v_max)
        } else {
            0.0
        };
    }
    state.last_voltage_cmd = voltage;

    (
        ControlOutput {
            voltage,
            torque_request: [torque[0], torque[1]],
            saturated,
            event,
            desired_grf,
        },
        state,
    )
}
