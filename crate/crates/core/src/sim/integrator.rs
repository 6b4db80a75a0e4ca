//! Fixed-step RK4 on the dynamics of the active contact mode, with the
//! motor voltages held constant over the step.

use nalgebra::{Vector2, Vector3};

use crate::dynamics::{
    forward_dynamics_aerial, forward_dynamics_contact, motor_torque, GroundReactionForce,
    MotorOutput,
};
use crate::error::Result;
use crate::model::kinematics::{JointState, JointVector};
use crate::model::params::{ContactModel, RobotParams};

/// Which set of equations is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactMode {
    Aerial,
    /// Foot held at the anchor point on the ground by the rows of `model`.
    Stance {
        anchor: Vector3<f64>,
        model: ContactModel,
    },
}

impl ContactMode {
    pub fn in_contact(&self) -> bool {
        matches!(self, ContactMode::Stance { .. })
    }
}

/// Everything the dynamics produce at one state besides q̈.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub qddot: JointVector,
    pub grf: GroundReactionForce,
    pub motors: [MotorOutput; 2],
}

impl Evaluation {
    /// Applied electromagnetic joint torques.
    pub fn drive_torque(&self) -> Vector2<f64> {
        Vector2::new(self.motors[0].drive_torque, self.motors[1].drive_torque)
    }

    /// Σ|v·i| over both drives, W.
    pub fn electrical_power(&self) -> f64 {
        self.motors.iter().map(|m| m.electrical_power().abs()).sum()
    }
}

/// Motors are driven by `voltage`; their torque depends on the joint speed
/// so it is re-evaluated at every stage.
pub fn evaluate(
    params: &RobotParams,
    mode: &ContactMode,
    x: &JointState,
    voltage: &[f64; 2],
) -> Result<Evaluation> {
    let drives = params.drives();
    let motors = [
        motor_torque(&drives[0], voltage[0], x.qdot[2], params.coulomb_smoothing),
        motor_torque(&drives[1], voltage[1], x.qdot[3], params.coulomb_smoothing),
    ];
    let u = Vector2::new(motors[0].drive_torque, motors[1].drive_torque);
    let (qddot, grf) = match mode {
        ContactMode::Aerial => (
            forward_dynamics_aerial(params, &x.q, &x.qdot, &u)?,
            GroundReactionForce::zero(),
        ),
        ContactMode::Stance { anchor, model } => {
            let sol = forward_dynamics_contact(params, *model, &x.q, &x.qdot, &u, anchor)?;
            (sol.qddot, sol.grf)
        }
    };
    Ok(Evaluation { qddot, grf, motors })
}

/// State after one step together with the electrical energy drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: JointState,
    pub energy: f64,
}

/// Classical RK4. Electrical power is integrated with the same weights.
pub fn rk4_step(
    params: &RobotParams,
    mode: &ContactMode,
    x: &JointState,
    voltage: &[f64; 2],
    dt: f64,
) -> Result<StepResult> {
    let stage = |s: &JointState| -> Result<(JointState, f64)> {
        let e = evaluate(params, mode, s, voltage)?;
        Ok((JointState::new(s.qdot, e.qddot), e.electrical_power()))
    };
    let shift = |d: &JointState, h: f64| JointState::new(x.q + d.q * h, x.qdot + d.qdot * h);

    let (k1, p1) = stage(x)?;
    let (k2, p2) = stage(&shift(&k1, 0.5 * dt))?;
    let (k3, p3) = stage(&shift(&k2, 0.5 * dt))?;
    let (k4, p4) = stage(&shift(&k3, dt))?;
    let w = dt / 6.0;
    Ok(StepResult {
        state: JointState::new(
            x.q + (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q) * w,
            x.qdot + (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot) * w,
        ),
        energy: (p1 + 2.0 * p2 + 2.0 * p3 + p4) * w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_moves_without_forces() {
        let mut p = RobotParams::default();
        p.gravity_enabled = false;
        p.knee_spring.stiffness = 0.0;
        let x = JointState::at_rest(JointVector::new(0.3, 0.1, -0.2, -0.9));
        let r = rk4_step(&p, &ContactMode::Aerial, &x, &[0.0; 2], 1e-4).unwrap();
        assert_eq!(r.state, x);
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn held_voltage_at_stall_draws_v_squared_over_r() {
        let mut p = RobotParams::default();
        p.gravity_enabled = false;
        let x = JointState::at_rest(JointVector::new(0.0, 0.0, 0.0, -1.1));
        let e = evaluate(&p, &ContactMode::Aerial, &x, &[6.0, 0.0]).unwrap();
        let r = p.hip_motor.terminal_resistance;
        assert!((e.electrical_power() - 36.0 / r).abs() < 1e-12);
    }
}
