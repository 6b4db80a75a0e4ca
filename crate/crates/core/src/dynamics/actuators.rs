//! Knee spring and voltage-driven gearmotor models.

use crate::model::params::{MotorParams, SpringEngagement, SpringParams};

/// Knee spring torque τ = −k (θ4 − θ_rest). A unilateral spring only acts
/// while the knee is flexed past its rest angle.
pub fn spring_torque(spring: &SpringParams, knee_angle: f64) -> f64 {
    let deflection = engaged_deflection(spring, knee_angle);
    -spring.stiffness * deflection
}

pub fn spring_energy(spring: &SpringParams, knee_angle: f64) -> f64 {
    let d = engaged_deflection(spring, knee_angle);
    0.5 * spring.stiffness * d * d
}

fn engaged_deflection(spring: &SpringParams, knee_angle: f64) -> f64 {
    let d = knee_angle - spring.rest_angle;
    match spring.engagement {
        SpringEngagement::Always => d,
        SpringEngagement::Unilateral => {
            // flexion is measured away from the straight leg
            let flex_dir = if spring.rest_angle < 0.0 { -1.0 } else { 1.0 };
            if d * flex_dir > 0.0 {
                d
            } else {
                0.0
            }
        }
    }
}

/// Joint-side gearbox friction, Coulomb part smoothed by tanh(ω/ω_ε).
pub fn friction_torque(motor: &MotorParams, omega_joint: f64, smoothing: f64) -> f64 {
    -motor.viscous_friction * omega_joint
        - motor.coulomb_friction * (omega_joint / smoothing).tanh()
}

/// Result of driving a motor with a voltage command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorOutput {
    /// Net joint torque: electromagnetic drive minus gearbox friction.
    pub torque: f64,
    /// Electromagnetic torque delivered through the gearbox.
    pub drive_torque: f64,
    pub current: f64,
    /// Terminal voltage after clamping.
    pub voltage: f64,
    pub voltage_saturated: bool,
    pub current_saturated: bool,
}

impl MotorOutput {
    pub fn electrical_power(&self) -> f64 {
        self.voltage * self.current
    }
}

/// Back-EMF model with driver limits. The voltage is clamped to ±v_max and
/// the current to ±i_max.
pub fn motor_torque(
    motor: &MotorParams,
    v_cmd: f64,
    omega_joint: f64,
    smoothing: f64,
) -> MotorOutput {
    let voltage = v_cmd.clamp(-motor.v_max, motor.v_max);
    let n = motor.gear_ratio;
    let back_emf = motor.torque_constant * n * omega_joint;
    let raw = (voltage - back_emf) / motor.terminal_resistance;
    let current = raw.clamp(-motor.i_max, motor.i_max);
    let drive_torque = n * motor.torque_constant * current * motor.gear_efficiency;
    MotorOutput {
        torque: drive_torque + friction_torque(motor, omega_joint, smoothing),
        drive_torque,
        current,
        voltage,
        voltage_saturated: v_cmd.abs() > motor.v_max,
        current_saturated: raw.abs() > motor.i_max,
    }
}

/// Inverse of the steady-state motor model: voltage that would produce the
/// requested drive torque at joint speed ω. Not clamped.
pub fn voltage_for_torque(motor: &MotorParams, torque: f64, omega_joint: f64) -> f64 {
    let n = motor.gear_ratio;
    let k = motor.torque_constant;
    torque / (n * k * motor.gear_efficiency) * motor.terminal_resistance + k * n * omega_joint
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::params::RobotParams;

    fn spring(k: f64, rest: f64, engagement: SpringEngagement) -> SpringParams {
        SpringParams {
            stiffness: k,
            rest_angle: rest,
            engagement,
        }
    }

    #[test]
    fn spring_at_rest_is_unloaded() {
        let s = spring(20.0, -1.0, SpringEngagement::Always);
        assert_eq!(spring_torque(&s, -1.0), 0.0);
    }

    #[test]
    fn linear_spring_law() {
        let s = spring(20.0, 0.3, SpringEngagement::Always);
        assert_abs_diff_eq!(spring_torque(&s, 0.4), -2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_stiffness_never_pushes() {
        let s = spring(0.0, -0.7, SpringEngagement::Always);
        for k in -20..20 {
            assert_eq!(spring_torque(&s, k as f64 * 0.1), 0.0);
        }
    }

    #[test]
    fn unilateral_spring_only_resists_flexion() {
        let s = spring(5.0, -1.0, SpringEngagement::Unilateral);
        // flexed further than rest: pushes toward extension
        assert!(spring_torque(&s, -1.2) > 0.0);
        // extended past rest: slack
        assert_eq!(spring_torque(&s, -0.8), 0.0);
        assert_eq!(spring_energy(&s, -0.8), 0.0);
    }

    #[test]
    fn idle_motor_does_nothing() {
        let m = RobotParams::default().hip_motor;
        let out = motor_torque(&m, 0.0, 0.0, 0.01);
        assert_eq!(out.torque, 0.0);
        assert_eq!(out.current, 0.0);
    }

    #[test]
    fn overvoltage_is_clamped() {
        let m = RobotParams::default().hip_motor;
        let a = motor_torque(&m, 24.0, 1.0, 0.01);
        let b = motor_torque(&m, 12.0, 1.0, 0.01);
        assert_eq!(a.voltage, 12.0);
        assert_eq!(a.current, b.current);
        assert!(a.voltage_saturated);
        assert!(!b.voltage_saturated);
    }

    #[test]
    fn stall_current_hits_the_driver_limit() {
        let m = MotorParams {
            terminal_resistance: 0.2,
            ..RobotParams::default().hip_motor
        };
        let out = motor_torque(&m, 12.0, 0.0, 0.01);
        assert_eq!(out.current, 30.0);
        assert!(out.current_saturated);
        let out = motor_torque(&m, -12.0, 0.0, 0.01);
        assert_eq!(out.current, -30.0);
    }

    #[test]
    fn inverse_model_round_trips_below_limits() {
        let m = RobotParams::default().knee_drive();
        for &(tau, w) in &[(0.5, 0.0), (-1.0, 3.0), (2.0, -4.0)] {
            let v = voltage_for_torque(&m, tau, w);
            assert!(v.abs() < m.v_max);
            let out = motor_torque(&m, v, w, 0.01);
            assert_abs_diff_eq!(out.drive_torque, tau, epsilon = 1e-12);
        }
    }
}
