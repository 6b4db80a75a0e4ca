//! Equations of motion, actuator and spring models, stance dynamics with
//! ground reaction forces, and the touchdown impact map.

pub mod actuators;
pub mod contact;
pub mod rigid_body;

use nalgebra::{Matrix4, Vector2};

pub use actuators::{
    friction_torque, motor_torque, spring_energy, spring_torque, voltage_for_torque, MotorOutput,
};
pub use contact::{
    forward_dynamics_contact, forward_dynamics_stance, impact_map, ContactRows,
    GroundReactionForce, StanceSolution,
};
pub use rigid_body::{
    actuation_matrix, coriolis_matrix, gravity_vector, kinetic_energy, mass_matrix,
    mass_matrix_dot, mass_matrix_partials, potential_energy, total_energy, DynamicsTerms,
};

use crate::error::{Error, Result};
use crate::model::kinematics::JointVector;
use crate::model::params::RobotParams;

/// Passive joint torques: knee spring and, when enabled, gearbox friction.
pub fn passive_torques(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> JointVector {
    let mut tau = JointVector::zeros();
    tau[3] = spring_torque(&params.knee_spring, q[3]);
    if params.friction_enabled {
        let [hip, knee] = params.drives();
        tau[2] += friction_torque(&hip, qdot[2], params.coulomb_smoothing);
        tau[3] += friction_torque(&knee, qdot[3], params.coulomb_smoothing);
    }
    tau
}

/// B_e u + τ_spring + τ_friction − C q̇ − G.
pub fn generalized_forces(
    params: &RobotParams,
    terms: &DynamicsTerms,
    q: &JointVector,
    qdot: &JointVector,
    u: &Vector2<f64>,
) -> JointVector {
    terms.actuation * u + passive_torques(params, q, qdot) - terms.coriolis * qdot - terms.gravity
}

pub(crate) fn solve_mass(mass: &Matrix4<f64>, rhs: &JointVector) -> Result<JointVector> {
    let chol = mass.cholesky().ok_or(Error::SingularMass)?;
    let x = chol.solve(rhs);
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularMass)
    }
}

/// Flight-phase dynamics (no ground force): q̈ = M⁻¹(B_e u + τ_s + τ_f − Cq̇ − G).
pub fn forward_dynamics_aerial(
    params: &RobotParams,
    q: &JointVector,
    qdot: &JointVector,
    u: &Vector2<f64>,
) -> Result<JointVector> {
    let terms = DynamicsTerms::new(params, q, qdot);
    solve_mass(&terms.mass, &generalized_forces(params, &terms, q, qdot, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aerial_residual_is_tiny() {
        let p = RobotParams::default();
        let q = JointVector::new(0.4, 0.1, -0.3, -1.4);
        let v = JointVector::new(2.0, -1.0, 3.0, 5.0);
        let u = Vector2::new(0.7, -1.3);
        let qdd = forward_dynamics_aerial(&p, &q, &v, &u).unwrap();
        let t = DynamicsTerms::new(&p, &q, &v);
        let res = t.mass * qdd + t.coriolis * v + t.gravity
            - t.actuation * u
            - passive_torques(&p, &q, &v);
        assert!(res.amax() < 1e-9, "residual {}", res.amax());
    }

    #[test]
    fn unforced_system_does_not_care_about_mass_scale() {
        let mut p = RobotParams::default();
        p.gravity_enabled = false;
        p.friction_enabled = false;
        p.knee_spring.stiffness = 0.0;
        let q = JointVector::new(0.4, 0.1, -0.3, -1.4);
        let zero = JointVector::zeros();
        let a = forward_dynamics_aerial(&p, &q, &zero, &Vector2::zeros()).unwrap();
        for link in [&mut p.link1, &mut p.link2, &mut p.link3, &mut p.link4] {
            *link = link.scaled(2.0);
        }
        p.counterweight_mass *= 2.0;
        let b = forward_dynamics_aerial(&p, &q, &zero, &Vector2::zeros()).unwrap();
        assert_eq!(a, JointVector::zeros());
        assert_eq!(a, b);
    }

    #[test]
    fn singular_mass_is_reported() {
        let mut p = RobotParams::default();
        for link in [&mut p.link1, &mut p.link2, &mut p.link3, &mut p.link4] {
            link.mass = 0.0;
            link.inertia = [[0.0; 3]; 3];
        }
        p.counterweight_mass = 0.0;
        p.hip_motor.rotor_inertia = 0.0;
        p.knee_motor.rotor_inertia = 0.0;
        let q = JointVector::zeros();
        let r = forward_dynamics_aerial(&p, &q, &q, &Vector2::zeros());
        assert!(matches!(r, Err(Error::SingularMass)));
    }
}
