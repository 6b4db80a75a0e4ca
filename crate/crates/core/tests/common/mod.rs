//! Oracles shared by the integration test targets. They only use body
//! poses from forward kinematics, never the dynamics terms under test.

#![allow(dead_code)]

use gantry_hopper::model::kinematics::{forward_kinematics, JointVector};
use gantry_hopper::model::params::RobotParams;
use nalgebra::{Matrix3, Vector3};

/// Kinetic energy from the body poses alone: COM velocities and angular
/// velocities by central differences along q̇, plus rotor spin.
pub fn kinetic_energy_oracle(p: &RobotParams, q: &JointVector, qdot: &JointVector) -> f64 {
    let h = 1e-6;
    let plus = forward_kinematics(p, &(q + qdot * h));
    let minus = forward_kinematics(p, &(q - qdot * h));
    let now = forward_kinematics(p, q);
    let links = p.links();
    let mut ke = 0.0;
    for body in 1..5 {
        let link = links[body - 1];
        let c = link.com_vector();
        let v = (plus[body].apply(&c) - minus[body].apply(&c)) / (2.0 * h);
        let r = now[body].rotation;
        let rdot = (plus[body].rotation - minus[body].rotation) / (2.0 * h);
        let w_hat: Matrix3<f64> = rdot * r.transpose();
        let w = Vector3::new(w_hat[(2, 1)], w_hat[(0, 2)], w_hat[(1, 0)]);
        let inertia = r * link.inertia_matrix() * r.transpose();
        ke += 0.5 * link.mass * v.norm_squared() + 0.5 * w.dot(&(inertia * w));
    }
    let cw = Vector3::new(0.0, -p.counterweight_arm, 0.0);
    let v = (plus[2].apply(&cw) - minus[2].apply(&cw)) / (2.0 * h);
    ke += 0.5 * p.counterweight_mass * v.norm_squared();
    let [hip, knee] = p.drives();
    ke += 0.5 * hip.rotor_inertia * (hip.gear_ratio * qdot[2]).powi(2);
    ke += 0.5 * knee.rotor_inertia * (knee.gear_ratio * qdot[3]).powi(2);
    ke
}

pub fn potential_oracle(p: &RobotParams, q: &JointVector) -> f64 {
    let poses = forward_kinematics(p, q);
    let links = p.links();
    let mut height_mass = 0.0;
    for body in 1..5 {
        height_mass += links[body - 1].mass * poses[body].apply(&links[body - 1].com_vector()).z;
    }
    height_mass += p.counterweight_mass
        * poses[2]
            .apply(&Vector3::new(0.0, -p.counterweight_arm, 0.0))
            .z;
    height_mass * p.gravity
}
