//! Manipulator-form equations of motion, M(q) q̈ + C(q, q̇) q̇ + G(q) = τ.
//!
//! M is assembled from body Jacobians. Its partial derivatives are computed in
//! closed form (axis and lever-arm derivatives of the serial chain), and C is
//! built from the Christoffel symbols of M so that Ṁ − 2C is skew-symmetric.

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Matrix4x2, Vector3};

use crate::model::kinematics::{ChainFrames, JointVector};
use crate::model::params::RobotParams;

/// All configuration-dependent terms of the equations of motion.
#[derive(Debug, Clone, Copy)]
pub struct DynamicsTerms {
    pub mass: Matrix4<f64>,
    pub coriolis: Matrix4<f64>,
    pub gravity: JointVector,
    pub actuation: Matrix4x2<f64>,
}

impl DynamicsTerms {
    pub fn new(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> Self {
        let frames = ChainFrames::new(params, q);
        let mass = assemble_mass(params, &frames);
        let partials = mass_partials(params, &frames);
        Self {
            mass,
            coriolis: christoffel(&partials, qdot),
            gravity: gravity_from_frames(params, &frames),
            actuation: actuation_matrix(),
        }
    }
}

/// Maps the (hip, knee) torque pair onto the four joints; the gantry joints
/// receive nothing.
pub fn actuation_matrix() -> Matrix4x2<f64> {
    let mut b = Matrix4x2::zeros();
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    b
}

/// One rigid mass (or point mass) attached to a chain body.
struct MassElement {
    body: usize,
    mass: f64,
    com: Vector3<f64>,
    /// World-frame inertia about the COM, zero for point masses.
    inertia: Matrix3<f64>,
}

fn mass_elements(params: &RobotParams, frames: &ChainFrames) -> [MassElement; 5] {
    let link = |body: usize| {
        let l = params.links()[body - 1];
        let pose = frames.bodies[body];
        MassElement {
            body,
            mass: l.mass,
            com: pose.apply(&l.com_vector()),
            inertia: pose.rotation * l.inertia_matrix() * pose.rotation.transpose(),
        }
    };
    let arm = frames.bodies[2];
    [
        link(1),
        link(2),
        link(3),
        link(4),
        MassElement {
            body: 2,
            mass: params.counterweight_mass,
            com: arm.apply(&Vector3::new(0.0, -params.counterweight_arm, 0.0)),
            inertia: Matrix3::zeros(),
        },
    ]
}

fn rotor_diagonal(params: &RobotParams) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(2, 2)] = params.hip_drive().reflected_inertia();
    m[(3, 3)] = params.knee_drive().reflected_inertia();
    m
}

fn assemble_mass(params: &RobotParams, frames: &ChainFrames) -> Matrix4<f64> {
    let mut m = rotor_diagonal(params);
    for e in mass_elements(params, frames) {
        let jv = frames.point_jacobian(e.body, &e.com);
        let jw = frames.angular_jacobian(e.body);
        m += e.mass * jv.transpose() * jv + jw.transpose() * e.inertia * jw;
    }
    // exact symmetry
    (m + m.transpose()) * 0.5
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// ∂(point Jacobian)/∂q_k for a point fixed on `body`.
fn point_jacobian_partial(
    frames: &ChainFrames,
    body: usize,
    p: &Vector3<f64>,
    k: usize,
) -> Matrix3x4<f64> {
    let z = &frames.axes;
    let o = &frames.axis_points;
    let dp = if k < body {
        z[k].cross(&(p - o[k]))
    } else {
        Vector3::zeros()
    };
    let mut out = Matrix3x4::zeros();
    for j in 0..body {
        let (dz, d_o) = if k < j {
            (z[k].cross(&z[j]), z[k].cross(&(o[j] - o[k])))
        } else {
            (Vector3::zeros(), Vector3::zeros())
        };
        out.set_column(j, &(dz.cross(&(p - o[j])) + z[j].cross(&(dp - d_o))));
    }
    out
}

fn angular_jacobian_partial(frames: &ChainFrames, body: usize, k: usize) -> Matrix3x4<f64> {
    let mut out = Matrix3x4::zeros();
    for j in (k + 1)..body {
        out.set_column(j, &frames.axes[k].cross(&frames.axes[j]));
    }
    out
}

/// ∂M/∂q_k for k = 0..4.
fn mass_partials(params: &RobotParams, frames: &ChainFrames) -> [Matrix4<f64>; 4] {
    let elements = mass_elements(params, frames);
    std::array::from_fn(|k| {
        let mut dm = Matrix4::zeros();
        for e in &elements {
            let jv = frames.point_jacobian(e.body, &e.com);
            let djv = point_jacobian_partial(frames, e.body, &e.com, k);
            let t = e.mass * djv.transpose() * jv;
            dm += t + t.transpose();
            if e.inertia != Matrix3::zeros() {
                let jw = frames.angular_jacobian(e.body);
                let djw = angular_jacobian_partial(frames, e.body, k);
                let di = if k < e.body {
                    let s = skew(&frames.axes[k]);
                    s * e.inertia - e.inertia * s
                } else {
                    Matrix3::zeros()
                };
                let t = djw.transpose() * e.inertia * jw;
                dm += t + t.transpose() + jw.transpose() * di * jw;
            }
        }
        dm
    })
}

fn christoffel(partials: &[Matrix4<f64>; 4], qdot: &JointVector) -> Matrix4<f64> {
    let mut c = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let mut sum = 0.0;
            for k in 0..4 {
                sum += 0.5
                    * (partials[k][(i, j)] + partials[j][(i, k)] - partials[i][(j, k)])
                    * qdot[k];
            }
            c[(i, j)] = sum;
        }
    }
    c
}

fn gravity_from_frames(params: &RobotParams, frames: &ChainFrames) -> JointVector {
    let g = params.g();
    let mut out = JointVector::zeros();
    for e in mass_elements(params, frames) {
        let jv = frames.point_jacobian(e.body, &e.com);
        out += e.mass * g * jv.row(2).transpose();
    }
    out
}

/// Joint-space inertia including reflected rotor inertia.
pub fn mass_matrix(params: &RobotParams, q: &JointVector) -> Matrix4<f64> {
    assemble_mass(params, &ChainFrames::new(params, q))
}

/// Partial derivatives ∂M/∂q_k, k = 0..4.
pub fn mass_matrix_partials(params: &RobotParams, q: &JointVector) -> [Matrix4<f64>; 4] {
    mass_partials(params, &ChainFrames::new(params, q))
}

/// Ṁ along q̇, from the closed-form partials.
pub fn mass_matrix_dot(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> Matrix4<f64> {
    mass_matrix_partials(params, q)
        .iter()
        .zip(qdot.iter())
        .fold(Matrix4::zeros(), |acc, (dm, v)| acc + dm * *v)
}

pub fn coriolis_matrix(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> Matrix4<f64> {
    christoffel(&mass_matrix_partials(params, q), qdot)
}

/// G = ∂V/∂q for the gravitational potential of links and counterweight.
pub fn gravity_vector(params: &RobotParams, q: &JointVector) -> JointVector {
    gravity_from_frames(params, &ChainFrames::new(params, q))
}

/// Gravitational potential energy with the ground plane as reference.
pub fn potential_energy(params: &RobotParams, q: &JointVector) -> f64 {
    let frames = ChainFrames::new(params, q);
    mass_elements(params, &frames)
        .iter()
        .map(|e| e.mass * params.g() * e.com.z)
        .sum()
}

pub fn kinetic_energy(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> f64 {
    0.5 * qdot.dot(&(mass_matrix(params, q) * qdot))
}

/// Total mechanical energy: kinetic, gravitational and knee spring.
pub fn total_energy(params: &RobotParams, q: &JointVector, qdot: &JointVector) -> f64 {
    kinetic_energy(params, q, qdot)
        + potential_energy(params, q)
        + super::actuators::spring_energy(&params.knee_spring, q[3])
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn actuation_matrix_selects_leg_joints() {
        let b = actuation_matrix();
        let u = nalgebra::Vector2::new(2.0, -3.0);
        assert_eq!(b * u, JointVector::new(0.0, 0.0, 2.0, -3.0));
    }

    #[test]
    fn gravity_is_yaw_invariant() {
        let p = RobotParams::default();
        let a = gravity_vector(&p, &JointVector::new(0.0, 0.2, 0.4, -1.0));
        let b = gravity_vector(&p, &JointVector::new(2.3, 0.2, 0.4, -1.0));
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coriolis_vanishes_at_rest_and_is_homogeneous() {
        let p = RobotParams::default();
        let q = JointVector::new(0.1, -0.2, 0.5, -1.2);
        assert_eq!(
            coriolis_matrix(&p, &q, &JointVector::zeros()),
            Matrix4::zeros()
        );
        let v = JointVector::new(1.0, 0.3, -2.0, 4.0);
        let c1 = coriolis_matrix(&p, &q, &v);
        let c3 = coriolis_matrix(&p, &q, &(-3.0 * v));
        assert_abs_diff_eq!(c3, -3.0 * c1, epsilon = 1e-12);
    }

    #[test]
    fn reflected_rotor_inertia_lands_on_actuated_diagonal() {
        let mut p = RobotParams::default();
        let q = JointVector::new(0.0, 0.1, 0.3, -0.9);
        let m0 = mass_matrix(&p, &q);
        p.hip_motor.rotor_inertia *= 2.0;
        let m1 = mass_matrix(&p, &q);
        let diff = m1 - m0;
        assert_abs_diff_eq!(
            diff[(2, 2)],
            p.hip_motor.gear_ratio.powi(2) * p.hip_motor.rotor_inertia / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(diff.abs().sum() - diff[(2, 2)].abs(), 0.0, epsilon = 1e-15);
    }
}
