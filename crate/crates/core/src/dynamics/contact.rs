//! Foot contact: constraint rows, stance forward dynamics with ground
//! reaction force, and the inelastic touchdown impact.

use nalgebra::{DMatrix, DVector, Matrix3xX, Vector2, Vector3};

use super::{generalized_forces, solve_mass, DynamicsTerms};
use crate::error::{Error, Result};
use crate::model::kinematics::{ChainFrames, JointVector};
use crate::model::params::{ContactModel, RobotParams};

/// Ground reaction force acting on the foot, world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundReactionForce {
    pub f: Vector3<f64>,
}

impl GroundReactionForce {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn normal(&self) -> f64 {
        self.f.z
    }
}

/// Active constraint rows A (m × 4), the world direction of each row, and
/// the right-hand side γ of A q̈ = γ with Baumgarte terms.
///
/// Each multiplier acts on the foot along its column of `forces`. That is
/// the constraint direction itself except for a sliding foot, whose normal
/// force drags Coulomb friction along.
#[derive(Debug, Clone)]
pub struct ContactRows {
    pub jacobian: DMatrix<f64>,
    pub directions: Matrix3xX<f64>,
    pub forces: Matrix3xX<f64>,
    /// Rows of Bᵀ with B = J_cᵀ·forces.
    pub force_jacobian: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl ContactRows {
    /// Rows of the configured contact model.
    pub fn new(
        params: &RobotParams,
        q: &JointVector,
        qdot: &JointVector,
        anchor: &Vector3<f64>,
    ) -> Self {
        Self::for_model(params, params.contact_model, q, qdot, anchor)
    }

    pub fn for_model(
        params: &RobotParams,
        model: ContactModel,
        q: &JointVector,
        qdot: &JointVector,
        anchor: &Vector3<f64>,
    ) -> Self {
        let frames = ChainFrames::new(params, q);
        let jc = frames.point_jacobian(4, &frames.foot);
        let jdot_qdot = frames.point_jacobian_dot(4, &frames.foot, qdot) * qdot;
        let foot_vel = jc * qdot;
        let offset = frames.foot - anchor;
        let (alpha, beta) = (params.baumgarte_alpha, params.baumgarte_beta);

        let directions = match model {
            ContactModel::Pinned => {
                Matrix3xX::from_columns(&[Vector3::x(), Vector3::y(), Vector3::z()])
            }
            ContactModel::Planar => {
                let tangent = frames.heading() * Vector3::y();
                Matrix3xX::from_columns(&[tangent, Vector3::z()])
            }
            ContactModel::Sliding => Matrix3xX::from_columns(&[Vector3::z()]),
        };
        let forces = match model {
            ContactModel::Sliding => {
                let slip = Vector3::new(foot_vel.x, foot_vel.y, 0.0);
                let scale = (slip.norm_squared() + params.slip_smoothing.powi(2)).sqrt();
                Matrix3xX::from_columns(&[Vector3::z() - slip * (params.ground_friction / scale)])
            }
            ContactModel::Planar | ContactModel::Pinned => directions.clone(),
        };
        let m = directions.ncols();
        let mut jacobian = DMatrix::zeros(m, 4);
        let mut force_jacobian = DMatrix::zeros(m, 4);
        let mut bias = DVector::zeros(m);
        for i in 0..m {
            let f = forces.column(i).into_owned();
            force_jacobian.row_mut(i).copy_from(&(f.transpose() * jc));
            let d = directions.column(i).into_owned();
            // planar rows turn with the gantry yaw
            let d_dot = match model {
                ContactModel::Planar => Vector3::z().cross(&d) * qdot[0],
                ContactModel::Pinned | ContactModel::Sliding => Vector3::zeros(),
            };
            jacobian.row_mut(i).copy_from(&(d.transpose() * jc));
            let a_dot_qdot = d.dot(&jdot_qdot) + d_dot.dot(&foot_vel);
            bias[i] = -a_dot_qdot - 2.0 * alpha * d.dot(&foot_vel) - beta * beta * d.dot(&offset);
        }
        Self {
            jacobian,
            directions,
            forces,
            force_jacobian,
            bias,
        }
    }

    /// Constraint velocity A q̇.
    pub fn velocity(&self, qdot: &JointVector) -> DVector<f64> {
        &self.jacobian * DVector::from_column_slice(qdot.as_slice())
    }
}

/// Outcome of the stance solve.
#[derive(Debug, Clone, Copy)]
pub struct StanceSolution {
    pub qddot: JointVector,
    pub grf: GroundReactionForce,
}

/// Solves (A M⁻¹ Bᵀ) λ = `rhs` and returns λ with M⁻¹ Bᵀ. The symmetric
/// case B = A goes through Cholesky.
fn constrained_solve(
    terms: &DynamicsTerms,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let chol = terms.mass.cholesky().ok_or(Error::SingularMass)?;
    let m = a.nrows();
    let mut minv_bt = DMatrix::zeros(4, m);
    for i in 0..m {
        let col = nalgebra::Vector4::from_iterator(b.row(i).iter().copied());
        minv_bt.set_column(i, &chol.solve(&col));
    }
    let lambda = a * &minv_bt;
    let scale = lambda.diagonal().abs().max();
    if !(scale > 0.0) {
        return Err(Error::SingularConstraint);
    }
    if a == b {
        let lchol = lambda.cholesky().ok_or(Error::SingularConstraint)?;
        let min_pivot = lchol.l().diagonal().min();
        if min_pivot * min_pivot < 1e-12 * scale {
            return Err(Error::SingularConstraint);
        }
        return Ok((lchol.solve(rhs), minv_bt));
    }
    let lu = lambda.lu();
    if lu.determinant().abs() < (1e-12 * scale).powi(m as i32) {
        return Err(Error::SingularConstraint);
    }
    let x = lu.solve(rhs).ok_or(Error::SingularConstraint)?;
    Ok((x, minv_bt))
}

/// Stance dynamics with the foot held at `anchor`: solves
/// [M, −Aᵀ; A, 0] [q̈; λ] = [τ − Cq̇ − G; γ] and returns q̈ with the world
/// ground reaction force.
pub fn forward_dynamics_stance(
    params: &RobotParams,
    q: &JointVector,
    qdot: &JointVector,
    u: &Vector2<f64>,
    anchor: &Vector3<f64>,
) -> Result<StanceSolution> {
    forward_dynamics_contact(params, params.contact_model, q, qdot, u, anchor)
}

/// Stance dynamics with an explicit contact model.
pub fn forward_dynamics_contact(
    params: &RobotParams,
    model: ContactModel,
    q: &JointVector,
    qdot: &JointVector,
    u: &Vector2<f64>,
    anchor: &Vector3<f64>,
) -> Result<StanceSolution> {
    let terms = DynamicsTerms::new(params, q, qdot);
    let rows = ContactRows::for_model(params, model, q, qdot, anchor);
    stance_from_terms(params, &terms, &rows, q, qdot, u)
}

fn stance_from_terms(
    params: &RobotParams,
    terms: &DynamicsTerms,
    rows: &ContactRows,
    q: &JointVector,
    qdot: &JointVector,
    u: &Vector2<f64>,
) -> Result<StanceSolution> {
    let tau = generalized_forces(params, terms, q, qdot, u);
    let free = solve_mass(&terms.mass, &tau)?;
    let rhs = &rows.bias - &rows.jacobian * DVector::from_column_slice(free.as_slice());
    let (lambda, minv_bt) = constrained_solve(terms, &rows.jacobian, &rows.force_jacobian, &rhs)?;
    let correction = &minv_bt * &lambda;
    let qddot = free + JointVector::from_column_slice(correction.as_slice());
    let f = &rows.forces * &lambda;
    Ok(StanceSolution {
        qddot,
        grf: GroundReactionForce { f },
    })
}

/// Perfectly inelastic touchdown: q̇⁺ = q̇⁻ − M⁻¹Aᵀ(AM⁻¹Aᵀ)⁻¹A q̇⁻.
/// The configuration is unchanged. The impulse is frictionless for every
/// model.
pub fn impact_map(
    params: &RobotParams,
    q: &JointVector,
    qdot_minus: &JointVector,
) -> Result<JointVector> {
    let terms = DynamicsTerms::new(params, q, qdot_minus);
    let anchor = ChainFrames::new(params, q).foot;
    let rows = ContactRows::new(params, q, qdot_minus, &anchor);
    let rhs = rows.velocity(qdot_minus);
    let (impulse, minv_at) = constrained_solve(&terms, &rows.jacobian, &rows.jacobian, &rhs)?;
    let dv = &minv_at * &impulse;
    Ok(qdot_minus - JointVector::from_column_slice(dv.as_slice()))
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::dynamics::rigid_body::kinetic_energy;

    fn state() -> (RobotParams, JointVector, JointVector) {
        let p = RobotParams::default();
        let q = JointVector::new(0.2, -0.05, 0.5, -1.1);
        let v = JointVector::new(1.5, -0.8, 2.0, -3.0);
        (p, q, v)
    }

    #[test]
    fn impact_stops_the_foot_and_dissipates() {
        for model in [
            ContactModel::Planar,
            ContactModel::Pinned,
            ContactModel::Sliding,
        ] {
            let (mut p, q, v) = state();
            p.contact_model = model;
            let plus = impact_map(&p, &q, &v).unwrap();
            let rows = ContactRows::new(&p, &q, &plus, &Vector3::zeros());
            assert!(rows.velocity(&plus).amax() < 1e-12);
            assert!(kinetic_energy(&p, &q, &plus) < kinetic_energy(&p, &q, &v));
        }
    }

    #[test]
    fn impact_on_resting_foot_is_a_no_op() {
        let (p, q, _) = state();
        // gantry and leg motion that leaves the foot still: null space of J_c
        let rows = ContactRows::new(&p, &q, &JointVector::zeros(), &Vector3::zeros());
        let a = &rows.jacobian;
        let w = DVector::from_column_slice(&[0.3, -1.0, 2.0, 0.7]);
        let aat = a * a.transpose();
        let proj = a.transpose() * aat.try_inverse().unwrap() * a * &w;
        let v = JointVector::from_column_slice((w - proj).as_slice());
        assert!(rows.velocity(&v).amax() < 1e-12);
        let plus = impact_map(&p, &q, &v).unwrap();
        assert_abs_diff_eq!(plus, v, epsilon = 1e-12);
    }

    #[test]
    fn stance_solution_satisfies_both_residuals() {
        let (p, q, v) = state();
        let anchor = ChainFrames::new(&p, &q).foot + Vector3::new(0.001, 0.0, -0.0005);
        let u = Vector2::new(1.0, -2.0);
        let sol = forward_dynamics_stance(&p, &q, &v, &u, &anchor).unwrap();
        let rows = ContactRows::new(&p, &q, &v, &anchor);
        let con = &rows.jacobian * DVector::from_column_slice(sol.qddot.as_slice()) - &rows.bias;
        assert!(con.amax() < 1e-8, "constraint residual {}", con.amax());
    }

    #[test]
    fn sliding_foot_feels_coulomb_drag_against_the_slip() {
        let (mut p, q, v) = state();
        p.ground_friction = 0.7;
        p.slip_smoothing = 1e-6;
        let frames = ChainFrames::new(&p, &q);
        let anchor = frames.foot;
        let slip = frames.point_jacobian(4, &frames.foot) * v;
        let sol = forward_dynamics_contact(
            &p,
            ContactModel::Sliding,
            &q,
            &v,
            &Vector2::zeros(),
            &anchor,
        )
        .unwrap();
        let f = sol.grf.f;
        let tangential = Vector3::new(f.x, f.y, 0.0);
        assert_abs_diff_eq!(
            tangential.norm(),
            0.7 * f.z.abs(),
            epsilon = 1e-6 * f.z.abs()
        );
        let horizontal = Vector3::new(slip.x, slip.y, 0.0);
        assert!(tangential.dot(&horizontal) * f.z < 0.0);
        let rows = ContactRows::for_model(&p, ContactModel::Sliding, &q, &v, &anchor);
        let con = &rows.jacobian * DVector::from_column_slice(sol.qddot.as_slice()) - &rows.bias;
        assert!(con.amax() < 1e-8);
    }

    #[test]
    fn singular_leg_with_pinned_foot_reports_error() {
        let mut p = RobotParams::default();
        p.contact_model = ContactModel::Pinned;
        // straight leg hanging exactly below the pitch axis plane is fine, but
        // a zero-length arm collapses the yaw column onto nothing
        p.gantry_arm_length = 0.0;
        let q = JointVector::new(0.0, 0.0, 0.0, 0.0);
        let res = impact_map(&p, &q, &JointVector::new(1.0, 1.0, 1.0, 1.0));
        assert!(matches!(res, Err(Error::SingularConstraint)));
    }
}
