//! Impact map and stance solve over random states.

use gantry_hopper::control::stance_torques;
use gantry_hopper::dynamics::{
    forward_dynamics_contact, impact_map, kinetic_energy, mass_matrix, ContactRows,
};
use gantry_hopper::model::kinematics::{foot_position, heading_rotation, JointVector};
use gantry_hopper::model::params::{ContactModel, RobotParams};
use nalgebra::{DVector, Vector2, Vector3};
use proptest::prelude::*;

fn state() -> impl Strategy<Value = (JointVector, JointVector)> {
    (
        (-3.0..3.0f64, -0.3..0.2f64, -1.0..1.0f64, -2.3..-0.3f64),
        prop::array::uniform4(-4.0..4.0f64),
    )
        .prop_map(|((a, b, c, d), v)| (JointVector::new(a, b, c, d), JointVector::from(v)))
}

fn model() -> impl Strategy<Value = ContactModel> {
    prop_oneof![
        Just(ContactModel::Planar),
        Just(ContactModel::Pinned),
        Just(ContactModel::Sliding)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn impact_stops_the_constrained_foot_motion((q, v) in state(), model in model()) {
        let mut p = RobotParams::default();
        p.contact_model = model;
        let plus = impact_map(&p, &q, &v).unwrap();
        let rows = ContactRows::new(&p, &q, &plus, &foot_position(&p, &q));
        prop_assert!(rows.velocity(&plus).amax() <= 1e-9);
        prop_assert!(kinetic_energy(&p, &q, &plus) <= kinetic_energy(&p, &q, &v) * (1.0 + 1e-12));
        let again = impact_map(&p, &q, &plus).unwrap();
        prop_assert!((again - plus).amax() <= 1e-9 * plus.amax().max(1.0));
    }

    /// The impulse is a projection in the M metric: what is removed is
    /// M-orthogonal to what remains.
    #[test]
    fn removed_velocity_is_mass_orthogonal_to_the_kept_one((q, v) in state()) {
        let p = RobotParams::default();
        let plus = impact_map(&p, &q, &v).unwrap();
        let removed = v - plus;
        let m = mass_matrix(&p, &q);
        let cross = removed.dot(&(m * plus));
        prop_assert!(cross.abs() <= 1e-9 * (v.dot(&(m * v))).max(1e-9));
    }

    #[test]
    fn stance_solution_satisfies_equations_and_constraint(
        (q, v) in state(),
        model in model(),
        u in prop::array::uniform2(-5.0..5.0f64),
    ) {
        let p = RobotParams::default();
        let anchor = foot_position(&p, &q);
        let u = Vector2::from(u);
        let sol = forward_dynamics_contact(&p, model, &q, &v, &u, &anchor).unwrap();
        let rows = ContactRows::for_model(&p, model, &q, &v, &anchor);
        let qdd = DVector::from_column_slice(sol.qddot.as_slice());
        let constraint = &rows.jacobian * &qdd - &rows.bias;
        prop_assert!(constraint.amax() <= 1e-8 * (1.0 + rows.bias.amax()));
    }
}

#[test]
fn light_leg_turns_the_commanded_force_into_the_ground_reaction() {
    let mut p = RobotParams::default().with_leg_mass_scale(1e-6);
    p.knee_spring.stiffness = 0.0;
    for (q, f_h) in [
        (
            JointVector::new(0.0, -0.06, 0.6, -1.2),
            Vector3::new(0.0, 5.0, -70.0),
        ),
        (
            JointVector::new(1.3, -0.08, 0.3, -0.9),
            Vector3::new(0.0, -12.0, -40.0),
        ),
    ] {
        let f_d = heading_rotation(q[0]) * f_h;
        let u = stance_torques(&p, &q, &f_d);
        let sol = forward_dynamics_contact(
            &p,
            ContactModel::Planar,
            &q,
            &JointVector::zeros(),
            &u,
            &foot_position(&p, &q),
        )
        .unwrap();
        let err = (sol.grf.f + f_d).norm() / f_d.norm();
        assert!(err < 0.01, "relative GRF error {err}");
    }
}
