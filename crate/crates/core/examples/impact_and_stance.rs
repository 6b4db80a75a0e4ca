//! A falling leg strikes the ground: the impact map stops the foot, then
//! the stance solve returns the ground reaction force for a commanded
//! stance force. With the leg made nearly massless and the knee spring
//! removed, the reaction approaches the command.

use gantry_hopper::control::stance_torques;
use gantry_hopper::dynamics::{forward_dynamics_stance, impact_map, kinetic_energy};
use gantry_hopper::model::kinematics::{
    contact_jacobian, foot_position, heading_rotation, JointVector,
};
use gantry_hopper::model::params::RobotParams;
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = RobotParams::default();
    let q = JointVector::new(0.0, -0.06, 0.6, -1.2);
    let qdot = JointVector::new(1.0, -1.5, 0.5, 0.8);

    let v_minus = contact_jacobian(&p, &q) * qdot;
    let plus = impact_map(&p, &q, &qdot)?;
    let v_plus = contact_jacobian(&p, &q) * plus;
    println!(
        "foot velocity before {:+.4} {:+.4} {:+.4}",
        v_minus.x, v_minus.y, v_minus.z
    );
    println!(
        "foot velocity after  {:+.4} {:+.4} {:+.4}",
        v_plus.x, v_plus.y, v_plus.z
    );
    println!(
        "kinetic energy {:.4} J -> {:.4} J",
        kinetic_energy(&p, &q, &qdot),
        kinetic_energy(&p, &q, &plus)
    );
    let again = impact_map(&p, &q, &plus)?;
    println!("second impact changes q̇ by {:.2e}", (again - plus).amax());

    let anchor = foot_position(&p, &q);
    // backward and down in the heading frame, expressed in the world
    let f_d = heading_rotation(q[0]) * Vector3::new(0.0, -10.0, -80.0);
    for scale in [1.0, 1e-6] {
        let mut light = p.with_leg_mass_scale(scale);
        light.knee_spring.stiffness = 0.0;
        let u = stance_torques(&light, &q, &f_d);
        let sol = forward_dynamics_stance(&light, &q, &JointVector::zeros(), &u, &anchor)?;
        let f = sol.grf.f;
        println!(
            "leg mass x{scale:e}: u = ({:+.3}, {:+.3}) N·m, GRF = ({:+.3}, {:+.3}, {:+.3}) N, -F_d = ({:+.1}, {:+.1}, {:+.1})",
            u.x, u.y, f.x, f.y, f.z, -f_d.x, -f_d.y, -f_d.z
        );
    }
    Ok(())
}
