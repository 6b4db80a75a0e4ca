//! Forward kinematics, the contact Jacobian checked against finite
//! differences, and the leg inverse kinematics used for touchdown targets.

use gantry_hopper::model::kinematics::{
    contact_jacobian, foot_in_hip_frame, foot_position, forward_kinematics, hip_position,
    leg_inverse_kinematics, JointVector,
};
use gantry_hopper::model::params::RobotParams;

fn main() {
    let p = RobotParams::default();
    let q = JointVector::new(0.4, -0.05, 0.5, -1.1);

    println!("q = {:?}", q.as_slice());
    for (i, t) in forward_kinematics(&p, &q).iter().enumerate() {
        let o = t.translation;
        println!("frame {i}: origin ({:+.4}, {:+.4}, {:+.4})", o.x, o.y, o.z);
    }
    let hip = hip_position(&p, &q);
    let foot = foot_position(&p, &q);
    println!("hip  {:+.4} {:+.4} {:+.4}", hip.x, hip.y, hip.z);
    println!("foot {:+.4} {:+.4} {:+.4}", foot.x, foot.y, foot.z);
    let rel = foot_in_hip_frame(&p, &q);
    println!(
        "foot w.r.t. hip, heading frame: radial {:+.4} tangential {:+.4} up {:+.4}",
        rel.x, rel.y, rel.z
    );

    // central differences, column by column
    let j = contact_jacobian(&p, &q);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        let mut qp = q;
        let mut qm = q;
        qp[k] += h;
        qm[k] -= h;
        let col = (foot_position(&p, &qp) - foot_position(&p, &qm)) / (2.0 * h);
        worst = worst.max((col - j.column(k)).amax());
    }
    println!("J_c =\n{j:.4}max |J_c - finite difference| = {worst:.2e}");

    let yaw_only = JointVector::new(2.0, q[1], q[2], q[3]);
    println!(
        "foot height at yaw 0.4 and 2.0: {:.6} {:.6}",
        foot.z,
        foot_position(&p, &yaw_only).z
    );

    let (y, z) = (0.03, -0.24);
    match leg_inverse_kinematics(&p, y, z) {
        Some((hip, knee)) => {
            let back = foot_in_hip_frame(&p, &JointVector::new(0.0, 0.0, hip, knee));
            println!(
                "IK target ({y}, {z}) -> hip {hip:.4} knee {knee:.4} -> reached ({:.4}, {:.4})",
                back.y, back.z
            );
        }
        None => println!("IK target ({y}, {z}) is out of reach"),
    }
}
