//! Kinematic description of the five-body chain and its physical parameters.

pub mod kinematics;
pub mod params;

pub use kinematics::{
    contact_jacobian, contact_jacobian_dot, foot_in_hip_frame, foot_position, forward_kinematics,
    heading_rotation, hip_position, leg_inverse_kinematics, ChainFrames, JointState, JointVector,
    Transform,
};
pub use params::{
    ContactModel, LinkInertia, MotorParams, RobotParams, SpringEngagement, SpringParams,
};
