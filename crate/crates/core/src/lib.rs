//! Simulator and heuristic hopping controller for a two-motor leg mounted
//! on a rotating, pitching gantry.
//!
//! The robot has four joints: gantry yaw θ1 and pitch θ2 are passive, the
//! hip θ3 and knee θ4 are driven by geared DC motors through a 12 V driver.
//! An episode alternates aerial phases (free rigid-body dynamics) with
//! stance phases (foot held on the ground by a constraint) joined by an
//! inelastic impact at touchdown. The controller runs at 1 kHz: during
//! stance it maps a smooth force profile through the contact Jacobian to
//! joint torques, during flight it holds the foot at a target under the
//! hip with a task-space PD law, and it converts torques to voltages with
//! the inverse motor model.
//!
//! Modules:
//! - [`model`]: parameters, kinematics and Jacobians
//! - [`dynamics`]: mass matrix, Coriolis and gravity terms, motors, contact
//! - [`control`]: force profile, state machine, sensing and the controller
//! - [`sim`]: integrator, event handling, episodes, logs and metrics
//! - [`config`] and [`cli`]: TOML files, overrides and the `hopper` commands
//!
//! Runnable examples, one per capability:
//!
//! | example | shows |
//! |---|---|
//! | `kinematics_tour` | frames, foot position, J_c against finite differences, leg IK |
//! | `force_profile` | the stance force profile as CSV |
//! | `velocity_filter` | encoder quantization and the filtered derivative |
//! | `impact_and_stance` | impact map, stance ground reaction force, massless-leg limit |
//! | `motor_saturation` | torque-speed envelope and voltage clamping |
//! | `single_episode` | one closed-loop episode and its metrics |
//! | `speed_sweep` | speed and stance duration against horizontal force |
//! | `config_validation` | rule-by-rule checks of config files |
//!
//! ```no_run
//! use gantry_hopper::config::RunConfig;
//! use gantry_hopper::sim::{run_episode, summarize};
//!
//! let config = RunConfig::default().with_overrides(&["peak_horizontal_force=20"])?;
//! let log = run_episode(&config)?;
//! println!("{:.2} m/s", summarize(&log).speed);
//! # Ok::<(), gantry_hopper::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
