//! Hybrid simulation: RK4 on the active phase, contact events refined by
//! bisection, the impact map at touchdown, the controller at its own rate,
//! and logging with derived metrics.

pub mod episode;
pub mod events;
pub mod integrator;
pub mod log;
pub mod metrics;

pub use episode::{initial_state, run_episode, SensorMode, SimConfig, SimState, Simulator};
pub use events::{detect_liftoff, detect_touchdown, refine_crossing, EVENT_TOLERANCE};
pub use integrator::{evaluate, rk4_step, ContactMode, Evaluation, StepResult};
pub use log::{compare_logs, CompareReport, EpisodeLog, EventKind, EventRecord, LogRow, LogTable};
pub use metrics::{compute_metrics, hop_cycles, summarize, HopCycle, Metrics, MetricsStatus};
