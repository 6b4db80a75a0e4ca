//! The hybrid loop: controller at 1 kHz, RK4 in between, events refined by
//! bisection, impact at touchdown.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::events::{detect_liftoff, detect_touchdown, refine_crossing};
use super::integrator::{evaluate, rk4_step, ContactMode, Evaluation};
use super::log::{EpisodeLog, EventKind, EventRecord, LogRow};
use crate::config::RunConfig;
use crate::control::sensors::encode;
use crate::control::GaitParams;
use crate::control::{
    controller_step, ContactSwitch, ControllerState, Observation, Phase, PhaseEvent, SensorFrame,
};
use crate::dynamics::impact_map;
use crate::error::{Error, Result};
use crate::model::kinematics::{foot_position, leg_inverse_kinematics, JointState, JointVector};
use crate::model::params::{ContactModel, RobotParams};
use crate::validate::{Check, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SensorMode {
    /// Controller sees the exact state and contact condition.
    #[default]
    Ideal,
    /// Controller sees encoder counts, a filtered derivative and the switch.
    Quantized,
}

impl SensorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorMode::Ideal => "ideal",
            SensorMode::Quantized => "quantized",
        }
    }
}

/// Numerical and scenario settings of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// s
    pub duration: f64,
    /// Inner RK4 step, s.
    pub dt: f64,
    pub sensor_mode: SensorMode,
    /// Seed of the current-sense noise.
    pub seed: u64,
    /// Initial foot height above the ground, m.
    pub drop_height: f64,
    /// Number of trailing hop cycles averaged for steady-state metrics.
    pub metrics_window: usize,
    /// Any joint faster than this aborts the episode, rad/s.
    pub max_joint_speed: f64,
    /// Foot height at which a pressed switch releases, m.
    pub switch_hysteresis: f64,
    /// Standard deviation of the measured motor current, A.
    pub current_noise: f64,
    /// Event time tolerance, s.
    pub event_tolerance: f64,
    /// Every n-th log row goes into the torque-speed samples.
    pub torque_speed_stride: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 10.0,
            dt: 1e-4,
            sensor_mode: SensorMode::Ideal,
            seed: 0,
            drop_height: 0.02,
            metrics_window: 10,
            max_joint_speed: 500.0,
            switch_hysteresis: 1e-3,
            current_noise: 0.05,
            event_tolerance: super::events::EVENT_TOLERANCE,
            torque_speed_stride: 10,
        }
    }
}

impl SimConfig {
    /// Inner steps per controller period.
    pub fn substeps(&self, control_period: f64) -> usize {
        (control_period / self.dt).round().max(1.0) as usize
    }

    pub fn report(&self, gait: &GaitParams) -> Report {
        let mut r = Report::default();
        r.push(Check::require(
            "duration > 0",
            self.duration.is_finite() && self.duration > 0.0,
            format!("duration = {}", self.duration),
        ));
        r.push(Check::require(
            "0 < dt <= control period",
            self.dt > 0.0 && self.dt <= gait.control_period,
            format!("dt = {}, control_period = {}", self.dt, gait.control_period),
        ));
        let n = gait.control_period / self.dt;
        r.push(Check::require(
            "control period is a whole number of steps",
            (n - n.round()).abs() < 1e-6,
            format!("control_period / dt = {n}"),
        ));
        r.push(Check::require(
            "drop_height >= 0",
            self.drop_height >= 0.0,
            format!("drop_height = {}", self.drop_height),
        ));
        r.push(Check::require(
            "metrics_window >= 1",
            self.metrics_window >= 1,
            format!("metrics_window = {}", self.metrics_window),
        ));
        r.push(Check::require(
            "max_joint_speed > 0",
            self.max_joint_speed > 0.0,
            format!("max_joint_speed = {}", self.max_joint_speed),
        ));
        r.push(Check::require(
            "current_noise >= 0",
            self.current_noise >= 0.0,
            format!("current_noise = {}", self.current_noise),
        ));
        r.push(Check::require(
            "event_tolerance > 0",
            self.event_tolerance > 0.0,
            format!("event_tolerance = {}", self.event_tolerance),
        ));
        r.push(Check::require(
            "torque_speed_stride >= 1",
            self.torque_speed_stride >= 1,
            format!("torque_speed_stride = {}", self.torque_speed_stride),
        ));
        r
    }
}

/// Leg at the flight target, gantry pitched so that the foot hangs
/// `drop_height` above the ground, everything at rest.
pub fn initial_state(
    params: &RobotParams,
    gait: &GaitParams,
    drop_height: f64,
) -> Result<JointState> {
    let [_, y, z] = gait.foot_target;
    let (th3, th4) = leg_inverse_kinematics(params, y, z).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "foot_target ({y}, {z}) is outside the leg workspace"
        ))
    })?;
    let height =
        |th2: f64| foot_position(params, &JointVector::new(0.0, th2, th3, th4)).z - drop_height;
    let (lo, hi) = (-1.2, 1.2);
    if height(lo) > 0.0 || height(hi) < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "no gantry pitch puts the foot {drop_height} m above the ground"
        )));
    }
    let th2 = refine_crossing(|t| Ok(-height(t)), lo, hi, 1e-13)?;
    Ok(JointState::at_rest(JointVector::new(0.0, th2, th3, th4)))
}

/// Complete simulator state between controller ticks.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub x: JointState,
    pub mode: ContactMode,
    pub controller: ControllerState,
    /// Electrical energy drawn so far, J.
    pub energy: f64,
    /// Completed gantry revolutions, floor(θ1 / 2π).
    pub laps: i64,
    /// Voltage held until the next tick.
    pub voltage: [f64; 2],
}

impl SimState {
    pub fn phase(&self) -> Phase {
        if self.mode.in_contact() {
            Phase::Stance
        } else {
            Phase::Aerial
        }
    }
}

/// Steps an episode one controller period at a time.
pub struct Simulator {
    pub config: RunConfig,
    pub state: SimState,
    switch: ContactSwitch,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    tick: u64,
    pending: Vec<EventKind>,
    events: Vec<EventRecord>,
}

fn blowup(t: f64, detail: impl Into<String>) -> Error {
    Error::NumericalBlowup {
        time: t,
        detail: detail.into(),
    }
}

impl Simulator {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let x = initial_state(&config.robot, &config.gait, config.sim.drop_height)?;
        Self::with_state(config, x)
    }

    /// Start from an arbitrary aerial state.
    pub fn with_state(config: RunConfig, x: JointState) -> Result<Self> {
        config.validate()?;
        let noise = Normal::new(0.0, config.sim.current_noise)
            .map_err(|e| Error::InvalidConfig(format!("current_noise: {e}")))?;
        let state = SimState {
            t: 0.0,
            x,
            mode: ContactMode::Aerial,
            controller: ControllerState::new(&config.gait),
            energy: 0.0,
            laps: (x.q[0] / std::f64::consts::TAU).floor() as i64,
            voltage: [0.0; 2],
        };
        Ok(Self {
            switch: ContactSwitch::new(config.sim.switch_hysteresis),
            rng: ChaCha8Rng::seed_from_u64(config.sim.seed),
            noise,
            tick: 0,
            pending: Vec::new(),
            events: Vec::new(),
            config,
            state,
        })
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    /// Run the controller at the current time, then integrate one control
    /// period with the new voltages held. Returns the log row for the tick.
    pub fn step(&mut self) -> Result<LogRow> {
        let gait = self.config.gait.clone();
        let period = gait.control_period;
        let t = self.tick as f64 * period;
        self.state.t = t;
        let contact = self.state.mode.in_contact();
        let foot_z = foot_position(&self.config.robot, &self.state.x.q).z;

        let before = evaluate(
            &self.config.robot,
            &self.state.mode,
            &self.state.x,
            &self.state.voltage,
        )?;
        let current = [before.motors[0].current, before.motors[1].current];
        // both modes debounce lift-off: the foot must clear the hysteresis band
        let pressed = self.switch.update(contact, foot_z);
        let (obs, current_meas) = match self.config.sim.sensor_mode {
            SensorMode::Ideal => (
                Observation::Ideal {
                    state: self.state.x,
                    contact: pressed,
                },
                current,
            ),
            SensorMode::Quantized => {
                let drives = self.config.robot.drives();
                let meas = [
                    current[0] + self.noise.sample(&mut self.rng),
                    current[1] + self.noise.sample(&mut self.rng),
                ];
                let frame = SensorFrame {
                    encoder_counts: [
                        encode(self.state.x.q[2], drives[0].gear_ratio),
                        encode(self.state.x.q[3], drives[1].gear_ratio),
                    ],
                    contact_switch: pressed,
                    motor_current: meas,
                };
                (Observation::Quantized(frame), meas)
            }
        };

        let (out, ctrl) = controller_step(&self.state.controller, &self.config.robot, &gait, &obs);
        self.state.controller = ctrl;
        self.state.voltage = out.voltage;
        if let Some(ev) = out.event {
            self.pending.push(match ev {
                PhaseEvent::Touchdown => EventKind::CtrlTouchdown,
                PhaseEvent::Liftoff => EventKind::CtrlLiftoff,
                PhaseEvent::Timeout => EventKind::CtrlTimeout,
            });
        }

        let now = evaluate(
            &self.config.robot,
            &self.state.mode,
            &self.state.x,
            &out.voltage,
        )?;
        let row = self.row(t, &now, out.torque_request, out.saturated, current_meas);

        let substeps = self.config.sim.substeps(period);
        let h = period / substeps as f64;
        for j in 0..substeps {
            self.advance(t + j as f64 * h, h)?;
        }
        self.tick += 1;
        self.state.t = self.tick as f64 * period;
        self.state.laps = (self.state.x.q[0] / std::f64::consts::TAU).floor() as i64;
        Ok(row)
    }

    fn row(
        &mut self,
        t: f64,
        eval: &Evaluation,
        torque_cmd: [f64; 2],
        saturated: [bool; 2],
        current_meas: [f64; 2],
    ) -> LogRow {
        let x = &self.state.x;
        LogRow {
            t,
            q: x.q.into(),
            qdot: x.qdot.into(),
            torque: [eval.motors[0].drive_torque, eval.motors[1].drive_torque],
            torque_cmd,
            voltage: [eval.motors[0].voltage, eval.motors[1].voltage],
            current: [eval.motors[0].current, eval.motors[1].current],
            current_meas,
            grf: eval.grf.f.into(),
            phase: self.state.phase(),
            ctrl_phase: self.state.controller.phase,
            events: std::mem::take(&mut self.pending),
            saturated,
            energy: self.state.energy,
        }
    }

    fn record(&mut self, t: f64, kind: EventKind) {
        self.pending.push(kind);
        self.events.push(EventRecord {
            t,
            kind,
            state: self.state.x,
            energy: self.state.energy,
        });
    }

    fn check(&self, t: f64, x: &JointState) -> Result<()> {
        if !x.is_finite() {
            return Err(blowup(t, "non-finite state"));
        }
        let limit = self.config.sim.max_joint_speed;
        if let Some(i) = x.qdot.iter().position(|w| w.abs() > limit) {
            return Err(blowup(
                t,
                format!("joint {} speed {} rad/s exceeds {limit}", i + 1, x.qdot[i]),
            ));
        }
        Ok(())
    }

    /// Integrate `[t0, t0 + h]`, splitting the step at any contact event.
    fn advance(&mut self, t0: f64, h: f64) -> Result<()> {
        let tol = self.config.sim.event_tolerance;
        let mut t = t0;
        let mut remaining = h;
        let mut instant_events = 0;
        while remaining > 0.5 * tol {
            let params = self.config.robot.clone();
            let mode = self.state.mode;
            let x0 = self.state.x;
            let v = self.state.voltage;
            let full = rk4_step(&params, &mode, &x0, &v, remaining).map_err(|e| at_time(e, t))?;
            self.check(t + remaining, &full.state)?;
            let partial = |tau: f64| rk4_step(&params, &mode, &x0, &v, tau);

            let split = match mode {
                ContactMode::Aerial => {
                    let z0 = foot_position(&params, &x0.q).z;
                    let z1 = foot_position(&params, &full.state.q).z;
                    match detect_touchdown(z0, z1, remaining, tol, |tau| {
                        Ok(foot_position(&params, &partial(tau)?.state.q).z)
                    })? {
                        Some(tau) => Some(tau),
                        // already at or below the ground and still sinking
                        None if z0 <= 0.0 && z1 < 0.0 => Some(0.0),
                        None => None,
                    }
                }
                ContactMode::Stance { .. } => {
                    let f1 = evaluate(&params, &mode, &full.state, &v)?.grf.normal();
                    if detect_liftoff(f1) {
                        let f0 = evaluate(&params, &mode, &x0, &v)?.grf.normal();
                        if detect_liftoff(f0) {
                            Some(0.0)
                        } else {
                            Some(refine_crossing(
                                |tau| {
                                    Ok(evaluate(&params, &mode, &partial(tau)?.state, &v)?
                                        .grf
                                        .normal())
                                },
                                0.0,
                                remaining,
                                tol,
                            )?)
                        }
                    } else {
                        None
                    }
                }
            };

            let Some(tau) = split else {
                self.state.x = full.state;
                self.state.energy += full.energy;
                return Ok(());
            };
            if tau == 0.0 {
                instant_events += 1;
                if instant_events > 2 {
                    // chattering at the boundary: finish the step in the current mode
                    self.state.x = full.state;
                    self.state.energy += full.energy;
                    return Ok(());
                }
            } else {
                let part = partial(tau)?;
                self.state.x = part.state;
                self.state.energy += part.energy;
            }
            t += tau;
            remaining -= tau;
            match mode {
                ContactMode::Aerial => self.touchdown(t)?,
                ContactMode::Stance { anchor, model } => self.release(t, anchor, model)?,
            }
        }
        Ok(())
    }

    /// The contact force has reached zero. With tangential rows active the
    /// vertical force can turn negative while the freed foot would still
    /// accelerate into the ground; the foot then slides on a vertical-only
    /// contact with Coulomb friction.
    fn release(&mut self, t: f64, anchor: Vector3<f64>, model: ContactModel) -> Result<()> {
        if model != ContactModel::Sliding {
            let sliding = ContactMode::Stance {
                anchor,
                model: ContactModel::Sliding,
            };
            let f = evaluate(
                &self.config.robot,
                &sliding,
                &self.state.x,
                &self.state.voltage,
            )
            .map_err(|e| at_time(e, t))?;
            if !detect_liftoff(f.grf.normal()) {
                self.state.mode = sliding;
                self.record(t, EventKind::Slip);
                return Ok(());
            }
        }
        self.state.mode = ContactMode::Aerial;
        self.record(t, EventKind::Liftoff);
        Ok(())
    }

    fn touchdown(&mut self, t: f64) -> Result<()> {
        let params = &self.config.robot;
        let x = self.state.x;
        let qdot = impact_map(params, &x.q, &x.qdot).map_err(|e| at_time(e, t))?;
        let mut anchor = foot_position(params, &x.q);
        anchor.z = 0.0;
        self.state.x = JointState::new(x.q, qdot);
        self.state.mode = ContactMode::Stance {
            anchor,
            model: params.contact_model,
        };
        self.record(t, EventKind::Touchdown);
        Ok(())
    }
}

fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::SingularMass | Error::SingularConstraint => blowup(t, e.to_string()),
        other => other,
    }
}

/// Run a full episode and collect the log.
pub fn run_episode(config: &RunConfig) -> Result<EpisodeLog> {
    let mut sim = Simulator::new(config.clone())?;
    let ticks = (config.sim.duration / config.gait.control_period).round() as u64;
    let mut rows = Vec::with_capacity(ticks as usize);
    for _ in 0..ticks {
        rows.push(sim.step()?);
    }
    Ok(EpisodeLog {
        config: sim.config,
        rows,
        events: sim.events,
    })
}
