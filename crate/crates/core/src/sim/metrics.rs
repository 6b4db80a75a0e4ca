//! Hop-cycle segmentation and episode metrics.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::log::{EpisodeLog, EventKind, LogRow};
use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::model::kinematics::{hip_position, JointVector};

/// Shortest stance that counts as a hop, s.
pub const MIN_STANCE: f64 = 1e-3;
/// Shortest flight that counts as a hop, s.
pub const MIN_FLIGHT: f64 = 1e-2;

/// One touchdown-to-touchdown cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopCycle {
    pub touchdown: f64,
    pub liftoff: f64,
    pub next_touchdown: f64,
    /// θ1 at the two touchdowns, rad.
    pub yaw: [f64; 2],
    /// Electrical energy at the two touchdowns, J.
    pub energy: [f64; 2],
}

impl HopCycle {
    pub fn stance(&self) -> f64 {
        self.liftoff - self.touchdown
    }

    pub fn flight(&self) -> f64 {
        self.next_touchdown - self.liftoff
    }

    pub fn duration(&self) -> f64 {
        self.next_touchdown - self.touchdown
    }

    pub fn is_hop(&self) -> bool {
        self.stance() >= MIN_STANCE && self.flight() >= MIN_FLIGHT
    }
}

/// Touchdown-to-touchdown cycles. Contacts separated by less than
/// [`MIN_FLIGHT`] of flight are merged into one stance, so a foot that
/// skims the ground for a few milliseconds after lift-off does not split
/// a hop.
pub fn hop_cycles(log: &EpisodeLog) -> Vec<HopCycle> {
    struct Contact {
        start: usize,
        end: Option<usize>,
    }
    let events = &log.events;
    let mut contacts: Vec<Contact> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            EventKind::Touchdown => {
                let merge = contacts
                    .last()
                    .is_some_and(|c| c.end.is_some_and(|lo| e.t - events[lo].t < MIN_FLIGHT));
                match contacts.last_mut() {
                    Some(c) if merge => c.end = None,
                    _ => contacts.push(Contact {
                        start: i,
                        end: None,
                    }),
                }
            }
            EventKind::Liftoff => {
                if let Some(c) = contacts.last_mut() {
                    c.end = Some(i);
                }
            }
            _ => {}
        }
    }
    contacts
        .windows(2)
        .filter_map(|w| {
            let lo = w[0].end?;
            let (a, b) = (&events[w[0].start], &events[w[1].start]);
            Some(HopCycle {
                touchdown: a.t,
                liftoff: events[lo].t,
                next_touchdown: b.t,
                yaw: [a.state.q[0], b.state.q[0]],
                energy: [a.energy, b.energy],
            })
        })
        .collect()
}

/// Longest run of back-to-back valid hops.
pub fn max_consecutive_hops(cycles: &[HopCycle]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for c in cycles {
        if c.is_hop() {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsStatus {
    Ok,
    InsufficientData,
}

/// One decimated operating point per drive: (joint speed, applied torque).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorqueSpeedSample {
    pub t: f64,
    pub hip_speed: f64,
    pub hip_torque: f64,
    pub knee_speed: f64,
    pub knee_torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub status: MetricsStatus,
    pub cycles: usize,
    pub hops: usize,
    pub max_consecutive_hops: usize,
    /// Cycles actually averaged.
    pub window: usize,
    /// Mean tangential hip speed over the window, θ̇1·L, m/s.
    pub speed: f64,
    /// Distance travelled by the hip over the window, m.
    pub distance: f64,
    /// Electrical energy over the window, J.
    pub energy: f64,
    /// Cost of transport over the window; infinite when nothing moved.
    pub cost_of_transport: f64,
    /// Mean of the per-cycle peak hip height, m.
    pub apex_height: f64,
    pub mean_stance: f64,
    pub mean_flight: f64,
    /// Durations of completed laps around the gantry, s.
    pub lap_times: Vec<f64>,
    pub saturated_samples: usize,
    pub total_energy: f64,
    pub torque_speed: Vec<TorqueSpeedSample>,
}

fn lap_times(rows: &[LogRow]) -> Vec<f64> {
    // times at which θ1 first reaches each new multiple of 2π
    let mut crossings = Vec::new();
    let Some(first) = rows.first() else {
        return crossings;
    };
    let mut best = (first.q[0] / TAU).floor();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let k = (b.q[0] / TAU).floor();
        if k > best {
            let target = k * TAU;
            let frac = (target - a.q[0]) / (b.q[0] - a.q[0]);
            crossings.push(a.t + frac.clamp(0.0, 1.0) * (b.t - a.t));
            best = k;
        }
    }
    crossings.windows(2).map(|w| w[1] - w[0]).collect()
}

fn torque_speed(rows: &[LogRow], stride: usize) -> Vec<TorqueSpeedSample> {
    rows.iter()
        .step_by(stride.max(1))
        .map(|r| TorqueSpeedSample {
            t: r.t,
            hip_speed: r.qdot[2],
            hip_torque: r.torque[0],
            knee_speed: r.qdot[3],
            knee_torque: r.torque[1],
        })
        .collect()
}

/// Metrics over the last `metrics_window` cycles. Errors with
/// `InsufficientData` when fewer than two cycles exist.
pub fn compute_metrics(log: &EpisodeLog) -> Result<Metrics> {
    let m = summarize(log);
    match m.status {
        MetricsStatus::Ok => Ok(m),
        MetricsStatus::InsufficientData => Err(Error::InsufficientData(format!(
            "{} complete hop cycle(s), need at least 2",
            m.cycles
        ))),
    }
}

/// Like [`compute_metrics`] but always returns a value; with too few cycles
/// the status says so, speed is 0 and cost of transport is infinite.
pub fn summarize(log: &EpisodeLog) -> Metrics {
    let params = &log.config.robot;
    let cycles = hop_cycles(log);
    let hops = cycles.iter().filter(|c| c.is_hop()).count();
    let saturated_samples = log.rows.iter().filter(|r| r.any_saturated()).count();
    let total_energy = log.rows.last().map_or(0.0, |r| r.energy);
    let mut m = Metrics {
        status: MetricsStatus::InsufficientData,
        cycles: cycles.len(),
        hops,
        max_consecutive_hops: max_consecutive_hops(&cycles),
        window: 0,
        speed: 0.0,
        distance: 0.0,
        energy: 0.0,
        cost_of_transport: f64::INFINITY,
        apex_height: 0.0,
        mean_stance: 0.0,
        mean_flight: 0.0,
        lap_times: lap_times(&log.rows),
        saturated_samples,
        total_energy,
        torque_speed: torque_speed(&log.rows, log.config.sim.torque_speed_stride),
    };
    if cycles.len() < 2 {
        return m;
    }

    let n = log.config.sim.metrics_window.min(cycles.len());
    let window = &cycles[cycles.len() - n..];
    let (first, last) = (window[0], window[n - 1]);
    let elapsed = last.next_touchdown - first.touchdown;
    let travel = (last.yaw[1] - first.yaw[0]) * params.gantry_arm_length;
    m.status = MetricsStatus::Ok;
    m.window = n;
    m.speed = travel / elapsed;
    m.distance = travel.abs();
    m.energy = last.energy[1] - first.energy[0];
    m.cost_of_transport = if m.distance > 0.0 {
        m.energy / (params.hopping_mass() * params.g() * m.distance)
    } else {
        f64::INFINITY
    };
    m.mean_stance = window.iter().map(HopCycle::stance).sum::<f64>() / n as f64;
    m.mean_flight = window.iter().map(HopCycle::flight).sum::<f64>() / n as f64;
    m.apex_height = window
        .iter()
        .map(|c| {
            log.rows
                .iter()
                .filter(|r| r.t >= c.touchdown && r.t < c.next_touchdown)
                .map(|r| hip_position(params, &JointVector::from(r.q)).z)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .filter(|h| h.is_finite())
        .sum::<f64>()
        / n as f64;
    m
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    schema_version: u32,
    metrics: MetricsBody<'a>,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct MetricsBody<'a> {
    status: MetricsStatus,
    cycles: usize,
    hops: usize,
    max_consecutive_hops: usize,
    window: usize,
    speed: f64,
    distance: f64,
    energy: f64,
    cost_of_transport: f64,
    apex_height: f64,
    mean_stance: f64,
    mean_flight: f64,
    lap_times: &'a [f64],
    saturated_samples: usize,
    total_energy: f64,
    torque_speed: &'a [TorqueSpeedSample],
}

impl Metrics {
    /// TOML sidecar with the schema version and the resolved configuration.
    pub fn to_toml(&self, config: &RunConfig) -> Result<String> {
        let file = MetricsFile {
            schema_version: SCHEMA_VERSION,
            metrics: MetricsBody {
                status: self.status,
                cycles: self.cycles,
                hops: self.hops,
                max_consecutive_hops: self.max_consecutive_hops,
                window: self.window,
                speed: self.speed,
                distance: self.distance,
                energy: self.energy,
                cost_of_transport: self.cost_of_transport,
                apex_height: self.apex_height,
                mean_stance: self.mean_stance,
                mean_flight: self.mean_flight,
                lap_times: &self.lap_times,
                saturated_samples: self.saturated_samples,
                total_energy: self.total_energy,
                torque_speed: &self.torque_speed,
            },
            config,
        };
        let body = toml::to_string(&file).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(format!("# gantry-hopper episode metrics\n{body}"))
    }

    pub fn write_toml(&self, config: &RunConfig, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml(config)?).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Phase;
    use crate::model::kinematics::JointState;
    use crate::sim::log::EventRecord;

    fn row(t: f64, yaw: f64) -> LogRow {
        LogRow {
            t,
            q: [yaw, 0.0, 0.0, -1.0],
            qdot: [0.0; 4],
            torque: [0.0; 2],
            torque_cmd: [0.0; 2],
            voltage: [0.0; 2],
            current: [0.0; 2],
            current_meas: [0.0; 2],
            grf: [0.0; 3],
            phase: Phase::Aerial,
            ctrl_phase: Phase::Aerial,
            events: Vec::new(),
            saturated: [false; 2],
            energy: t,
        }
    }

    fn event(t: f64, kind: EventKind, yaw: f64) -> EventRecord {
        EventRecord {
            t,
            kind,
            state: JointState::at_rest(JointVector::new(yaw, 0.0, 0.0, -1.0)),
            energy: t,
        }
    }

    /// Constant yaw rate ω with a hop every 0.25 s.
    fn synthetic(omega: f64, hops: usize) -> EpisodeLog {
        let period = 0.25;
        let end = period * hops as f64 + 0.1;
        let rows = (0..)
            .map(|k| k as f64 * 1e-3)
            .take_while(|t| *t < end)
            .map(|t| row(t, omega * t))
            .collect();
        let mut events = Vec::new();
        for k in 0..=hops {
            let td = 0.05 + period * k as f64;
            events.push(event(td, EventKind::Touchdown, omega * td));
            events.push(event(td + 0.08, EventKind::Liftoff, omega * (td + 0.08)));
        }
        EpisodeLog {
            config: RunConfig::default(),
            rows,
            events,
        }
    }

    #[test]
    fn constant_yaw_rate_gives_omega_times_arm() {
        let log = synthetic(1.5, 12);
        let m = compute_metrics(&log).unwrap();
        let expect = 1.5 * log.config.robot.gantry_arm_length;
        assert!((m.speed - expect).abs() < 1e-12, "{} vs {expect}", m.speed);
        assert_eq!(m.cycles, 12);
        assert_eq!(m.max_consecutive_hops, 12);
        assert_eq!(m.window, 10);
        assert!((m.mean_stance - 0.08).abs() < 1e-12);
        assert!((m.mean_flight - 0.17).abs() < 1e-12);
        // energy column grows at 1 W
        let cot = 2.5 / (log.config.robot.hopping_mass() * 9.81 * m.distance);
        assert!((m.cost_of_transport - cot).abs() < 1e-9);
    }

    #[test]
    fn stationary_log_has_infinite_cost_of_transport() {
        let m = compute_metrics(&synthetic(0.0, 5)).unwrap();
        assert_eq!(m.speed, 0.0);
        assert!(m.cost_of_transport.is_infinite());
    }

    #[test]
    fn fewer_than_two_cycles_is_insufficient() {
        let log = synthetic(1.0, 1);
        assert!(matches!(
            compute_metrics(&log),
            Err(Error::InsufficientData(_))
        ));
        let m = summarize(&log);
        assert_eq!(m.status, MetricsStatus::InsufficientData);
        assert!(m.cost_of_transport.is_infinite());
    }

    #[test]
    fn laps_are_timed_at_each_full_turn() {
        // θ1 = t rad/s: laps of exactly 2π seconds
        let rows: Vec<LogRow> = (0..20_000)
            .map(|k| row(k as f64 * 1e-3, k as f64 * 1e-3))
            .collect();
        let laps = lap_times(&rows);
        assert_eq!(laps.len(), 2);
        assert!(laps.iter().all(|l| (l - TAU).abs() < 1e-9));
    }

    #[test]
    fn skimming_contacts_merge_into_one_stance() {
        let mut log = synthetic(0.0, 3);
        // a 2 ms touch 4 ms after the first lift-off
        log.events
            .insert(2, event(0.134, EventKind::Touchdown, 0.0));
        log.events.insert(3, event(0.136, EventKind::Liftoff, 0.0));
        let cycles = hop_cycles(&log);
        assert_eq!(cycles.len(), 3);
        assert!((cycles[0].stance() - 0.086).abs() < 1e-12);
        assert!(cycles.iter().all(HopCycle::is_hop));
    }

    #[test]
    fn short_contacts_are_not_hops() {
        let c = HopCycle {
            touchdown: 0.0,
            liftoff: 5e-4,
            next_touchdown: 0.3,
            yaw: [0.0; 2],
            energy: [0.0; 2],
        };
        assert!(!c.is_hop());
        assert_eq!(max_consecutive_hops(&[c, c]), 0);
    }
}
