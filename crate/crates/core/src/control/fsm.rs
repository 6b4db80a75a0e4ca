//! Two-state (aerial / stance) machine driven by the contact switch.

use serde::{Deserialize, Serialize};

use super::filter::DerivativeFilter;
use super::GaitParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Aerial,
    Stance,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Aerial => "aerial",
            Phase::Stance => "stance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEvent {
    /// Switch rising edge.
    Touchdown,
    /// Switch falling edge.
    Liftoff,
    /// Stance held past the timeout.
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub phase: Phase,
    /// Time spent in the current stance, s.
    pub stance_clock: f64,
    pub stance_timeout: f64,
    pub period: f64,
    /// Switch reading from the previous tick, for edge detection.
    pub last_contact: bool,
    pub filters: [DerivativeFilter; 2],
    pub last_angles: Option<[f64; 2]>,
    pub filtered_qdot: [f64; 2],
    pub last_voltage_cmd: [f64; 2],
    /// Forward speed estimated from the leg during stance, m/s.
    pub speed_estimate: f64,
    /// Horizontal peak used for the current stance, N.
    pub horizontal_peak: f64,
}

impl ControllerState {
    pub fn new(gait: &GaitParams) -> Self {
        let filter = DerivativeFilter::new(gait.filter_lambda, gait.control_period);
        Self {
            phase: Phase::Aerial,
            stance_clock: 0.0,
            stance_timeout: gait.stance_timeout(),
            period: gait.control_period,
            last_contact: false,
            filters: [filter; 2],
            last_angles: None,
            filtered_qdot: [0.0; 2],
            last_voltage_cmd: [0.0; 2],
            speed_estimate: 0.0,
            horizontal_peak: gait.peak_horizontal_force,
        }
    }
}

/// Advance the phase machine by one controller period.
///
/// Aerial → Stance on a rising switch edge, Stance → Aerial on a falling
/// edge or once the stance clock reaches the timeout. After a timeout the
/// machine waits for the next rising edge.
pub fn fsm_step(
    ctrl: &ControllerState,
    contact: bool,
    dt: f64,
) -> (ControllerState, Option<PhaseEvent>) {
    let mut next = *ctrl;
    let rising = contact && !ctrl.last_contact;
    let falling = !contact && ctrl.last_contact;
    next.last_contact = contact;
    let event = match ctrl.phase {
        Phase::Aerial if rising => {
            next.phase = Phase::Stance;
            next.stance_clock = 0.0;
            Some(PhaseEvent::Touchdown)
        }
        Phase::Aerial => None,
        Phase::Stance if falling => {
            next.phase = Phase::Aerial;
            Some(PhaseEvent::Liftoff)
        }
        Phase::Stance => {
            next.stance_clock = (ctrl.stance_clock + dt).min(ctrl.stance_timeout);
            if next.stance_clock >= ctrl.stance_timeout {
                next.phase = Phase::Aerial;
                Some(PhaseEvent::Timeout)
            } else {
                None
            }
        }
    };
    (next, event)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl() -> ControllerState {
        ControllerState::new(&GaitParams::default())
    }

    #[test]
    fn rising_edge_enters_stance_with_fresh_clock() {
        let mut c = ctrl();
        c.stance_clock = 0.3;
        let (n, ev) = fsm_step(&c, true, 1e-3);
        assert_eq!(n.phase, Phase::Stance);
        assert_eq!(n.stance_clock, 0.0);
        assert_eq!(ev, Some(PhaseEvent::Touchdown));
    }

    #[test]
    fn falling_edge_leaves_stance() {
        let (c, _) = fsm_step(&ctrl(), true, 1e-3);
        let (n, ev) = fsm_step(&c, false, 1e-3);
        assert_eq!(n.phase, Phase::Aerial);
        assert_eq!(ev, Some(PhaseEvent::Liftoff));
    }

    #[test]
    fn contact_past_projected_duration_stays_in_stance_until_timeout() {
        let g = GaitParams::default();
        let (mut c, _) = fsm_step(&ctrl(), true, g.control_period);
        let mut timeout_at = None;
        for k in 1..=400 {
            let (n, ev) = fsm_step(&c, true, g.control_period);
            c = n;
            if k as f64 * g.control_period <= g.stance_duration + 0.01 {
                assert_eq!(c.phase, Phase::Stance);
            }
            if ev == Some(PhaseEvent::Timeout) {
                timeout_at = Some(k);
                break;
            }
        }
        let k = timeout_at.expect("timeout must fire");
        assert!((k as f64 * g.control_period - g.stance_timeout()).abs() < 1.5e-3);
        // no re-entry while the switch stays pressed
        let (n, ev) = fsm_step(&c, true, g.control_period);
        assert_eq!(n.phase, Phase::Aerial);
        assert_eq!(ev, None);
    }

    #[test]
    fn aerial_without_contact_is_idle() {
        let (n, ev) = fsm_step(&ctrl(), false, 1e-3);
        assert_eq!(n.phase, Phase::Aerial);
        assert_eq!(ev, None);
    }
}
