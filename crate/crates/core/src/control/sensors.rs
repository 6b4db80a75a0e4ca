//! Hardware-like sensing: motor-shaft encoders, foot contact switch and
//! current sense.

use std::f64::consts::TAU;

/// Motor-shaft encoder resolution, counts per revolution.
pub const ENCODER_CPR: f64 = 28.0;

/// One controller tick worth of raw sensor data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    /// Hip and knee motor-shaft counts.
    pub encoder_counts: [i64; 2],
    pub contact_switch: bool,
    /// Measured motor current, noisy, A.
    pub motor_current: [f64; 2],
}

/// Joint angle step of one count for a drive with total reduction `ratio`.
pub fn quantization_step(ratio: f64) -> f64 {
    TAU / (ENCODER_CPR * ratio)
}

pub fn encode(joint_angle: f64, ratio: f64) -> i64 {
    (joint_angle / quantization_step(ratio)).floor() as i64
}

pub fn decode(counts: i64, ratio: f64) -> f64 {
    counts as f64 * quantization_step(ratio)
}

/// Spring-return foot switch. Pressed while the foot is loaded; released
/// only once the foot has risen above the hysteresis band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactSwitch {
    pub hysteresis: f64,
    pressed: bool,
}

impl ContactSwitch {
    pub fn new(hysteresis: f64) -> Self {
        Self {
            hysteresis,
            pressed: false,
        }
    }

    pub fn update(&mut self, in_contact: bool, foot_height: f64) -> bool {
        if in_contact {
            self.pressed = true;
        } else if foot_height > self.hysteresis {
            self.pressed = false;
        }
        self.pressed
    }

    pub fn pressed(&self) -> bool {
        self.pressed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_step_matches_resolution() {
        let ratio = 19.2 * 2.0;
        let step = quantization_step(ratio);
        assert!((step - TAU / (28.0 * 38.4)).abs() < 1e-15);
        for k in -500..500 {
            let angle = k as f64 * 0.0123;
            let err = angle - decode(encode(angle, ratio), ratio);
            assert!((0.0..step).contains(&err), "{angle}: {err}");
        }
    }

    #[test]
    fn switch_releases_only_above_hysteresis() {
        let mut s = ContactSwitch::new(1e-3);
        assert!(!s.update(false, 0.01));
        assert!(s.update(true, 0.0));
        assert!(s.update(false, 5e-4));
        assert!(!s.update(false, 1.5e-3));
    }
}
