//! Physical description of the gantry hopper.
//!
//! All quantities are SI. The chain is fixed: a yaw post (link 1), the
//! pitching gantry arm with hip base and counterweight (link 2), the upper
//! leg (link 3) and the lower leg (link 4). Joints 1 and 2 are passive,
//! joints 3 (hip) and 4 (knee) are driven by geared DC motors.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::validate::{Check, Report};

/// Adjustable lower-leg length range of the kit.
pub const LINK4_LENGTH_RANGE: (f64, f64) = (0.060, 0.260);
/// Adjustable gantry arm length range of the kit.
pub const GANTRY_ARM_RANGE: (f64, f64) = (0.1, 1.1);
/// Catalog range of available gearmotor reductions.
pub const GEAR_RATIO_RANGE: (f64, f64) = (3.7, 188.0);

/// Mass properties of one rigid link, expressed in the link frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkInertia {
    pub mass: f64,
    /// Center of mass in the link frame.
    pub com: [f64; 3],
    /// Inertia tensor about the center of mass, link-frame axes.
    pub inertia: [[f64; 3]; 3],
}

impl LinkInertia {
    pub fn com_vector(&self) -> Vector3<f64> {
        Vector3::from(self.com)
    }

    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        let i = &self.inertia;
        Matrix3::new(
            i[0][0], i[0][1], i[0][2], i[1][0], i[1][1], i[1][2], i[2][0], i[2][1], i[2][2],
        )
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.mass *= factor;
        for row in out.inertia.iter_mut() {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpringEngagement {
    Always,
    /// Only pushes back when the knee is flexed beyond the rest angle.
    Unilateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringParams {
    /// N·m/rad
    pub stiffness: f64,
    /// rad
    pub rest_angle: f64,
    pub engagement: SpringEngagement,
}

/// Brushed DC gearmotor with its driver limits.
///
/// `gear_ratio` is the gearbox reduction. Joint-side friction terms act on
/// the driven joint after the full transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    /// N·m/A (equal to the back-EMF constant in V·s/rad)
    pub torque_constant: f64,
    /// Ω
    pub terminal_resistance: f64,
    pub gear_ratio: f64,
    /// (0, 1]
    pub gear_efficiency: f64,
    /// N·m·s/rad, joint side
    pub viscous_friction: f64,
    /// N·m, joint side
    pub coulomb_friction: f64,
    /// V
    pub v_max: f64,
    /// A
    pub i_max: f64,
    /// kg·m², rotor side
    pub rotor_inertia: f64,
}

impl MotorParams {
    /// Copy of these parameters with an extra transmission stage folded into
    /// the reduction, e.g. the knee belt.
    pub fn with_transmission(&self, ratio: f64) -> Self {
        Self {
            gear_ratio: self.gear_ratio * ratio,
            ..*self
        }
    }

    pub fn reflected_inertia(&self) -> f64 {
        self.gear_ratio * self.gear_ratio * self.rotor_inertia
    }
}

/// How the stance foot is held on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContactModel {
    /// Tangential and vertical foot motion blocked, radial sliding allowed.
    #[default]
    Planar,
    /// Foot pinned in all three world axes.
    Pinned,
    /// Only vertical motion blocked; the foot slides against Coulomb
    /// friction of coefficient `ground_friction`.
    Sliding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotParams {
    pub gantry_arm_length: f64,
    pub gantry_pivot_height: f64,
    pub link3_length: f64,
    /// Lower leg, knee to foot.
    pub link4_length: f64,
    pub link1: LinkInertia,
    pub link2: LinkInertia,
    pub link3: LinkInertia,
    pub link4: LinkInertia,
    pub counterweight_mass: f64,
    /// Distance from the pitch pivot, on the side opposite the hip.
    pub counterweight_arm: f64,
    pub knee_spring: SpringParams,
    pub hip_motor: MotorParams,
    pub knee_motor: MotorParams,
    /// Knee belt reduction between the knee gearbox output and the joint.
    pub belt_ratio: f64,
    /// m/s²
    pub gravity: f64,
    pub gravity_enabled: bool,
    pub friction_enabled: bool,
    /// Velocity scale of the tanh-smoothed Coulomb friction, rad/s.
    pub coulomb_smoothing: f64,
    pub contact_model: ContactModel,
    /// Coulomb coefficient between a sliding foot and the ground.
    pub ground_friction: f64,
    /// Slip speed scale of the smoothed sliding friction, m/s.
    pub slip_smoothing: f64,
    pub baumgarte_alpha: f64,
    pub baumgarte_beta: f64,
}

impl Default for RobotParams {
    /// Nominal desk-scale parameter set. These are placeholders chosen to be
    /// physically plausible for a goBILDA-class build, not measured values.
    fn default() -> Self {
        let motor = MotorParams {
            torque_constant: 0.017,
            terminal_resistance: 1.3,
            gear_ratio: 26.9,
            gear_efficiency: 0.9,
            viscous_friction: 0.005,
            coulomb_friction: 0.02,
            v_max: 12.0,
            i_max: 30.0,
            rotor_inertia: 3.0e-6,
        };
        Self {
            gantry_arm_length: 0.6,
            gantry_pivot_height: 0.28,
            link3_length: 0.15,
            link4_length: 0.16,
            link1: LinkInertia {
                mass: 0.4,
                com: [0.0, 0.0, -0.12],
                inertia: diag(2.0e-3, 2.0e-3, 1.0e-4),
            },
            link2: LinkInertia {
                mass: 1.1,
                com: [0.0, 0.52, 0.0],
                inertia: diag(1.2e-2, 1.0e-3, 1.2e-2),
            },
            link3: LinkInertia {
                mass: 0.15,
                com: [0.0, 0.0, -0.05],
                inertia: diag(3.0e-4, 3.0e-4, 2.0e-5),
            },
            link4: LinkInertia {
                mass: 0.08,
                com: [0.0, 0.0, -0.08],
                inertia: diag(1.8e-4, 1.8e-4, 1.0e-5),
            },
            counterweight_mass: 1.0,
            counterweight_arm: 0.18,
            knee_spring: SpringParams {
                stiffness: 3.0,
                rest_angle: -1.1,
                engagement: SpringEngagement::Always,
            },
            hip_motor: motor,
            knee_motor: MotorParams {
                gear_ratio: 19.2,
                ..motor
            },
            belt_ratio: 2.0,
            gravity: 9.81,
            gravity_enabled: true,
            friction_enabled: true,
            coulomb_smoothing: 0.01,
            contact_model: ContactModel::Planar,
            ground_friction: 0.0,
            slip_smoothing: 0.05,
            baumgarte_alpha: 50.0,
            baumgarte_beta: 50.0,
        }
    }
}

fn diag(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

impl RobotParams {
    pub fn links(&self) -> [&LinkInertia; 4] {
        [&self.link1, &self.link2, &self.link3, &self.link4]
    }

    /// Effective gravitational acceleration after the on/off switch.
    pub fn g(&self) -> f64 {
        if self.gravity_enabled {
            self.gravity
        } else {
            0.0
        }
    }

    /// Hip drive as seen from the joint.
    pub fn hip_drive(&self) -> MotorParams {
        self.hip_motor
    }

    /// Knee drive as seen from the joint, belt folded into the reduction.
    pub fn knee_drive(&self) -> MotorParams {
        self.knee_motor.with_transmission(self.belt_ratio)
    }

    pub fn drives(&self) -> [MotorParams; 2] {
        [self.hip_drive(), self.knee_drive()]
    }

    /// Mass that is carried by the hopping motion: arm with hip base and the
    /// two leg links. Used to normalize cost of transport.
    pub fn hopping_mass(&self) -> f64 {
        self.link2.mass + self.link3.mass + self.link4.mass
    }

    /// Scale mass and inertia of the two leg links together with the rotor
    /// inertia reflected onto the hip and knee.
    pub fn with_leg_mass_scale(&self, factor: f64) -> Self {
        let mut p = self.clone();
        p.link3 = p.link3.scaled(factor);
        p.link4 = p.link4.scaled(factor);
        p.hip_motor.rotor_inertia *= factor;
        p.knee_motor.rotor_inertia *= factor;
        p
    }

    /// Run every invariant check. Warnings do not make the report fail.
    pub fn report(&self) -> Report {
        let mut r = Report::default();
        let lengths = [
            ("gantry_arm_length", self.gantry_arm_length),
            ("gantry_pivot_height", self.gantry_pivot_height),
            ("link3_length", self.link3_length),
            ("link4_length", self.link4_length),
            ("counterweight_arm", self.counterweight_arm),
        ];
        for (name, v) in lengths {
            r.push(Check::require(
                format!("{name} > 0"),
                v.is_finite() && v > 0.0,
                format!("{name} = {v}"),
            ));
        }
        r.push(Check::require(
            "link4_length within [0.060, 0.260] m",
            in_range(self.link4_length, LINK4_LENGTH_RANGE),
            format!("link4_length = {}", self.link4_length),
        ));
        r.push(Check::require(
            "gantry_arm_length within [0.1, 1.1] m",
            in_range(self.gantry_arm_length, GANTRY_ARM_RANGE),
            format!("gantry_arm_length = {}", self.gantry_arm_length),
        ));

        for (i, link) in self.links().iter().enumerate() {
            let name = format!("link{}", i + 1);
            r.push(Check::require(
                format!("{name}.mass > 0"),
                link.mass.is_finite() && link.mass > 0.0,
                format!("{name}.mass = {}", link.mass),
            ));
            let inertia = link.inertia_matrix();
            let asym = (inertia - inertia.transpose()).abs().max();
            let pd = asym <= 1e-12 * inertia.abs().max().max(1.0)
                && inertia.symmetric_eigenvalues().min() > 0.0;
            r.push(Check::require(
                format!("{name}.inertia symmetric positive definite"),
                pd,
                format!(
                    "eigenvalues {:?}",
                    inertia.symmetric_eigenvalues().as_slice()
                ),
            ));
        }
        r.push(Check::require(
            "counterweight_mass > 0",
            self.counterweight_mass.is_finite() && self.counterweight_mass > 0.0,
            format!("counterweight_mass = {}", self.counterweight_mass),
        ));
        r.push(Check::require(
            "knee_spring.stiffness >= 0",
            self.knee_spring.stiffness.is_finite() && self.knee_spring.stiffness >= 0.0,
            format!("stiffness = {}", self.knee_spring.stiffness),
        ));
        for (name, m) in [
            ("hip_motor", &self.hip_motor),
            ("knee_motor", &self.knee_motor),
        ] {
            motor_checks(&mut r, name, m);
        }
        r.push(Check::require(
            "belt_ratio > 0",
            self.belt_ratio.is_finite() && self.belt_ratio > 0.0,
            format!("belt_ratio = {}", self.belt_ratio),
        ));
        r.push(Check::require(
            "gravity >= 0",
            self.gravity.is_finite() && self.gravity >= 0.0,
            format!("gravity = {}", self.gravity),
        ));
        r.push(Check::require(
            "coulomb_smoothing > 0",
            self.coulomb_smoothing.is_finite() && self.coulomb_smoothing > 0.0,
            format!("coulomb_smoothing = {}", self.coulomb_smoothing),
        ));
        r.push(Check::require(
            "ground_friction >= 0",
            self.ground_friction.is_finite() && self.ground_friction >= 0.0,
            format!("ground_friction = {}", self.ground_friction),
        ));
        r.push(Check::require(
            "slip_smoothing > 0",
            self.slip_smoothing.is_finite() && self.slip_smoothing > 0.0,
            format!("slip_smoothing = {}", self.slip_smoothing),
        ));
        r.push(Check::require(
            "baumgarte gains >= 0",
            self.baumgarte_alpha >= 0.0 && self.baumgarte_beta >= 0.0,
            format!(
                "alpha = {}, beta = {}",
                self.baumgarte_alpha, self.baumgarte_beta
            ),
        ));
        r
    }

    pub fn validate(&self) -> Result<()> {
        self.report().into_result()
    }
}

fn motor_checks(r: &mut Report, name: &str, m: &MotorParams) {
    let positive = [
        ("torque_constant", m.torque_constant),
        ("terminal_resistance", m.terminal_resistance),
        ("gear_ratio", m.gear_ratio),
        ("v_max", m.v_max),
        ("i_max", m.i_max),
        ("rotor_inertia", m.rotor_inertia),
    ];
    for (field, v) in positive {
        r.push(Check::require(
            format!("{name}.{field} > 0"),
            v.is_finite() && v > 0.0,
            format!("{name}.{field} = {v}"),
        ));
    }
    for (field, v) in [
        ("viscous_friction", m.viscous_friction),
        ("coulomb_friction", m.coulomb_friction),
    ] {
        r.push(Check::require(
            format!("{name}.{field} >= 0"),
            v.is_finite() && v >= 0.0,
            format!("{name}.{field} = {v}"),
        ));
    }
    r.push(Check::require(
        format!("{name}.gear_efficiency in (0, 1]"),
        m.gear_efficiency > 0.0 && m.gear_efficiency <= 1.0,
        format!("{name}.gear_efficiency = {}", m.gear_efficiency),
    ));
    r.push(Check::advise(
        format!("{name}.gear_ratio within catalog range [3.7, 188]"),
        in_range(m.gear_ratio, GEAR_RATIO_RANGE),
        format!("{name}.gear_ratio = {}", m.gear_ratio),
    ));
}

fn in_range(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn nominal_params_pass_every_check() {
        let report = RobotParams::default().report();
        assert!(report.passed(), "{report}");
        assert_eq!(report.warnings().count(), 0);
    }

    #[test]
    fn gear_ratio_outside_catalog_is_only_a_warning() {
        let mut p = RobotParams::default();
        p.hip_motor.gear_ratio = 500.0;
        let report = p.report();
        assert!(report.passed());
        let warn: Vec<_> = report.warnings().collect();
        assert_eq!(warn.len(), 1);
        assert!(warn[0].rule.contains("[3.7, 188]"));
    }

    #[test]
    fn negative_mass_is_an_error() {
        let mut p = RobotParams::default();
        p.link3.mass = -0.1;
        assert!(matches!(p.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn knee_drive_folds_in_the_belt() {
        let p = RobotParams::default();
        assert_eq!(p.knee_drive().gear_ratio, 19.2 * 2.0);
        assert_eq!(p.hip_drive().gear_ratio, 26.9);
    }

    #[test]
    fn leg_out_of_adjustable_range_fails() {
        let p = RobotParams {
            link4_length: 0.3,
            ..RobotParams::default()
        };
        assert!(!p.report().passed());
    }
}
