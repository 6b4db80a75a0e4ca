//! TOML configuration files and `section.key=value` overrides.
//!
//! Robot and gait files are flat TOML documents (dotted keys allowed) with a
//! `schema_version` and a `kind` of either `"robot"` or `"gait"`. Every other
//! key maps one-to-one onto [`RobotParams`] or [`GaitParams`]; unknown keys
//! are rejected.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::control::GaitParams;
use crate::error::{Error, Result};
use crate::model::params::RobotParams;
use crate::sim::SimConfig;
use crate::validate::Report;

/// Version of every file format this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigKind {
    Robot,
    Gait,
}

impl ConfigKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigKind::Robot => "robot",
            ConfigKind::Gait => "gait",
        }
    }
}

/// Fully resolved inputs of one episode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub robot: RobotParams,
    pub gait: GaitParams,
    pub sim: SimConfig,
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn report(&self) -> Report {
        let mut r = self.robot.report();
        r.extend(self.gait.report());
        r.extend(self.sim.report(&self.gait));
        r
    }

    /// Errors on any failing rule; warnings are allowed.
    pub fn validate(&self) -> Result<()> {
        self.report().into_result()
    }

    /// Apply `section.key=value` overrides where section is `robot`, `gait`
    /// or `sim`. A key without a section is looked up in gait, sim and robot,
    /// in that order.
    pub fn with_overrides<S: AsRef<str>>(&self, sets: &[S]) -> Result<Self> {
        let mut tables = [
            ("robot", to_table(&self.robot)?),
            ("gait", to_table(&self.gait)?),
            ("sim", to_table(&self.sim)?),
        ];
        for set in sets {
            let set = set.as_ref();
            let (key, raw) = set.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("override `{set}` is not key=value"))
            })?;
            let (section, path) = resolve_key(&tables, key.trim())?;
            let table = &mut tables.iter_mut().find(|(s, _)| *s == section).unwrap().1;
            set_path(table, &path, parse_value(raw.trim()))
                .map_err(|m| Error::InvalidConfig(format!("override `{set}`: {m}")))?;
        }
        let [(_, robot), (_, gait), (_, sim)] = tables;
        Ok(Self {
            robot: from_table(robot, "robot")?,
            gait: from_table(gait, "gait")?,
            sim: from_table(sim, "sim")?,
        })
    }
}

fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    Table::try_from(value).map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn from_table<T: DeserializeOwned>(table: Table, what: &str) -> Result<T> {
    table
        .try_into()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("{what}: {}", e.message())))
}

fn resolve_key(
    tables: &[(&'static str, Table); 3],
    key: &str,
) -> Result<(&'static str, Vec<String>)> {
    let parts: Vec<String> = key.split('.').map(str::to_string).collect();
    if let Some((s, _)) = tables.iter().find(|(s, _)| *s == parts[0]) {
        if parts.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "override `{key}` names no field"
            )));
        }
        return Ok((s, parts[1..].to_vec()));
    }
    for section in ["gait", "sim", "robot"] {
        let (_, t) = tables.iter().find(|(s, _)| *s == section).unwrap();
        if t.contains_key(&parts[0]) {
            return Ok((section, parts));
        }
    }
    Err(Error::InvalidConfig(format!("unknown parameter `{key}`")))
}

fn set_path(table: &mut Table, path: &[String], value: Value) -> std::result::Result<(), String> {
    let (last, parents) = path.split_last().ok_or("empty key")?;
    let mut cur = table;
    for p in parents {
        cur = cur
            .get_mut(p)
            .and_then(Value::as_table_mut)
            .ok_or_else(|| format!("`{p}` is not a table"))?;
    }
    let slot = cur
        .get_mut(last)
        .ok_or_else(|| format!("unknown field `{last}`"))?;
    // integers given for float fields are widened
    *slot = match (&*slot, value) {
        (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
        (_, v) => v,
    };
    Ok(())
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Read a config file, check its header and return the remaining keys.
pub fn read_table(path: &Path, expected: Option<ConfigKind>) -> Result<(ConfigKind, Table)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| parse_err(e.message().to_string()))?;
    match table.remove("schema_version") {
        Some(Value::Integer(v)) if v == SCHEMA_VERSION as i64 => {}
        Some(v) => {
            return Err(Error::SchemaMismatch {
                left: format!("{} has schema_version {v}", path.display()),
                right: format!("supported schema_version {SCHEMA_VERSION}"),
            })
        }
        None => return Err(parse_err("missing `schema_version`".into())),
    }
    let kind = match table.remove("kind") {
        Some(Value::String(s)) if s == "robot" => ConfigKind::Robot,
        Some(Value::String(s)) if s == "gait" => ConfigKind::Gait,
        Some(v) => return Err(parse_err(format!("unknown kind {v}"))),
        None => return Err(parse_err("missing `kind` (\"robot\" or \"gait\")".into())),
    };
    if let Some(want) = expected {
        if want != kind {
            return Err(parse_err(format!(
                "expected a {} file, found kind = \"{}\"",
                want.as_str(),
                kind.as_str()
            )));
        }
    }
    Ok((kind, table))
}

fn load<T: DeserializeOwned>(path: &Path, kind: ConfigKind) -> Result<T> {
    let (_, table) = read_table(path, Some(kind))?;
    table.try_into().map_err(|e: toml::de::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })
}

pub fn load_robot(path: &Path) -> Result<RobotParams> {
    load(path, ConfigKind::Robot)
}

pub fn load_gait(path: &Path) -> Result<GaitParams> {
    load(path, ConfigKind::Gait)
}

fn render<T: Serialize>(value: &T, kind: ConfigKind) -> Result<String> {
    let body = toml::to_string(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(format!(
        "schema_version = {SCHEMA_VERSION}\nkind = \"{}\"\n\n{body}",
        kind.as_str()
    ))
}

pub fn robot_to_toml(params: &RobotParams) -> Result<String> {
    render(params, ConfigKind::Robot)
}

pub fn gait_to_toml(gait: &GaitParams) -> Result<String> {
    render(gait, ConfigKind::Gait)
}

/// Validation report for a robot or gait file. Unreadable or malformed
/// files are errors; rule violations are reported as failures.
pub fn validate_file(path: &Path) -> Result<(ConfigKind, Report)> {
    let (kind, table) = read_table(path, None)?;
    let to_parse = |e: toml::de::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    };
    let report = match kind {
        ConfigKind::Robot => table.try_into::<RobotParams>().map_err(to_parse)?.report(),
        ConfigKind::Gait => table.try_into::<GaitParams>().map_err(to_parse)?.report(),
    };
    Ok((kind, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SensorMode;

    #[test]
    fn robot_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("robot.toml");
        let p = RobotParams::default();
        fs::write(&path, robot_to_toml(&p).unwrap()).unwrap();
        assert_eq!(load_robot(&path).unwrap(), p);
        assert!(load_gait(&path).is_err());
    }

    #[test]
    fn overrides_reach_nested_fields_and_enums() {
        let base = RunConfig::default();
        let c = base
            .with_overrides(&[
                "robot.link1.mass=0.5",
                "peak_horizontal_force=40",
                "sim.sensor_mode=quantized",
                "robot.knee_spring.engagement=unilateral",
            ])
            .unwrap();
        assert_eq!(c.robot.link1.mass, 0.5);
        assert_eq!(c.gait.peak_horizontal_force, 40.0);
        assert_eq!(c.sim.sensor_mode, SensorMode::Quantized);
        assert!(base.with_overrides(&["gait.nonsense=1"]).is_err());
        assert!(base.with_overrides(&["no_equals"]).is_err());
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gait.toml");
        let mut text = gait_to_toml(&GaitParams::default()).unwrap();
        text.push_str("surprise = 3\n");
        fs::write(&path, &text).unwrap();
        assert!(matches!(load_gait(&path), Err(Error::Parse { .. })));

        let text = gait_to_toml(&GaitParams::default())
            .unwrap()
            .replace("schema_version = 1", "schema_version = 7");
        fs::write(&path, text).unwrap();
        let err = load_gait(&path).unwrap_err().to_string();
        assert!(err.contains('7') && err.contains('1'), "{err}");
    }
}
