//! Episode log: one row per control period plus the refined event list, and
//! its CSV form.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::control::Phase;
use crate::error::{Error, Result};
use crate::model::kinematics::JointState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Foot reached the ground (physical, refined time).
    Touchdown,
    /// Normal force reached zero (physical, refined time).
    Liftoff,
    /// The stuck foot would have to be pulled down; it slides from here on.
    Slip,
    /// Controller saw a rising switch edge.
    CtrlTouchdown,
    /// Controller saw a falling switch edge.
    CtrlLiftoff,
    /// Controller abandoned stance after the timeout.
    CtrlTimeout,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Touchdown => "touchdown",
            EventKind::Liftoff => "liftoff",
            EventKind::Slip => "slip",
            EventKind::CtrlTouchdown => "ctrl_touchdown",
            EventKind::CtrlLiftoff => "ctrl_liftoff",
            EventKind::CtrlTimeout => "ctrl_timeout",
        }
    }

    pub fn is_physical(self) -> bool {
        matches!(self, EventKind::Touchdown | EventKind::Liftoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    /// State right after the event (post-impact for touchdown).
    pub state: JointState,
    /// Electrical energy drawn since the start, J.
    pub energy: f64,
}

/// Sample taken at a controller tick, after the controller has run.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub q: [f64; 4],
    pub qdot: [f64; 4],
    /// Applied hip/knee drive torque, N·m.
    pub torque: [f64; 2],
    /// Torque the control law asked for, N·m.
    pub torque_cmd: [f64; 2],
    /// Clamped voltage command, V.
    pub voltage: [f64; 2],
    /// Motor current, A.
    pub current: [f64; 2],
    /// Current as seen by the sensors (noisy in quantized mode), A.
    pub current_meas: [f64; 2],
    /// World-frame ground reaction force on the foot, N.
    pub grf: [f64; 3],
    pub phase: Phase,
    pub ctrl_phase: Phase,
    /// Events since the previous row, in order.
    pub events: Vec<EventKind>,
    pub saturated: [bool; 2],
    /// Cumulative electrical energy, J.
    pub energy: f64,
}

impl LogRow {
    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|s| *s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub config: RunConfig,
    pub rows: Vec<LogRow>,
    pub events: Vec<EventRecord>,
}

pub const COLUMNS: [(&str, &str); 32] = [
    ("t", "s"),
    ("q1", "rad"),
    ("q2", "rad"),
    ("q3", "rad"),
    ("q4", "rad"),
    ("qd1", "rad/s"),
    ("qd2", "rad/s"),
    ("qd3", "rad/s"),
    ("qd4", "rad/s"),
    ("u_hip", "N*m"),
    ("u_knee", "N*m"),
    ("u_cmd_hip", "N*m"),
    ("u_cmd_knee", "N*m"),
    ("v_hip", "V"),
    ("v_knee", "V"),
    ("i_hip", "A"),
    ("i_knee", "A"),
    ("i_meas_hip", "A"),
    ("i_meas_knee", "A"),
    ("grf_x", "N"),
    ("grf_y", "N"),
    ("grf_z", "N"),
    ("phase", "-"),
    ("ctrl_phase", "-"),
    ("events", "-"),
    ("sat_hip", "-"),
    ("sat_knee", "-"),
    ("energy", "J"),
    ("hip_z", "m"),
    ("foot_z", "m"),
    ("hip_speed", "m/s"),
    ("lap", "-"),
];

impl EpisodeLog {
    /// CSV text: `#` comment lines with the schema version, units and the
    /// resolved configuration, then the header row and one row per sample.
    pub fn to_csv(&self) -> Result<String> {
        let params = &self.config.robot;
        let mut out = String::new();
        writeln!(out, "# gantry-hopper episode log").unwrap();
        writeln!(out, "# schema_version = {SCHEMA_VERSION}").unwrap();
        let units: Vec<String> = COLUMNS.iter().map(|(c, u)| format!("{c}[{u}]")).collect();
        writeln!(out, "# units: {}", units.join(" ")).unwrap();
        writeln!(
            out,
            "# events: touchdown/liftoff are physical, ctrl_* come from the controller"
        )
        .unwrap();
        for line in self.config.to_toml()?.lines() {
            writeln!(out, "# {line}").unwrap();
        }

        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(COLUMNS.iter().map(|(c, _)| *c))
            .map_err(csv_error)?;
        for row in &self.rows {
            let q = nalgebra::Vector4::from(row.q);
            let frames = crate::model::kinematics::ChainFrames::new(params, &q);
            let hip_speed = row.qdot[0] * params.gantry_arm_length;
            let lap = (row.q[0] / std::f64::consts::TAU).floor();
            let mut rec: Vec<String> = Vec::with_capacity(COLUMNS.len());
            rec.push(row.t.to_string());
            rec.extend(row.q.iter().map(f64::to_string));
            rec.extend(row.qdot.iter().map(f64::to_string));
            rec.extend(row.torque.iter().map(f64::to_string));
            rec.extend(row.torque_cmd.iter().map(f64::to_string));
            rec.extend(row.voltage.iter().map(f64::to_string));
            rec.extend(row.current.iter().map(f64::to_string));
            rec.extend(row.current_meas.iter().map(f64::to_string));
            rec.extend(row.grf.iter().map(f64::to_string));
            rec.push(row.phase.as_str().to_string());
            rec.push(row.ctrl_phase.as_str().to_string());
            rec.push(
                row.events
                    .iter()
                    .map(|e| e.as_str())
                    .collect::<Vec<_>>()
                    .join("|"),
            );
            rec.extend(row.saturated.iter().map(|s| u8::from(*s).to_string()));
            rec.push(row.energy.to_string());
            rec.push(frames.hip.z.to_string());
            rec.push(frames.foot.z.to_string());
            rec.push(hip_speed.to_string());
            rec.push(lap.to_string());
            w.write_record(&rec).map_err(csv_error)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv()?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv: {e}"))
}

/// A log read back from disk, kept as text so any column can be compared.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    pub schema_version: Option<u32>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl LogTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let schema_version = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| {
                let rest = l.trim_start_matches('#').trim();
                let v = rest
                    .strip_prefix("schema_version")?
                    .trim()
                    .strip_prefix('=')?;
                v.trim().parse().ok()
            });
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Self {
            schema_version,
            columns,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r.get(i)?.parse().ok()).collect()
    }
}

/// Per-column comparison of two logs.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub column: String,
    /// Max |a − b| for numeric columns; number of differing rows for text.
    pub max_abs: f64,
    pub numeric: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub columns: Vec<ColumnDiff>,
    /// Rows compared (the shorter log's length).
    pub rows: usize,
    pub row_count_mismatch: Option<(usize, usize)>,
}

impl CompareReport {
    pub fn max_numeric_deviation(&self) -> f64 {
        self.columns
            .iter()
            .filter(|c| c.numeric)
            .map(|c| c.max_abs)
            .fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.row_count_mismatch.is_none()
            && self.columns.iter().all(|c| {
                if c.numeric {
                    c.max_abs <= tol
                } else {
                    c.max_abs == 0.0
                }
            })
    }
}

pub fn compare_logs(a: &LogTable, b: &LogTable) -> Result<CompareReport> {
    if a.schema_version != b.schema_version {
        let show =
            |v: Option<u32>| v.map_or("unversioned".to_string(), |v| format!("schema_version {v}"));
        return Err(Error::SchemaMismatch {
            left: show(a.schema_version),
            right: show(b.schema_version),
        });
    }
    if a.columns != b.columns {
        return Err(Error::SchemaMismatch {
            left: format!("columns [{}]", a.columns.join(",")),
            right: format!("columns [{}]", b.columns.join(",")),
        });
    }
    let rows = a.rows.len().min(b.rows.len());
    let mut columns = Vec::with_capacity(a.columns.len());
    for (i, name) in a.columns.iter().enumerate() {
        let mut numeric = true;
        let mut max_abs: f64 = 0.0;
        let mut differing = 0usize;
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let (sa, sb) = (&ra[i], &rb[i]);
            if sa != sb {
                differing += 1;
            }
            match (sa.parse::<f64>(), sb.parse::<f64>()) {
                (Ok(x), Ok(y)) if numeric => {
                    let d = if x == y { 0.0 } else { (x - y).abs() };
                    max_abs = max_abs.max(if d.is_nan() { f64::INFINITY } else { d });
                }
                _ => numeric = false,
            }
        }
        if !numeric {
            max_abs = differing as f64;
        }
        columns.push(ColumnDiff {
            column: name.clone(),
            max_abs,
            numeric,
        });
    }
    Ok(CompareReport {
        columns,
        rows,
        row_count_mismatch: (a.rows.len() != b.rows.len()).then_some((a.rows.len(), b.rows.len())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(schema: u32, rows: &[&str]) -> LogTable {
        let mut text = format!("# schema_version = {schema}\nt,x,phase\n");
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        LogTable::parse(&text).unwrap()
    }

    #[test]
    fn identical_logs_have_zero_diff() {
        let a = table(1, &["0,1.5,aerial", "0.001,2,stance"]);
        let r = compare_logs(&a, &a).unwrap();
        assert_eq!(r.max_numeric_deviation(), 0.0);
        assert!(r.within(0.0));
    }

    #[test]
    fn numeric_and_text_columns_are_measured_separately() {
        let a = table(1, &["0,1.5,aerial", "0.001,2,stance"]);
        let b = table(1, &["0,1.25,aerial", "0.001,2,aerial"]);
        let r = compare_logs(&a, &b).unwrap();
        assert_eq!(r.columns[1].max_abs, 0.25);
        assert!(!r.columns[2].numeric);
        assert_eq!(r.columns[2].max_abs, 1.0);
        assert!(!r.within(1.0));
    }

    #[test]
    fn schema_mismatch_names_both_versions() {
        let a = table(1, &["0,1,aerial"]);
        let b = table(2, &["0,1,aerial"]);
        let msg = compare_logs(&a, &b).unwrap_err().to_string();
        assert!(
            msg.contains("schema_version 1") && msg.contains("schema_version 2"),
            "{msg}"
        );
    }
}
