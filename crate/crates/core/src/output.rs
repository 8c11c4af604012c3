//! CSV and JSON serialisation of sweep records and trajectories.
//!
//! Floats are written with 17 significant digits so that parsing a row back
//! reproduces the record bit for bit.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::{MomentState, Trajectory};
use crate::gaussian::{Regime, SteeringReport, TwoModeCovariance};
use crate::laser::{LaserParams, SteadyStateMoments};
use crate::sweep::{PointMeasures, Status, SweepRecord};

pub const RECORD_HEADER: &str = "A_kHz,kappa_kHz,eta,n1,n2,m,alpha1,alpha2,beta,nu_minus,G_12,G_21,G_max,E2,E2_minus_Gmax,regime,status";

pub const TRAJECTORY_HEADER: &str = "t_ms,re_c1,im_c1,re_c2,im_c2,re_c1sq,im_c1sq,re_c2sq,im_c2sq,n1,n2,re_m12,im_m12,re_x12,im_x12";

pub const BOUNDARY_HEADER: &str = "A_kHz,kappa_kHz,eta_lo,eta_hi,eta_star,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Flat view of a [`SweepRecord`] with the CSV column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    #[serde(rename = "A_kHz")]
    pub a_khz: f64,
    #[serde(rename = "kappa_kHz")]
    pub kappa_khz: f64,
    pub eta: f64,
    pub n1: Option<f64>,
    pub n2: Option<f64>,
    pub m: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub beta: Option<f64>,
    pub nu_minus: Option<f64>,
    #[serde(rename = "G_12")]
    pub g_12: Option<f64>,
    #[serde(rename = "G_21")]
    pub g_21: Option<f64>,
    #[serde(rename = "G_max")]
    pub g_max: Option<f64>,
    #[serde(rename = "E2")]
    pub e2: Option<f64>,
    #[serde(rename = "E2_minus_Gmax")]
    pub e2_minus_gmax: Option<f64>,
    pub regime: Option<Regime>,
    pub status: Status,
}

impl From<&SweepRecord> for RecordRow {
    fn from(r: &SweepRecord) -> Self {
        let m = r.measures.as_ref();
        RecordRow {
            a_khz: r.params.gain(),
            kappa_khz: r.params.kappa(),
            eta: r.params.eta(),
            n1: m.map(|m| m.moments.n1),
            n2: m.map(|m| m.moments.n2),
            m: m.map(|m| m.moments.m),
            alpha1: m.map(|m| m.covariance.alpha1),
            alpha2: m.map(|m| m.covariance.alpha2),
            beta: m.map(|m| m.covariance.beta),
            nu_minus: m.map(|m| m.nu_minus),
            g_12: m.map(|m| m.steering.g12),
            g_21: m.map(|m| m.steering.g21),
            g_max: m.map(|m| m.steering.gmax),
            e2: m.map(|m| m.e2),
            e2_minus_gmax: m.map(|m| m.e2_minus_gmax),
            regime: m.map(|m| m.steering.regime),
            status: r.status(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn record_csv_line(r: &SweepRecord) -> String {
    let row = RecordRow::from(r);
    let mut fields = vec![fmt_f64(row.a_khz), fmt_f64(row.kappa_khz), fmt_f64(row.eta)];
    fields.extend(
        [
            row.n1,
            row.n2,
            row.m,
            row.alpha1,
            row.alpha2,
            row.beta,
            row.nu_minus,
            row.g_12,
            row.g_21,
            row.g_max,
            row.e2,
            row.e2_minus_gmax,
        ]
        .into_iter()
        .map(opt),
    );
    fields.push(row.regime.map(|r| r.as_str().to_string()).unwrap_or_default());
    fields.push(row.status.as_str().to_string());
    fields.join(",")
}

pub fn write_records_csv<W: Write>(mut w: W, records: &[SweepRecord]) -> io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(w, "{}", record_csv_line(r))?;
    }
    w.flush()
}

pub fn write_records_json<W: Write>(mut w: W, records: &[SweepRecord]) -> io::Result<()> {
    let rows: Vec<RecordRow> = records.iter().map(RecordRow::from).collect();
    serde_json::to_writer_pretty(&mut w, &rows)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_records<W: Write>(w: W, records: &[SweepRecord], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_records_csv(w, records),
        Format::Json => write_records_json(w, records),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Parses CSV written by [`write_records_csv`] back into records.
pub fn parse_records_csv(text: &str) -> Result<Vec<SweepRecord>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == RECORD_HEADER => {}
        _ => {
            return Err(ParseError {
                line: 1,
                message: "missing or unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| parse_record_line(l).map_err(|message| ParseError { line: i + 1, message }))
        .collect()
}

fn parse_record_line(line: &str) -> Result<SweepRecord, String> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 17 {
        return Err(format!("expected 17 fields, found {}", f.len()));
    }
    let num = |i: usize| -> Result<f64, String> {
        f[i].parse::<f64>().map_err(|e| format!("field {i} '{}': {e}", f[i]))
    };
    let params = LaserParams::new(num(0)?, num(1)?, num(2)?).map_err(|e| e.to_string())?;
    let measures = match f[16] {
        "no_stationary_state" => None,
        "ok" => {
            let regime = Regime::parse(f[15]).ok_or_else(|| format!("unknown regime '{}'", f[15]))?;
            Some(PointMeasures {
                moments: SteadyStateMoments {
                    n1: num(3)?,
                    n2: num(4)?,
                    m: num(5)?,
                },
                covariance: TwoModeCovariance::new(num(6)?, num(7)?, num(8)?),
                nu_minus: num(9)?,
                steering: SteeringReport {
                    g12: num(10)?,
                    g21: num(11)?,
                    gmax: num(12)?,
                    regime,
                },
                e2: num(13)?,
                e2_minus_gmax: num(14)?,
            })
        }
        other => return Err(format!("unknown status '{other}'")),
    };
    Ok(SweepRecord { params, measures })
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (t, s) in &traj.samples {
        let mut fields = vec![fmt_f64(*t)];
        fields.extend(s.components().iter().map(|v| fmt_f64(*v)));
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()
}

pub fn write_trajectory_json<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    let names: Vec<&str> = TRAJECTORY_HEADER.split(',').collect();
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = traj
        .samples
        .iter()
        .map(|(t, s)| {
            std::iter::once(*t)
                .chain(s.components())
                .zip(&names)
                .map(|(v, n)| (n.to_string(), serde_json::Value::from(v)))
                .collect()
        })
        .collect();
    serde_json::to_writer_pretty(&mut w, &rows)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_trajectory_csv(w, traj),
        Format::Json => write_trajectory_json(w, traj),
    }
}

/// Parses a trajectory CSV into `(t, state)` samples.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<(f64, MomentState)>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == TRAJECTORY_HEADER => {}
        _ => {
            return Err(ParseError {
                line: 1,
                message: "missing or unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let err = |message: String| ParseError { line: i + 1, message };
            let vals: Vec<f64> = l
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| err(format!("'{s}': {e}"))))
                .collect::<Result<_, _>>()?;
            if vals.len() != 15 {
                return Err(err(format!("expected 15 fields, found {}", vals.len())));
            }
            let mut comps = [0.0; 14];
            comps.copy_from_slice(&vals[1..]);
            Ok((vals[0], MomentState::from_components(&comps)))
        })
        .collect()
}

/// Result of a boundary search, as written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    #[serde(rename = "A_kHz")]
    pub a_khz: f64,
    #[serde(rename = "kappa_kHz")]
    pub kappa_khz: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub eta_star: Option<f64>,
    pub status: String,
}

pub fn write_boundary<W: Write>(mut w: W, row: &BoundaryRow, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{BOUNDARY_HEADER}")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(row.a_khz),
                fmt_f64(row.kappa_khz),
                fmt_f64(row.eta_lo),
                fmt_f64(row.eta_hi),
                opt(row.eta_star),
                row.status
            )?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, row)?;
            writeln!(w)?;
        }
    }
    w.flush()
}
