//! Rate-versus-blocklength sweeps over a grid of transmission lengths.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{eh_rate, no_eh_rate, theorem1_validity, Validity, TILTED_MOMENT_COEF};
use crate::error::{invalid, Error, Result};
use crate::fmt_sig;

pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Transmission lengths to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NGrid {
    List(Vec<u64>),
    /// `points` values spaced geometrically from `start` to `stop`, rounded
    /// to integers with duplicates dropped.
    Geometric {
        start: u64,
        stop: u64,
        points: usize,
    },
}

impl NGrid {
    pub fn values(&self) -> Result<Vec<u64>> {
        let values = match self {
            NGrid::List(v) => v.clone(),
            &NGrid::Geometric {
                start,
                stop,
                points,
            } => {
                if points > MAX_GRID_POINTS {
                    return Err(invalid(
                        "n",
                        format!("{points} grid points exceeds {MAX_GRID_POINTS}"),
                    ));
                }
                if points == 0 || start == 0 || stop < start {
                    return Err(invalid(
                        "n",
                        "geometric grid needs 0 < start <= stop and points >= 1",
                    ));
                }
                if points == 1 {
                    vec![start]
                } else {
                    let ratio = (stop as f64 / start as f64).ln() / (points - 1) as f64;
                    let mut v: Vec<u64> = (0..points)
                        .map(|i| match i {
                            0 => start,
                            i if i == points - 1 => stop,
                            i => (start as f64 * (ratio * i as f64).exp()).round() as u64,
                        })
                        .collect();
                    v.dedup();
                    v
                }
            }
        };
        if values.is_empty() {
            return Err(invalid("n", "grid is empty"));
        }
        if let Some(&n) = values.iter().find(|&&n| n < 3) {
            return Err(invalid("n", format!("{n} < 3")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n", "grid must be strictly increasing"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curves {
    EhRate,
    NoEhRate,
    Both,
}

impl Curves {
    fn eh(self) -> bool {
        self != Curves::NoEhRate
    }
    fn no_eh(self) -> bool {
        self != Curves::EhRate
    }
}

/// Sweep description as read from JSON.
///
/// Exactly one of `power` / `power_db` is required. The arrivals' second
/// moment comes from `second_moment`, or from `variance + P^2`; `a` defaults
/// to `max{E[E^2], 12 sqrt(2) P^2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: NGrid,
    pub eps: f64,
    #[serde(default)]
    pub power: Option<f64>,
    #[serde(default)]
    pub power_db: Option<f64>,
    #[serde(default)]
    pub second_moment: Option<f64>,
    #[serde(default)]
    pub variance: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default = "default_curves")]
    pub curves: Curves,
}

fn default_curves() -> Curves {
    Curves::Both
}

/// Power in linear units from a dB figure.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Resolved scalar parameters of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub eps: f64,
    pub power: f64,
    pub second_moment: f64,
    pub a: f64,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn params(&self) -> Result<SweepParams> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid("eps", format!("{} not in (0, 1)", self.eps)));
        }
        let power = match (self.power, self.power_db) {
            (Some(p), None) => p,
            (None, Some(db)) => db_to_linear(db),
            _ => return Err(invalid("power", "give exactly one of power, power_db")),
        };
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("power", format!("{power} must be positive")));
        }
        let second_moment = match (self.second_moment, self.variance) {
            (Some(s), None) => s,
            (None, Some(v)) if v >= 0.0 => v + power * power,
            (None, None) => power * power,
            (None, Some(v)) => return Err(invalid("variance", format!("{v} is negative"))),
            _ => {
                return Err(invalid(
                    "second_moment",
                    "give at most one of second_moment, variance",
                ))
            }
        };
        if !(second_moment >= power * power * (1.0 - 1e-12) && second_moment.is_finite()) {
            return Err(invalid(
                "second_moment",
                format!("{second_moment} is below P^2 = {}", power * power),
            ));
        }
        let a = self
            .a
            .unwrap_or_else(|| second_moment.max(TILTED_MOMENT_COEF * power * power));
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("a", format!("{a} must be positive")));
        }
        Ok(SweepParams {
            eps: self.eps,
            power,
            second_moment,
            a,
        })
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub m: u64,
    pub eh_rate: f64,
    pub no_eh_rate: f64,
    pub infeasible: bool,
    pub validity: Validity,
}

/// Evaluates every grid point; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let grid = spec.n.values()?;
    let p = spec.params()?;
    grid.par_iter()
        .map(|&n| {
            let eh = eh_rate(n, p.eps, p.power, p.a)?;
            let no_eh = no_eh_rate(n, p.eps, p.power)?;
            Ok(SweepRow {
                n,
                m: eh.m,
                eh_rate: eh.rate,
                no_eh_rate: no_eh.rate,
                infeasible: !eh.feasible,
                validity: theorem1_validity(n, p.eps, p.second_moment, p.power),
            })
        })
        .collect()
}

/// Column names for the selected curves.
pub fn csv_header(curves: Curves) -> Vec<&'static str> {
    let mut h = vec!["n", "m"];
    if curves.eh() {
        h.push("eh_rate");
    }
    if curves.no_eh() {
        h.push("no_eh_rate");
    }
    h.extend([
        "infeasible",
        "concentration_ok",
        "union_term_ok",
        "outage_term_ok",
        "valid",
    ]);
    h
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn csv_record(row: &SweepRow, curves: Curves) -> Vec<String> {
    let mut r = vec![row.n.to_string(), row.m.to_string()];
    if curves.eh() {
        r.push(fmt_sig(row.eh_rate));
    }
    if curves.no_eh() {
        r.push(fmt_sig(row.no_eh_rate));
    }
    r.extend([
        flag(row.infeasible),
        flag(row.validity.concentration),
        flag(row.validity.union_term),
        flag(row.validity.outage_term),
        flag(row.validity.overall),
    ]);
    r
}

/// Header plus one row per grid point.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow], curves: Curves) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(curves))?;
    for row in rows {
        w.write_record(csv_record(row, curves))?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}
