//! Discrete memoryless channels with a per-symbol cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums must be within this distance of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A finite channel `q(y|x)` with input cost `c(x)`.
///
/// At least one input has zero cost; the first such input is the idle symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmcSpecRepr")]
pub struct DmcSpec {
    pub input_size: usize,
    pub output_size: usize,
    pub transition: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DmcSpecRepr {
    input_size: usize,
    output_size: usize,
    transition: Vec<Vec<f64>>,
    cost: Vec<f64>,
}

impl TryFrom<DmcSpecRepr> for DmcSpec {
    type Error = Error;

    fn try_from(r: DmcSpecRepr) -> Result<Self> {
        let spec = DmcSpec::new(r.transition, r.cost)?;
        if spec.input_size != r.input_size || spec.output_size != r.output_size {
            return Err(Error::MalformedChannel(format!(
                "declared {}x{} but matrix is {}x{}",
                r.input_size, r.output_size, spec.input_size, spec.output_size
            )));
        }
        Ok(spec)
    }
}

impl DmcSpec {
    /// Validates a transition matrix and cost vector.
    pub fn new(transition: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<Self> {
        let input_size = transition.len();
        if input_size == 0 {
            return Err(Error::MalformedChannel("empty transition matrix".into()));
        }
        let output_size = transition[0].len();
        if output_size == 0 {
            return Err(Error::MalformedChannel("empty output alphabet".into()));
        }
        for (row, probs) in transition.iter().enumerate() {
            if probs.len() != output_size {
                return Err(Error::MalformedChannel(format!(
                    "row {row} has {} entries, expected {output_size}",
                    probs.len()
                )));
            }
            if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::MalformedChannel(format!(
                    "row {row} has entry {bad} outside [0, 1]"
                )));
            }
            let sum: f64 = probs.iter().sum();
            if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
                return Err(Error::RowSum { row, sum });
            }
        }
        if cost.len() != input_size {
            return Err(Error::MalformedChannel(format!(
                "cost has {} entries, expected {input_size}",
                cost.len()
            )));
        }
        if let Some(bad) = cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::MalformedChannel(format!(
                "cost {bad} must be finite and >= 0"
            )));
        }
        if !cost.iter().any(|&c| c == 0.0) {
            return Err(Error::MalformedChannel("no zero-cost idle symbol".into()));
        }
        Ok(Self {
            input_size,
            output_size,
            transition,
            cost,
        })
    }

    /// Parses the plain-text format: one row of whitespace-separated
    /// probabilities per input symbol, then a final line with the costs.
    /// Blank lines and `#` comments are ignored; the cost line may start
    /// with the word `cost`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines: Vec<(usize, Vec<f64>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace().peekable();
            if tokens
                .peek()
                .is_some_and(|t| t.trim_end_matches(':') == "cost")
            {
                tokens.next();
            }
            let values = tokens
                .map(|t| {
                    t.parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        reason: format!("`{t}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            lines.push((idx + 1, values));
        }
        let Some((_, cost)) = lines.pop() else {
            return Err(Error::Parse {
                line: 0,
                reason: "empty channel file".into(),
            });
        };
        if lines.is_empty() {
            return Err(Error::Parse {
                line: 0,
                reason: "missing transition rows before the cost line".into(),
            });
        }
        let rows = lines.into_iter().map(|(_, r)| r).collect();
        Self::new(rows, cost)
    }

    /// Renders the plain-text format read by [`DmcSpec::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.transition {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:?}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        let costs: Vec<String> = self.cost.iter().map(|c| format!("{c:?}")).collect();
        out.push_str("cost ");
        out.push_str(&costs.join(" "));
        out.push('\n');
        out
    }

    /// First zero-cost input, sent whenever the battery cannot cover a symbol.
    pub fn idle_symbol(&self) -> usize {
        self.cost.iter().position(|&c| c == 0.0).unwrap_or(0)
    }

    pub fn min_cost(&self) -> f64 {
        self.cost.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Binary symmetric channel with crossover `p` and cost `(0, 1)`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]], vec![0.0, 1.0])
    }

    /// Noiseless `k`-ary channel with the given costs.
    pub fn identity(cost: Vec<f64>) -> Result<Self> {
        let k = cost.len();
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows, cost)
    }
}
