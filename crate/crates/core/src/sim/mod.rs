//! Seeded Monte Carlo simulation of the save-and-transmit pipeline.

mod experiment;
pub mod model;
pub mod pipeline;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bounds::{concentration_constant_dmc, saving_phase_length};
use crate::config::AwgnEhConfig;
use crate::dmc::DmcSpec;
use crate::energy::EnergyProcess;
use crate::error::{invalid, Error, Result};

pub use experiment::{
    run, run_exact_decode_experiment, run_outage_experiment, run_surrogate_error_experiment,
    run_trials,
};

/// Save-and-transmit scenario over a discrete channel.
///
/// `power` is the target expected cost per symbol; the codebook law is the
/// capacity-cost maximizer at that cost. `a` and `m` default as in the
/// Gaussian case, with the discrete concentration constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DmcScenarioRepr")]
pub struct DmcScenario {
    pub channel: DmcSpec,
    pub energy: EnergyProcess,
    pub power: f64,
    pub n: u64,
    pub eps: f64,
    pub a: f64,
    pub m: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DmcScenarioRepr {
    channel: DmcSpec,
    energy: EnergyProcess,
    power: f64,
    n: u64,
    eps: f64,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    m: Option<u64>,
}

impl TryFrom<DmcScenarioRepr> for DmcScenario {
    type Error = Error;

    fn try_from(r: DmcScenarioRepr) -> Result<Self> {
        DmcScenario::build(r.channel, r.energy, r.power, r.n, r.eps, r.a, r.m)
    }
}

impl DmcScenario {
    pub fn build(
        channel: DmcSpec,
        energy: EnergyProcess,
        power: f64,
        n: u64,
        eps: f64,
        a: Option<f64>,
        m: Option<u64>,
    ) -> Result<Self> {
        if n < 3 {
            return Err(invalid("n", format!("{n} < 3")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("{eps} not in (0, 1)")));
        }
        if !(power > 0.0 && power <= channel.max_cost()) {
            return Err(Error::CostOutOfRange {
                target: power,
                min: channel.min_cost(),
                max: channel.max_cost(),
            });
        }
        let a = match a {
            Some(a) if a > 0.0 && a.is_finite() => a,
            Some(a) => return Err(invalid("a", format!("{a} must be positive"))),
            None => concentration_constant_dmc(&energy, &channel)?,
        };
        let m = match m {
            Some(m) => m,
            None => saving_phase_length(a, power, n)?,
        };
        Ok(Self {
            channel,
            energy,
            power,
            n,
            eps,
            a,
            m,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Awgn(AwgnEhConfig),
    Dmc(DmcScenario),
}

impl Scenario {
    pub fn n(&self) -> u64 {
        match self {
            Scenario::Awgn(c) => c.n,
            Scenario::Dmc(c) => c.n,
        }
    }

    pub fn m(&self) -> u64 {
        match self {
            Scenario::Awgn(c) => c.m,
            Scenario::Dmc(c) => c.m,
        }
    }

    pub fn eps(&self) -> f64 {
        match self {
            Scenario::Awgn(c) => c.eps,
            Scenario::Dmc(c) => c.eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    OutageOnly,
    SurrogateError,
    ExactDecode,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::OutageOnly => "outage_only",
            Mode::SurrogateError => "surrogate_error",
            Mode::ExactDecode => "exact_decode",
        }
    }
}

fn default_max_codebook() -> u64 {
    1024
}

fn default_budget() -> u64 {
    100_000_000
}

fn default_parallel() -> bool {
    true
}

/// Monte Carlo experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub mode: Mode,
    #[serde(default = "default_max_codebook")]
    pub max_codebook: u64,
    /// Codebook size `M`; derived from the information-density moments when absent.
    #[serde(default)]
    pub codebook_size: Option<u64>,
    /// Upper limit on `n * M` for exact decoding.
    #[serde(default = "default_budget")]
    pub compute_budget: u64,
    /// Run trials on the thread pool. Results do not depend on this.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl SimConfig {
    pub fn new(scenario: Scenario, mode: Mode, trials: u64, seed: u64) -> Self {
        Self {
            scenario,
            trials,
            seed,
            mode,
            max_codebook: default_max_codebook(),
            codebook_size: None,
            compute_budget: default_budget(),
            parallel: true,
        }
    }

    /// Rejects configurations that cannot run, before any work is done.
    pub fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.mode == Mode::ExactDecode {
            if let Some(m) = self.codebook_size {
                self.check_exact_codebook(m)?;
            }
        }
        Ok(())
    }
}

impl SimConfig {
    pub(crate) fn check_exact_codebook(&self, m: u64) -> Result<()> {
        if m == 0 {
            return Err(invalid("codebook_size", "must be at least 1"));
        }
        if m > self.max_codebook {
            return Err(Error::Budget(format!(
                "codebook size {m} exceeds max_codebook {}",
                self.max_codebook
            )));
        }
        let work = self.scenario.n().saturating_mul(m);
        if work > self.compute_budget {
            return Err(Error::Budget(format!(
                "n * M = {work} exceeds compute budget {}",
                self.compute_budget
            )));
        }
        Ok(())
    }
}

/// Per-trial record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// The intended codeword violated some cumulative energy constraint.
    pub outage: bool,
    /// Decoding failed (exact mode) or the density sum missed the threshold (surrogate mode).
    pub decode_error: bool,
    /// Density sum of the sent codeword over the transmission phase, when computed.
    pub info_density_sum: Option<f64>,
}

/// Empirical rate with a 95% normal-approximation half-width, floored at `1/trials`.
pub fn binomial_estimate(count: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = count as f64 / n;
    let hw = (1.96 * (p * (1.0 - p) / n).sqrt()).max(1.0 / n);
    (p, hw)
}

/// Aggregated experiment result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub mode: Mode,
    pub n: u64,
    pub m: u64,
    pub eps: f64,
    pub trials: u64,
    pub seed: u64,
    /// `log M`; negative infinity serializes as null.
    pub log_codebook_size: f64,
    pub codebook_size: Option<u64>,
    pub codebook_feasible: bool,
    pub outage_rate: f64,
    pub outage_hw: f64,
    /// Exact: decoding error rate. Surrogate: threshold + union + outage total.
    pub error_rate: Option<f64>,
    pub error_hw: Option<f64>,
    /// Rate of the density sum falling at or below `log M + n^{1/4}`.
    pub threshold_rate: Option<f64>,
    pub threshold_hw: Option<f64>,
    /// `e^{-n^{1/4}}`, the bound on a wrong codeword passing the threshold.
    pub union_term: Option<f64>,
    /// Empirical per-symbol mean of the information density.
    pub mean_info_density: Option<f64>,
    /// Analytic outage bound for `(m, n, a, P)`, clamped to 1.
    pub lemma1_bound_value: f64,
    pub lemma1_bound_valid: bool,
}

pub const CSV_HEADER: [&str; 11] = [
    "mode",
    "n",
    "m",
    "M",
    "eps",
    "trials",
    "outage_rate",
    "outage_hw",
    "error_rate",
    "error_hw",
    "bound",
];

impl SimReport {
    /// `M` for the CSV: the integer when known, otherwise `e^<log M>`.
    fn codebook_cell(&self) -> String {
        match self.codebook_size {
            Some(m) => m.to_string(),
            None => format!("e^{}", crate::fmt_sig(self.log_codebook_size)),
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(crate::fmt_sig).unwrap_or_default();
        vec![
            self.mode.as_str().to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.codebook_cell(),
            crate::fmt_sig(self.eps),
            self.trials.to_string(),
            crate::fmt_sig(self.outage_rate),
            crate::fmt_sig(self.outage_hw),
            opt(self.error_rate),
            opt(self.error_hw),
            crate::fmt_sig(self.lemma1_bound_value),
        ]
    }

    /// Appends one CSV row, writing the header first when `with_header` is set.
    pub fn write_csv<W: Write>(&self, out: W, with_header: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if with_header {
            w.write_record(CSV_HEADER)?;
        }
        w.write_record(self.csv_record())?;
        w.flush()?;
        Ok(())
    }
}
