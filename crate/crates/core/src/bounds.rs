//! Closed-form achievability bounds for save-and-transmit coding.
//!
//! All quantities are in nats. Bounds that come out negative are reported
//! as infeasible rather than raised as errors, and failed large-`n`
//! conditions only flag a report; the numbers are still computed.

use serde::{Deserialize, Serialize};

use crate::dmc::DmcSpec;
use crate::energy::EnergyProcess;
use crate::error::{invalid, Error, Result};
use crate::normal;

/// `12 sqrt(2)`, the tilted fourth moment of `N(0, P)` at `lambda = 1/(4P)`, per unit `P^2`.
pub const TILTED_MOMENT_COEF: f64 = 12.0 * std::f64::consts::SQRT_2;

/// Prefactor exponent in the outage bound (`log 3 / 3 < 0.4`).
pub const OUTAGE_PREFACTOR_EXP: f64 = 0.4;

fn check_power(power: f64) -> Result<()> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(invalid("power", format!("{power} must be finite and >= 0")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", format!("{eps} not in (0, 1)")));
    }
    Ok(())
}

/// `½ log(1 + P)`.
pub fn awgn_capacity(power: f64) -> Result<f64> {
    check_power(power)?;
    Ok(0.5 * power.ln_1p())
}

/// Gaussian dispersion `P(P+2) / (2(P+1)^2)`.
pub fn awgn_dispersion(power: f64) -> Result<f64> {
    check_power(power)?;
    Ok(power * (power + 2.0) / (2.0 * (power + 1.0).powi(2)))
}

/// `E[X^4 exp(lambda X^2)]` for `X ~ N(0, power)`.
pub fn gaussian_tilted_fourth_moment(power: f64, lambda: f64) -> Result<f64> {
    check_power(power)?;
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", format!("{lambda} must be >= 0")));
    }
    let slack = 1.0 - 2.0 * lambda * power;
    if !(slack > 0.0) {
        return Err(invalid(
            "lambda",
            format!("{lambda} >= 1/(2P); the tilted moment diverges"),
        ));
    }
    Ok(3.0 * power * power * slack.powf(-2.5))
}

/// Tilt parameter and concentration constant for a Gaussian codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub a: f64,
    pub lambda: f64,
}

/// `lambda = 1/(4P)` and `a = max{E[E^2], 12 sqrt(2) P^2}`.
pub fn concentration_constant_awgn(energy: &EnergyProcess, power: f64) -> Result<Concentration> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid("power", format!("{power} must be positive")));
    }
    if (energy.mean - power).abs() > 1e-9 * power {
        return Err(Error::MeanMismatch {
            energy: energy.mean,
            power,
        });
    }
    Ok(Concentration {
        a: energy.second_moment.max(TILTED_MOMENT_COEF * power * power),
        lambda: 1.0 / (4.0 * power),
    })
}

/// `a = max{E[E^2], max_x c(x)^2 e^{c(x)}}`.
pub fn concentration_constant_dmc(energy: &EnergyProcess, spec: &DmcSpec) -> Result<f64> {
    if !(energy.mean > 0.0) {
        return Err(invalid("energy.mean", "must be positive"));
    }
    Ok(energy.second_moment.max(cost_moment_term(spec)))
}

/// `max_x c(x)^2 e^{c(x)}`.
pub fn cost_moment_term(spec: &DmcSpec) -> f64 {
    spec.cost
        .iter()
        .map(|&c| c * c * c.exp())
        .fold(0.0, f64::max)
}

/// Length of the initial energy-saving phase, `ceil(6 sqrt(a n log n) / P)`.
pub fn saving_phase_length(a: f64, power: f64, n: u64) -> Result<u64> {
    if n < 3 {
        return Err(invalid("n", format!("{n} < 3")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("{a} must be positive")));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid("power", format!("{power} must be positive")));
    }
    let n = n as f64;
    Ok((6.0 * (a * n * n.ln()).sqrt() / power).ceil() as u64)
}

/// Which large-`n` hypothesis guards the outage bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutageCondition {
    /// `n / log n >= max{a/P^2, 1/(a lambda^2)}`.
    Gaussian { lambda: f64 },
    /// `n / log n >= a/P^2`.
    Discrete,
}

/// Outage probability bound for a saving phase of length `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageBound {
    /// Unclamped bound value.
    pub raw: f64,
    /// `min(raw, 1)`.
    pub value: f64,
    /// Whether the large-`n` hypothesis holds.
    pub valid: bool,
}

/// Bound on the probability that the intended codeword violates some
/// cumulative energy constraint:
/// `(e^{0.4} / log n) exp(2 log n - (mP/2) sqrt(log n / (a n)))`.
///
/// With `tightened` the prefactor `e^{0.4}` becomes `e^{log n / n}`.
pub fn lemma1_bound(
    m: u64,
    n: u64,
    a: f64,
    power: f64,
    condition: OutageCondition,
    tightened: bool,
) -> Result<OutageBound> {
    if n < 3 {
        return Err(invalid("n", format!("{n} < 3")));
    }
    if !(a > 0.0 && power > 0.0) {
        return Err(invalid("a", "a and power must be positive"));
    }
    let nf = n as f64;
    let log_n = nf.ln();
    let prefactor_exp = if tightened {
        log_n / nf
    } else {
        OUTAGE_PREFACTOR_EXP
    };
    let exponent = prefactor_exp - log_n.ln() + 2.0 * log_n
        - 0.5 * m as f64 * power * (log_n / (a * nf)).sqrt();
    let raw = exponent.exp();
    let ratio = nf / log_n;
    let valid = match condition {
        OutageCondition::Gaussian { lambda } => {
            ratio >= a / (power * power) && ratio >= 1.0 / (a * lambda * lambda)
        }
        OutageCondition::Discrete => ratio >= a / (power * power),
    };
    Ok(OutageBound {
        raw,
        value: raw.min(1.0),
        valid,
    })
}

/// Intermediate quantities of the outage-bound derivation, for inspection.
///
/// `gamma = log n / (a n)` is the Chernoff parameter squared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageChain {
    pub m: u64,
    pub n: u64,
    pub a: f64,
    pub power: f64,
    pub gamma: f64,
}

impl OutageChain {
    pub fn new(m: u64, n: u64, a: f64, power: f64) -> Self {
        let nf = n as f64;
        Self {
            m,
            n,
            a,
            power,
            gamma: nf.ln() / (a * nf),
        }
    }

    /// Log of the second-order Taylor bound on the slot-`k` Chernoff term,
    /// `(1 + sP + a g/2)^k (1 - sP + a g/2)^{m+k}` with `s = sqrt(g)`.
    pub fn log_taylor_term(&self, k: u64) -> f64 {
        let s = self.gamma.sqrt();
        let half = 0.5 * self.a * self.gamma;
        k as f64 * (s * self.power + half).ln_1p()
            + (self.m + k) as f64 * (-s * self.power + half).ln_1p()
    }

    /// Log of the exponential relaxation of [`Self::log_taylor_term`].
    pub fn log_exponential_term(&self, k: u64) -> f64 {
        let s = self.gamma.sqrt();
        let half = 0.5 * self.a * self.gamma;
        k as f64 * (s * self.power + half) + (self.m + k) as f64 * (-s * self.power + half)
    }

    /// Log of the per-slot bound `exp(k a g - (mP/2) sqrt(g))`.
    pub fn log_slot_bound(&self, k: u64) -> f64 {
        k as f64 * self.a * self.gamma - 0.5 * self.m as f64 * self.power * self.gamma.sqrt()
    }

    /// Union bound: the per-slot bounds summed over `k = 1..=n`.
    pub fn union_sum(&self) -> f64 {
        (1..=self.n).map(|k| self.log_slot_bound(k).exp()).sum()
    }

    /// Geometric-series closed form of [`Self::union_sum`].
    pub fn geometric_sum(&self) -> f64 {
        let step = self.a * self.gamma;
        let head = -0.5 * self.m as f64 * self.power * self.gamma.sqrt();
        (head + step).exp() * (step * self.n as f64).exp_m1() / step.exp_m1()
    }

    /// Final closed form, identical to [`lemma1_bound`] with the default prefactor.
    pub fn final_bound(&self) -> f64 {
        let nf = self.n as f64;
        let log_n = nf.ln();
        (OUTAGE_PREFACTOR_EXP - log_n.ln() + 2.0 * log_n
            - 0.5 * self.m as f64 * self.power * (log_n / (self.a * nf)).sqrt())
        .exp()
    }
}

/// `1 + x + x^2 e^x / 2`, an upper bound on `e^x` for `x >= 0`.
pub fn exp_upper(x: f64) -> f64 {
    1.0 + x + 0.5 * x * x * x.exp()
}

/// `1 + x`, a lower bound on `e^x`.
pub fn exp_lower(x: f64) -> f64 {
    1.0 + x
}

/// `1 - x + x^2 / 2`, an upper bound on `e^{-x}` for `x >= 0`.
pub fn exp_neg_upper(x: f64) -> f64 {
    1.0 - x + 0.5 * x * x
}

/// `1 - x`, a lower bound on `e^{-x}`.
pub fn exp_neg_lower(x: f64) -> f64 {
    1.0 - x
}

/// Breakdown of a `log M` lower bound:
/// `first_order - saving_penalty - chebyshev_penalty - threshold_penalty - constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMTerms {
    pub first_order: f64,
    pub saving_penalty: f64,
    pub chebyshev_penalty: f64,
    pub threshold_penalty: f64,
    pub constant: f64,
}

impl LogMTerms {
    pub fn total(&self) -> f64 {
        self.first_order
            - self.saving_penalty
            - self.chebyshev_penalty
            - self.threshold_penalty
            - self.constant
    }
}

/// Terms of the bound over the `n` transmission slots (saving phase not counted).
pub fn theorem1_terms(n: u64, eps: f64, power: f64) -> LogMTerms {
    let nf = n as f64;
    LogMTerms {
        first_order: 0.5 * nf * power.ln_1p(),
        saving_penalty: 0.0,
        chebyshev_penalty: ((2.0 + eps) * nf * power / (eps * (power + 1.0))).sqrt(),
        threshold_penalty: nf.powf(0.25),
        constant: 1.0,
    }
}

/// `(n/2) log(1+P) - sqrt((2+eps) n P / (eps (P+1))) - n^{1/4} - 1`.
pub fn theorem1_log_m(n: u64, eps: f64, power: f64) -> f64 {
    theorem1_terms(n, eps, power).total()
}

/// Terms of the bound expressed in the total blocklength `n* = n + m`.
pub fn theorem1_star_terms(n_star: u64, eps: f64, power: f64, a: f64) -> LogMTerms {
    let ns = n_star as f64;
    let c2 = power.ln_1p();
    LogMTerms {
        first_order: 0.5 * ns * c2,
        saving_penalty: 3.0 * c2 * (a * ns * ns.ln()).sqrt() / power,
        chebyshev_penalty: ((2.0 + eps) * ns * power / (eps * (power + 1.0))).sqrt(),
        threshold_penalty: ns.powf(0.25),
        constant: 0.5 * c2 + 1.0,
    }
}

pub fn theorem1_star_log_m(n_star: u64, eps: f64, power: f64, a: f64) -> f64 {
    theorem1_star_terms(n_star, eps, power, a).total()
}

/// Terms of the discrete-channel bound in the total blocklength `n*`.
pub fn theorem2_terms(
    n_star: u64,
    eps: f64,
    power: f64,
    a: f64,
    capacity: f64,
    dispersion: f64,
) -> LogMTerms {
    let ns = n_star as f64;
    LogMTerms {
        first_order: ns * capacity,
        saving_penalty: 6.0 * capacity * (a * ns * ns.ln()).sqrt() / power,
        chebyshev_penalty: ((2.0 + eps) * ns * dispersion / eps).sqrt(),
        threshold_penalty: ns.powf(0.25),
        constant: capacity + 1.0,
    }
}

pub fn theorem2_log_m(
    n_star: u64,
    eps: f64,
    power: f64,
    a: f64,
    capacity: f64,
    dispersion: f64,
) -> f64 {
    theorem2_terms(n_star, eps, power, a, capacity, dispersion).total()
}

/// The three large-`n` hypotheses and their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    /// `n / log n` large enough for the outage concentration.
    pub concentration: bool,
    /// `n >= (log((2+eps)/eps^2))^4`, so `e^{-n^{1/4}} <= eps^2/(2+eps)`.
    pub union_term: bool,
    /// `n log n >= e^{0.4}(2+eps)/eps`, so the outage bound is at most `eps/(2+eps)`.
    pub outage_term: bool,
    pub overall: bool,
}

impl Validity {
    fn from_parts(concentration: bool, n: u64, eps: f64) -> Self {
        let nf = n as f64;
        let union_term = n >= 3 && nf >= ((2.0 + eps) / (eps * eps)).ln().powi(4);
        let outage_term = n >= 3 && nf * nf.ln() >= OUTAGE_PREFACTOR_EXP.exp() * (2.0 + eps) / eps;
        let concentration = n >= 3 && concentration;
        Self {
            concentration,
            union_term,
            outage_term,
            overall: concentration && union_term && outage_term,
        }
    }
}

/// Large-`n` hypotheses for the Gaussian case, given `E[E^2]`.
pub fn theorem1_validity(n: u64, eps: f64, second_moment: f64, power: f64) -> Validity {
    let nf = n as f64;
    let ratio = nf / nf.ln();
    let concentration = ratio >= (second_moment / (power * power)).max(TILTED_MOMENT_COEF);
    Validity::from_parts(concentration, n, eps)
}

/// Large-`n` hypotheses for the discrete case.
pub fn theorem2_validity(n: u64, eps: f64, a: f64, power: f64) -> Validity {
    let nf = n as f64;
    let concentration = nf / nf.ln() >= a / (power * power);
    Validity::from_parts(concentration, n, eps)
}

/// Evaluated achievability bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Channel uses the rate is normalized by (`n + m`).
    pub blocklength: u64,
    pub log_m_lower: f64,
    pub feasible: bool,
    /// `max(log_m_lower, 0) / blocklength`.
    pub rate_per_use: f64,
    pub validity: Validity,
    pub components: LogMTerms,
}

impl BoundReport {
    pub fn new(terms: LogMTerms, blocklength: u64, validity: Validity) -> Self {
        let log_m = terms.total();
        Self {
            blocklength,
            log_m_lower: log_m,
            feasible: log_m >= 0.0,
            rate_per_use: log_m.max(0.0) / blocklength as f64,
            validity,
            components: terms,
        }
    }
}

/// Save-and-transmit rate at transmission length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EhRate {
    pub n: u64,
    pub m: u64,
    pub log_m: f64,
    pub rate: f64,
    pub feasible: bool,
}

/// `theorem1_log_m(n) / (n + m)` with `m` the saving-phase length; zero when infeasible.
pub fn eh_rate(n: u64, eps: f64, power: f64, a: f64) -> Result<EhRate> {
    check_eps(eps)?;
    let m = saving_phase_length(a, power, n)?;
    let log_m = theorem1_log_m(n, eps, power);
    let feasible = log_m >= 0.0;
    Ok(EhRate {
        n,
        m,
        log_m,
        rate: if feasible {
            log_m / (n + m) as f64
        } else {
            0.0
        },
        feasible,
    })
}

/// Normal approximation without energy harvesting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalApproxReport {
    pub capacity: f64,
    pub dispersion: f64,
    pub rate: f64,
}

/// `C(P) + sqrt(V(P)/n) Phi^{-1}(eps) + log n / (2n)`.
pub fn no_eh_rate(n: u64, eps: f64, power: f64) -> Result<NormalApproxReport> {
    check_eps(eps)?;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let capacity = awgn_capacity(power)?;
    let dispersion = awgn_dispersion(power)?;
    let nf = n as f64;
    let rate =
        capacity + (dispersion / nf).sqrt() * normal::inverse_cdf(eps)? + nf.ln() / (2.0 * nf);
    Ok(NormalApproxReport {
        capacity,
        dispersion,
        rate,
    })
}

/// Log of values above this are not representable as an exact integer `M`.
const EXACT_LOG_LIMIT: f64 = 40.0;

/// Codebook size chosen from the information-density statistics:
/// the integer `M` with `log(M+1) >= T > log M`, where
/// `T = n mean - sqrt((2+eps) n var / eps) - n^{1/4}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookSize {
    /// `log M` (negative infinity when `M = 0`).
    pub log_m: f64,
    /// `M` itself when small enough to represent.
    pub exact: Option<u64>,
}

impl CodebookSize {
    pub fn exact(m: u64) -> Self {
        Self {
            log_m: (m as f64).ln(),
            exact: Some(m),
        }
    }

    pub fn from_log(log_m: f64) -> Self {
        if log_m < EXACT_LOG_LIMIT {
            Self::exact(log_m.exp().round() as u64)
        } else {
            Self { log_m, exact: None }
        }
    }

    /// Size implied by the per-symbol density mean and variance.
    pub fn from_density_moments(n: u64, eps: f64, mean: f64, variance: f64) -> Self {
        let nf = n as f64;
        let target = nf * mean - ((2.0 + eps) * nf * variance / eps).sqrt() - nf.powf(0.25);
        if target > EXACT_LOG_LIMIT {
            // M = ceil(e^T) - 1 differs from e^T by less than e^{-40} in log.
            return Self {
                log_m: target,
                exact: None,
            };
        }
        let m = (target.exp().ceil() - 1.0).max(0.0) as u64;
        Self::exact(m)
    }

    pub fn feasible(&self) -> bool {
        self.exact.is_none_or(|m| m >= 1)
    }
}
