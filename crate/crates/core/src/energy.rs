//! I.i.d. energy-arrival laws.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::seed::seeded_rng;

/// Arrival law of the per-slot harvested energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyKind {
    /// Every slot delivers exactly `mean`. No params.
    Constant,
    /// Exponential with the given mean. No params.
    Exponential,
    /// `mean / q` with probability `q`, otherwise 0. Params: `[q]`.
    ScaledBernoulli,
    /// `high` with the probability that matches `mean`, otherwise `low`. Params: `[low, high]`.
    TwoPoint,
    /// Gaussian truncated at zero and renormalized; the parent location is
    /// solved so the truncated mean equals `mean`. Params: `[sigma]`.
    TruncatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Constant(f64),
    Exponential(f64),
    Bernoulli {
        prob: f64,
        level: f64,
    },
    TwoPoint {
        low: f64,
        high: f64,
        prob_high: f64,
    },
    /// Standardized truncation point `alpha = -location / sigma`.
    TruncGauss {
        location: f64,
        sigma: f64,
        alpha: f64,
    },
}

/// An i.i.d. nonnegative energy-arrival process.
///
/// Immutable after construction. Sampling always takes an explicit seed or RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnergyProcessRepr")]
pub struct EnergyProcess {
    pub kind: EnergyKind,
    pub mean: f64,
    pub second_moment: f64,
    pub params: Vec<f64>,
    #[serde(skip)]
    law: Law,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnergyProcessRepr {
    kind: EnergyKind,
    mean: f64,
    #[serde(default)]
    second_moment: Option<f64>,
    #[serde(default)]
    params: Vec<f64>,
}

impl TryFrom<EnergyProcessRepr> for EnergyProcess {
    type Error = Error;

    fn try_from(repr: EnergyProcessRepr) -> Result<Self> {
        let proc = make_energy_process(repr.kind, repr.mean, &repr.params)?;
        if let Some(stated) = repr.second_moment {
            let tol = 1e-9 * proc.second_moment.abs().max(1.0);
            if !((stated - proc.second_moment).abs() <= tol) {
                return Err(invalid(
                    "second_moment",
                    format!(
                        "stated {stated} disagrees with {} implied by the law",
                        proc.second_moment
                    ),
                ));
            }
        }
        Ok(proc)
    }
}

fn expect_params(kind: EnergyKind, params: &[f64], count: usize) -> Result<()> {
    if params.len() != count {
        return Err(invalid(
            "params",
            format!("{kind:?} takes {count} parameter(s), got {}", params.len()),
        ));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(invalid("params", "parameters must be finite"));
    }
    Ok(())
}

/// Mills-type hazard `phi(alpha) / Pr{Z > alpha}` of the standard normal.
fn normal_hazard(alpha: f64) -> f64 {
    if alpha < 25.0 {
        return normal::pdf(alpha) / normal::tail(alpha);
    }
    // Continued fraction for the Mills ratio, evaluated bottom-up.
    let mut frac = alpha;
    for k in (1..=60).rev() {
        frac = alpha + k as f64 / frac;
    }
    frac
}

/// Truncated mean, in units of sigma, as a function of the standardized location.
fn truncated_mean_std(loc_std: f64) -> f64 {
    loc_std + normal_hazard(-loc_std)
}

/// Builds an arrival process with the given mean and law parameters.
pub fn make_energy_process(kind: EnergyKind, mean: f64, params: &[f64]) -> Result<EnergyProcess> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(invalid("mean", format!("{mean} must be finite and >= 0")));
    }
    let (law, second_moment) = match kind {
        EnergyKind::Constant => {
            expect_params(kind, params, 0)?;
            (Law::Constant(mean), mean * mean)
        }
        EnergyKind::Exponential => {
            expect_params(kind, params, 0)?;
            (Law::Exponential(mean), 2.0 * mean * mean)
        }
        EnergyKind::ScaledBernoulli => {
            expect_params(kind, params, 1)?;
            let q = params[0];
            if !(q > 0.0 && q <= 1.0) {
                return Err(invalid(
                    "params",
                    format!("bernoulli probability {q} not in (0, 1]"),
                ));
            }
            let level = mean / q;
            (Law::Bernoulli { prob: q, level }, q * level * level)
        }
        EnergyKind::TwoPoint => {
            expect_params(kind, params, 2)?;
            let (low, high) = (params[0], params[1]);
            if low < 0.0 {
                return Err(invalid(
                    "params",
                    format!("two-point mass {low} is negative"),
                ));
            }
            if !(low < high) {
                return Err(invalid(
                    "params",
                    format!("need low < high, got {low}, {high}"),
                ));
            }
            if !(low..=high).contains(&mean) {
                return Err(invalid(
                    "mean",
                    format!("{mean} not within [{low}, {high}]"),
                ));
            }
            let prob_high = (mean - low) / (high - low);
            let second = (1.0 - prob_high) * low * low + prob_high * high * high;
            (
                Law::TwoPoint {
                    low,
                    high,
                    prob_high,
                },
                second,
            )
        }
        EnergyKind::TruncatedGaussian => {
            expect_params(kind, params, 1)?;
            let sigma = params[0];
            if !(sigma > 0.0) {
                return Err(invalid("params", format!("sigma {sigma} must be positive")));
            }
            let target = mean / sigma;
            if !(1e-4..=1e6).contains(&target) {
                return Err(invalid(
                    "mean",
                    format!("mean/sigma = {target} outside supported range [1e-4, 1e6]"),
                ));
            }
            // truncated_mean_std is increasing; it is ~1/|x| far left and ~x far right.
            let (mut lo, mut hi) = (-2.0 / target - 10.0, target);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if truncated_mean_std(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let loc_std = 0.5 * (lo + hi);
            let location = loc_std * sigma;
            let alpha = -loc_std;
            let h = normal_hazard(alpha);
            let second = location * location + location * sigma * h + sigma * sigma;
            (
                Law::TruncGauss {
                    location,
                    sigma,
                    alpha,
                },
                second,
            )
        }
    };
    Ok(EnergyProcess {
        kind,
        mean,
        second_moment,
        params: params.to_vec(),
        law,
    })
}

impl EnergyProcess {
    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }

    /// Draws one arrival.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.law {
            Law::Constant(v) => v,
            Law::Exponential(mean) => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            Law::Bernoulli { prob, level } => {
                if rng.random::<f64>() < prob {
                    level
                } else {
                    0.0
                }
            }
            Law::TwoPoint {
                low,
                high,
                prob_high,
            } => {
                if rng.random::<f64>() < prob_high {
                    high
                } else {
                    low
                }
            }
            Law::TruncGauss {
                location,
                sigma,
                alpha,
            } => {
                let y = sample_std_truncated(alpha, rng);
                (location + sigma * y).max(0.0)
            }
        }
    }

    /// Fills `out` with i.i.d. arrivals.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for slot in out.iter_mut() {
            *slot = self.sample(rng);
        }
    }
}

/// Standard normal conditioned on `Z > alpha`.
fn sample_std_truncated<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha <= 5.0 {
        let upper = normal::tail(alpha);
        // (0, 1] so the tail argument never hits 0.
        let v = 1.0 - rng.random::<f64>();
        return normal::inverse_tail(v * upper).max(alpha);
    }
    // Exponential-proposal rejection for the far tail.
    let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = alpha + e / rate;
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() {
            return z;
        }
    }
}

/// Draws `count` i.i.d. arrivals from the seeded stream.
pub fn sample_arrivals(proc: &EnergyProcess, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(invalid("count", "must be at least 1"));
    }
    let mut rng = seeded_rng(seed);
    let mut out = vec![0.0; count];
    proc.fill(&mut rng, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_second_moments() {
        let c = make_energy_process(EnergyKind::Constant, 1.0, &[]).unwrap();
        assert_eq!(c.second_moment, 1.0);
        let e = make_energy_process(EnergyKind::Exponential, 3.0, &[]).unwrap();
        assert_eq!(e.second_moment, 18.0);
        let b = make_energy_process(EnergyKind::ScaledBernoulli, 2.0, &[0.25]).unwrap();
        // q (P/q)^2 = P^2 / q
        assert!((b.second_moment - 16.0).abs() < 1e-12);
        let t = make_energy_process(EnergyKind::TwoPoint, 1.0, &[0.0, 4.0]).unwrap();
        assert!((t.second_moment - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_energy_process(EnergyKind::Constant, -1.0, &[]).is_err());
        assert!(make_energy_process(EnergyKind::Constant, f64::NAN, &[]).is_err());
        assert!(make_energy_process(EnergyKind::Exponential, 1.0, &[1.0]).is_err());
        assert!(make_energy_process(EnergyKind::ScaledBernoulli, 1.0, &[0.0]).is_err());
        assert!(make_energy_process(EnergyKind::ScaledBernoulli, 1.0, &[1.5]).is_err());
        assert!(make_energy_process(EnergyKind::TwoPoint, 1.0, &[-1.0, 3.0]).is_err());
        assert!(make_energy_process(EnergyKind::TwoPoint, 5.0, &[0.0, 3.0]).is_err());
        assert!(make_energy_process(EnergyKind::TruncatedGaussian, 1.0, &[0.0]).is_err());
        assert!(make_energy_process(EnergyKind::TruncatedGaussian, 0.0, &[1.0]).is_err());
    }

    #[test]
    fn truncated_gaussian_hits_target_mean() {
        for &(mean, sigma) in &[(1.0, 0.1), (1.0, 1.0), (1.0, 10.0), (0.5, 200.0)] {
            let p = make_energy_process(EnergyKind::TruncatedGaussian, mean, &[sigma]).unwrap();
            let Law::TruncGauss {
                location,
                sigma,
                alpha,
            } = p.law
            else {
                unreachable!()
            };
            let implied = location + sigma * normal_hazard(alpha);
            assert!(
                (implied - mean).abs() < 1e-9 * mean.max(1.0),
                "{mean} {sigma}"
            );
            assert!(p.second_moment >= mean * mean);
        }
    }

    #[test]
    fn hazard_branches_agree() {
        // The continued fraction and the direct ratio overlap near the switch.
        for &a in &[20.0, 24.0] {
            let direct = normal::pdf(a) / normal::tail(a);
            let mut frac = a;
            for k in (1..=60).rev() {
                frac = a + k as f64 / frac;
            }
            assert!(((direct - frac) / direct).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_samples() {
        let c = make_energy_process(EnergyKind::Constant, 2.0, &[]).unwrap();
        assert_eq!(sample_arrivals(&c, 3, 1).unwrap(), vec![2.0, 2.0, 2.0]);
        assert!(sample_arrivals(&c, 0, 1).is_err());
    }

    #[test]
    fn json_roundtrip_reproduces_samples() {
        let p = make_energy_process(EnergyKind::TruncatedGaussian, 1.3, &[2.0]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let q: EnergyProcess = serde_json::from_str(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(
            sample_arrivals(&p, 100, 9).unwrap(),
            sample_arrivals(&q, 100, 9).unwrap()
        );
    }

    #[test]
    fn json_rejects_inconsistent_second_moment() {
        let text = r#"{"kind":"exponential","mean":1.0,"second_moment":1.0,"params":[]}"#;
        assert!(serde_json::from_str::<EnergyProcess>(text).is_err());
        let ok = r#"{"kind":"exponential","mean":1.0}"#;
        assert_eq!(
            serde_json::from_str::<EnergyProcess>(ok)
                .unwrap()
                .second_moment,
            2.0
        );
    }
}
