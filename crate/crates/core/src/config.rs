//! Gaussian energy-harvesting scenario parameters.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    concentration_constant_awgn, gaussian_tilted_fourth_moment, saving_phase_length,
};
use crate::energy::EnergyProcess;
use crate::error::{invalid, Error, Result};

/// Save-and-transmit scenario over the AWGN channel.
///
/// `lambda`, `a` and `m` default to `1/(4P)`, `max{E[E^2], 12 sqrt(2) P^2}`
/// and the saving-phase length for `(a, P, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AwgnEhConfigRepr")]
pub struct AwgnEhConfig {
    pub n: u64,
    pub eps: f64,
    pub power: f64,
    pub energy: EnergyProcess,
    pub lambda: f64,
    pub a: f64,
    pub m: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AwgnEhConfigRepr {
    n: u64,
    eps: f64,
    #[serde(default)]
    power: Option<f64>,
    energy: EnergyProcess,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    m: Option<u64>,
}

impl TryFrom<AwgnEhConfigRepr> for AwgnEhConfig {
    type Error = Error;

    fn try_from(r: AwgnEhConfigRepr) -> Result<Self> {
        let power = r.power.unwrap_or(r.energy.mean);
        AwgnEhConfig::build(r.n, r.eps, power, r.energy, r.lambda, r.a, r.m)
    }
}

impl AwgnEhConfig {
    /// Scenario with all derived parameters at their defaults and `P = E[E_1]`.
    pub fn new(n: u64, eps: f64, energy: EnergyProcess) -> Result<Self> {
        let power = energy.mean;
        Self::build(n, eps, power, energy, None, None, None)
    }

    pub fn build(
        n: u64,
        eps: f64,
        power: f64,
        energy: EnergyProcess,
        lambda: Option<f64>,
        a: Option<f64>,
        m: Option<u64>,
    ) -> Result<Self> {
        if n < 3 {
            return Err(invalid("n", format!("{n} < 3")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("{eps} not in (0, 1)")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("power", format!("{power} must be positive")));
        }
        let (lambda, a) = match (lambda, a) {
            (_, Some(a)) if !(a > 0.0 && a.is_finite()) => {
                return Err(invalid("a", format!("{a} must be positive")))
            }
            (Some(l), _) if !(l > 0.0 && l.is_finite()) => {
                return Err(invalid("lambda", format!("{l} must be positive")))
            }
            (Some(l), Some(a)) => (l, a),
            (Some(l), None) => {
                let tilted = gaussian_tilted_fourth_moment(power, l)?;
                (l, energy.second_moment.max(tilted))
            }
            (None, Some(a)) => (1.0 / (4.0 * power), a),
            (None, None) => {
                let c = concentration_constant_awgn(&energy, power)?;
                (c.lambda, c.a)
            }
        };
        let m = match m {
            Some(m) => m,
            None => saving_phase_length(a, power, n)?,
        };
        Ok(Self {
            n,
            eps,
            power,
            energy,
            lambda,
            a,
            m,
        })
    }

    /// Total blocklength `n + m`.
    pub fn n_star(&self) -> u64 {
        self.n + self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::TILTED_MOMENT_COEF;
    use crate::energy::{make_energy_process, EnergyKind};

    #[test]
    fn defaults() {
        let e = make_energy_process(EnergyKind::Exponential, 1.0, &[]).unwrap();
        let c = AwgnEhConfig::new(10_000, 0.1, e).unwrap();
        assert_eq!(c.lambda, 0.25);
        assert!((c.a - TILTED_MOMENT_COEF).abs() < 1e-12);
        assert!(c.a >= c.energy.second_moment);
        assert_eq!(c.m, 7502);
        assert_eq!(c.n_star(), 17_502);
    }

    #[test]
    fn json_defaults_and_overrides() {
        let text = r#"{"n":100,"eps":0.5,"energy":{"kind":"constant","mean":2.0},"m":5}"#;
        let c: AwgnEhConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.power, 2.0);
        assert_eq!(c.m, 5);
        let back: AwgnEhConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"n":100,"eps":1.5,"energy":{"kind":"constant","mean":2.0}}"#;
        assert!(serde_json::from_str::<AwgnEhConfig>(bad).is_err());
        let mismatch = r#"{"n":100,"eps":0.5,"power":1.0,"energy":{"kind":"constant","mean":2.0}}"#;
        assert!(serde_json::from_str::<AwgnEhConfig>(mismatch).is_err());
    }

    #[test]
    fn custom_lambda_sets_a() {
        let e = make_energy_process(EnergyKind::Constant, 1.0, &[]).unwrap();
        let c = AwgnEhConfig::build(100, 0.5, 1.0, e, Some(0.1), None, None).unwrap();
        assert!((c.a - 3.0 * 0.8f64.powf(-2.5)).abs() < 1e-12);
    }
}
