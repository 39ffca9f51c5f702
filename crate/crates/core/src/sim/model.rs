//! Per-symbol channel models used by the simulator.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::awgn_capacity;
use crate::capacity::{
    capacity_cost, info_density_variance, information_density_table, mutual_information,
    DensityTable, COST_TOL,
};
use crate::dmc::DmcSpec;
use crate::error::{invalid, Error, Result};

/// One channel use: input law, energy cost, transition and information density.
pub trait SymbolModel: Sync {
    type Input: Copy + PartialEq + Send + Sync + std::fmt::Debug;
    type Output: Copy + Send + Sync + std::fmt::Debug;

    /// Zero-energy symbol sent while saving or when the battery is short.
    fn idle(&self) -> Self::Input;
    /// Energy drawn from the battery to send `x`.
    fn energy(&self, x: Self::Input) -> f64;
    /// One draw from the codebook input law.
    fn draw_input<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Input;
    /// One pass through the channel.
    fn transmit<R: Rng + ?Sized>(&self, x: Self::Input, rng: &mut R) -> Self::Output;
    /// `log(q(y|x) / p_Y(y))`; negative infinity when `q(y|x) = 0`.
    fn density(&self, x: Self::Input, y: Self::Output) -> f64;
    /// Mean of the per-symbol density under the input law.
    fn density_mean(&self) -> f64;
    /// Variance of the per-symbol density under the input law.
    fn density_variance(&self) -> f64;
}

/// Unit-noise AWGN channel with i.i.d. `N(0, P)` codewords.
///
/// Under this input law the per-symbol density has mean `log(1+P)/2` and
/// variance `P/(1+P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnModel {
    power: f64,
    std_dev: f64,
    half_log: f64,
    capacity: f64,
}

impl AwgnModel {
    pub fn new(power: f64) -> Result<Self> {
        Ok(Self {
            power,
            std_dev: power.sqrt(),
            half_log: 0.5 * power.ln_1p(),
            capacity: awgn_capacity(power)?,
        })
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

impl SymbolModel for AwgnModel {
    type Input = f64;
    type Output = f64;

    fn idle(&self) -> f64 {
        0.0
    }

    fn energy(&self, x: f64) -> f64 {
        x * x
    }

    fn draw_input<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.std_dev * z
    }

    fn transmit<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        x + z
    }

    fn density(&self, x: f64, y: f64) -> f64 {
        let d = y - x;
        self.half_log + y * y / (2.0 * (1.0 + self.power)) - 0.5 * d * d
    }

    fn density_mean(&self) -> f64 {
        self.capacity
    }

    fn density_variance(&self) -> f64 {
        self.power / (1.0 + self.power)
    }
}

/// Discrete channel with an i.i.d. codebook input law.
#[derive(Debug, Clone)]
pub struct DmcModel {
    spec: DmcSpec,
    input_dist: Vec<f64>,
    input_sampler: WeightedIndex<f64>,
    row_samplers: Vec<WeightedIndex<f64>>,
    table: DensityTable,
    mean: f64,
    variance: f64,
}

impl DmcModel {
    pub fn new(spec: DmcSpec, input_dist: Vec<f64>) -> Result<Self> {
        let table = information_density_table(&spec, &input_dist)?;
        let mean = mutual_information(&spec, &input_dist)?;
        let variance = info_density_variance(&spec, &input_dist)?;
        let input_sampler =
            WeightedIndex::new(&input_dist).map_err(|e| Error::NotOnSimplex(e.to_string()))?;
        let row_samplers = spec
            .transition
            .iter()
            .map(|row| WeightedIndex::new(row).map_err(|e| Error::MalformedChannel(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            input_dist,
            input_sampler,
            row_samplers,
            table,
            mean,
            variance,
        })
    }

    /// Model whose input law is the capacity-cost maximizer at `power`.
    pub fn at_cost(spec: DmcSpec, power: f64) -> Result<Self> {
        if !(power > 0.0) {
            return Err(invalid("power", format!("{power} must be positive")));
        }
        let opt = capacity_cost(&spec, power, COST_TOL)?;
        Self::new(spec, opt.input_dist)
    }

    pub fn spec(&self) -> &DmcSpec {
        &self.spec
    }

    pub fn input_dist(&self) -> &[f64] {
        &self.input_dist
    }
}

impl SymbolModel for DmcModel {
    type Input = usize;
    type Output = usize;

    fn idle(&self) -> usize {
        self.spec.idle_symbol()
    }

    fn energy(&self, x: usize) -> f64 {
        self.spec.cost[x]
    }

    fn draw_input<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.input_sampler.sample(rng)
    }

    fn transmit<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.row_samplers[x].sample(rng)
    }

    fn density(&self, x: usize, y: usize) -> f64 {
        self.table.score(x, y)
    }

    fn density_mean(&self) -> f64 {
        self.mean
    }

    fn density_variance(&self) -> f64 {
        self.variance
    }
}
