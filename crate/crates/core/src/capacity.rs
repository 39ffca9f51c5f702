//! Capacity-cost function and dispersion of a discrete memoryless channel.
//!
//! The equality-constrained maximization of mutual information is solved by
//! a Blahut–Arimoto iteration tilted by a cost multiplier `s`, with an outer
//! bisection on `s` until the expected cost matches the target.

use serde::{Deserialize, Serialize};

use crate::dmc::DmcSpec;
use crate::error::{Error, Result};

/// Sup-norm stopping tolerance for the inner iteration.
pub const BA_TOL: f64 = 1e-12;
/// Cost-matching tolerance for the outer bisection.
pub const COST_TOL: f64 = 1e-9;
/// Inner iteration cap.
pub const BA_MAX_ITER: usize = 100_000;

const SIMPLEX_TOL: f64 = 1e-9;

fn check_distribution(spec: &DmcSpec, dist: &[f64]) -> Result<()> {
    if dist.len() != spec.input_size {
        return Err(Error::NotOnSimplex(format!(
            "length {} but the channel has {} inputs",
            dist.len(),
            spec.input_size
        )));
    }
    if let Some(bad) = dist.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(Error::NotOnSimplex(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotOnSimplex(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// `p_Y(y) = sum_x p(x) q(y|x)`.
pub fn output_marginal(spec: &DmcSpec, dist: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; spec.output_size];
    for (px, row) in dist.iter().zip(&spec.transition) {
        if *px == 0.0 {
            continue;
        }
        for (o, q) in out.iter_mut().zip(row) {
            *o += px * q;
        }
    }
    out
}

/// Per-pair information density `log(q(y|x) / p_Y(y))`.
///
/// Pairs with `q(y|x) = 0` are unused and stored as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    entries: Vec<Vec<Option<f64>>>,
}

impl DensityTable {
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.entries[x][y]
    }

    /// Density with unused pairs mapped to negative infinity, as a decoder sees them.
    pub fn score(&self, x: usize, y: usize) -> f64 {
        self.entries[x][y].unwrap_or(f64::NEG_INFINITY)
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.entries
    }
}

fn density_rows(spec: &DmcSpec, marginal: &[f64]) -> Vec<Vec<Option<f64>>> {
    spec.transition
        .iter()
        .map(|row| {
            row.iter()
                .zip(marginal)
                .map(|(&q, &py)| {
                    if q == 0.0 {
                        None
                    } else if py == 0.0 {
                        Some(f64::INFINITY)
                    } else {
                        Some((q / py).ln())
                    }
                })
                .collect()
        })
        .collect()
}

pub fn information_density_table(spec: &DmcSpec, dist: &[f64]) -> Result<DensityTable> {
    check_distribution(spec, dist)?;
    let marginal = output_marginal(spec, dist);
    Ok(DensityTable {
        entries: density_rows(spec, &marginal),
    })
}

/// Mean and variance of the information density under `p_X q_{Y|X}`.
fn density_moments(spec: &DmcSpec, dist: &[f64]) -> Result<(f64, f64)> {
    let table = information_density_table(spec, dist)?;
    let mut used = (0..spec.input_size).filter(|&x| dist[x] > 0.0);
    if let Some(first) = used.next() {
        if used.all(|x| spec.transition[x] == spec.transition[first]) {
            return Ok((0.0, 0.0));
        }
    }
    let mut mean = 0.0;
    for (x, px) in dist.iter().enumerate() {
        if *px == 0.0 {
            continue;
        }
        for (y, q) in spec.transition[x].iter().enumerate() {
            if let Some(d) = table.get(x, y) {
                mean += px * q * d;
            }
        }
    }
    let mut var = 0.0;
    for (x, px) in dist.iter().enumerate() {
        if *px == 0.0 {
            continue;
        }
        for (y, q) in spec.transition[x].iter().enumerate() {
            if let Some(d) = table.get(x, y) {
                var += px * q * (d - mean).powi(2);
            }
        }
    }
    Ok((mean, var))
}

/// `I(X;Y)` in nats.
pub fn mutual_information(spec: &DmcSpec, dist: &[f64]) -> Result<f64> {
    density_moments(spec, dist).map(|(m, _)| m)
}

/// Variance of the information density, in nats squared.
pub fn info_density_variance(spec: &DmcSpec, dist: &[f64]) -> Result<f64> {
    density_moments(spec, dist).map(|(_, v)| v)
}

pub fn expected_cost(spec: &DmcSpec, dist: &[f64]) -> f64 {
    dist.iter().zip(&spec.cost).map(|(p, c)| p * c).sum()
}

/// Single-stepping tilted Blahut–Arimoto iteration at a fixed multiplier.
#[derive(Debug, Clone)]
pub struct TiltedBa<'a> {
    spec: &'a DmcSpec,
    multiplier: f64,
    dist: Vec<f64>,
    divergence: Vec<f64>,
}

impl<'a> TiltedBa<'a> {
    /// Starts from the uniform input distribution.
    pub fn new(spec: &'a DmcSpec, multiplier: f64) -> Self {
        let k = spec.input_size;
        Self::with_start(spec, multiplier, vec![1.0 / k as f64; k])
    }

    pub fn with_start(spec: &'a DmcSpec, multiplier: f64, dist: Vec<f64>) -> Self {
        let mut ba = Self {
            spec,
            multiplier,
            dist,
            divergence: vec![0.0; spec.input_size],
        };
        ba.refresh_divergence();
        ba
    }

    fn reset(&mut self, dist: Vec<f64>) {
        self.dist = dist;
        self.refresh_divergence();
    }

    /// `D(q(.|x) || p_Y)` for every input under the current distribution.
    fn refresh_divergence(&mut self) {
        let marginal = output_marginal(self.spec, &self.dist);
        for (d, row) in self.divergence.iter_mut().zip(&self.spec.transition) {
            *d = row
                .iter()
                .zip(&marginal)
                .filter(|(q, _)| **q > 0.0)
                .map(|(q, py)| q * (q / py).ln())
                .sum();
        }
    }

    pub fn distribution(&self) -> &[f64] {
        &self.dist
    }

    /// Mutual information at the current iterate.
    pub fn mutual_information(&self) -> f64 {
        self.dist
            .iter()
            .zip(&self.divergence)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, d)| p * d)
            .sum()
    }

    pub fn expected_cost(&self) -> f64 {
        expected_cost(self.spec, &self.dist)
    }

    /// `I - s E[c]`, the quantity each step does not decrease.
    pub fn objective(&self) -> f64 {
        self.mutual_information() - self.multiplier * self.expected_cost()
    }

    /// One multiplicative update; returns the sup-norm change.
    pub fn step(&mut self) -> f64 {
        let s = self.multiplier;
        let logw: Vec<f64> = self
            .dist
            .iter()
            .zip(&self.divergence)
            .zip(&self.spec.cost)
            .map(|((p, d), c)| {
                if *p > 0.0 {
                    p.ln() + d - s * c
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut change = 0.0f64;
        for (p, w) in self.dist.iter_mut().zip(&weights) {
            let next = w / total;
            change = change.max((next - *p).abs());
            *p = next;
        }
        self.refresh_divergence();
        change
    }
}

/// Fixed point of the tilted iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltedOutcome {
    pub input_dist: Vec<f64>,
    pub mutual_information: f64,
    pub expected_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs the tilted iteration from the uniform distribution until the
/// sup-norm change drops below `tol` or `max_iter` steps have been taken.
/// A non-converged run still returns its last iterate.
pub fn blahut_arimoto_tilted(
    spec: &DmcSpec,
    multiplier: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TiltedOutcome> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid("tol", "must be positive"));
    }
    if max_iter == 0 {
        return Err(crate::error::invalid("max_iter", "must be at least 1"));
    }
    if multiplier.is_nan() {
        return Err(crate::error::invalid("multiplier", "NaN"));
    }
    iterate(TiltedBa::new(spec, multiplier), tol, max_iter)
}

/// Plain steps interleaved with squared extrapolation along the last two
/// steps; an extrapolated point is kept only if it stays inside the simplex
/// and does not lower the objective.
fn iterate(mut ba: TiltedBa<'_>, tol: f64, max_iter: usize) -> Result<TiltedOutcome> {
    let mut iterations = 0;
    let mut converged = false;
    'outer: while iterations < max_iter {
        let p0 = ba.dist.clone();
        iterations += 1;
        let first = ba.step();
        let mid = ba.dist.clone();
        iterations += 1;
        let second = ba.step();
        // Distance to the fixed point estimated from the contraction ratio.
        let ratio = second / first;
        if second < tol && (ratio < 1.0 && second * ratio / (1.0 - ratio) < tol || second == 0.0) {
            converged = true;
            break;
        }
        let p2 = ba.dist.clone();
        let base = ba.objective();
        let r: Vec<f64> = mid.iter().zip(&p0).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = p2
            .iter()
            .zip(&mid)
            .zip(&r)
            .map(|((c, b), r)| c - b - r)
            .collect();
        let norm = |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().sqrt();
        let (nr, nv) = (norm(&r), norm(&v));
        if !(nv > 0.0) {
            continue;
        }
        let mut alpha = (-nr / nv).min(-1.0);
        while alpha < -1.0 - 1e-3 {
            let cand: Vec<f64> = p0
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((p, r), v)| p - 2.0 * alpha * r + alpha * alpha * v)
                .collect();
            if cand.iter().all(|&c| c > 0.0) {
                let total: f64 = cand.iter().sum();
                ba.reset(cand.iter().map(|c| c / total).collect());
                if ba.objective() >= base {
                    continue 'outer;
                }
            }
            alpha = 0.5 * (alpha - 1.0);
        }
        ba.reset(p2);
    }
    Ok(TiltedOutcome {
        mutual_information: ba.mutual_information(),
        expected_cost: ba.expected_cost(),
        input_dist: ba.dist,
        iterations,
        converged,
    })
}

/// Capacity-cost point `C(P)` and the dispersion at its maximizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityCostResult {
    pub input_dist: Vec<f64>,
    pub capacity: f64,
    pub dispersion: f64,
    /// Lagrange multiplier; infinite when the target sits at an end of the cost range.
    pub multiplier: f64,
    pub achieved_cost: f64,
    pub iterations: usize,
    /// Set when the result is a mixture of two fixed points, either because
    /// the maximizer is not unique or because the cost is too sensitive to
    /// the multiplier to bisect to tolerance. The dispersion is then that of
    /// one near-maximizer, not necessarily the largest.
    pub dispersion_caveat: bool,
}

fn finish(
    spec: &DmcSpec,
    input_dist: Vec<f64>,
    multiplier: f64,
    iterations: usize,
    dispersion_caveat: bool,
) -> Result<CapacityCostResult> {
    let (capacity, dispersion) = density_moments(spec, &input_dist)?;
    Ok(CapacityCostResult {
        achieved_cost: expected_cost(spec, &input_dist),
        capacity: capacity.max(0.0),
        dispersion: dispersion.max(0.0),
        input_dist,
        multiplier,
        iterations,
        dispersion_caveat,
    })
}

/// Maximizer restricted to the inputs with cost equal to `level`.
fn restricted_optimum(spec: &DmcSpec, level: f64, multiplier: f64) -> Result<CapacityCostResult> {
    let keep: Vec<usize> = (0..spec.input_size)
        .filter(|&x| spec.cost[x] == level)
        .collect();
    let sub = DmcSpec {
        input_size: keep.len(),
        output_size: spec.output_size,
        transition: keep.iter().map(|&x| spec.transition[x].clone()).collect(),
        cost: vec![0.0; keep.len()],
    };
    let out = blahut_arimoto_tilted(&sub, 0.0, BA_TOL, BA_MAX_ITER)?;
    let mut dist = vec![0.0; spec.input_size];
    for (&x, p) in keep.iter().zip(&out.input_dist) {
        dist[x] = *p;
    }
    finish(spec, dist, multiplier, out.iterations, false)
}

/// Every input law gives zero information when the output ignores the
/// input; returns the cheapest/dearest mixture meeting the target.
fn input_independent(spec: &DmcSpec, target: f64) -> Result<CapacityCostResult> {
    let argmin = (0..spec.input_size)
        .min_by(|&a, &b| spec.cost[a].total_cmp(&spec.cost[b]))
        .unwrap_or(0);
    let argmax = (0..spec.input_size)
        .max_by(|&a, &b| spec.cost[a].total_cmp(&spec.cost[b]))
        .unwrap_or(0);
    let mut dist = vec![0.0; spec.input_size];
    let span = spec.cost[argmax] - spec.cost[argmin];
    if span > 0.0 {
        let w = (target - spec.cost[argmin]) / span;
        dist[argmax] += w;
        dist[argmin] += 1.0 - w;
    } else {
        dist[argmin] = 1.0;
    }
    finish(spec, dist, 0.0, 0, false)
}

/// Computes `C(P) = max { I(X;Y) : E[c(X)] = P }`.
pub fn capacity_cost(spec: &DmcSpec, target: f64, tol: f64) -> Result<CapacityCostResult> {
    let (min_c, max_c) = (spec.min_cost(), spec.max_cost());
    if !(target >= min_c && target <= max_c) {
        return Err(Error::CostOutOfRange {
            target,
            min: min_c,
            max: max_c,
        });
    }
    if !(tol > 0.0) {
        return Err(crate::error::invalid("tol", "must be positive"));
    }
    if spec.transition.iter().all(|row| *row == spec.transition[0]) {
        return input_independent(spec, target);
    }
    if target == min_c {
        return restricted_optimum(spec, min_c, f64::INFINITY);
    }
    if target == max_c {
        return restricted_optimum(spec, max_c, f64::NEG_INFINITY);
    }

    let solve = |s: f64| blahut_arimoto_tilted(spec, s, BA_TOL, BA_MAX_ITER);
    let mut iterations = 0;

    let at_zero = solve(0.0)?;
    iterations += at_zero.iterations;
    if (at_zero.expected_cost - target).abs() <= tol {
        return finish(spec, at_zero.input_dist, 0.0, iterations, false);
    }

    // Expected cost decreases in s. `high` holds cost >= target, `low` cost <= target.
    let (mut high, mut low);
    let mut step = 1.0;
    if at_zero.expected_cost > target {
        high = (0.0, at_zero);
        loop {
            let trial = solve(step)?;
            iterations += trial.iterations;
            if trial.expected_cost <= target {
                low = (step, trial);
                break;
            }
            high = (step, trial);
            step *= 2.0;
            if step > 1e12 {
                return Err(Error::BracketFailure { target });
            }
        }
    } else {
        low = (0.0, at_zero);
        loop {
            let trial = solve(-step)?;
            iterations += trial.iterations;
            if trial.expected_cost >= target {
                high = (-step, trial);
                break;
            }
            low = (-step, trial);
            step *= 2.0;
            if step > 1e12 {
                return Err(Error::BracketFailure { target });
            }
        }
    }

    for _ in 0..200 {
        if (high.1.expected_cost - target).abs() <= tol {
            return finish(spec, high.1.input_dist, high.0, iterations, false);
        }
        if (low.1.expected_cost - target).abs() <= tol {
            return finish(spec, low.1.input_dist, low.0, iterations, false);
        }
        let mid = 0.5 * (high.0 + low.0);
        if mid == high.0 || mid == low.0 {
            break;
        }
        let trial = solve(mid)?;
        iterations += trial.iterations;
        if trial.expected_cost >= target {
            high = (mid, trial);
        } else {
            low = (mid, trial);
        }
    }

    // The cost jumps across the multiplier: mix the two sides to meet the target.
    let (ch, cl) = (high.1.expected_cost, low.1.expected_cost);
    let theta = if ch > cl {
        (target - cl) / (ch - cl)
    } else {
        0.5
    };
    let mixed: Vec<f64> = high
        .1
        .input_dist
        .iter()
        .zip(&low.1.input_dist)
        .map(|(h, l)| theta * h + (1.0 - theta) * l)
        .collect();
    finish(spec, mixed, 0.5 * (high.0 + low.0), iterations, true)
}
