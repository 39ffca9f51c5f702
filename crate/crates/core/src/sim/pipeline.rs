//! Encode / clip / transmit / score steps of one save-and-transmit trial.

use rand::Rng;

use super::model::SymbolModel;
use crate::error::{Error, Result};
use crate::seed::seeded_rng;

/// `n` i.i.d. codeword symbols for the transmission phase.
pub fn draw_codeword<M: SymbolModel, R: Rng + ?Sized>(
    model: &M,
    n: usize,
    rng: &mut R,
) -> Vec<M::Input> {
    (0..n).map(|_| model.draw_input(rng)).collect()
}

/// Seeded form of [`draw_codeword`].
pub fn draw_intended_codeword<M: SymbolModel>(model: &M, n: usize, seed: u64) -> Vec<M::Input> {
    draw_codeword(model, n, &mut seeded_rng(seed))
}

/// Intended length-`m + n` codeword: `m` idle symbols, then `codeword`.
pub fn with_saving_prefix<M: SymbolModel>(
    model: &M,
    m: usize,
    codeword: &[M::Input],
) -> Vec<M::Input> {
    let mut full = vec![model.idle(); m];
    full.extend_from_slice(codeword);
    full
}

/// Sends each intended symbol only if the battery covers it, else the idle
/// symbol. The battery is everything harvested so far minus everything
/// actually spent, so the output meets every cumulative energy constraint.
pub fn clip_to_energy<M: SymbolModel>(
    model: &M,
    intended: &[M::Input],
    arrivals: &[f64],
) -> Result<Vec<M::Input>> {
    if intended.len() != arrivals.len() {
        return Err(Error::LengthMismatch {
            expected: intended.len(),
            got: arrivals.len(),
        });
    }
    let idle = model.idle();
    let mut harvested = 0.0;
    let mut spent = 0.0;
    let out = intended
        .iter()
        .zip(arrivals)
        .map(|(&x, &e)| {
            harvested += e;
            let cost = model.energy(x);
            if spent + cost <= harvested {
                spent += cost;
                x
            } else {
                idle
            }
        })
        .collect();
    Ok(out)
}

/// Whether some prefix of the transmission-phase energy exceeds what has
/// arrived by then, counting the `m` saving slots.
///
/// Uses the same accumulation order as [`clip_to_energy`], so the result is
/// `true` exactly when clipping changes the prefixed codeword.
pub fn detect_outage<M: SymbolModel>(
    model: &M,
    codeword: &[M::Input],
    arrivals: &[f64],
    m: usize,
) -> Result<bool> {
    if arrivals.len() != m + codeword.len() {
        return Err(Error::LengthMismatch {
            expected: m + codeword.len(),
            got: arrivals.len(),
        });
    }
    let mut harvested = 0.0;
    for &e in &arrivals[..m] {
        harvested += e;
    }
    let mut used = 0.0;
    for (&x, &e) in codeword.iter().zip(&arrivals[m..]) {
        harvested += e;
        used += model.energy(x);
        if used > harvested {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Passes every symbol through the channel.
pub fn transmit<M: SymbolModel, R: Rng + ?Sized>(
    model: &M,
    actual: &[M::Input],
    rng: &mut R,
) -> Vec<M::Output> {
    actual.iter().map(|&x| model.transmit(x, rng)).collect()
}

/// Seeded form of [`transmit`].
pub fn channel_transmit<M: SymbolModel>(
    model: &M,
    actual: &[M::Input],
    seed: u64,
) -> Vec<M::Output> {
    transmit(model, actual, &mut seeded_rng(seed))
}

/// Sum of per-symbol information densities of a codeword against received symbols.
pub fn info_density_sum<M: SymbolModel>(
    model: &M,
    codeword: &[M::Input],
    received: &[M::Output],
) -> Result<f64> {
    if codeword.len() != received.len() {
        return Err(Error::LengthMismatch {
            expected: codeword.len(),
            got: received.len(),
        });
    }
    Ok(codeword
        .iter()
        .zip(received)
        .map(|(&x, &y)| model.density(x, y))
        .sum())
}
