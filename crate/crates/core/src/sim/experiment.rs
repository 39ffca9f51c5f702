use rand::Rng;
use rayon::prelude::*;

use super::model::{AwgnModel, DmcModel, SymbolModel};
use super::pipeline::{
    clip_to_energy, detect_outage, draw_codeword, info_density_sum, transmit, with_saving_prefix,
};
use super::{binomial_estimate, Mode, Scenario, SimConfig, SimReport, TrialOutcome};
use crate::bounds::{lemma1_bound, CodebookSize, OutageBound, OutageCondition};
use crate::energy::EnergyProcess;
use crate::error::{Error, Result};
use crate::seed::{trial_rng, Stream};

/// Scenario quantities shared by every trial.
struct Setup<'a> {
    n: usize,
    m: usize,
    energy: &'a EnergyProcess,
    codebook: CodebookSize,
    threshold: f64,
    bound: OutageBound,
}

enum Resolved {
    Awgn(AwgnModel),
    Dmc(DmcModel),
}

fn resolve(config: &SimConfig) -> Result<(Resolved, OutageBound)> {
    Ok(match &config.scenario {
        Scenario::Awgn(c) => {
            let bound = lemma1_bound(
                c.m,
                c.n,
                c.a,
                c.power,
                OutageCondition::Gaussian { lambda: c.lambda },
                false,
            )?;
            (Resolved::Awgn(AwgnModel::new(c.power)?), bound)
        }
        Scenario::Dmc(c) => {
            let bound = lemma1_bound(c.m, c.n, c.a, c.power, OutageCondition::Discrete, false)?;
            let model = DmcModel::at_cost(c.channel.clone(), c.power)?;
            (Resolved::Dmc(model), bound)
        }
    })
}

fn energy_of(scenario: &Scenario) -> &EnergyProcess {
    match scenario {
        Scenario::Awgn(c) => &c.energy,
        Scenario::Dmc(c) => &c.energy,
    }
}

fn arrivals(setup: &Setup, seed: u64, t: u64) -> Vec<f64> {
    let mut buf = vec![0.0; setup.m + setup.n];
    setup
        .energy
        .fill(&mut trial_rng(seed, t, Stream::Arrivals), &mut buf);
    buf
}

fn outage_trial<M: SymbolModel>(
    model: &M,
    setup: &Setup,
    seed: u64,
    t: u64,
) -> Result<TrialOutcome> {
    let codeword = draw_codeword(model, setup.n, &mut trial_rng(seed, t, Stream::Codebook));
    let arrivals = arrivals(setup, seed, t);
    Ok(TrialOutcome {
        outage: detect_outage(model, &codeword, &arrivals, setup.m)?,
        decode_error: false,
        info_density_sum: None,
    })
}

/// Threshold test on the unclipped codeword plus noise; outage is tracked
/// separately from the same trial's arrivals.
fn surrogate_trial<M: SymbolModel>(
    model: &M,
    setup: &Setup,
    seed: u64,
    t: u64,
) -> Result<TrialOutcome> {
    let codeword = draw_codeword(model, setup.n, &mut trial_rng(seed, t, Stream::Codebook));
    let arrivals = arrivals(setup, seed, t);
    let outage = detect_outage(model, &codeword, &arrivals, setup.m)?;
    let received = transmit(model, &codeword, &mut trial_rng(seed, t, Stream::Noise));
    let stat = info_density_sum(model, &codeword, &received)?;
    Ok(TrialOutcome {
        outage,
        decode_error: stat <= setup.threshold,
        info_density_sum: Some(stat),
    })
}

/// Full random-codebook trial with threshold decoding and a uniform guess
/// when no unique codeword clears the threshold.
fn exact_trial<M: SymbolModel>(
    model: &M,
    setup: &Setup,
    seed: u64,
    t: u64,
) -> Result<TrialOutcome> {
    let size = setup
        .codebook
        .exact
        .ok_or_else(|| Error::Budget("codebook too large for exact decoding".into()))?
        as usize;
    let mut book_rng = trial_rng(seed, t, Stream::Codebook);
    let book: Vec<Vec<M::Input>> = (0..size)
        .map(|_| draw_codeword(model, setup.n, &mut book_rng))
        .collect();
    let message = trial_rng(seed, t, Stream::Message).random_range(0..size);
    let arrivals = arrivals(setup, seed, t);
    let intended = with_saving_prefix(model, setup.m, &book[message]);
    let actual = clip_to_energy(model, &intended, &arrivals)?;
    let outage = actual != intended;
    let received = transmit(model, &actual, &mut trial_rng(seed, t, Stream::Noise));
    let tail = &received[setup.m..];

    let mut winner = None;
    let mut passing = 0usize;
    let mut sent_stat = 0.0;
    for (j, codeword) in book.iter().enumerate() {
        let stat = info_density_sum(model, codeword, tail)?;
        if j == message {
            sent_stat = stat;
        }
        if stat > setup.threshold {
            passing += 1;
            winner = Some(j);
        }
    }
    let decoded = match (passing, winner) {
        (1, Some(j)) => j,
        _ => trial_rng(seed, t, Stream::Fallback).random_range(0..size),
    };
    Ok(TrialOutcome {
        outage,
        decode_error: decoded != message,
        info_density_sum: Some(sent_stat),
    })
}

fn collect_trials<F>(config: &SimConfig, f: F) -> Result<Vec<TrialOutcome>>
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
{
    if config.parallel {
        (0..config.trials).into_par_iter().map(&f).collect()
    } else {
        (0..config.trials).map(f).collect()
    }
}

fn trials_for<'c, M: SymbolModel>(
    model: &M,
    config: &'c SimConfig,
    bound: OutageBound,
) -> Result<(Setup<'c>, Vec<TrialOutcome>)> {
    let n = config.scenario.n();
    let codebook = match config.codebook_size {
        Some(m) => CodebookSize::exact(m),
        None => CodebookSize::from_density_moments(
            n,
            config.scenario.eps(),
            model.density_mean(),
            model.density_variance(),
        ),
    };
    if config.mode == Mode::ExactDecode {
        let m = codebook
            .exact
            .ok_or_else(|| Error::Budget(format!("log M = {} is too large", codebook.log_m)))?;
        config.check_exact_codebook(m)?;
    }
    let setup = Setup {
        n: n as usize,
        m: config.scenario.m() as usize,
        energy: energy_of(&config.scenario),
        codebook,
        threshold: codebook.log_m + (n as f64).powf(0.25),
        bound,
    };
    let seed = config.seed;
    let outcomes = match config.mode {
        Mode::OutageOnly => collect_trials(config, |t| outage_trial(model, &setup, seed, t)),
        Mode::SurrogateError => collect_trials(config, |t| surrogate_trial(model, &setup, seed, t)),
        Mode::ExactDecode => collect_trials(config, |t| exact_trial(model, &setup, seed, t)),
    }?;
    Ok((setup, outcomes))
}

fn report(config: &SimConfig, setup: &Setup, outcomes: &[TrialOutcome]) -> SimReport {
    let trials = config.trials;
    let outages = outcomes.iter().filter(|o| o.outage).count() as u64;
    let errors = outcomes.iter().filter(|o| o.decode_error).count() as u64;
    let (outage_rate, outage_hw) = binomial_estimate(outages, trials);
    let density_total: Option<f64> = outcomes
        .iter()
        .map(|o| o.info_density_sum)
        .try_fold(0.0, |acc, v| v.map(|v| acc + v));
    let mean_info_density = density_total.map(|s| s / (trials as f64 * setup.n as f64));

    let union = (-(setup.n as f64).powf(0.25)).exp();
    let (error_rate, error_hw, threshold_rate, threshold_hw, union_term) = match config.mode {
        Mode::OutageOnly => (None, None, None, None, None),
        Mode::SurrogateError => {
            let (p, hw) = binomial_estimate(errors, trials);
            (
                Some(p + union + outage_rate),
                Some(hw + outage_hw),
                Some(p),
                Some(hw),
                Some(union),
            )
        }
        Mode::ExactDecode => {
            let (p, hw) = binomial_estimate(errors, trials);
            (Some(p), Some(hw), None, None, None)
        }
    };

    SimReport {
        mode: config.mode,
        n: setup.n as u64,
        m: setup.m as u64,
        eps: config.scenario.eps(),
        trials,
        seed: config.seed,
        log_codebook_size: setup.codebook.log_m,
        codebook_size: setup.codebook.exact,
        codebook_feasible: setup.codebook.feasible(),
        outage_rate,
        outage_hw,
        error_rate,
        error_hw,
        threshold_rate,
        threshold_hw,
        union_term,
        mean_info_density,
        lemma1_bound_value: setup.bound.value,
        lemma1_bound_valid: setup.bound.valid,
    }
}

fn execute(config: &SimConfig) -> Result<(SimReport, Vec<TrialOutcome>)> {
    config.check()?;
    let (resolved, bound) = resolve(config)?;
    let (setup, outcomes) = match &resolved {
        Resolved::Awgn(model) => trials_for(model, config, bound)?,
        Resolved::Dmc(model) => trials_for(model, config, bound)?,
    };
    let report = report(config, &setup, &outcomes);
    Ok((report, outcomes))
}

/// Runs the experiment selected by `config.mode`.
pub fn run(config: &SimConfig) -> Result<SimReport> {
    execute(config).map(|(r, _)| r)
}

/// Per-trial outcomes, in trial order.
pub fn run_trials(config: &SimConfig) -> Result<Vec<TrialOutcome>> {
    execute(config).map(|(_, o)| o)
}

fn expect_mode(config: &SimConfig, mode: Mode) -> Result<()> {
    if config.mode != mode {
        return Err(Error::Mode(format!(
            "config mode is {}, expected {}",
            config.mode.as_str(),
            mode.as_str()
        )));
    }
    Ok(())
}

/// Empirical outage rate next to the analytic outage bound.
pub fn run_outage_experiment(config: &SimConfig) -> Result<SimReport> {
    expect_mode(config, Mode::OutageOnly)?;
    run(config)
}

/// Threshold-crossing rate plus `e^{-n^{1/4}}` plus outage rate.
pub fn run_surrogate_error_experiment(config: &SimConfig) -> Result<SimReport> {
    expect_mode(config, Mode::SurrogateError)?;
    run(config)
}

/// Average error of a random codebook under threshold decoding.
pub fn run_exact_decode_experiment(config: &SimConfig) -> Result<SimReport> {
    expect_mode(config, Mode::ExactDecode)?;
    run(config)
}
