//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.
//! Sub-checks listed in `EXPECTED_FAILURES` cannot hold for a correct
//! implementation; they are evaluated and reported but must come out FAIL.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ehfbl::bounds::*;
use ehfbl::capacity::{capacity_cost, mutual_information, TiltedBa, COST_TOL};
use ehfbl::config::AwgnEhConfig;
use ehfbl::energy::{make_energy_process, EnergyKind};
use ehfbl::seed::seeded_rng;
use ehfbl::sim::model::{AwgnModel, DmcModel, SymbolModel};
use ehfbl::sim::pipeline::{clip_to_energy, detect_outage, draw_codeword, with_saving_prefix};
use ehfbl::sim::{self, DmcScenario, Mode, Scenario, SimConfig};
use ehfbl::sweep::{run_sweep, Curves, NGrid, SweepSpec};
use ehfbl::DmcSpec;
use rand::Rng;
use rand_distr::StandardNormal;

const EXPECTED_FAILURES: [&str; 1] = ["4b"];

// Tolerances.
const MOMENT_IDENTITY_RTOL: f64 = 1e-12;
const MOMENT_MC_RTOL: f64 = 0.01;
const MOMENT_MC_SAMPLES: usize = 10_000_000;
const Z_LIMIT: f64 = 3.0;
const CAPACITY_ATOL: f64 = 1e-6;
const BRUTE_FORCE_ATOL: f64 = 1e-4;
const CAPACITY_GAP_RTOL: f64 = 0.15;

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

struct Report {
    lines: Vec<Line>,
}

impl Report {
    fn record(
        &mut self,
        id: &'static str,
        pass: bool,
        limit: Duration,
        took: Duration,
        detail: String,
    ) {
        let pass = pass && took <= limit;
        let line = Line {
            id,
            pass,
            detail: format!(
                "{detail} [{:.2}s / limit {}s]",
                took.as_secs_f64(),
                limit.as_secs()
            ),
        };
        println!(
            "{} {:<3} {}",
            if line.pass { "PASS" } else { "FAIL" },
            line.id,
            line.detail
        );
        self.lines.push(line);
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO {id:<3} {detail}");
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn fixture(name: &str) -> DmcSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    DmcSpec::from_text(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn mean_and_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for x in xs {
        n += 1.0;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

fn criterion_1(report: &mut Report) {
    let (result, took) = timed(|| {
        let mut worst_identity: f64 = 0.0;
        let mut worst_mc: f64 = 0.0;
        let mut notes = Vec::new();
        for (i, &p) in [0.5, 1.0, 2.0, 10.0].iter().enumerate() {
            let target = TILTED_MOMENT_COEF * p * p;
            let exact = gaussian_tilted_fourth_moment(p, 1.0 / (4.0 * p)).unwrap();
            worst_identity = worst_identity.max((exact - target).abs() / target);

            // Draws from the tilted law N(0, 2P): the weight e^{X^2/(4P)} dN(0,P)/dN(0,2P) is sqrt(2).
            let mut rng = seeded_rng(1000 + i as u64);
            let sd = (2.0 * p).sqrt();
            let (tilted, _) = mean_and_se((0..MOMENT_MC_SAMPLES).map(|_| {
                let x: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                std::f64::consts::SQRT_2 * x.powi(4)
            }));
            // Plain draws at lambda = 0.1/P, where the estimator has finite variance.
            let lambda = 0.1 / p;
            let plain_target = gaussian_tilted_fourth_moment(p, lambda).unwrap();
            let mut rng = seeded_rng(2000 + i as u64);
            let sd = p.sqrt();
            let (plain, _) = mean_and_se((0..MOMENT_MC_SAMPLES).map(|_| {
                let x: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
                x.powi(4) * (lambda * x * x).exp()
            }));
            let e1 = (tilted - target).abs() / target;
            let e2 = (plain - plain_target).abs() / plain_target;
            worst_mc = worst_mc.max(e1).max(e2);
            notes.push(format!("P={p}: {e1:.1e}/{e2:.1e}"));
        }
        let pass = worst_identity <= MOMENT_IDENTITY_RTOL && worst_mc <= MOMENT_MC_RTOL;
        (
            pass,
            format!(
                "tilted moment = 12 sqrt(2) P^2 (max rel err {worst_identity:.1e}); MC rel err tilted/plain {}",
                notes.join(", ")
            ),
        )
    });
    report.record("1", result.0, Duration::from_secs(10), took, result.1);
}

fn criterion_2(report: &mut Report) {
    let (result, took) = timed(|| {
        let (a, p, n) = (TILTED_MOMENT_COEF, 1.0, 10_000u64);
        let m = saving_phase_length(a, p, n).unwrap();
        let bound = lemma1_bound(
            m,
            n,
            a,
            p,
            OutageCondition::Gaussian { lambda: 0.25 },
            false,
        )
        .unwrap();
        let nf = n as f64;
        let target = OUTAGE_PREFACTOR_EXP.exp() / (nf * nf.ln());
        let pass =
            m == 7502 && bound.raw <= target && bound.valid && (target - 1.6197e-5).abs() < 5e-10;
        (
            pass,
            format!(
                "m={m}, bound={:.6e} <= {target:.6e}, valid={}",
                bound.raw, bound.valid
            ),
        )
    });
    report.record("2", result.0, Duration::from_secs(1), took, result.1);
}

fn criterion_3(report: &mut Report) {
    let (result, took) = timed(|| {
        let eps = 0.5;
        let energy = make_energy_process(EnergyKind::Exponential, 1.0, &[]).unwrap();
        let scenario = Scenario::Awgn(AwgnEhConfig::new(2000, eps, energy).unwrap());
        let config = SimConfig::new(scenario, Mode::OutageOnly, 100_000, 31);
        let r = sim::run_outage_experiment(&config).unwrap();
        let limit = r.lemma1_bound_value.min(eps / (2.0 + eps));
        let upper = r.outage_rate + r.outage_hw;
        (
            upper <= limit,
            format!(
                "m={}, outage {:.2e} +/- {:.1e} <= min(bound {:.3e}, eps/(2+eps))",
                r.m, r.outage_rate, r.outage_hw, r.lemma1_bound_value
            ),
        )
    });
    report.record("3", result.0, Duration::from_secs(120), took, result.1);
}

/// z-scores of the empirical per-symbol density mean and variance.
fn density_z(model: &AwgnModel, pairs: usize, seed: u64, variance: f64) -> (f64, f64) {
    let mut rng = seeded_rng(seed);
    let ds: Vec<f64> = (0..pairs)
        .map(|_| {
            let x = model.draw_input(&mut rng);
            let y = model.transmit(x, &mut rng);
            model.density(x, y)
        })
        .collect();
    let n = pairs as f64;
    let mean = ds.iter().sum::<f64>() / n;
    let var = ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = ds.iter().map(|d| (d - mean).powi(4)).sum::<f64>() / n;
    let cap = awgn_capacity(model.power()).unwrap();
    (
        (mean - cap) / (var / n).sqrt(),
        (var - variance) / ((m4 - var * var) / n).sqrt(),
    )
}

fn criterion_4(report: &mut Report) {
    let powers = [1.0, 10f64.powf(0.3)];
    let ((means, vs_dispersion, vs_density), took) = timed(|| {
        let mut means = Vec::new();
        let mut vs_dispersion = Vec::new();
        let mut vs_density = Vec::new();
        for (i, &p) in powers.iter().enumerate() {
            let model = AwgnModel::new(p).unwrap();
            let (zm, zv) = density_z(&model, 100_000, 40 + i as u64, awgn_dispersion(p).unwrap());
            let (_, zd) = density_z(&model, 100_000, 40 + i as u64, p / (1.0 + p));
            means.push(zm);
            vs_dispersion.push(zv);
            vs_density.push(zd);
        }
        (means, vs_dispersion, vs_density)
    });
    let within = |zs: &[f64]| zs.iter().all(|z| z.abs() <= Z_LIMIT);
    let fmt = |zs: &[f64]| {
        zs.iter()
            .zip(&powers)
            .map(|(z, p)| format!("P={p:.3}: z={z:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let limit = Duration::from_secs(30);
    report.record(
        "4a",
        within(&means),
        limit,
        took,
        format!("density mean vs log(1+P)/2: {}", fmt(&means)),
    );
    report.record(
        "4b",
        within(&vs_dispersion),
        limit,
        took,
        format!(
            "density variance vs P(P+2)/(2(P+1)^2): {}",
            fmt(&vs_dispersion)
        ),
    );
    report.record(
        "4c",
        within(&vs_density),
        limit,
        took,
        format!("density variance vs P/(1+P): {}", fmt(&vs_density)),
    );
}

fn brute_force_three(spec: &DmcSpec, target: f64) -> f64 {
    let c = &spec.cost;
    let steps = 1000;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        let p1 = i as f64 / steps as f64;
        let p2 = (target - c[1] * p1 - c[0] * (1.0 - p1)) / (c[2] - c[0]);
        let p0 = 1.0 - p1 - p2;
        if p0 < 0.0 || p2 < 0.0 {
            continue;
        }
        best = best.max(mutual_information(spec, &[p0, p1, p2]).unwrap());
    }
    best
}

fn criterion_5(report: &mut Report) {
    let (result, took) = timed(|| {
        let h = |p: f64| -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        let bsc = DmcSpec::bsc(0.1).unwrap();
        let low = capacity_cost(&bsc, 0.2, COST_TOL).unwrap();
        let half = capacity_cost(&bsc, 0.5, COST_TOL).unwrap();
        let (c_low, c_half, v_half) = (
            h(0.26) - h(0.1),
            2f64.ln() - h(0.1),
            0.09 * 9f64.ln().powi(2),
        );
        let errs = [
            (low.capacity - c_low).abs(),
            (half.capacity - c_half).abs(),
            (half.dispersion - v_half).abs(),
            (half.capacity - 0.368064).abs(),
        ];
        let closed_ok = errs.iter().all(|&e| e <= CAPACITY_ATOL);

        let mut rng = seeded_rng(55);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = w.iter().sum();
                let mut row: Vec<f64> = w.iter().map(|v| v / total).collect();
                row[2] = 1.0 - row[0] - row[1];
                row
            })
            .collect();
        let spec = DmcSpec::new(
            rows,
            vec![0.0, rng.random_range(0.2..1.0), rng.random_range(1.0..2.0)],
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        for frac in [0.15, 0.35, 0.5, 0.7, 0.9] {
            let target = spec.max_cost() * frac;
            let cc = capacity_cost(&spec, target, COST_TOL).unwrap();
            worst = worst.max((cc.capacity - brute_force_three(&spec, target)).abs());
        }
        (
            closed_ok && worst <= BRUTE_FORCE_ATOL,
            format!(
                "BSC C(0.2)={:.9} (closed form {c_low:.9}; stated 0.247977), C(0.5)={:.9}, V={:.9} (closed form {v_half:.9}; stated 0.434487); 3x3 brute-force gap {worst:.1e}",
                low.capacity, half.capacity, half.dispersion
            ),
        )
    });
    report.record("5", result.0, Duration::from_secs(60), took, result.1);
}

fn sweep(eps: f64, variance: f64) -> Vec<ehfbl::sweep::SweepRow> {
    let spec = SweepSpec {
        n: NGrid::Geometric {
            start: 1_000,
            stop: 10_000_000,
            points: 41,
        },
        eps,
        power: None,
        power_db: Some(3.0),
        second_moment: None,
        variance: Some(variance),
        a: None,
        output: None,
        curves: Curves::Both,
    };
    run_sweep(&spec).unwrap()
}

/// `hi` pointwise at least `lo`, strictly wherever `hi` is positive.
fn dominates(hi: &[ehfbl::sweep::SweepRow], lo: &[ehfbl::sweep::SweepRow]) -> bool {
    hi.iter()
        .zip(lo)
        .all(|(h, l)| h.eh_rate >= l.eh_rate && (h.eh_rate == 0.0 || h.eh_rate > l.eh_rate))
}

fn criterion_6(report: &mut Report) {
    let capacity = awgn_capacity(10f64.powf(0.3)).unwrap();
    let ((pass, detail, wide_gap), took) = timed(|| {
        let by_eps: Vec<_> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&e| sweep(e, 100.0))
            .collect();
        let by_var: Vec<_> = [1.0, 100.0, 1e4].iter().map(|&v| sweep(0.01, v)).collect();
        let eps_ordered = by_eps.windows(2).all(|w| dominates(&w[0], &w[1]));
        let var_ordered = by_var.windows(2).all(|w| dominates(&w[0], &w[1]));
        let below = by_eps
            .iter()
            .chain(&by_var)
            .flatten()
            .all(|r| r.eh_rate < r.no_eh_rate);
        let gap = |rows: &[ehfbl::sweep::SweepRow]| {
            let last = rows.last().unwrap();
            assert_eq!(last.n, 10_000_000);
            (capacity - last.eh_rate) / capacity
        };
        let fig_a: Vec<f64> = by_eps.iter().map(|r| gap(r)).collect();
        let close = fig_a.iter().all(|&g| g <= CAPACITY_GAP_RTOL);
        let gaps_b: Vec<f64> = by_var.iter().map(|r| gap(r)).collect();
        (
            eps_ordered && var_ordered && below && close,
            format!(
                "ordered by eps={eps_ordered}, by Var={var_ordered}, below normal approx={below}; Var=100 gaps to C={capacity:.9} at n=1e7: {}",
                fig_a.iter().map(|g| format!("{:.1}%", 100.0 * g)).collect::<Vec<_>>().join(", ")
            ),
            gaps_b,
        )
    });
    report.record("6", pass, Duration::from_secs(5), took, detail);
    report.info(
        "6",
        format!(
            "eps=0.01 gaps to C at n=1e7 for Var in {{1, 100, 1e4}}: {}",
            wide_gap
                .iter()
                .map(|g| format!("{:.1}%", 100.0 * g))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
}

fn criterion_7(report: &mut Report) {
    let (result, took) = timed(|| {
        let eps = 0.5;
        let exp = make_energy_process(EnergyKind::Exponential, 1.0, &[]).unwrap();
        let two_point = make_energy_process(EnergyKind::TwoPoint, 0.3, &[0.0, 1.0]).unwrap();
        let mut cases = Vec::new();
        for n in [200, 1000] {
            let valid = theorem1_validity(n, eps, exp.second_moment, 1.0).overall;
            cases.push((
                valid,
                Scenario::Awgn(AwgnEhConfig::new(n, eps, exp.clone()).unwrap()),
            ));
        }
        let dmc = DmcScenario::build(
            DmcSpec::bsc(0.1).unwrap(),
            two_point,
            0.3,
            300,
            eps,
            None,
            None,
        )
        .unwrap();
        cases.push((
            theorem2_validity(dmc.n, eps, dmc.a, dmc.power).overall,
            Scenario::Dmc(dmc),
        ));
        let mut pass = true;
        let mut notes = Vec::new();
        for (i, (valid, scenario)) in cases.into_iter().enumerate() {
            let config = SimConfig::new(scenario, Mode::SurrogateError, 10_000, 70 + i as u64);
            let r = sim::run_surrogate_error_experiment(&config).unwrap();
            let (rate, hw) = (r.error_rate.unwrap(), r.error_hw.unwrap());
            pass &= valid && r.codebook_feasible && rate + hw <= eps;
            notes.push(format!("n={}: {rate:.4} +/- {hw:.4} (valid={valid})", r.n));
        }
        (
            pass,
            format!("surrogate total <= 0.5: {}", notes.join(", ")),
        )
    });
    report.record("7", result.0, Duration::from_secs(120), took, result.1);
}

fn criterion_8(report: &mut Report) {
    let (result, took) = timed(|| {
        let energy = make_energy_process(EnergyKind::Exponential, 1.0, &[]).unwrap();
        let scenario = Scenario::Awgn(AwgnEhConfig::new(20, 0.5, energy).unwrap());
        let mut exact = SimConfig::new(scenario, Mode::ExactDecode, 10_000, 81);
        exact.codebook_size = Some(16);
        let mut surrogate = exact.clone();
        surrogate.mode = Mode::SurrogateError;
        let e = sim::run_exact_decode_experiment(&exact).unwrap();
        let s = sim::run_surrogate_error_experiment(&surrogate).unwrap();
        let (er, ehw) = (e.error_rate.unwrap(), e.error_hw.unwrap());
        let (sr, shw) = (s.error_rate.unwrap(), s.error_hw.unwrap());
        let awgn_ok = er <= sr + 3.0 * (ehw * ehw + shw * shw).sqrt();

        let spec = DmcSpec::identity(vec![0.0, 1.0]).unwrap();
        let constant = make_energy_process(EnergyKind::Constant, 1.0, &[]).unwrap();
        let noiseless =
            Scenario::Dmc(DmcScenario::build(spec, constant, 0.5, 64, 0.5, None, None).unwrap());
        let mut config = SimConfig::new(noiseless, Mode::ExactDecode, 10_000, 82);
        config.codebook_size = Some(16);
        let d = sim::run_exact_decode_experiment(&config).unwrap();
        let dmc_ok = d.error_rate == Some(0.0) && d.outage_rate == 0.0;
        (
            awgn_ok && dmc_ok,
            format!(
                "AWGN n=20 M=16 m={}: exact {er:.4} +/- {ehw:.4} vs surrogate {sr:.4} +/- {shw:.4}; noiseless error {:?}",
                e.m,
                d.error_rate.unwrap()
            ),
        )
    });
    report.record("8", result.0, Duration::from_secs(300), took, result.1);
}

fn clip_matches_outage<M: SymbolModel>(
    model: &M,
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    scale: f64,
) -> (bool, bool) {
    let codeword = draw_codeword(model, n, rng);
    let arrivals: Vec<f64> = (0..m + n).map(|_| scale * rng.random::<f64>()).collect();
    let intended = with_saving_prefix(model, m, &codeword);
    let actual = clip_to_energy(model, &intended, &arrivals).unwrap();
    let outage = detect_outage(model, &codeword, &arrivals, m).unwrap();
    // Independent prefix-sum check.
    let mut harvested: f64 = arrivals[..m].iter().sum();
    let mut used = 0.0;
    let mut oracle = false;
    for (&x, &e) in codeword.iter().zip(&arrivals[m..]) {
        harvested += e;
        used += model.energy(x);
        oracle |= used > harvested;
    }
    (outage == (actual != intended) && outage == oracle, outage)
}

fn criterion_9(report: &mut Report) {
    let (result, took) = timed(|| {
        let points = 100_000;
        let prop1 = (0..=points).all(|i| {
            let x = 50.0 * i as f64 / points as f64;
            let slack = |v: f64| 1e-12 * v.abs().max(1.0);
            let (e, en) = (x.exp(), (-x).exp());
            exp_lower(x) <= e + slack(e)
                && e <= exp_upper(x) + slack(e)
                && exp_neg_lower(x) <= en + slack(en)
                && en <= exp_neg_upper(x) + slack(exp_neg_upper(x))
        });

        let awgn = AwgnModel::new(1.0).unwrap();
        let dmc = DmcModel::at_cost(fixture("ternary.txt"), 0.6).unwrap();
        let mut rng = seeded_rng(99);
        let mut clip_ok = true;
        let mut outages = 0;
        for i in 0..10_000 {
            let n = rng.random_range(1..60);
            let m = rng.random_range(0..40);
            let scale = rng.random_range(0.0..3.0);
            let (ok, out) = if i % 2 == 0 {
                clip_matches_outage(&awgn, &mut rng, n, m, scale)
            } else {
                clip_matches_outage(&dmc, &mut rng, n, m, scale)
            };
            clip_ok &= ok;
            outages += usize::from(out);
        }

        let names = [
            "bsc.txt",
            "z_channel.txt",
            "erasure.txt",
            "ternary.txt",
            "useless.txt",
            "identity3.txt",
        ];
        let ba_ok = names.iter().all(|name| {
            let spec = fixture(name);
            [-1.0, 0.0, 0.5, 2.0].iter().all(|&s| {
                let mut ba = TiltedBa::new(&spec, s);
                let mut prev = ba.objective();
                (0..200).all(|_| {
                    ba.step();
                    let obj = ba.objective();
                    let ok = obj >= prev - 1e-12;
                    prev = obj;
                    ok
                })
            })
        });

        let energy = make_energy_process(EnergyKind::Exponential, 1.0, &[]).unwrap();
        let scenario = Scenario::Awgn(AwgnEhConfig::new(200, 0.5, energy).unwrap());
        let mut deterministic = true;
        for mode in [Mode::OutageOnly, Mode::SurrogateError, Mode::ExactDecode] {
            let mut config = SimConfig::new(scenario.clone(), mode, 500, 7);
            config.codebook_size = (mode == Mode::ExactDecode).then_some(8);
            let par = sim::run_trials(&config).unwrap();
            config.parallel = false;
            let ser = sim::run_trials(&config).unwrap();
            deterministic &= par == ser;
        }
        (
            prop1 && clip_ok && outages > 0 && outages < 10_000 && ba_ok && deterministic,
            format!(
                "exp sandwich grid={prop1}, clip/outage ({outages} outages)={clip_ok}, BA monotone={ba_ok}, serial==parallel={deterministic}"
            ),
        )
    });
    report.record("9", result.0, Duration::from_secs(60), took, result.1);
}

fn main() -> ExitCode {
    let mut report = Report { lines: Vec::new() };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);

    let mut ok = true;
    for line in &report.lines {
        let expected_fail = EXPECTED_FAILURES.contains(&line.id);
        if line.pass == expected_fail {
            ok = false;
            eprintln!(
                "unexpected {} for {}: {}",
                if line.pass { "PASS" } else { "FAIL" },
                line.id,
                line.detail
            );
        }
    }
    let failed: Vec<&str> = report
        .lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| l.id)
        .collect();
    println!(
        "acceptance: {} checks, {} PASS, FAIL {:?} (expected FAIL {:?})",
        report.lines.len(),
        report.lines.len() - failed.len(),
        failed,
        EXPECTED_FAILURES
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
