use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ehfbl::bounds::{
    awgn_capacity, awgn_dispersion, cost_moment_term, eh_rate, no_eh_rate, saving_phase_length,
    theorem1_star_terms, theorem1_terms, theorem1_validity, theorem2_terms, theorem2_validity,
    BoundReport, EhRate, NormalApproxReport, Validity, TILTED_MOMENT_COEF,
};
use ehfbl::capacity::{capacity_cost, CapacityCostResult};
use ehfbl::sim::{self, SimConfig};
use ehfbl::sweep::{db_to_linear, run_sweep, write_sweep_csv, SweepSpec};
use ehfbl::{fmt_sig, DmcSpec, EnergyProcess, Error};

const SWEEP_SCHEMA: &str = "CSV columns: n, m, eh_rate, no_eh_rate, infeasible, concentration_ok, \
union_term_ok, outage_term_ok, valid. Rate columns follow the spec's `curves` selection; flags are 0/1. \
Infeasible points report eh_rate 0.";
const CAPACITY_SCHEMA: &str =
    "CSV columns: P, capacity, dispersion, multiplier, iterations, feasible. \
Costs outside the channel's range give feasible=0 and empty value cells.";
const SIMULATE_SCHEMA: &str = "Prints the report as JSON. With --csv, appends one row with columns: \
mode, n, m, M, eps, trials, outage_rate, outage_hw, error_rate, error_hw, bound (header written when \
the file is new or empty).";

/// Finite-blocklength bounds and simulations for energy-harvesting channels.
#[derive(Parser)]
#[command(name = "ehfbl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate achievability bounds.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Rate-versus-n sweep from a JSON spec.
    #[command(after_help = SWEEP_SCHEMA)]
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path; overrides the spec's `output`. Standard output when neither is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Capacity-cost function of a discrete channel over a list of costs.
    #[command(after_help = CAPACITY_SCHEMA)]
    CapacityCost {
        #[arg(long)]
        channel: PathBuf,
        /// Comma-separated cost targets.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        cost: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    #[command(after_help = SIMULATE_SCHEMA)]
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Gaussian channel.
    Awgn(AwgnArgs),
    /// Discrete memoryless channel read from a text file.
    Dmc(DmcArgs),
}

#[derive(Args)]
struct EnergyArgs {
    /// Second moment of the per-slot harvested energy.
    #[arg(long, group = "arrivals")]
    second_moment: Option<f64>,
    /// Variance of the per-slot harvested energy.
    #[arg(long, group = "arrivals")]
    variance: Option<f64>,
    /// JSON file describing the arrival law.
    #[arg(long, group = "arrivals")]
    energy: Option<PathBuf>,
}

#[derive(Args)]
struct AwgnArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long, conflicts_with = "power_db")]
    power: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    power_db: Option<f64>,
    #[command(flatten)]
    energy: EnergyArgs,
    /// Concentration constant; overrides the value derived from the arrivals.
    #[arg(long)]
    a: Option<f64>,
}

#[derive(Args)]
struct DmcArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Target expected cost per symbol.
    #[arg(long)]
    cost: f64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    energy: EnergyArgs,
    #[arg(long)]
    a: Option<f64>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Failure::Budget(e.to_string()),
            Error::Io(_) => Failure::Input(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn input_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| input_error(path, e))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_file(path)?).map_err(|e| input_error(path, e))
}

fn load_channel(path: &Path) -> CliResult<DmcSpec> {
    DmcSpec::from_text(&read_file(path)?).map_err(|e| input_error(path, e))
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Input(e.to_string())),
        _ => Ok(()),
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => fs::File::create(p)
            .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| input_error(p, e)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

/// Arrival statistics resolved from flags: (mean, second moment).
fn arrival_moments(args: &EnergyArgs, power: Option<f64>) -> CliResult<(Option<f64>, Option<f64>)> {
    if let Some(path) = &args.energy {
        let e: EnergyProcess = load_json(path)?;
        return Ok((Some(e.mean), Some(e.second_moment)));
    }
    if let Some(s) = args.second_moment {
        return Ok((None, Some(s)));
    }
    if let Some(v) = args.variance {
        let p = power.ok_or_else(|| Failure::Usage("--variance needs the mean power".into()))?;
        if !(v >= 0.0) {
            return Err(Failure::Usage(format!("--variance {v} is negative")));
        }
        return Ok((None, Some(v + p * p)));
    }
    Ok((None, None))
}

fn check_eps(eps: f64) -> CliResult<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--eps {eps} not in (0, 1)")))
    }
}

#[derive(Serialize)]
struct AwgnBoundsOutput {
    n: u64,
    eps: f64,
    power: f64,
    second_moment: f64,
    lambda: f64,
    a: f64,
    m: u64,
    n_star: u64,
    capacity: f64,
    dispersion: f64,
    validity: Validity,
    /// Bound over the `n` transmission slots.
    log_m_transmission: BoundReport,
    /// Bound expressed in the total blocklength.
    log_m_total: BoundReport,
    eh_rate: EhRate,
    no_eh_rate: NormalApproxReport,
}

fn bounds_awgn(args: &AwgnArgs) -> CliResult<()> {
    check_eps(args.eps)?;
    let flag_power = match (args.power, args.power_db) {
        (Some(p), None) => Some(p),
        (None, Some(db)) => Some(db_to_linear(db)),
        _ => None,
    };
    let (energy_mean, second_moment) = arrival_moments(&args.energy, flag_power)?;
    let power = flag_power
        .or(energy_mean)
        .ok_or_else(|| Failure::Usage("give --power, --power-db or --energy".into()))?;
    if let Some(mean) = energy_mean {
        if (mean - power).abs() > 1e-9 * power {
            return Err(Error::MeanMismatch {
                energy: mean,
                power,
            }
            .into());
        }
    }
    let floor = TILTED_MOMENT_COEF * power * power;
    let (second_moment, a) = match (second_moment, args.a) {
        (Some(s), a) => (s, a.unwrap_or(s.max(floor))),
        (None, Some(a)) => (a, a),
        (None, None) => {
            return Err(Failure::Usage(
                "give one of --second-moment, --variance, --energy or --a".into(),
            ))
        }
    };
    let capacity = awgn_capacity(power)?;
    let dispersion = awgn_dispersion(power)?;
    let m = saving_phase_length(a, power, args.n)?;
    let n_star = args.n + m;
    let validity = theorem1_validity(args.n, args.eps, second_moment, power);
    print_json(&AwgnBoundsOutput {
        n: args.n,
        eps: args.eps,
        power,
        second_moment,
        lambda: 1.0 / (4.0 * power),
        a,
        m,
        n_star,
        capacity,
        dispersion,
        validity,
        log_m_transmission: BoundReport::new(
            theorem1_terms(args.n, args.eps, power),
            n_star,
            validity,
        ),
        log_m_total: BoundReport::new(
            theorem1_star_terms(n_star, args.eps, power, a),
            n_star,
            validity,
        ),
        eh_rate: eh_rate(args.n, args.eps, power, a)?,
        no_eh_rate: no_eh_rate(args.n, args.eps, power)?,
    })
}

#[derive(Serialize)]
struct DmcBoundsOutput {
    n: u64,
    eps: f64,
    cost: f64,
    second_moment: f64,
    a: f64,
    m: u64,
    n_star: u64,
    capacity_cost: CapacityCostResult,
    validity: Validity,
    log_m_total: BoundReport,
}

fn bounds_dmc(args: &DmcArgs) -> CliResult<()> {
    check_eps(args.eps)?;
    if args.n < 3 {
        return Err(Failure::Usage(format!("--n {} < 3", args.n)));
    }
    let channel = load_channel(&args.channel)?;
    let (_, second_moment) = arrival_moments(&args.energy, Some(args.cost))?;
    let cc = capacity_cost(&channel, args.cost, 1e-9)?;
    let cost_term = cost_moment_term(&channel);
    let (second_moment, a) = match (second_moment, args.a) {
        (Some(s), a) => (s, a.unwrap_or(s.max(cost_term))),
        (None, Some(a)) => (a, a),
        (None, None) => {
            return Err(Failure::Usage(
                "give one of --second-moment, --variance, --energy or --a".into(),
            ))
        }
    };
    let m = saving_phase_length(a, args.cost, args.n)?;
    let n_star = args.n + m;
    let validity = theorem2_validity(args.n, args.eps, a, args.cost);
    let terms = theorem2_terms(n_star, args.eps, args.cost, a, cc.capacity, cc.dispersion);
    print_json(&DmcBoundsOutput {
        n: args.n,
        eps: args.eps,
        cost: args.cost,
        second_moment,
        a,
        m,
        n_star,
        validity,
        log_m_total: BoundReport::new(terms, n_star, validity),
        capacity_cost: cc,
    })
}

fn sweep(spec_path: &Path, output: Option<&Path>) -> CliResult<()> {
    let spec: SweepSpec = load_json(spec_path)?;
    let rows = run_sweep(&spec).map_err(|e| input_error(spec_path, e))?;
    let target = output
        .map(Path::to_path_buf)
        .or_else(|| spec.output.as_ref().map(PathBuf::from));
    let out = open_output(target.as_deref())?;
    write_sweep_csv(out, &rows, spec.curves).map_err(|e| Failure::Input(e.to_string()))
}

fn capacity_cost_cmd(
    channel: &Path,
    costs: &[f64],
    tol: f64,
    output: Option<&Path>,
) -> CliResult<()> {
    let spec = load_channel(channel)?;
    if !(tol > 0.0) {
        return Err(Failure::Usage(format!("--tol {tol} must be positive")));
    }
    let mut rows = Vec::with_capacity(costs.len());
    for &p in costs {
        let row = match capacity_cost(&spec, p, tol) {
            Ok(r) => vec![
                fmt_sig(p),
                fmt_sig(r.capacity),
                fmt_sig(r.dispersion),
                fmt_sig(r.multiplier),
                r.iterations.to_string(),
                "1".into(),
            ],
            Err(Error::CostOutOfRange { .. }) => {
                vec![
                    fmt_sig(p),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "0".into(),
                ]
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    let mut w = csv::Writer::from_writer(open_output(output)?);
    let write = |w: &mut csv::Writer<Box<dyn Write>>| -> csv::Result<()> {
        w.write_record([
            "P",
            "capacity",
            "dispersion",
            "multiplier",
            "iterations",
            "feasible",
        ])?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    };
    write(&mut w).map_err(|e| Failure::Input(e.to_string()))
}

fn simulate(config_path: &Path, seed: u64, csv_path: Option<&Path>) -> CliResult<()> {
    let mut config: SimConfig = load_json(config_path)?;
    config.seed = seed;
    let report = sim::run(&config)?;
    print_json(&report)?;
    if let Some(path) = csv_path {
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| input_error(path, e))?;
        report
            .write_csv(file, fresh)
            .map_err(|e| input_error(path, e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bounds(BoundsCommand::Awgn(args)) => bounds_awgn(&args),
        Command::Bounds(BoundsCommand::Dmc(args)) => bounds_dmc(&args),
        Command::Sweep { spec, output } => sweep(&spec, output.as_deref()),
        Command::CapacityCost {
            channel,
            cost,
            tol,
            output,
        } => capacity_cost_cmd(&channel, &cost, tol, output.as_deref()),
        Command::Simulate { config, seed, csv } => simulate(&config, seed, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
