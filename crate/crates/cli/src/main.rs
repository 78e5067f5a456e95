//! `privcpd`: change-point detection under local differential privacy.
//!
//! Subcommands expose the library surface: divergence evaluation, mechanism
//! construction, SDPI coefficients, detection, accuracy bounds, and the
//! Monte Carlo harness. Machine-readable results go to stdout (or `--out`);
//! diagnostics go to stderr. Exit codes: 0 success, 1 usage error, 2
//! data/domain error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use privcpd_core::bounds::{
    corollary_npcpd_closed, theorem_bmcpd, theorem_npcpd, theorem_rrcpd, BmSeriesVariant,
    BoundInputs,
};
use privcpd_core::detector::{bm_cpd, detect, rr_cpd, Dataset, DetectionResult};
use privcpd_core::divergence::{
    chernoff_information, f_lambda_divergence, jeffreys_renyi, kl_divergence, renyi_divergence,
    tv_distance, Distribution, RenyiOrder,
};
use privcpd_core::experiments::{
    run_accuracy_curve, run_eps_sweep, run_exponent_ratio, ExperimentConfig, OutputFormat,
    ResultTable,
};
use privcpd_core::mechanisms::{
    binary_mechanism, rr_channel, Channel, PrivacyBudget, SymmetricChannelParams,
};
use privcpd_core::rng::{trial_stream, Stage};
use privcpd_core::sdpi::{
    eta_jeffreys_inf_symmetric, eta_numeric, eta_renyi_inf_symmetric, eta_tv_symmetric,
    SearchParams,
};

/// Environment variable consulted for the default `simulate --threads`.
const THREADS_ENV: &str = "PRIVCPD_THREADS";

#[derive(Parser)]
#[command(name = "privcpd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a divergence between two pmfs given as comma-separated reals.
    Divergence(DivergenceArgs),
    /// Build a privatization channel and emit it as JSON.
    Mechanism(MechanismArgs),
    /// Compute an SDPI (contraction) coefficient.
    Sdpi(SdpiArgs),
    /// Estimate the change-point of a dataset.
    Detect(DetectArgs),
    /// Tabulate theoretical accuracy bounds over a tolerance range.
    Bound(BoundArgs),
    /// Run a seeded Monte Carlo experiment from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DivergenceKind {
    Tv,
    Kl,
    Renyi,
    Jeffreys,
    Chernoff,
    FLambda,
}

#[derive(Args)]
struct DivergenceArgs {
    #[arg(long, value_enum)]
    kind: DivergenceKind,
    /// First pmf, e.g. 0.1,0.9
    #[arg(long)]
    p: String,
    /// Second pmf.
    #[arg(long)]
    q: String,
    /// Order for renyi/jeffreys: a real >= 1 or "inf".
    #[arg(long)]
    rho: Option<String>,
    /// Exponent in (0,1) for f-lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Print 17 decimals instead of 6.
    #[arg(long)]
    full_precision: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismKind {
    Rr,
    Bm,
}

#[derive(Args)]
struct MechanismArgs {
    #[arg(long, value_enum)]
    kind: MechanismKind,
    #[arg(long)]
    eps: f64,
    /// Alphabet size (randomized response).
    #[arg(long)]
    q: Option<usize>,
    /// Pre-change pmf (binary mechanism).
    #[arg(long)]
    p0: Option<String>,
    /// Post-change pmf (binary mechanism).
    #[arg(long)]
    p1: Option<String>,
    /// Quantizer threshold; the Chernoff-optimal one is picked when absent.
    #[arg(long)]
    tau: Option<f64>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelSource {
    Rr,
    Symmetric,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum SdpiKind {
    Tv,
    RenyiInf,
    JeffreysInf,
    Numeric,
}

#[derive(Args)]
struct SdpiArgs {
    /// Where the channel comes from: a randomized response (--q, --eps), a
    /// q-ary symmetric channel (--q, --u), or a JSON file (--path).
    #[arg(long, value_enum)]
    channel: ChannelSource,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Off-diagonal probability of a symmetric channel.
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    path: Option<PathBuf>,
    /// tv / renyi-inf / jeffreys-inf are closed forms (symmetric channels
    /// only); numeric runs the binary-support search on any channel.
    #[arg(long, value_enum)]
    kind: SdpiKind,
    /// Order for the numeric search: a real >= 1 or "inf".
    #[arg(long)]
    rho: Option<String>,
    /// Use the symmetrized order-infinity divergence in the numeric search.
    #[arg(long)]
    jeffreys: bool,
    /// Emit the full estimate as JSON instead of the bare coefficient.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    full_precision: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorKind {
    None,
    Rr,
    Bm,
}

#[derive(Args)]
struct DetectArgs {
    /// Dataset file: JSON ({"symbols": [...], "alphabet_size": ...}) or
    /// newline-delimited integers.
    #[arg(long, conflicts_with = "symbols")]
    data: Option<PathBuf>,
    /// Inline dataset, e.g. 0,1,1
    #[arg(long)]
    symbols: Option<String>,
    #[arg(long)]
    p0: String,
    #[arg(long)]
    p1: String,
    #[arg(long, value_enum, default_value = "none")]
    mechanism: DetectorKind,
    #[arg(long)]
    eps: Option<f64>,
    /// Master seed for the privatization randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the score vector as CSV (columns k,score) here.
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    p0: String,
    #[arg(long)]
    p1: String,
    #[arg(long)]
    n: usize,
    /// Tolerance range lo:hi:step, e.g. 1:300:10.
    #[arg(long, default_value = "1:300:10")]
    alphas: String,
    #[arg(long, value_enum, default_value = "none")]
    mechanism: DetectorKind,
    #[arg(long)]
    eps: Option<f64>,
    /// Square the quantizer mass gap in the binary-mechanism series constant
    /// (sensitivity analysis only).
    #[arg(long)]
    squared_gap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Accuracy,
    EpsSweep,
    ExponentRatio,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file matching the experiment config schema.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "accuracy")]
    experiment: ExperimentKind,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Worker threads; 0 = one per core. Defaults to $PRIVCPD_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Uniform error type for dispatch: everything maps to exit code 2.
type CliResult = Result<(), Box<dyn std::error::Error>>;

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Divergence(args) => divergence_cmd(args),
        Command::Mechanism(args) => mechanism_cmd(args),
        Command::Sdpi(args) => sdpi_cmd(args),
        Command::Detect(args) => detect_cmd(args),
        Command::Bound(args) => bound_cmd(args),
        Command::Simulate(args) => simulate_cmd(args),
    }
}

fn parse_pmf(text: &str) -> Result<Distribution, Box<dyn std::error::Error>> {
    let mass = text
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Distribution::new(mass)?)
}

fn parse_rho(text: Option<&str>) -> Result<RenyiOrder, Box<dyn std::error::Error>> {
    let text = text.ok_or("missing --rho")?;
    let value = match text {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>()?,
    };
    Ok(RenyiOrder::new(value)?)
}

fn format_value(v: f64, full_precision: bool) -> String {
    if v.is_infinite() {
        return "inf".into();
    }
    if full_precision {
        format!("{v:.17}")
    } else {
        format!("{v:.6}")
    }
}

fn divergence_cmd(args: DivergenceArgs) -> CliResult {
    let p = parse_pmf(&args.p)?;
    let q = parse_pmf(&args.q)?;
    let value = match args.kind {
        DivergenceKind::Tv => tv_distance(&p, &q)?.value(),
        DivergenceKind::Kl => kl_divergence(&p, &q)?.value(),
        DivergenceKind::Renyi => {
            renyi_divergence(parse_rho(args.rho.as_deref())?, &p, &q)?.value()
        }
        DivergenceKind::Jeffreys => {
            jeffreys_renyi(parse_rho(args.rho.as_deref())?, &p, &q)?.value()
        }
        DivergenceKind::Chernoff => chernoff_information(&p, &q)?.value.value(),
        DivergenceKind::FLambda => {
            let lambda = args.lambda.ok_or("missing --lambda")?;
            f_lambda_divergence(lambda, &p, &q)?.value()
        }
    };
    println!("{}", format_value(value, args.full_precision));
    Ok(())
}

fn mechanism_cmd(args: MechanismArgs) -> CliResult {
    let eps = PrivacyBudget::new(args.eps)?;
    let channel: Channel = match args.kind {
        MechanismKind::Rr => {
            let q = args.q.ok_or("randomized response needs --q")?;
            rr_channel(q, eps)?
        }
        MechanismKind::Bm => {
            let p0 = parse_pmf(args.p0.as_deref().ok_or("binary mechanism needs --p0")?)?;
            let p1 = parse_pmf(args.p1.as_deref().ok_or("binary mechanism needs --p1")?)?;
            match args.tau {
                Some(tau) => binary_mechanism(&p0, &p1, tau, eps)?,
                None => {
                    let selection =
                        privcpd_core::mechanisms::select_tau_star(&p0, &p1, eps)?;
                    privcpd_core::mechanisms::binary_mechanism_for(&selection.quantizer, eps)?
                }
            }
        }
    };
    let text = serde_json::to_string(&channel)?;
    emit(args.out.as_deref(), &text)
}

fn sdpi_cmd(args: SdpiArgs) -> CliResult {
    let symmetric_params = || -> Result<SymmetricChannelParams, Box<dyn std::error::Error>> {
        let q = args.q.ok_or("this channel needs --q")?;
        match args.channel {
            ChannelSource::Rr => {
                let eps = PrivacyBudget::new(args.eps.ok_or("rr channel needs --eps")?)?;
                Ok(SymmetricChannelParams::randomized_response(q, eps)?)
            }
            ChannelSource::Symmetric => {
                Ok(SymmetricChannelParams::new(q, args.u.ok_or("symmetric channel needs --u")?)?)
            }
            ChannelSource::File => Err("closed forms need an rr or symmetric channel".into()),
        }
    };

    let estimate = match args.kind {
        SdpiKind::Tv => eta_tv_symmetric(&symmetric_params()?),
        SdpiKind::RenyiInf => eta_renyi_inf_symmetric(&symmetric_params()?),
        SdpiKind::JeffreysInf => eta_jeffreys_inf_symmetric(&symmetric_params()?),
        SdpiKind::Numeric => {
            let channel = match args.channel {
                ChannelSource::File => {
                    let path = args.path.as_deref().ok_or("file channel needs --path")?;
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<Channel>(&text)?
                }
                _ => symmetric_params()?.to_channel()?,
            };
            let rho = parse_rho(args.rho.as_deref())?;
            eta_numeric(&channel, rho, args.jeffreys, &SearchParams::default())?
        }
    };
    if args.json {
        println!("{}", serde_json::to_string(&estimate)?);
    } else {
        println!("{}", format_value(estimate.eta, args.full_precision));
    }
    Ok(())
}

fn load_dataset(args: &DetectArgs, alphabet_size: usize) -> Result<Dataset, Box<dyn std::error::Error>> {
    if let Some(inline) = &args.symbols {
        let symbols = inline
            .split(',')
            .map(|f| f.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Dataset::new(symbols, alphabet_size, None)?);
    }
    let path = args.data.as_deref().ok_or("need --data or --symbols")?;
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        Ok(serde_json::from_str::<Dataset>(&text)?)
    } else {
        let symbols = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Dataset::new(symbols, alphabet_size, None)?)
    }
}

fn detect_cmd(args: DetectArgs) -> CliResult {
    let p0 = parse_pmf(&args.p0)?;
    let p1 = parse_pmf(&args.p1)?;
    let dataset = load_dataset(&args, p0.alphabet_size())?;
    let result: DetectionResult = match args.mechanism {
        DetectorKind::None => detect(&dataset, &p0, &p1)?,
        DetectorKind::Rr => {
            let eps = PrivacyBudget::new(args.eps.ok_or("rr detector needs --eps")?)?;
            let mut rng = trial_stream(args.seed, 0, Stage::Privatize);
            rr_cpd(&dataset, &p0, &p1, eps, &mut rng)?
        }
        DetectorKind::Bm => {
            let eps = PrivacyBudget::new(args.eps.ok_or("bm detector needs --eps")?)?;
            let mut rng = trial_stream(args.seed, 0, Stage::Privatize);
            bm_cpd(&dataset, &p0, &p1, eps, &mut rng)?
        }
    };
    if let Some(path) = &args.scores_out {
        let mut csv = String::from("k,score\n");
        for (i, s) in result.scores.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, s));
        }
        std::fs::write(path, csv)?;
    }
    println!("{}", result.k_hat);
    Ok(())
}

fn parse_alpha_range(text: &str, n: usize) -> Result<Vec<usize>, Box<dyn std::error::Error>> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [single] => vec![single.parse::<usize>()?],
        [lo, hi] => (lo.parse::<usize>()?..=hi.parse::<usize>()?).collect(),
        [lo, hi, step] => {
            let (lo, hi, step) = (lo.parse::<usize>()?, hi.parse::<usize>()?, step.parse::<usize>()?);
            if step == 0 {
                return Err("alpha step must be positive".into());
            }
            (lo..=hi).step_by(step).collect()
        }
        _ => return Err("expected --alphas lo:hi:step".into()),
    };
    let grid: Vec<usize> = grid.into_iter().filter(|&a| a >= 1 && a <= n).collect();
    if grid.is_empty() {
        return Err("alpha range is empty after clipping to [1, n]".into());
    }
    Ok(grid)
}

fn bound_cmd(args: BoundArgs) -> CliResult {
    let p0 = parse_pmf(&args.p0)?;
    let p1 = parse_pmf(&args.p1)?;
    let alphas = parse_alpha_range(&args.alphas, args.n)?;
    let mut out = String::new();

    match args.mechanism {
        DetectorKind::None => {
            let base = BoundInputs::non_private(args.n, alphas[0], &p0, &p1)?;
            out.push_str("alpha,bound_a,bound_a_closed,bound_b,beta,beta_closed,s,c,ich\n");
            for &alpha in &alphas {
                let inputs = base.with_alpha(alpha);
                let report = theorem_npcpd(&inputs);
                let closed = corollary_npcpd_closed(&inputs);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    alpha,
                    report.bound_a,
                    report.bound_a_closed,
                    report.bound_b,
                    report.beta,
                    closed,
                    inputs.s,
                    inputs.c,
                    inputs.ich
                ));
            }
        }
        DetectorKind::Rr => {
            let eps = PrivacyBudget::new(args.eps.ok_or("rr bound needs --eps")?)?;
            let base = BoundInputs::for_rr(args.n, alphas[0], &p0, &p1, eps)?;
            out.push_str("alpha,bound_a,bound_a_closed,bound_b,beta,s,c,ich,eps,s_r,c_r\n");
            for &alpha in &alphas {
                let inputs = base.with_alpha(alpha);
                let (report, constants) = theorem_rrcpd(&inputs)?;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    alpha,
                    report.bound_a,
                    report.bound_a_closed,
                    report.bound_b,
                    report.beta,
                    inputs.s,
                    inputs.c,
                    inputs.ich,
                    eps.epsilon(),
                    constants.s_r,
                    constants.c_r
                ));
            }
        }
        DetectorKind::Bm => {
            let eps = PrivacyBudget::new(args.eps.ok_or("bm bound needs --eps")?)?;
            let base = BoundInputs::for_bm(args.n, alphas[0], &p0, &p1, eps)?;
            let variant = if args.squared_gap {
                BmSeriesVariant::SquaredGap
            } else {
                BmSeriesVariant::Verbatim
            };
            out.push_str("alpha,bound_a,bound_a_closed,bound_b,beta,s,c,ich,eps,s_b,c_b,c_tilde_b\n");
            for &alpha in &alphas {
                let inputs = base.with_alpha(alpha);
                let (report, constants) = theorem_bmcpd(&inputs, variant)?;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    alpha,
                    report.bound_a,
                    report.bound_a_closed,
                    report.bound_b,
                    report.beta,
                    inputs.s,
                    inputs.c,
                    inputs.ich,
                    eps.epsilon(),
                    constants.s_b,
                    constants.c_b,
                    constants.c_tilde_b
                ));
            }
        }
    }
    emit(args.out.as_deref(), &out)
}

fn simulate_cmd(args: SimulateArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    let threads = match args.threads {
        Some(t) => t,
        None => std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads) // 0 = one per core
        .build()?;

    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    let rendered = pool.install(|| -> Result<String, privcpd_core::Error> {
        Ok(match args.experiment {
            ExperimentKind::Accuracy => render(&run_accuracy_curve(&config)?, format)?,
            ExperimentKind::EpsSweep => render(&run_eps_sweep(&config)?, format)?,
            ExperimentKind::ExponentRatio => render(&run_exponent_ratio(&config)?, format)?,
        })
    })?;
    emit(args.out.as_deref(), &rendered)
}

fn render<T: ResultTable>(table: &T, format: OutputFormat) -> privcpd_core::Result<String> {
    Ok(match format {
        OutputFormat::Csv => table.csv(),
        OutputFormat::Json => table.json()?,
    })
}

fn emit(out: Option<&std::path::Path>, payload: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, payload)?,
        None => print!("{payload}{}", if payload.ends_with('\n') { "" } else { "\n" }),
    }
    Ok(())
}
