//! Command-line harness: dataset generation, training, the model sweep,
//! parity audits, and figure-data emission.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 invalid model or
//! config, 3 tolerance failure, 4 numeric abort.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use voljet::market::config::parse_term_structure;
use voljet::market::dataset::{generate_dataset, ChainDataset, GridSpec};
use voljet::market::lb::{check_term_structure, LbTermStructure};
use voljet::parity::parity_audit;
use voljet::report::emit_report;
use voljet::sweep::{parse_model_name, run_model, run_sweep, SweepSpec};
use voljet::training::{to_bps, TrainConfig, VegaWeightMode};
use voljet::VoljetError;

#[derive(Parser)]
#[command(
    name = "voljet",
    about = "Arbitrage-free neural total-volatility surfaces over a synthetic logistic-beta market",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate training and validation option-chain datasets.
    Generate(GenerateArgs),
    /// Train a single model on generated datasets.
    Train(TrainArgs),
    /// Train the activation × width × depth model grid.
    Sweep(SweepArgs),
    /// Audit the density–volatility parity identities against the market.
    Audit(AuditArgs),
    /// Emit learning-curve, scatter, and surface CSVs from run artifacts.
    Report(ReportArgs),
}

#[derive(Args)]
struct MarketArg {
    /// Term-structure config file (key = value; keys sigma0, h0, alpha0,
    /// alpha1, beta0, beta1). Defaults to the reference market.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl MarketArg {
    fn load(&self) -> Result<LbTermStructure, VoljetError> {
        match &self.config {
            Some(path) => parse_term_structure(&std::fs::read_to_string(path)?),
            None => Ok(LbTermStructure::reference()),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    market: MarketArg,
    /// Output directory for train.csv and valid.csv.
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainHyperArgs {
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    /// Master seed for initialization and shuffling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Price-loss weighting: linear (1/vega) or squared (1/vega²).
    #[arg(long, default_value = "linear")]
    vega_mode: String,
    /// Full-dataset snapshot cadence in epochs.
    #[arg(long, default_value_t = 10)]
    snapshot_every: usize,
    /// Record wall-clock seconds in history rows (breaks byte-for-byte
    /// reproducibility of the CSVs).
    #[arg(long)]
    timing: bool,
}

impl TrainHyperArgs {
    fn to_config(&self) -> Result<TrainConfig, VoljetError> {
        let config = TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            master_seed: self.seed,
            vega_mode: VegaWeightMode::parse(&self.vega_mode)?,
            snapshot_every: self.snapshot_every,
            timing: self.timing,
            ..TrainConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    activation: String,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    depth: usize,
    /// Training dataset CSV.
    #[arg(long, default_value = "data/train.csv")]
    train: PathBuf,
    /// Validation dataset CSV.
    #[arg(long, default_value = "data/valid.csv")]
    valid: PathBuf,
    #[command(flatten)]
    market: MarketArg,
    #[command(flatten)]
    hyper: TrainHyperArgs,
    /// Output directory for net.ckpt, history.csv, and summary.txt.
    #[arg(long, default_value = "runs/single")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated model names (e.g. relu2-128x1,tanh-64x2); default is
    /// the full 45-model grid.
    #[arg(long)]
    subset: Option<String>,
    #[arg(long, default_value = "data/train.csv")]
    train: PathBuf,
    #[arg(long, default_value = "data/valid.csv")]
    valid: PathBuf,
    #[command(flatten)]
    market: MarketArg,
    #[command(flatten)]
    hyper: TrainHyperArgs,
    /// Parallel model runs.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "runs/sweep")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    market: MarketArg,
    /// Comma-separated tenors to audit.
    #[arg(long, default_value = "0.5,1,2")]
    taus: String,
    #[arg(long, default_value_t = -0.8)]
    kappa_min: f64,
    #[arg(long, default_value_t = 0.8)]
    kappa_max: f64,
    #[arg(long, default_value_t = 0.01)]
    kappa_step: f64,
    /// Central finite-difference step for the surface jets.
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    /// Maximum allowed identity error.
    #[arg(long, default_value_t = 1e-3)]
    tolerance: f64,
    /// Audit report CSV path.
    #[arg(long, default_value = "audit.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory with run artifacts (a sweep directory or a single run).
    #[arg(long)]
    run: PathBuf,
    #[arg(long, default_value = "report")]
    out: PathBuf,
    #[command(flatten)]
    market: MarketArg,
}

fn exit_code_for(err: &VoljetError) -> u8 {
    match err {
        VoljetError::Io(_) | VoljetError::Parse(_) => 1,
        VoljetError::Domain(_) | VoljetError::ModelInvalid(_) | VoljetError::Contract(_) => 2,
        VoljetError::UnattainablePrice { .. } | VoljetError::Numeric(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode, VoljetError> {
    let ts = args.market.load()?;
    let violations = check_term_structure(&ts, 0.01, 2.0, 0.01)?;
    if !violations.is_empty() {
        for v in &violations {
            eprintln!(
                "inadmissible term structure: condition {} violated at tenor {}: {}",
                v.condition, v.tau, v.detail
            );
        }
        return Ok(ExitCode::from(2));
    }
    std::fs::create_dir_all(&args.out)?;
    let train = generate_dataset(&GridSpec::training(), &ts)?;
    train.write_csv(&args.out.join("train.csv"))?;
    let valid = generate_dataset(&GridSpec::validation(), &ts)?;
    valid.write_csv(&args.out.join("valid.csv"))?;
    println!("train.csv: {} rows ({} tenors x {} moneynesses)", train.len(), train.taus().len(), train.kappas().len());
    println!("valid.csv: {} rows ({} tenors x {} moneynesses)", valid.len(), valid.taus().len(), valid.kappas().len());
    println!(
        "note: the validation moneyness axis is the literal grid -1..1 step 0.001 \
         (2001 points, {} rows); the originally reported counts (2010 moneynesses, \
         383910 rows) are not reproducible from that grid definition",
        valid.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_train(args: TrainArgs) -> Result<ExitCode, VoljetError> {
    let ts = args.market.load()?;
    let config = args.hyper.to_config()?;
    let name = format!("{}-{}x{}", args.activation.to_ascii_lowercase(), args.width, args.depth);
    parse_model_name(&name)?;
    let train_set = ChainDataset::read_csv(&args.train)?;
    let valid_set = ChainDataset::read_csv(&args.valid)?;
    std::fs::create_dir_all(&args.out)?;
    let (net, history, result) = run_model(&name, &config, &train_set, &valid_set, &ts)?;
    net.write_checkpoint(&args.out.join("net.ckpt"))?;
    history.write_csv(&args.out.join("history.csv"))?;
    let summary = format!(
        "model {name}\n\
         loss_P_train_bps {}\nloss_P_valid_bps {}\n\
         loss_D_train_bps {}\nloss_D_valid_bps {}\n\
         arb_zero_epoch {}\nconverged {}\n",
        result.train_price_bps,
        result.valid_price_bps,
        result.train_density_bps,
        result.valid_density_bps,
        result.arb_zero_epoch.map(|e| e.to_string()).unwrap_or_else(|| "unreached".into()),
        result.converged
    );
    std::fs::write(args.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    if let Some(b) = history.final_batch_avg() {
        println!("final epoch-wise total {} bps", to_bps(b.total()));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, VoljetError> {
    let ts = args.market.load()?;
    let config = args.hyper.to_config()?;
    if args.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build_global()
            .map_err(|e| VoljetError::Contract(format!("thread pool: {e}")))?;
    }
    let subset: Option<Vec<String>> = args.subset.as_ref().map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    });
    let train_set = ChainDataset::read_csv(&args.train)?;
    let valid_set = ChainDataset::read_csv(&args.valid)?;
    let spec = SweepSpec::full(config);
    let report = run_sweep(
        &spec,
        subset.as_deref(),
        &train_set,
        &valid_set,
        &ts,
        &args.out,
    )?;
    println!("swept {} models -> {}", report.models.len(), args.out.join("sweep.csv").display());
    for m in &report.models {
        match &m.error {
            Some(e) => println!("{}: FAILED ({e})", m.name),
            None => println!(
                "{}: P_train {:.1} bps, P_valid {:.1} bps, D_train {:.1} bps, converged {}",
                m.name, m.train_price_bps, m.valid_price_bps, m.train_density_bps, m.converged
            ),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(args: AuditArgs) -> Result<ExitCode, VoljetError> {
    let ts = args.market.load()?;
    let violations = check_term_structure(&ts, 0.01, 2.0, 0.01)?;
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("inadmissible term structure: condition {}: {}", v.condition, v.detail);
        }
        return Ok(ExitCode::from(2));
    }
    let taus: Vec<f64> = args
        .taus
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| VoljetError::Parse(format!("bad tenor `{s}`: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let report = parity_audit(
        &ts,
        &taus,
        args.kappa_min,
        args.kappa_max,
        args.kappa_step,
        args.fd_step,
    )?;
    report.write_csv(&args.out)?;
    let (pdf, cdf, cal) = (report.max_err_pdf(), report.max_err_cdf(), report.max_err_calendar());
    println!(
        "audited {} points ({} skipped): max err_pdf {pdf:.3e}, err_cdf {cdf:.3e}, \
         err_calendar {cal:.3e}, vega identity {:.3e}, pivot identity {:.3e}",
        report.rows.len(),
        report.skipped.len(),
        report.err_total_vega,
        report.err_pivot_identity
    );
    if pdf > args.tolerance || cdf > args.tolerance || cal > args.tolerance {
        eprintln!("identity errors exceed tolerance {}", args.tolerance);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: ReportArgs) -> Result<ExitCode, VoljetError> {
    let ts = args.market.load()?;
    let n = emit_report(&args.run, &args.out, &ts, &GridSpec::training())?;
    println!("emitted {n} artifacts to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}
