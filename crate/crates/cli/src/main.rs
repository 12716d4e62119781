use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use cyclocopula::copula::{CopulaFamily, FitOptions, DEFAULT_NU};
use cyclocopula::fbm::HurstParameter;
use cyclocopula::harness::{emit_table, run_experiment, ExperimentConfig, Profile, TableFormat};
use cyclocopula::metrics::{evaluate, MetricVariant};
use cyclocopula::regression::{fit_cyclo_model_with, CycloModel, RegressionMode, RegressionOptions};
use cyclocopula::sim::{simulate_parfbm, ErrorTerm, ParfbmConfig};
use cyclocopula::spectral::{coherence_map, default_span, default_t_max, default_threshold, detect_period};

mod table;

use table::DataTable;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<cyclocopula::Error> for CliError {
    fn from(e: cyclocopula::Error) -> Self {
        if matches!(e, cyclocopula::Error::InvalidConfig(_)) {
            CliError::Usage(e.to_string())
        } else if e.is_data_error() {
            CliError::Data(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Errors in values supplied on the command line are usage errors.
fn usage<T>(r: cyclocopula::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Parser)]
#[command(name = "cyclocopula", version, about = "Cyclostationary copula regression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a PARFBM(1) pair; CSV columns t,x,y.
    Simulate(SimulateArgs),
    /// Estimate the cycle period of one column from spectral coherence.
    DetectCycle(DetectArgs),
    /// Fit per-phase copulas and regressions to t,x,y data.
    Fit(FitArgs),
    /// Predict y from t,x data with a saved model.
    Predict(PredictArgs),
    /// Goodness of fit of predictions against observations.
    Evaluate(EvaluateArgs),
    /// Run the Monte-Carlo grid and print the summary table.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON with fields n, T, phi, alpha, hurst, noise_sd, error_term.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "period", short = 'T')]
    period: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    error_term: Option<ErrorTerm>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DetectArgs {
    /// CSV with a header and columns t,x[,y].
    input: PathBuf,
    #[arg(long, default_value = "x")]
    column: String,
    /// Smoothing half-width M; defaults to floor(sqrt(n)).
    #[arg(long)]
    span: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Also write the full coherence map as CSV p,q,coherence.
    #[arg(long)]
    map: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header and columns t,x,y; t must run 1..n.
    input: PathBuf,
    #[arg(long, default_value = "gaussian")]
    family: CopulaFamily,
    #[arg(long = "period", short = 'T', default_value_t = 1)]
    period: usize,
    /// Degrees of freedom for the t copula.
    #[arg(long, default_value_t = DEFAULT_NU)]
    nu: f64,
    #[arg(long, default_value = "linear")]
    regression: RegressionMode,
    /// Save the full model (needed by `predict`).
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PredictArgs {
    /// CSV with a header and columns t,x.
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Override the predictor stored in the model.
    #[arg(long)]
    regression: Option<RegressionMode>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EvaluateArgs {
    /// CSV holding y and y_hat columns, or y alone when --predicted is given.
    input: PathBuf,
    /// CSV with a y_hat column, such as the output of `predict`.
    #[arg(long)]
    predicted: Option<PathBuf>,
    #[arg(long, default_value = "standard")]
    variant: MetricVariant,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "full")]
    profile: Profile,
    /// JSON overriding any ExperimentConfig field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    variant: Option<MetricVariant>,
    #[arg(long)]
    error_term: Option<ErrorTerm>,
    #[arg(long)]
    regression: Option<RegressionMode>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    output: Output,
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_output(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value") + "\n"
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_str::<ParfbmConfig>(&read_file(path)?)
            .map_err(|e| CliError::Usage(format!("config: {e}")))?,
        None => ParfbmConfig::new(120, 1, 0.7, 0.7, HurstParameter::new(0.25).expect("valid")),
    };
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.period = args.period.unwrap_or(cfg.period);
    cfg.phi = args.phi.unwrap_or(cfg.phi);
    cfg.alpha = args.alpha.unwrap_or(cfg.alpha);
    cfg.noise_sd = args.noise_sd.unwrap_or(cfg.noise_sd);
    cfg.error_term = args.error_term.unwrap_or(cfg.error_term);
    if let Some(h) = args.hurst {
        cfg.hurst = usage(HurstParameter::new(h))?;
    }
    usage(cfg.validate())?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let (x, y) = simulate_parfbm(&cfg, &mut rng)?;
    let text = match args.format {
        TableFormat::Csv => {
            let mut out = String::from("t,x,y\n");
            for (i, (a, b)) in x.values().iter().zip(y.values()).enumerate() {
                out.push_str(&format!("{},{a},{b}\n", i + 1));
            }
            out
        }
        TableFormat::Json => pretty(&json!({
            "config": cfg,
            "seed": args.seed,
            "t": (1..=cfg.n).collect::<Vec<_>>(),
            "x": x.values(),
            "y": y.values(),
        })),
        TableFormat::Markdown => return Err(CliError::Usage("simulate writes csv or json".into())),
    };
    write_output(&args.output, &text)
}

fn detect_cycle(args: DetectArgs) -> CliResult<()> {
    let data = DataTable::parse(&read_file(&args.input)?)?;
    data.require_increasing_t()?;
    let values = data.column(&args.column)?;
    let n = values.len();
    if n < 8 {
        return Err(CliError::Data(format!("need at least 8 observations, got {n}")));
    }
    let span = args.span.unwrap_or_else(|| default_span(n));
    if span == 0 || span > n {
        return Err(CliError::Usage(format!("span must lie in 1..={n}")));
    }
    let t_max = args.t_max.unwrap_or_else(|| default_t_max(n));
    let threshold = args.threshold.unwrap_or_else(|| default_threshold(span));
    let detection = detect_period(&values, span, t_max, threshold)?;
    if let Some(path) = &args.map {
        write_file(path, &coherence_map(&values, span)?.to_csv())?;
    }
    let scores: Vec<_> = detection.line_scores.iter().map(|&(t, s)| json!([t, s])).collect();
    write_output(
        &args.output,
        &pretty(&json!({
            "estimated_T": detection.estimated_t,
            "line_scores": scores,
            "span": detection.span,
            "threshold": detection.threshold,
            "skipped": detection.skipped,
        })),
    )
}

fn fit(args: FitArgs) -> CliResult<()> {
    if args.period == 0 {
        return Err(CliError::Usage("period must be at least 1".into()));
    }
    let data = DataTable::parse(&read_file(&args.input)?)?;
    data.require_unit_t()?;
    let (x, y) = (data.column("x")?, data.column("y")?);
    let options = RegressionOptions { mode: args.regression, fit: FitOptions { nu: args.nu } };
    if args.family == CopulaFamily::StudentT && !(args.nu > 0.0 && args.nu.is_finite()) {
        return Err(CliError::Usage(format!("nu must be positive, got {}", args.nu)));
    }
    let model = fit_cyclo_model_with(&x, &y, args.period, args.family, options)?;
    if let Some(path) = &args.model {
        write_file(path, &(model.to_json() + "\n"))?;
    }
    let phases: Vec<_> = model
        .models
        .iter()
        .map(|m| {
            json!({
                "phase": m.phase,
                "theta": m.fitted.params.theta,
                "nu": m.fitted.params.nu,
                "tau_hat": m.fitted.tau_hat,
                "m": m.fitted.m(),
                "b0": m.b0,
                "b1": m.b1,
            })
        })
        .collect();
    let mut summary = json!({ "family": args.family, "T": args.period });
    if let [only] = model.models.as_slice() {
        summary["theta"] = json!(only.fitted.params.theta);
        summary["nu"] = json!(only.fitted.params.nu);
        summary["tau_hat"] = json!(only.fitted.tau_hat);
        summary["m"] = json!(only.fitted.m());
    }
    summary["phases"] = json!(phases);
    write_output(&args.output, &pretty(&summary))
}

fn predict(args: PredictArgs) -> CliResult<()> {
    let mut model = CycloModel::from_json(&read_file(&args.model)?)?;
    if let Some(mode) = args.regression {
        model.mode = mode;
    }
    let data = DataTable::parse(&read_file(&args.input)?)?;
    let t = data.time_index()?;
    let x = data.column("x")?;
    let mut out = String::from("t,x,y_hat\n");
    for (&ti, &xi) in t.iter().zip(&x) {
        out.push_str(&format!("{ti},{xi},{}\n", model.predict(xi, ti)));
    }
    write_output(&args.output, &out)
}

fn evaluate_cmd(args: EvaluateArgs) -> CliResult<()> {
    let data = DataTable::parse(&read_file(&args.input)?)?;
    let y = data.column("y")?;
    let y_hat = match &args.predicted {
        Some(path) => DataTable::parse(&read_file(path)?)?.column("y_hat")?,
        None => data.column("y_hat")?,
    };
    let m = evaluate(&y, &y_hat, args.variant)?;
    write_output(
        &args.output,
        &pretty(&json!({ "r": m.r, "wi": m.wi, "ns": m.ns, "variant": m.variant, "n": y.len() })),
    )
}

fn experiment(args: ExperimentArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json_over(args.profile, &read_file(path)?)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        None => ExperimentConfig::profile(args.profile),
    };
    cfg.master_seed = args.seed.unwrap_or(cfg.master_seed);
    cfg.metric_variant = args.variant.unwrap_or(cfg.metric_variant);
    cfg.error_term_mode = args.error_term.unwrap_or(cfg.error_term_mode);
    cfg.regression_mode = args.regression.unwrap_or(cfg.regression_mode);
    cfg.replications = args.replications.unwrap_or(cfg.replications);
    usage(cfg.validate())?;
    let results = run_experiment(&cfg)?;
    for r in results.iter().filter(|r| r.flagged) {
        eprintln!(
            "warning: {} of {} replications failed in cell {:?}: {}",
            r.failures,
            r.replications,
            r.coords,
            r.first_failure.as_deref().unwrap_or("")
        );
    }
    write_output(&args.output, &emit_table(&results, args.format)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::DetectCycle(a) => detect_cycle(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment(a),
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
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
