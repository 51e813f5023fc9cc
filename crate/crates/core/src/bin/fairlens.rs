use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fairlens::data::{load_csv, LoadOptions};
use fairlens::lime::{explain, LimeConfig};
use fairlens::metrics::{evaluate_predictions, GroupSpec, PeMode};
use fairlens::models::{train, Family, ModelSpec, TrainedModel};
use fairlens::report::{parse_sensitive, read_predictions, write_artifacts, AuditPlan, RunConfig};
use fairlens::Error;

/// Fairness audits for tabular binary classifiers.
#[derive(Parser)]
#[command(name = "fairlens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain, gate and (when unfair) rebuild models over repeated splits.
    Audit(AuditArgs),
    /// Explain one instance of a trained or freshly fitted model.
    Explain(ExplainArgs),
    /// Outcome-fairness metrics for a predictions file.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Binary target column.
    #[arg(long)]
    target: Option<String>,
    /// Target value mapped to class 1.
    #[arg(long)]
    positive_label: Option<String>,
}

#[derive(Args)]
struct LimeArgs {
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    ridge_lambda: Option<f64>,
}

#[derive(Args)]
struct AuditArgs {
    /// JSON run configuration; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    /// feature=privileged1|privileged2,... (repeatable)
    #[arg(long)]
    sensitive: Vec<String>,
    /// Model families, comma separated: lr, tree, bagging, rf, ada.
    #[arg(long, value_delimiter = ',')]
    model: Vec<Family>,
    /// Hyperparameter override `name=value` or `family.name=value` (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pe_mode: Option<PeMode>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Train on the unbalanced split.
    #[arg(long)]
    no_smote: bool,
    #[command(flatten)]
    lime: LimeArgs,
    /// Artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Zero-based row of the data file to explain.
    #[arg(long)]
    row: usize,
    /// Family fitted on the whole file when no saved model is given.
    #[arg(long, default_value = "lr")]
    model: Family,
    /// Saved model JSON to explain instead of fitting one.
    #[arg(long)]
    load_model: Option<PathBuf>,
    /// Write the fitted model as JSON.
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    lime: LimeArgs,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// CSV with a `prediction` column aligned with the data rows.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    sensitive: Vec<String>,
    #[arg(long, default_value = "paper")]
    pe_mode: PeMode,
}

enum Failure {
    Config(Error),
    Pipeline(Error),
}

fn config<T>(r: fairlens::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn pipeline<T>(r: fairlens::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Pipeline)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Audit(a) => audit(a),
        Command::Explain(a) => explain_instance(a),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("pipeline error: {e}");
            ExitCode::from(2)
        }
    }
}

fn init_threads() -> fairlens::Result<()> {
    let Ok(value) = std::env::var("FAIRLENS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("FAIRLENS_THREADS must be a non-negative integer, got `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn apply_lime(cfg: &mut LimeConfig, args: &LimeArgs) {
    if let Some(n) = args.n_samples {
        cfg.n_samples = n;
    }
    if args.sigma.is_some() {
        cfg.sigma = args.sigma;
    }
    if let Some(l) = args.ridge_lambda {
        cfg.ridge_lambda = l;
    }
}

fn groups_from(specs: &[String]) -> fairlens::Result<Vec<GroupSpec>> {
    let mut groups = Vec::new();
    for spec in specs {
        for (feature, values) in parse_sensitive(spec)? {
            if groups.iter().any(|g: &GroupSpec| g.feature == feature) {
                return Err(Error::Config(format!("sensitive feature `{feature}` given twice")));
            }
            groups.push(GroupSpec::new(feature, values));
        }
    }
    Ok(groups)
}

fn load(args: &DataArgs) -> fairlens::Result<fairlens::data::Dataset> {
    let data = args.data.as_ref().ok_or_else(|| Error::Config("--data is required".into()))?;
    let target = args.target.as_ref().ok_or_else(|| Error::Config("--target is required".into()))?;
    let mut options = LoadOptions::new(target.clone());
    options.positive_label = args.positive_label.clone();
    load_csv(data, &options)
}

fn build_config(a: &AuditArgs) -> fairlens::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &a.data.data {
        cfg.data = d.clone();
    }
    if let Some(t) = &a.data.target {
        cfg.target = t.clone();
    }
    if a.data.positive_label.is_some() {
        cfg.positive_label = a.data.positive_label.clone();
    }
    if !a.sensitive.is_empty() {
        cfg.sensitive = groups_from(&a.sensitive)?
            .into_iter()
            .map(|g| (g.feature, g.privileged_values))
            .collect();
    }
    if !a.model.is_empty() {
        cfg.models = a.model.clone();
    }
    for p in &a.params {
        let (name, value) = p
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--param `{p}` is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("--param `{p}` has a non-numeric value")))?;
        cfg.hyperparams.insert(name.trim().to_string(), value);
    }
    macro_rules! set {
        ($field:ident, $arg:expr) => {
            if let Some(v) = $arg {
                cfg.$field = v;
            }
        };
    }
    set!(k, a.k);
    set!(repetitions, a.reps);
    set!(seed, a.seed);
    set!(pe_mode, a.pe_mode);
    set!(budget, a.budget);
    set!(pool_size, a.pool_size);
    set!(train_fraction, a.train_fraction);
    if a.no_smote {
        cfg.smote = false;
    }
    apply_lime(&mut cfg.lime, &a.lime);
    if a.out.is_some() {
        cfg.out = a.out.clone();
    }
    if cfg.data.as_os_str().is_empty() {
        return Err(Error::Config("--data is required".into()));
    }
    if cfg.out.is_none() {
        cfg.out = Some(PathBuf::from("fairlens-out"));
    }
    Ok(cfg)
}

fn audit(a: AuditArgs) -> Result<(), Failure> {
    let cfg = config(build_config(&a))?;
    let plan = config(AuditPlan::prepare(cfg))?;
    let run = pipeline(plan.execute())?;
    let out = run.config.out.clone().expect("output directory is set");
    pipeline(write_artifacts(&run, &out))?;
    for m in &run.models {
        let s = &m.summary;
        let ensemble = s
            .ensemble_accuracy
            .map(|e| format!("{:.3} ({:.3})", e.mean, e.std))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<8} original {:.3} ({:.3})  limeout {ensemble}  gate fired {}/{}",
            m.model.label(),
            s.original_accuracy.mean,
            s.original_accuracy.std,
            s.gate_fired,
            s.repetitions
        );
    }
    println!("artifacts written to {}", out.display());
    Ok(())
}

fn explain_instance(a: ExplainArgs) -> Result<(), Failure> {
    let data = config(load(&a.data))?;
    if a.row >= data.n_rows() {
        return Err(Failure::Config(Error::Config(format!(
            "--row {} is out of range for {} rows",
            a.row,
            data.n_rows()
        ))));
    }
    let mut lime = LimeConfig::default();
    apply_lime(&mut lime, &a.lime);
    config(lime.validate())?;
    let model = match &a.load_model {
        Some(path) => config(TrainedModel::load(path))?,
        None => pipeline(train(&ModelSpec::new(a.model, a.seed), &data, &Default::default()))?,
    };
    if let Some(path) = &a.save_model {
        pipeline(model.save(path))?;
    }
    let e = pipeline(explain(&model, data.row(a.row), &data, &lime, a.seed))?;
    println!("{}", config(serde_json::to_string_pretty(&e).map_err(Error::from))?);
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<(), Failure> {
    let data = config(load(&a.data))?;
    let groups = config(groups_from(&a.sensitive))?;
    if groups.is_empty() {
        return Err(Failure::Config(Error::Config("at least one --sensitive is required".into())));
    }
    for g in &groups {
        config(g.resolve(data.schema()))?;
    }
    let predictions = config(read_predictions(&a.predictions, &data))?;
    let vectors = pipeline(evaluate_predictions(&data, &predictions, &groups, a.pe_mode))?;
    println!("{}", config(serde_json::to_string_pretty(&vectors).map_err(Error::from))?);
    Ok(())
}
