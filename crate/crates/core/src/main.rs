use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use priorshift::domain::{CategoryFilter, MatchMode, QuestionTypeTable, ScoreMode};
use priorshift::harness::{
    audit_split, carve_validation, curve_svg, evaluate, format_table, lambda_sweep, parse_csv,
    run_protocol, to_csv, write_text, AuditOptions, AuditReport, EvalContext, EvalMode, EvalReport, PredictorSpec,
    ProtocolOptions, SweepCurve, SweepPoint, DEFAULT_AUDIT_MARGIN, DEFAULT_LAMBDA_GRID, DEFAULT_VAL_SIZE,
};
use priorshift::ingest::{
    attach_features, generate_synthetic, join_to_dataset, join_with_vocabulary, load_dataset, load_features,
    parse_annotations, parse_questions, save_dataset, BiasProfile, Dataset, JoinOptions, SyntheticConfig,
};
use priorshift::predictors::{load_model, save_model, train_learned, train_regularized, Hyper, Predictor};
use priorshift::priors::DEFAULT_RETAINED_ANSWERS;
use priorshift::splitter::{
    build_cp_splits, hold_out_validation, iid_split, materialize, save_manifest, SplitParams,
};
use priorshift::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "priorshift", version, about = "Changing-priors splits, prior baselines and evaluation audits")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Join VQA question and annotation files into a dataset file.
    Ingest(IngestArgs),
    /// Generate a synthetic biased train/test pair.
    Synth(SynthArgs),
    /// Build changing-priors (or IID) splits of one or more datasets.
    Split(SplitArgs),
    /// Measure prior shift and probe whether inverting the prior pays off.
    Audit(AuditArgs),
    /// Train a linear model on a training split.
    Train(TrainArgs),
    /// Evaluate a predictor on a held-out validation sample and a test split.
    Eval(EvalArgs),
    /// Sweep the regularizer weight.
    Sweep(SweepArgs),
    /// Re-render a CSV of reports as a table, CSV or SVG curve.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    #[arg(long)]
    questions: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "dataset")]
    name: String,
    #[arg(long, default_value = "train")]
    split: String,
    /// Answer vocabulary size when building it from these annotations.
    #[arg(long, default_value_t = 3000)]
    vocab_size: usize,
    /// Reuse the vocabulary and question types of an existing dataset file.
    #[arg(long)]
    vocab_from: Option<PathBuf>,
    /// Question-type prefixes, one per line (defaults to the packaged list).
    #[arg(long)]
    question_types: Option<PathBuf>,
    /// Match prefixes on raw characters instead of token boundaries.
    #[arg(long)]
    raw_match: bool,
    /// Binary feature file to attach by question id.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ProfileArg {
    Skewed,
    Inverse,
    Uniform,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long)]
    out_train: PathBuf,
    #[arg(long)]
    out_test: PathBuf,
    #[arg(long, default_value_t = 9)]
    n_types: usize,
    #[arg(long, default_value_t = 4)]
    answers_per_type: usize,
    #[arg(long, default_value_t = 4000)]
    n_train: usize,
    #[arg(long, default_value_t = 2000)]
    n_test: usize,
    #[arg(long, value_enum, default_value = "inverse")]
    profile: ProfileArg,
    /// Dirichlet concentration of the training prior.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Feature dimension; 0 means the vocabulary size.
    #[arg(long, default_value_t = 0)]
    feature_dim: usize,
    #[arg(long, default_value_t = 0.5)]
    feature_signal: f64,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    /// Dataset files to pool before splitting.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0.33)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0.95)]
    coverage_threshold: f64,
    #[arg(long, default_value_t = 100)]
    max_repair_iterations: usize,
    /// Training instances to record as validation in the manifest.
    #[arg(long, default_value_t = 0)]
    n_val: usize,
    /// Draw this many test instances uniformly instead of a changing-priors split.
    #[arg(long)]
    iid_test: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = DEFAULT_AUDIT_MARGIN)]
    margin: f64,
    /// Explicit inversion threshold; otherwise calibrated to --target-retained.
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RETAINED_ANSWERS)]
    target_retained: usize,
    /// Use the leave-one-annotator-out accuracy.
    #[arg(long)]
    official: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct HyperArgs {
    #[arg(long, default_value_t = Hyper::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = Hyper::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = Hyper::default().batch_size)]
    batch_size: usize,
    #[arg(long, default_value_t = Hyper::default().pretrain_epochs)]
    pretrain_epochs: usize,
    #[arg(long, default_value_t = Hyper::default().question_dim)]
    question_dim: usize,
}

impl HyperArgs {
    fn hyper(&self, lambda: f64, seed: u64) -> Hyper {
        Hyper {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            lambda,
            seed,
            pretrain_epochs: self.pretrain_epochs,
            question_dim: self.question_dim,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Regularizer weight; when given, trains with the random-feature
    /// regularizer after --pretrain-epochs of plain training.
    #[arg(long)]
    lambda: Option<f64>,
    /// Training instances withheld for validation (same sample as `eval`).
    #[arg(long, default_value_t = DEFAULT_VAL_SIZE)]
    n_val: usize,
    #[command(flatten)]
    #[serde(flatten)]
    hyper: HyperArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PredictorArg {
    Random,
    Inverted,
    Learned,
    Regularized,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormatArg {
    Table,
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Sampled,
    Expected,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "random")]
    predictor: PredictorArg,
    /// Evaluate a saved model instead of training one.
    #[arg(long, conflicts_with = "predictor")]
    model: Option<PathBuf>,
    /// Mask each prediction's top answer.
    #[arg(long)]
    masked: bool,
    #[arg(long, value_enum, default_value = "sampled")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_VAL_SIZE)]
    n_val: usize,
    /// Restrict training and evaluation to `other` questions.
    #[arg(long)]
    other_only: bool,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RETAINED_ANSWERS)]
    target_retained: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long)]
    official: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Strictly increasing regularizer weights.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID.to_vec())]
    grid: Vec<f64>,
    /// Training seeds (each also seeds its validation holdout).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0u64, 1, 2])]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_VAL_SIZE)]
    n_val: usize,
    #[arg(long)]
    other_only: bool,
    #[arg(long)]
    official: bool,
    /// CSV of every (lambda, seed) report.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// SVG curve of mean accuracy for --category.
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long, default_value = "All")]
    category: String,
    #[command(flatten)]
    #[serde(flatten)]
    hyper: HyperArgs,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    /// CSV produced by `eval` or `sweep`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
    #[arg(long, default_value = "All")]
    category: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn score_mode(official: bool) -> ScoreMode {
    if official {
        ScoreMode::Official
    } else {
        ScoreMode::Simple
    }
}

fn category(label: &str) -> Result<CategoryFilter> {
    CategoryFilter::from_label(label)
        .ok_or_else(|| Error::invalid(format!("unknown category {label:?}; use All, YesNo, Nb or Other")))
}

/// `# key: value` lines recording the command and every effective setting.
fn provenance(cli_seed: u64, command: &str, args: &impl Serialize) -> String {
    let mut s = format!("# priorshift {} {command}\n# seed: {cli_seed}\n", env!("CARGO_PKG_VERSION"));
    if let Ok(Value::Object(fields)) = serde_json::to_value(args) {
        for (key, value) in fields {
            let shown = match value {
                Value::Null => "none".to_string(),
                Value::String(v) => v,
                Value::Array(items) => items.iter().map(Value::to_string).collect::<Vec<_>>().join(","),
                v => v.to_string(),
            };
            s.push_str(&format!("# {key}: {shown}\n"));
        }
    }
    s
}

fn output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Dataset> {
    load_dataset(path).map(|(d, _)| d)
}

fn ingest(a: &IngestArgs) -> Result<String> {
    let questions = parse_questions(&a.questions)?;
    let annotations = parse_annotations(&a.annotations)?;
    let opts = JoinOptions {
        name: a.name.clone(),
        tag: a.split.parse()?,
        match_mode: if a.raw_match { MatchMode::RawCharacter } else { MatchMode::TokenBoundary },
        vocab_size: a.vocab_size,
    };
    let mut data = match &a.vocab_from {
        Some(p) => {
            let reference = load(p)?;
            join_with_vocabulary(&questions, &annotations, &reference.type_table, reference.vocabulary, &opts)?
        }
        None => {
            let table = match &a.question_types {
                Some(p) => QuestionTypeTable::load(p)?,
                None => QuestionTypeTable::packaged(),
            };
            join_to_dataset(&questions, &annotations, &table, &opts)?
        }
    };
    if let Some(p) = &a.features {
        let (_, rows) = load_features(p)?;
        let missing = attach_features(&mut data, rows);
        if missing > 0 {
            log::warn!("{missing} instances have no features");
        }
    }
    save_dataset(&a.out, &data, None)?;
    Ok(format!(
        "{} instances, {} answers, {} question types -> {}\n",
        data.len(),
        data.n_answers(),
        data.n_types(),
        a.out.display()
    ))
}

fn synth(a: &SynthArgs, seed: u64) -> Result<String> {
    let cfg = SyntheticConfig {
        n_types: a.n_types,
        answers_per_type: a.answers_per_type,
        n_train: a.n_train,
        n_test: a.n_test,
        bias_profile: match a.profile {
            ProfileArg::Skewed => BiasProfile::Skewed { alpha: a.alpha },
            ProfileArg::Inverse => BiasProfile::Inverse { alpha: a.alpha },
            ProfileArg::Uniform => BiasProfile::Uniform,
        },
        feature_dim: a.feature_dim,
        feature_signal: a.feature_signal,
        seed,
    };
    let (train, test) = generate_synthetic(&cfg)?;
    save_dataset(&a.out_train, &train, Some(&cfg))?;
    save_dataset(&a.out_test, &test, Some(&cfg))?;
    Ok(format!(
        "train {} -> {}\ntest {} -> {}\n",
        train.len(),
        a.out_train.display(),
        test.len(),
        a.out_test.display()
    ))
}

fn split(a: &SplitArgs, seed: u64) -> Result<String> {
    let parts = a.data.iter().map(|p| load(p)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Dataset> = parts.iter().collect();
    let pooled = if refs.len() == 1 { parts[0].clone() } else { Dataset::pooled("pooled", &refs)? };
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let out = |name: &str| a.out_dir.join(name);
    if let Some(n_test) = a.iid_test {
        let (train, test) = iid_split(&pooled, n_test, seed)?;
        save_dataset(&out("train.jsonl"), &train, None)?;
        save_dataset(&out("test.jsonl"), &test, None)?;
        return Ok(format!("iid split: train {}, test {}\n", train.len(), test.len()));
    }
    let params = SplitParams {
        test_fraction: a.test_fraction,
        coverage_threshold: a.coverage_threshold,
        max_repair_iterations: a.max_repair_iterations,
    };
    let mut assignment = build_cp_splits(&pooled, params, seed)?;
    if a.n_val > 0 {
        assignment = hold_out_validation(&assignment, &pooled, a.n_val, seed)?;
    }
    let splits = materialize(&assignment, &pooled)?;
    save_manifest(&out("manifest.txt"), &assignment)?;
    save_dataset(&out("train.jsonl"), &splits.train, None)?;
    save_dataset(&out("val.jsonl"), &splits.val, None)?;
    save_dataset(&out("test.jsonl"), &splits.test, None)?;
    let mut msg = format!(
        "cp split: train {}, val {}, test {}, coverage {:.4}\n",
        splits.train.len(),
        splits.val.len(),
        splits.test.len(),
        assignment.coverage
    );
    for w in &assignment.warnings {
        msg.push_str(&format!("warning: {w}\n"));
    }
    Ok(msg)
}

fn format_audit(r: &AuditReport, train: &Dataset) -> String {
    let fmt = |x: Option<f64>| x.map_or_else(|| "--".to_string(), |v| format!("{v:.2}"));
    let mut s = String::new();
    s.push_str(&format!("mean TV: {:.4}\nweighted TV: {:.4}\n", r.shift.mean_tv, r.shift.weighted_tv));
    s.push_str(&format!("mean inversion: {}\n", fmt(r.shift.mean_inversion)));
    s.push_str(&format!("inversion min_count: {}\n", r.min_count));
    s.push_str(&format!("random prior YesNo: {}\n", fmt(r.random_yes_no)));
    s.push_str(&format!("inverted prior YesNo: {}\n", fmt(r.inverted_yes_no)));
    s.push_str(&format!(
        "verdict: {} (margin {})\n",
        if r.exploitable { "inversion-exploitable" } else { "not flagged" },
        r.margin
    ));
    s.push_str("\ntype\tprefix\tn_train\tn_test\ttv\tinversion\n");
    for t in &r.shift.per_type {
        let prefix = train.type_table.prefix(t.type_id).unwrap_or("");
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{}\n",
            t.type_id,
            if prefix.is_empty() { "(other)" } else { prefix },
            t.n_train,
            t.n_test,
            t.tv,
            t.inversion.map_or_else(|| "--".to_string(), |v| format!("{v:.3}"))
        ));
    }
    s
}

fn audit(a: &AuditArgs, seed: u64) -> Result<String> {
    let train = load(&a.train)?;
    let test = load(&a.test)?;
    let opts = AuditOptions {
        margin: a.margin,
        min_count: a.min_count,
        target_retained: a.target_retained,
        score_mode: score_mode(a.official),
    };
    let report = audit_split(&train, &test, &opts)?;
    let text = provenance(seed, "audit", a) + &format_audit(&report, &train);
    output(a.out.as_deref(), &text)?;
    Ok(String::new())
}

fn train(a: &TrainArgs, seed: u64) -> Result<String> {
    let data = load(&a.train)?;
    let (data, _) = carve_validation(&data, a.n_val, seed)?;
    let model = match a.lambda {
        Some(l) => train_regularized(&data, &a.hyper.hyper(l, seed))?,
        None => train_learned(&data, &a.hyper.hyper(0.0, seed))?,
    };
    save_model(&a.out, &model)?;
    let last = model.loss_trace().last().copied().unwrap_or(f64::NAN);
    Ok(format!(
        "{}trained on {} instances, final objective {last:.6} -> {}\n",
        provenance(seed, "train", a),
        data.len(),
        a.out.display()
    ))
}

fn predictor_spec(a: &EvalArgs, seed: u64) -> PredictorSpec {
    let base = match a.predictor {
        PredictorArg::Random => PredictorSpec::Random,
        PredictorArg::Inverted => PredictorSpec::Inverted {
            min_count: a.min_count,
            target_retained: a.target_retained,
        },
        PredictorArg::Learned => PredictorSpec::Learned(a.hyper.hyper(0.0, seed)),
        PredictorArg::Regularized => PredictorSpec::Regularized(a.hyper.hyper(a.lambda, seed)),
    };
    if a.masked {
        PredictorSpec::Masked(Box::new(base))
    } else {
        base
    }
}

fn render(reports: &[EvalReport], format: FormatArg) -> Result<String> {
    match format {
        FormatArg::Table => Ok(format_table(reports)),
        FormatArg::Csv => to_csv(reports),
        FormatArg::Svg => Err(Error::invalid("SVG output needs a lambda sweep")),
    }
}

fn eval(a: &EvalArgs, seed: u64) -> Result<String> {
    let train = load(&a.train)?;
    let test = load(&a.test)?;
    let mode = match a.mode {
        ModeArg::Sampled => EvalMode::Sampled,
        ModeArg::Expected => EvalMode::Expected,
    };
    let (val, test_report) = match &a.model {
        Some(path) => {
            train.ensure_compatible(&test)?;
            let model = load_model(path)?;
            let lambda = (model.hyper().lambda > 0.0).then_some(model.hyper().lambda);
            let mut p = Predictor::Learned(model);
            if a.masked {
                p = Predictor::masked(p);
            }
            let (_, mut val) = carve_validation(&train, a.n_val, seed)?;
            let mut test = test;
            if a.other_only {
                val = val.only_category(priorshift::domain::Category::Other);
                test = test.only_category(priorshift::domain::Category::Other);
            }
            let ctx = EvalContext { mode, score_mode: score_mode(a.official), seed, lambda };
            (evaluate(&p, &val, &ctx)?, evaluate(&p, &test, &ctx)?)
        }
        None => {
            let opts = ProtocolOptions {
                n_val: a.n_val,
                other_only: a.other_only,
                seed,
                mode,
                score_mode: score_mode(a.official),
            };
            run_protocol(&train, &test, &predictor_spec(a, seed), &opts)?
        }
    };
    let text = provenance(seed, "eval", a) + &render(&[val, test_report], a.format)?;
    output(a.out.as_deref(), &text)?;
    Ok(String::new())
}

fn sweep(a: &SweepArgs, seed: u64) -> Result<String> {
    let train = load(&a.train)?;
    let test = load(&a.test)?;
    let filter = category(&a.category)?;
    let opts = ProtocolOptions {
        n_val: a.n_val,
        other_only: a.other_only,
        seed,
        mode: EvalMode::Sampled,
        score_mode: score_mode(a.official),
    };
    let curve = lambda_sweep(&train, &test, &a.grid, &a.hyper.hyper(0.0, seed), &a.seeds, &opts)?;
    let head = provenance(seed, "sweep", a);
    if let Some(p) = &a.out_csv {
        write_text(p, &(head.clone() + &to_csv(curve.reports())?))?;
    }
    if let Some(p) = &a.out_svg {
        write_text(p, &curve_svg(&curve, filter))?;
    }
    let mut s = head;
    s.push_str(&format!("lambda\tval_{0}\tval_sd\ttest_{0}\ttest_sd\n", filter.label()));
    let fmt = |x: Option<f64>| x.map_or_else(|| "--".to_string(), |v| format!("{v:.2}"));
    for p in curve.points() {
        let (vm, vs) = p.val_summary(filter);
        let (tm, ts) = p.test_summary(filter);
        s.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", p.lambda, fmt(vm), fmt(vs), fmt(tm), fmt(ts)));
    }
    Ok(s)
}

/// Regroups per-(λ, seed) reports into a curve.
fn curve_from_reports(reports: Vec<EvalReport>) -> Result<SweepCurve> {
    let mut points: Vec<SweepPoint> = Vec::new();
    for r in reports {
        let lambda = r
            .lambda
            .ok_or_else(|| Error::invalid("SVG output needs reports carrying a lambda"))?;
        if points.last().is_none_or(|p| p.lambda != lambda) {
            points.push(SweepPoint { lambda, val: Vec::new(), test: Vec::new() });
        }
        let point = points.last_mut().expect("pushed above");
        match r.split {
            priorshift::domain::SplitTag::Test => point.test.push(r),
            _ => point.val.push(r),
        }
    }
    SweepCurve::new(points)
}

fn report(a: &ReportArgs) -> Result<String> {
    let text = fs::read_to_string(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let reports = parse_csv(&body)?;
    let out = match a.format {
        FormatArg::Svg => curve_svg(&curve_from_reports(reports)?, category(&a.category)?),
        f => render(&reports, f)?,
    };
    output(a.out.as_deref(), &out)?;
    Ok(String::new())
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Synth(a) => synth(a, cli.seed),
        Command::Split(a) => split(a, cli.seed),
        Command::Audit(a) => audit(a, cli.seed),
        Command::Train(a) => train(a, cli.seed),
        Command::Eval(a) => eval(a, cli.seed),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Report(a) => report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(&cli) {
        Ok(msg) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
