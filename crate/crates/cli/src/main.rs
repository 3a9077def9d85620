//! `sparsecenter`: train, apply and check sparse center classifiers from CSV data.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use sparse_center::eval::SplitStrategy;
use sparse_center::oracle::{self, MAX_ORACLE_FEATURES};
use sparse_center::{
    evaluate, load_csv, load_feature_table, sparsity_path, CenterModel, CsvOptions, Dataset, Error, ErrorCategory,
    EvalConfig, LabelMapping, ModelKind, ScaleMode, ScaledArtifacts, TrainOptions,
};

#[derive(Debug, Parser)]
#[command(name = "sparsecenter", version, about = "Sparse l1/l2 center classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a sparse center classifier and write it as JSON.
    Train(TrainArgs),
    /// Apply a model to the rows of a CSV file.
    Predict(PredictArgs),
    /// Write the optimal objective for every sparsity level.
    Path(PathArgs),
    /// Repeated train/test evaluation over a range of sparsity levels.
    Evaluate(EvaluateArgs),
    /// Compare the trainer against brute-force enumeration.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input CSV, one sample per row, with a header.
    data: PathBuf,
    /// Name of the label column.
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Raw label denoting the positive class (default: "1" or "+1").
    #[arg(long, requires = "neg")]
    pos: Option<String>,
    /// Raw label denoting the negative class (default: "-1").
    #[arg(long, requires = "pos")]
    neg: Option<String>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset, Error> {
        let labels = match (&self.pos, &self.neg) {
            (Some(p), Some(n)) => LabelMapping::new(p.clone(), n.clone()),
            _ => LabelMapping::default(),
        };
        let opts = CsvOptions {
            label_column: self.label_col.clone(),
            labels,
        };
        let d = load_csv(&self.data, &opts)?;
        info!(
            "loaded {}: {} features, {} samples ({} positive, {} negative)",
            self.data.display(),
            d.n_features(),
            d.n_samples(),
            d.n_positive(),
            d.n_negative()
        );
        Ok(d)
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Distance criterion.
    #[arg(long, value_parser = parse_kind)]
    kind: ModelKind,
    /// Feature scaling applied before training.
    #[arg(long, default_value = "none", value_parser = parse_scale)]
    scale: ScaleMode,
    /// Delta degrees of freedom for sd/variance scaling.
    #[arg(long, default_value_t = 1)]
    ddof: usize,
}

impl ModelArgs {
    fn options(&self) -> TrainOptions {
        TrainOptions {
            kind: self.kind,
            scale: self.scale,
            ddof: self.ddof,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Maximum number of features on which the two centers may differ.
    #[arg(long)]
    k: usize,
    /// Model file to write (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model JSON written by `train`.
    model: PathBuf,
    /// CSV with the model's feature columns; a label column, if present, is ignored.
    data: PathBuf,
    #[arg(long = "label-col", default_value = "label")]
    label_col: String,
    /// Predictions CSV to write (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Sparsity levels: `a:b` (inclusive), `a:b:step`, or a comma list. Default: every level.
    #[arg(long = "k-range")]
    k_range: Option<String>,
    #[arg(long, default_value_t = 50)]
    splits: usize,
    /// Training fraction of each split.
    #[arg(long, default_value_t = 0.8)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "split-strategy", default_value = "stratified", value_parser = parse_strategy)]
    split_strategy: SplitStrategy,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Sparsity level to check (every level if omitted).
    #[arg(long)]
    k: Option<usize>,
    /// Perturb the trained model before comparing (exercises the failure path).
    #[arg(long, hide = true)]
    corrupt_model: bool,
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scale(s: &str) -> Result<ScaleMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<SplitStrategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `a:b`, `a:b:step` or `a,b,c`; `None` means `0..=m`.
fn parse_k_range(spec: Option<&str>, m: usize) -> Result<Vec<usize>, Error> {
    let bad = |s: &str| Error::InvalidArgument(format!("invalid --k-range {s:?}"));
    let Some(spec) = spec else {
        return Ok((0..=m).collect());
    };
    let ks: Vec<usize> = if spec.contains(':') {
        let parts: Vec<usize> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad(spec)))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [a, b] if a <= b => (*a..=*b).collect(),
            [a, b, step] if a <= b && *step > 0 => (*a..=*b).step_by(*step).collect(),
            _ => return Err(bad(spec)),
        }
    } else {
        spec.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad(spec)))
            .collect::<Result<_, _>>()?
    };
    if ks.is_empty() {
        return Err(bad(spec));
    }
    if let Some(&k) = ks.iter().find(|&&k| k > m) {
        return Err(Error::KOutOfRange { k, m });
    }
    Ok(ks)
}

/// Writes `contents` to `out`, or to standard output.
fn emit(out: Option<&Path>, contents: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, contents).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => io::stdout().write_all(contents).map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, Error> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(&row)?;
    }
    wtr.into_inner().map_err(|e| Error::Io {
        path: PathBuf::from("<csv buffer>"),
        source: e.into_error(),
    })
}

fn real(v: f64) -> String {
    format!("{v:?}")
}

fn cmd_train(args: &TrainArgs) -> Result<(), Error> {
    let d = args.data.load()?;
    if args.k > d.n_features() {
        return Err(Error::KOutOfRange {
            k: args.k,
            m: d.n_features(),
        });
    }
    let fitted = ScaledArtifacts::fit(&d, args.model.options())?;
    let model = fitted.model(args.k)?;
    let objective = sparse_center::objective(
        &fitted.training_data,
        model.kind(),
        model.theta_pos(),
        model.theta_neg(),
    )?;
    emit(args.out.as_deref(), model.to_json()?.as_bytes())?;
    eprintln!(
        "k={} selected=[{}] objective={}",
        model.k(),
        model.selected_names().join(","),
        real(objective)
    );
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.model).map_err(|e| Error::Io {
        path: args.model.clone(),
        source: e,
    })?;
    let model = CenterModel::from_json(&text)?;
    let table = load_feature_table(&args.data, Some(&args.label_col))?;
    if !table.names.is_empty() {
        if table.names.len() != model.n_features() {
            return Err(Error::DimensionMismatch {
                expected: model.n_features(),
                found: table.names.len(),
            });
        }
        if let Some(names) = model.feature_names() {
            if names != table.names.as_slice() {
                return Err(Error::InvalidArgument(format!(
                    "feature columns {:?} do not match the model's {:?}",
                    table.names, names
                )));
            }
        }
    }
    let rows = table
        .rows
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let p = model.predict(x)?;
            Ok(vec![j.to_string(), p.label.sign().to_string(), real(p.delta)])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    emit(args.out.as_deref(), &csv_bytes(&["row", "label", "delta"], rows)?)
}

fn cmd_path(args: &PathArgs) -> Result<(), Error> {
    let d = args.data.load()?;
    let fitted = ScaledArtifacts::fit(&d, args.model.options())?;
    let path = sparsity_path(&fitted.training_data, args.model.kind)?;
    let rows = path.records().map(|r| {
        vec![
            r.k.to_string(),
            real(r.objective),
            r.added.map(|i| d.feature_name(i)).unwrap_or_default(),
        ]
    });
    emit(
        args.out.as_deref(),
        &csv_bytes(&["k", "objective", "newly_added_feature"], rows)?,
    )
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let d = args.data.load()?;
    let k_list = parse_k_range(args.k_range.as_deref(), d.n_features())?;
    let cfg = EvalConfig {
        train: args.model.options(),
        k_list,
        n_splits: args.splits,
        fraction: args.fraction,
        seed: args.seed,
        strategy: args.split_strategy,
    };
    let report = evaluate(&d, &cfg)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(args.out.as_deref(), &buf)
}

/// Moves the first differing coordinate (or a shared one when `k = 0`) off its optimum.
fn corrupt(model: &CenterModel) -> Result<CenterModel, Error> {
    let mut pos = model.theta_pos().to_vec();
    let mut neg = model.theta_neg().to_vec();
    match model.selected().first() {
        Some(&i) => pos[i] += 1.0,
        None if !pos.is_empty() => {
            pos[0] += 1.0;
            neg[0] += 1.0;
        }
        None => {}
    }
    CenterModel::new(model.kind(), model.k(), model.selected().to_vec(), pos, neg)
}

/// Returns whether every checked level passed.
fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let d = args.data.load()?;
    let m = d.n_features();
    if m > MAX_ORACLE_FEATURES {
        return Err(Error::EnumerationLimit {
            m,
            limit: MAX_ORACLE_FEATURES,
        });
    }
    let ks: Vec<usize> = match args.k {
        Some(k) if k > m => return Err(Error::KOutOfRange { k, m }),
        Some(k) => vec![k],
        None => (0..=m).collect(),
    };
    let fitted = ScaledArtifacts::fit(&d, args.model.options())?;
    let mut all_passed = true;
    let mut out = String::new();
    for k in ks {
        let mut model = fitted.artifacts.model(k)?;
        if args.corrupt_model {
            model = corrupt(&model)?;
        }
        let v = oracle::verify_model(&fitted.training_data, &model)?;
        all_passed &= v.passed();
        out.push_str(&format!(
            "{} kind={} k={} objective={} oracle={}\n",
            if v.passed() { "PASS" } else { "FAIL" },
            model.kind(),
            k,
            real(v.model_objective),
            real(v.oracle_objective)
        ));
    }
    emit(None, out.as_bytes())?;
    Ok(all_passed)
}

fn exit_code(err: &Error) -> ExitCode {
    match err.category() {
        ErrorCategory::Usage => ExitCode::from(1),
        ErrorCategory::Data => ExitCode::from(2),
        ErrorCategory::Internal => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Path(a) => cmd_path(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Verify(a) => match cmd_verify(a) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: trained model disagrees with the brute-force optimum");
                return ExitCode::from(3);
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
