//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (schema, config,
//! grid, arguments), 3 corrupt checkpoint, 4 training diverged.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checkpoint::Checkpoint;
use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::fusion::FeatureVector;
use crate::pipeline::{
    self, load_corpus, split, synth_corpus, write_jsonl, Annotator, Encoding, KeywordKind, KeywordList, Lexicons,
    NormStats, PreparedLine, SignalMode, SynthSpec, TweetRecord,
};
use crate::trainer::{self, metrics_csv, sweep_csv, Grid};

#[derive(Debug, Parser)]
#[command(name = "capsf", version, about = "Capsule-fusion classifier for suicide-related posts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, annotate and featurize a JSON Lines corpus.
    Prepare(PrepareArgs),
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Print per-class metrics of a checkpoint on labelled data.
    Eval(EvalArgs),
    /// Classify one text.
    Predict(PredictArgs),
    /// Train and evaluate across a dropout or batch-size grid.
    Sweep(SweepArgs),
    /// Write a synthetic labelled corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub keywords: PathBuf,
    #[arg(long)]
    pub stop: PathBuf,
    /// Annotated JSON Lines output (the training part when splitting).
    #[arg(long)]
    pub out: PathBuf,
    /// Filter report CSV [default: <out>.report.csv].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also split off a stratified test set and write it here.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    pub ratio: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Loss curve CSV [default: <out>.loss.csv].
    #[arg(long)]
    pub loss_csv: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub ckpt: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub text: String,
    /// JSON object with sentiment, polarity, subjectivity, followers,
    /// likes, replies and retweets.
    #[arg(long, required_unless_present = "no_features", conflicts_with = "no_features")]
    pub features: Option<String>,
    /// Use a zero feature vector.
    #[arg(long)]
    pub no_features: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `dropout` or `batch`.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    pub ratio: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Text,
    Features,
    Both,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Text)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    pub records: usize,
    #[arg(long, default_value_t = 1.0)]
    pub plant_rate: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 1,
        Error::Checkpoint(_) => 3,
        Error::NonFiniteLoss { .. } => 4,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn io_out(r: std::io::Result<()>) -> Result<()> {
    r.map_err(|e| Error::io("<stdout>", e))
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<TrainConfig> {
    let mut cfg = match path {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Labelled records of a prepared file.
fn load_labelled(path: &Path, err: &mut dyn Write) -> Result<Vec<TweetRecord>> {
    let load = load_corpus(path)?;
    for (line, why) in &load.rejected {
        let _ = writeln!(err, "warning: {}:{line}: {why}", path.display());
    }
    if let Some(r) = load.records.iter().find(|r| r.label.is_none()) {
        return Err(Error::InvalidArgument(format!(
            "{}: record {:?} has no label; run prepare first",
            path.display(),
            r.id
        )));
    }
    Ok(load.records)
}

fn write_prepared(path: &Path, records: &[TweetRecord], stats: &NormStats, lex: &Lexicons) -> Result<()> {
    let lines = records
        .iter()
        .map(|r| {
            let f = pipeline::featurize(&pipeline::resolve_features(r, &lex.sentiment), stats)?;
            Ok(PreparedLine { record: r, features: f.into_data() })
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(path, &lines)
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Prepare(a) => prepare(a, out, err),
        Command::Train(a) => train(a, out, err),
        Command::Eval(a) => eval(a, out, err),
        Command::Predict(a) => predict(a, out),
        Command::Sweep(a) => sweep(a, err),
        Command::Synth(a) => synth(a),
    }
}

fn prepare(a: &PrepareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let load = load_corpus(&a.corpus)?;
    for (line, why) in &load.rejected {
        let _ = writeln!(err, "warning: {}:{line}: {why}", a.corpus.display());
    }
    let keywords = KeywordList::load(&a.keywords, KeywordKind::Collection)?;
    let stop = KeywordList::load(&a.stop, KeywordKind::Stop)?;
    let annotator = Annotator::new(keywords, Lexicons::default());
    let prepared = pipeline::prepare(load.records, &annotator, &stop);
    let lex = &annotator.lexicons;

    match &a.test_out {
        None => {
            let enc = Encoding::fit(&prepared.records, 1, &lex.sentiment);
            write_prepared(&a.out, &prepared.records, &enc.stats, lex)?;
        }
        Some(test_path) => {
            let (tr, te) = split(prepared.records, a.ratio, a.seed, |r| r.label.expect("prepared records are labelled"))?;
            let enc = Encoding::fit(&tr, 1, &lex.sentiment);
            write_prepared(&a.out, &tr, &enc.stats, lex)?;
            write_prepared(test_path, &te, &enc.stats, lex)?;
        }
    }
    let report_path = a.report.clone().unwrap_or_else(|| with_suffix(&a.out, ".report.csv"));
    prepared.report.write(&report_path)?;
    io_out(out.write_all(prepared.report.to_csv().as_bytes()))
}

fn train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = load_config(a.config.as_deref(), a.seed)?;
    let records = load_labelled(&a.data, err)?;
    let lex = Lexicons::default();
    let enc = Encoding::fit(&records, cfg.min_token_count, &lex.sentiment);
    let data = enc.encode(&records, cfg.seq_len, &lex.sentiment)?;
    let outcome = trainer::train_with(&data, &cfg, enc.vocab.len(), |e, l| {
        let _ = writeln!(err, "epoch {e}/{} loss {l:.6}", cfg.epochs);
    })?;
    let loss_path = a.loss_csv.clone().unwrap_or_else(|| with_suffix(&a.out, ".loss.csv"));
    std::fs::write(&loss_path, outcome.loss_csv()).map_err(|e| Error::io(&loss_path, e))?;
    let ckpt = Checkpoint {
        config: cfg,
        vocab: enc.vocab,
        params: outcome.params,
        stats: enc.stats,
    };
    ckpt.save(&a.out)?;
    io_out(writeln!(out, "wrote {}", a.out.display()))
}

fn eval(a: &EvalArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let ckpt = Checkpoint::load(&a.ckpt)?;
    let records = load_labelled(&a.data, err)?;
    let lex = Lexicons::default();
    let data = pipeline::encode_examples(&records, &ckpt.vocab, &ckpt.stats, &lex.sentiment, ckpt.config.seq_len)?;
    let m = trainer::evaluate(&ckpt.params, &data)?;
    io_out(out.write_all(metrics_csv(&[("capsfusion", &m)]).as_bytes()))
}

fn predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let ckpt = Checkpoint::load(&a.ckpt)?;
    let features = match (&a.features, a.no_features) {
        (_, true) => None,
        (Some(json), false) => {
            let f: FeatureVector =
                serde_json::from_str(json).map_err(|e| Error::InvalidArgument(format!("--features: {e}")))?;
            Some(f)
        }
        (None, false) => return Err(Error::InvalidArgument("pass --features or --no-features".into())),
    };
    let (p, label) = ckpt.predict(&a.text, features.as_ref())?;
    io_out(writeln!(out, "{p},{label}"))
}

fn sweep(a: &SweepArgs, err: &mut dyn Write) -> Result<()> {
    let grid: Grid = a.grid.parse()?;
    let cfg = load_config(a.config.as_deref(), a.seed)?;
    let records = load_labelled(&a.data, err)?;
    let (tr, te) = split(records, a.ratio, cfg.seed, |r| r.label.expect("checked by load_labelled"))?;
    let lex = Lexicons::default();
    let enc = Encoding::fit(&tr, cfg.min_token_count, &lex.sentiment);
    let trx = enc.encode(&tr, cfg.seq_len, &lex.sentiment)?;
    let tex = enc.encode(&te, cfg.seq_len, &lex.sentiment)?;
    let rows = trainer::sweep(&trx, &tex, &cfg, &grid, enc.vocab.len())?;
    std::fs::write(&a.out, sweep_csv(&rows)).map_err(|e| Error::io(&a.out, e))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mode = match a.mode {
        ModeArg::Text => SignalMode::Text,
        ModeArg::Features => SignalMode::Features,
        ModeArg::Both => SignalMode::Both,
    };
    let spec = SynthSpec {
        records: a.records,
        mode,
        plant_rate: a.plant_rate,
        ..Default::default()
    };
    write_jsonl(&a.out, &synth_corpus(&spec, a.seed)?)
}
