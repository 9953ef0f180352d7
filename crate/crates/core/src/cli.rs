//! Command-line front end.
//!
//! Every path argument accepts `-` for stdin or stdout. Defaults of the noise,
//! split and training flags match [`NoiseConfig`], [`SplitSpec`] and
//! [`TrainConfig`].

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::charset::CharClassTable;
use crate::corpus::{load_parallel, load_tokenized_corpus, split_corpus, Corpus, CorpusFormat, SplitSpec};
use crate::crf::{load_model, save_model, CrfModel, TrainConfig, Trainer};
use crate::eval::{evaluate, evaluate_external, score_baseline, EvalReport};
use crate::labeling::{encode_stripped, read_dataset, write_dataset, Sample};
use crate::manifest::RunManifest;
use crate::noise::{build_noisy_dataset_from, DatasetMeta, NoiseConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nimfasele",
    version,
    about = "Persian space and ZWNJ correction with a character CRF"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize text line by line.
    Normalize(NormalizeArgs),
    /// Split a corpus and write tagged test/valid/train datasets.
    Build(BuildArgs),
    /// Train a CRF on a dataset file.
    Train(TrainArgs),
    /// Correct separators in text, one sentence per line.
    Correct(CorrectArgs),
    /// Score correctors against a parallel raw/gold corpus.
    Eval(EvalArgs),
}

/// How separators of the input are presented to the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Separators removed; the model sees letters only.
    A,
    /// Separators kept as context, noise injected during `build`.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Columns,
}

impl From<Format> for CorpusFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Plain => CorpusFormat::Plain,
            Format::Columns => CorpusFormat::Columns,
        }
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Extra normalization entries: `<hex codepoint><TAB><replacement>` per line.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Map Arabic-Indic and Extended Arabic-Indic digits to ASCII.
    #[arg(long)]
    pub unify_digits: bool,
}

impl TableArgs {
    fn load(&self) -> Result<CharClassTable> {
        let mut table = CharClassTable::persian();
        if self.unify_digits {
            table = table.with_digit_unification();
        }
        if let Some(path) = &self.table {
            let f = File::open(path).with_context(|| format!("cannot open table {}", path.display()))?;
            table = table
                .with_overrides(BufReader::new(f))
                .with_context(|| format!("in table {}", path.display()))?;
        }
        Ok(table)
    }
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[arg(default_value = "-")]
    pub input: String,
    #[arg(short, long, default_value = "-")]
    pub output: String,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Tokenized corpus.
    pub corpus: String,
    #[arg(long, value_enum, default_value = "a")]
    pub mode: Mode,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.10)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0.10)]
    pub valid_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.15)]
    pub r1_max: f64,
    #[arg(long, default_value_t = 0.20)]
    pub r2_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub r3_max: f64,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset file written by `build`.
    pub dataset: String,
    /// Output model file.
    #[arg(long)]
    pub model: String,
    /// Validation dataset, scored after training.
    #[arg(long)]
    pub valid: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub c2: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(default_value = "-")]
    pub input: String,
    #[arg(short, long, default_value = "-")]
    pub output: String,
    /// `b` keeps input separators as context (for models trained on mode-B data).
    #[arg(long, value_enum, default_value = "a")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Parallel corpus, `raw<TAB>gold` per line.
    pub corpus: String,
    /// Score the uncorrected raw side.
    #[arg(long)]
    pub baseline: bool,
    /// Score a trained model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "a")]
    pub mode: Mode,
    /// Score the output of another corrector, one line per corpus line.
    #[arg(long)]
    pub external: Option<String>,
    #[command(flatten)]
    pub table: TableArgs,
}

fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = File::open(path).with_context(|| format!("cannot open {path}"))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn read_all(path: &str) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    open_input(path)?
        .read_to_end(&mut buf)
        .with_context(|| format!("cannot read {path}"))?;
    Ok(buf)
}

fn open_output(path: &str) -> Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        let f = File::create(path).with_context(|| format!("cannot create {path}"))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

/// Reads lines, failing with the line number on invalid UTF-8.
fn utf8_lines(mut input: impl BufRead, name: &str) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            return Ok(lines);
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
        }
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        match String::from_utf8(std::mem::take(&mut buf)) {
            Ok(s) => lines.push(s),
            Err(_) => bail!("{name}: line {}: invalid UTF-8", lines.len() + 1),
        }
    }
}

pub fn cmd_normalize(args: &NormalizeArgs) -> Result<()> {
    let table = args.table.load()?;
    let mut input = open_input(&args.input)?;
    let mut out = open_output(&args.output)?;
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let newline = buf.last() == Some(&b'\n');
        let body = if newline { &buf[..buf.len() - 1] } else { &buf[..] };
        let text =
            std::str::from_utf8(body).map_err(|_| anyhow::anyhow!("{}: line {line_no}: invalid UTF-8", args.input))?;
        out.write_all(table.normalize(text).as_bytes())?;
        if newline {
            out.write_all(b"\n")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn write_split(path: &Path, meta: &DatasetMeta, samples: &[Sample]) -> Result<()> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_dataset(BufWriter::new(f), Some(&meta.to_json()), samples)?;
    Ok(())
}

pub fn cmd_build(args: &BuildArgs) -> Result<()> {
    let table = args.table.load()?;
    let spec = SplitSpec {
        test_fraction: args.test_frac,
        valid_fraction: args.valid_frac,
    };
    spec.validate()?;
    let noise = NoiseConfig {
        r1_max: args.r1_max,
        r2_max: args.r2_max,
        r3_max: args.r3_max,
        seed: args.seed,
    };
    noise.validate()?;

    let bytes = read_all(&args.corpus)?;
    let (corpus, report) = load_tokenized_corpus(&bytes[..], args.format.into(), &table, &args.corpus)
        .with_context(|| format!("cannot load {}", args.corpus))?;
    let split = split_corpus(&corpus, spec)?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let parts: [(&str, &Corpus, usize); 3] = [
        ("test", &split.test, 0),
        ("valid", &split.valid, split.test.len()),
        ("train", &split.train, split.test.len() + split.valid.len()),
    ];
    for (name, part, first) in parts {
        let (meta, samples) = match args.mode {
            Mode::A => {
                let samples = part
                    .sentences
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        encode_stripped(s)
                            .map(Sample::from)
                            .with_context(|| format!("sentence {}", first + i))
                    })
                    .collect::<Result<Vec<_>>>()?;
                (DatasetMeta::stripped(name, first), samples)
            }
            Mode::B => (
                DatasetMeta::noisy(name, first, &noise),
                build_noisy_dataset_from(part, &noise, first)?,
            ),
        };
        write_split(&args.out_dir.join(format!("{name}.tsv")), &meta, &samples)?;
        eprintln!("{name}: {} sentences", samples.len());
    }
    if report.skipped_empty > 0 {
        eprintln!("skipped {} empty lines", report.skipped_empty);
    }

    let mode = match args.mode {
        Mode::A => "A",
        Mode::B => "B",
    };
    let mut config = json!({
        "mode": mode,
        "format": format!("{:?}", args.format).to_lowercase(),
        "test_frac": args.test_frac,
        "valid_frac": args.valid_frac,
        "unify_digits": args.table.unify_digits,
    });
    if args.mode == Mode::B {
        config["r1_max"] = json!(args.r1_max);
        config["r2_max"] = json!(args.r2_max);
        config["r3_max"] = json!(args.r3_max);
    }
    let mut manifest = RunManifest::new("build", config, (args.mode == Mode::B).then_some(args.seed));
    manifest.add_input(&args.corpus, &bytes);
    if let Some(path) = &args.table.table {
        manifest.add_input(&path.display().to_string(), &std::fs::read(path)?);
    }
    manifest.write(&args.out_dir.join("manifest.json"))?;
    Ok(())
}

fn load_samples(path: &str, bytes: &[u8]) -> Result<Vec<Sample>> {
    Ok(read_dataset(bytes)
        .with_context(|| format!("cannot read dataset {path}"))?
        .samples)
}

/// Macro-F1 of `model` on a dataset, scoring unmasked positions.
pub fn dataset_report(model: &CrfModel, samples: &[Sample]) -> Result<EvalReport> {
    let mut reports = Vec::with_capacity(samples.len());
    for s in samples.iter().filter(|s| !s.is_empty()) {
        let pred = model.predict_masked(&s.symbols, &s.mask)?;
        reports.push(evaluate(&s.tags, &pred, &s.mask)?);
    }
    Ok(EvalReport::merge_all(&reports))
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = TrainConfig {
        c1: args.c1,
        c2: args.c2,
        max_iterations: args.max_iter,
        convergence_tol: args.tol,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    let bytes = read_all(&args.dataset)?;
    let samples = load_samples(&args.dataset, &bytes)?;
    let valid_bytes = args.valid.as_deref().map(read_all).transpose()?;
    let valid = match (&args.valid, &valid_bytes) {
        (Some(path), Some(b)) => Some(load_samples(path, b)?),
        _ => None,
    };

    // progress goes to stderr when the model itself is written to stdout
    let mut progress: Box<dyn Write> = if args.model == "-" {
        Box::new(io::stderr())
    } else {
        Box::new(io::stdout())
    };
    let (model, log) = {
        let progress = &mut progress;
        Trainer::new(cfg)
            .observer(|r, _| {
                let _ = writeln!(
                    progress,
                    "iter {:>3}  objective {:.6}  loglik {:.6}  nonzero {}",
                    r.iteration, r.objective, r.log_likelihood, r.nonzero
                );
            })
            .train(&samples)
            .context("training failed")?
    };
    writeln!(
        progress,
        "stop: {:?} after {} iterations",
        log.stop,
        log.iterations.len()
    )?;
    if let Some(valid) = &valid {
        let report = dataset_report(&model, valid)?;
        writeln!(progress, "validation macro-F1 {:.4}", report.macro_f1)?;
    }
    progress.flush()?;

    let mut out = open_output(&args.model)?;
    save_model(&model, &mut out)?;
    out.flush()?;

    if args.model != "-" {
        let config = json!({
            "c1": args.c1,
            "c2": args.c2,
            "max_iter": args.max_iter,
            "tol": args.tol,
            "memory": TrainConfig::default().memory,
            "offsets": model.template().offsets,
            "features": model.vocab().len(),
            "iterations": log.iterations.len(),
            "stop": format!("{:?}", log.stop),
        });
        let mut manifest = RunManifest::new("train", config, None);
        manifest.add_input(&args.dataset, &bytes);
        if let (Some(path), Some(b)) = (&args.valid, &valid_bytes) {
            manifest.add_input(path, b);
        }
        manifest.write(Path::new(&format!("{}.manifest.json", args.model)))?;
    }
    Ok(())
}

fn open_model(path: &Path) -> Result<CrfModel> {
    let f = File::open(path).with_context(|| format!("cannot open model {}", path.display()))?;
    load_model(BufReader::new(f)).with_context(|| format!("cannot load model {}", path.display()))
}

fn correct_line(model: &CrfModel, mode: Mode, line: &str) -> Result<String> {
    Ok(match mode {
        Mode::A => model.correct(line)?,
        Mode::B => model.correct_retained(line)?,
    })
}

pub fn cmd_correct(args: &CorrectArgs) -> Result<()> {
    let model = open_model(&args.model)?;
    let lines = utf8_lines(open_input(&args.input)?, &args.input)?;
    let mut out = open_output(&args.output)?;
    for line in &lines {
        writeln!(out, "{}", correct_line(&model, args.mode, line)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    if !args.baseline && args.model.is_none() && args.external.is_none() {
        bail!("nothing to evaluate: pass --baseline, --model or --external");
    }
    let table = args.table.load()?;
    let pairs = load_parallel(open_input(&args.corpus)?, &table, false)
        .with_context(|| format!("cannot load {}", args.corpus))?;

    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    if args.baseline {
        let reports = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| score_baseline(p).with_context(|| format!("pair {}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(("Baseline".into(), EvalReport::merge_all(&reports)));
    }
    if let Some(path) = &args.model {
        let model = open_model(path)?;
        let mut reports = Vec::with_capacity(pairs.len());
        for p in &pairs {
            let corrected = correct_line(&model, args.mode, &p.raw)?;
            reports.push(evaluate_external(&p.raw, &corrected, &p.gold));
        }
        rows.push(("CRF".into(), EvalReport::merge_all(&reports)));
    }
    if let Some(path) = &args.external {
        let corrected = utf8_lines(open_input(path)?, path)?;
        if corrected.len() != pairs.len() {
            bail!(
                "{path} has {} lines but the corpus has {} pairs",
                corrected.len(),
                pairs.len()
            );
        }
        let reports: Vec<EvalReport> = pairs
            .iter()
            .zip(&corrected)
            .map(|(p, c)| evaluate_external(&p.raw, &table.normalize(c), &p.gold))
            .collect();
        rows.push(("External".into(), EvalReport::merge_all(&reports)));
    }

    let mut out = BufWriter::new(io::stdout());
    let table_rows: Vec<(&str, &EvalReport)> = rows.iter().map(|(n, r)| (n.as_str(), r)).collect();
    write!(out, "{}", EvalReport::render_table(&table_rows))?;
    for (name, report) in &rows {
        writeln!(out, "\n[{name}]")?;
        write!(out, "{}", report.render_details())?;
        write!(out, "{}", report.to_key_values())?;
    }
    out.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Normalize(a) => cmd_normalize(a),
        Command::Build(a) => cmd_build(a),
        Command::Train(a) => cmd_train(a),
        Command::Correct(a) => cmd_correct(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit status.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
