//! Command-line driver: ingest, analyze, train, pairs and debias.
//!
//! Every flag may also come from a TOML file given with `--config`; values on
//! the command line win. Each report embeds the resolved [`RunConfig`].

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use biaslens::analogy::{
    default_candidates, extract_pairs, load_kb, parse_candidates, save_kb, EmbeddingSource,
    KnowledgeBase, PairConfig, Provenance, DEFAULT_CANDIDATE_LIMIT,
};
use biaslens::analysis::{analyze_corpus, emit_reports, Analyzer, ReportContext, DEFAULT_TOP_K};
use biaslens::corpus::{load_census, load_occupations, scan_corpus, NameCensus, OccupationLexicon};
use biaslens::debias::{detect_bias, explain, rewrite, RewriteMode};
use biaslens::embeddings::{
    fact_words, load_embeddings, preprocess_facts, save_embeddings, train_skipgram, Dictionary,
    EmbeddingTable, TrainConfig,
};
use biaslens::graph::{build_graph, default_epsilon};
use biaslens::textproc::Pipeline;
use biaslens::{resources, Execution, VERSION};

#[derive(Debug, Parser)]
#[command(name = "biaslens", version, about = "Gender-stereotype analytics and de-biasing for book descriptions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus file and summarize it.
    Ingest(Options),
    /// Run the text pipeline over a corpus and write reports.
    Analyze(Options),
    /// Train skip-gram vectors on fact text.
    Train(Options),
    /// Extract analogical pairs into a knowledge base.
    Pairs(Options),
    /// Detect and rewrite stereotyped role assignments in a text.
    Debias(Options),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Analyze(_) => "analyze",
            Command::Train(_) => "train",
            Command::Pairs(_) => "pairs",
            Command::Debias(_) => "debias",
        }
    }

    fn options(&self) -> &Options {
        match self {
            Command::Ingest(o)
            | Command::Analyze(o)
            | Command::Train(o)
            | Command::Pairs(o)
            | Command::Debias(o) => o,
        }
    }
}

/// Flags shared by every subcommand; each is optional here and checked per
/// command after merging with the config file.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// TOML file supplying any of these flags (command line wins).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Corpus file (JSON lines of book records).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Name census CSV (name,gender,frequency).
    #[arg(long)]
    pub census: Option<PathBuf>,
    /// Occupation lexicon CSV (term,level); the bundled list when absent.
    #[arg(long)]
    pub occupations: Option<PathBuf>,
    /// Wordlist filtering fact text before training.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Embedding file (word2vec text format); output path for `train`.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Knowledge base file; output for `pairs`, input for `debias`.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Text to de-bias.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Fact text to train on (`train`, or `pairs` without --embeddings).
    #[arg(long)]
    pub train_text: Option<PathBuf>,
    /// Candidate pair CSV (x,y); defaults to all pairs over the top 2000 words.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Pair score threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Cosine distance threshold to "he".
    #[arg(long)]
    pub tau1: Option<f64>,
    /// Cosine distance threshold to "she".
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Centrality gap allowed between swapped characters (default: 25% of the maximum).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Terms per gender in term reports.
    #[arg(long)]
    pub topk: Option<usize>,
    /// Worker threads for per-book and per-pair work (1 = sequential).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Rewrite mode: terms or names.
    #[arg(long)]
    pub mode: Option<String>,
    /// Embedding dimension for training.
    #[arg(long)]
    pub dimension: Option<usize>,
    /// Training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minimum word count for training.
    #[arg(long)]
    pub min_count: Option<usize>,
}

macro_rules! prefer {
    ($cli:expr, $file:expr, $($field:ident),*) => {
        Options { config: $cli.config.clone(), $($field: $cli.$field.clone().or($file.$field.clone())),* }
    };
}

impl Options {
    /// Command-line values over config-file values.
    pub fn resolve(&self) -> Result<Options> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading --config {}", path.display()))?;
                toml::from_str::<Options>(&text)
                    .with_context(|| format!("parsing --config {}", path.display()))?
            }
            None => Options::default(),
        };
        Ok(prefer!(
            self, file, corpus, census, occupations, dictionary, embeddings, kb, out, input,
            train_text, candidates, tau, tau1, tau2, epsilon, seed, topk, jobs, mode, dimension,
            epochs, min_count
        ))
    }
}

/// Fully resolved settings, written into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub command: String,
    #[serde(flatten)]
    pub options: Options,
    pub pair_config: PairConfig,
    pub top_k: usize,
    pub parallel: bool,
}

impl RunConfig {
    fn new(command: &str, options: Options) -> Result<Self> {
        let defaults = PairConfig::default();
        let pair_config = PairConfig {
            tau: options.tau.unwrap_or(defaults.tau),
            tau1: options.tau1.unwrap_or(defaults.tau1),
            tau2: options.tau2.unwrap_or(defaults.tau2),
        };
        pair_config.validate()?;
        if let Some(e) = options.epsilon {
            ensure!(e >= 0.0 && e.is_finite(), "--epsilon must be a finite value >= 0");
        }
        if let Some(j) = options.jobs {
            ensure!(j >= 1, "--jobs must be at least 1");
        }
        let top_k = options.topk.unwrap_or(DEFAULT_TOP_K);
        ensure!(top_k >= 1, "--topk must be at least 1");
        let parallel = cfg!(feature = "parallel") && options.jobs.is_none_or(|j| j > 1);
        Ok(RunConfig {
            version: VERSION,
            command: command.to_string(),
            options,
            pair_config,
            top_k,
            parallel,
        })
    }

    fn exec(&self) -> Execution {
        if self.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("run config serializes")
    }
}

/// What a command produced, for the caller to print.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    /// Diagnostics that do not abort the command but make it fail.
    pub errors: Vec<String>,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.errors.is_empty()
    }
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    let path = value
        .as_deref()
        .with_context(|| format!("missing required --{flag}"))?;
    ensure!(path.exists(), "--{flag} {}: file not found", path.display());
    Ok(path)
}

fn require_out<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .with_context(|| format!("missing required --{flag}"))
}

fn census(opts: &Options) -> Result<NameCensus> {
    let path = require(&opts.census, "census")?;
    load_census(path).with_context(|| format!("--census {}", path.display()))
}

fn occupations(opts: &Options) -> Result<OccupationLexicon> {
    match &opts.occupations {
        Some(_) => {
            let path = require(&opts.occupations, "occupations")?;
            load_occupations(path).with_context(|| format!("--occupations {}", path.display()))
        }
        None => Ok(resources::occupations()),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs.filter(|&n| n > 1) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building worker pool")?;
        return Ok(pool.install(f));
    }
    let _ = jobs;
    Ok(f())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let options = cli.command.options().resolve()?;
    let config = RunConfig::new(cli.command.name(), options)?;
    match &cli.command {
        Command::Ingest(_) => cmd_ingest(&config),
        Command::Analyze(_) => cmd_analyze(&config),
        Command::Train(_) => cmd_train(&config),
        Command::Pairs(_) => cmd_pairs(&config),
        Command::Debias(_) => cmd_debias(&config),
    }
}

pub fn cmd_ingest(config: &RunConfig) -> Result<Outcome> {
    let opts = &config.options;
    let path = require(&opts.corpus, "corpus")?;
    let scan = scan_corpus(path).with_context(|| format!("--corpus {}", path.display()))?;
    let years = scan.records.iter().map(|r| r.year);
    let summary = match (years.clone().min(), years.max()) {
        (Some(lo), Some(hi)) => format!("{} records, years {lo}–{hi}", scan.records.len()),
        _ => format!("{} records", scan.records.len()),
    };
    let errors: Vec<String> = scan
        .errors
        .iter()
        .map(|e| format!("{}: {e}", path.display()))
        .collect();
    if let Some(out) = &opts.out {
        fs::create_dir_all(out)?;
        write_json(
            &out.join("ingest.json"),
            &json!({
                "version": VERSION,
                "run_config": config.to_json(),
                "summary": summary,
                "records": scan.records.len(),
                "errors": errors,
            }),
        )?;
    }
    Ok(Outcome {
        stdout: format!("{summary}\n"),
        errors,
    })
}

pub fn cmd_analyze(config: &RunConfig) -> Result<Outcome> {
    let opts = &config.options;
    let corpus_path = require(&opts.corpus, "corpus")?;
    let census = census(opts)?;
    let lexicon = occupations(opts)?;
    let out = require_out(&opts.out, "out")?;

    let scan = scan_corpus(corpus_path).with_context(|| format!("--corpus {}", corpus_path.display()))?;
    if let Some(e) = scan.errors.first() {
        bail!("{}: {e}", corpus_path.display());
    }
    let analyzer = Analyzer::new(Pipeline::bundled(), census, lexicon);
    let exec = config.exec();
    let analysis = with_jobs(opts.jobs, || analyze_corpus(&scan.records, &analyzer, exec))?;
    let ctx = ReportContext {
        run_config: config.to_json(),
        top_k: config.top_k,
    };
    emit_reports(&analysis, &analyzer.occupations, &ctx, out)
        .with_context(|| format!("writing reports to {}", out.display()))?;
    let m = &analysis.mentions;
    Ok(Outcome {
        stdout: format!(
            "{} books analyzed: {} male and {} female mentions; reports in {}\n",
            analysis.books.len(),
            m.male(),
            m.female(),
            out.display()
        ),
        errors: vec![],
    })
}

fn train_config(opts: &Options) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        dimension: opts.dimension.unwrap_or(d.dimension),
        epochs: opts.epochs.unwrap_or(d.epochs),
        min_count: opts.min_count.unwrap_or(d.min_count),
        seed: opts.seed.unwrap_or(d.seed),
        ..d
    }
}

fn train_from(opts: &Options) -> Result<EmbeddingTable> {
    let path = require(&opts.train_text, "train-text")?;
    let text = fs::read_to_string(path).with_context(|| format!("--train-text {}", path.display()))?;
    let words = fact_words(&text);
    let dictionary = match &opts.dictionary {
        Some(_) => {
            let p = require(&opts.dictionary, "dictionary")?;
            Dictionary::load(p).with_context(|| format!("--dictionary {}", p.display()))?
        }
        None => Dictionary::from_words(words.iter().map(|w| w.to_lowercase())),
    };
    let tokens = preprocess_facts(&words, &dictionary);
    train_skipgram(&tokens, &train_config(opts)).context("training embeddings")
}

pub fn cmd_train(config: &RunConfig) -> Result<Outcome> {
    let opts = &config.options;
    let out = require_out(&opts.embeddings, "embeddings")?;
    let table = train_from(opts)?;
    save_embeddings(&table, out)?;
    Ok(Outcome {
        stdout: format!("{} words x {} dimensions written to {}\n", table.len(), table.dim(), out.display()),
        errors: vec![],
    })
}

pub fn cmd_pairs(config: &RunConfig) -> Result<Outcome> {
    let opts = &config.options;
    let kb_path = require_out(&opts.kb, "kb")?;
    let (table, source) = match &opts.embeddings {
        Some(_) => {
            let p = require(&opts.embeddings, "embeddings")?;
            let table = load_embeddings(p).with_context(|| format!("--embeddings {}", p.display()))?;
            let source = EmbeddingSource::from_file(p, &table)?;
            (table, source)
        }
        None if opts.train_text.is_some() => {
            let table = train_from(opts)?;
            let label = format!("trained:{}", opts.train_text.as_ref().unwrap().display());
            let source = EmbeddingSource::from_table(label, &table);
            (table, source)
        }
        None => bail!("missing required --embeddings (or --train-text)"),
    };
    let (candidates, candidate_source) = match &opts.candidates {
        Some(_) => {
            let p = require(&opts.candidates, "candidates")?;
            let text = fs::read_to_string(p)?;
            let c = parse_candidates(&text).map_err(|e| anyhow::anyhow!("--candidates {}: {e}", p.display()))?;
            (c, p.display().to_string())
        }
        None => {
            let stop: HashSet<String> = resources::stopwords();
            (
                default_candidates(&table, &stop, DEFAULT_CANDIDATE_LIMIT),
                format!("top-{DEFAULT_CANDIDATE_LIMIT}"),
            )
        }
    };
    let exec = config.exec();
    let extraction = with_jobs(opts.jobs, || {
        extract_pairs(&table, &candidates, &config.pair_config, exec)
    })?
    .context("extracting pairs")?;

    let kb = KnowledgeBase::new(
        Provenance {
            version: VERSION.into(),
            embeddings: source,
            config: config.pair_config,
            candidates: candidate_source,
        },
        extraction.pairs,
    );
    save_kb(&kb, kb_path)?;
    let log_path = rejection_log_path(kb_path);
    let mut log = csv::Writer::from_path(&log_path)
        .with_context(|| format!("writing {}", log_path.display()))?;
    log.write_record(["x", "y", "reason"])?;
    for r in &extraction.rejections {
        log.write_record([&r.x, &r.y, &r.reason])?;
    }
    log.flush()?;
    Ok(Outcome {
        stdout: format!(
            "{} pairs kept from {} candidates ({} rejected); knowledge base {}\n",
            kb.pairs.len(),
            candidates.len(),
            extraction.rejections.len(),
            kb_path.display()
        ),
        errors: vec![],
    })
}

/// `<kb>.rejections.csv` next to the knowledge base.
pub fn rejection_log_path(kb: &Path) -> PathBuf {
    let mut name = kb.file_name().unwrap_or_default().to_os_string();
    name.push(".rejections.csv");
    kb.with_file_name(name)
}

pub fn cmd_debias(config: &RunConfig) -> Result<Outcome> {
    let opts = &config.options;
    let input = require(&opts.input, "input")?;
    let kb_path = require(&opts.kb, "kb")?;
    let census = census(opts)?;
    let lexicon = occupations(opts)?;
    let out = require_out(&opts.out, "out")?;
    let mode: RewriteMode = match &opts.mode {
        Some(m) => m.parse().map_err(anyhow::Error::msg)?,
        None => RewriteMode::default(),
    };

    let text = fs::read_to_string(input).with_context(|| format!("--input {}", input.display()))?;
    let kb = load_kb(kb_path).with_context(|| format!("--kb {}", kb_path.display()))?;
    let analyzer = Analyzer::new(Pipeline::bundled(), census, lexicon);
    let doc = analyzer.process(&text);
    let findings = detect_bias(&doc, analyzer.matcher(), &kb);
    let graph = build_graph(&doc.triples, &doc.coref.entities, config.exec());
    let epsilon = opts.epsilon.unwrap_or_else(|| default_epsilon(&graph));
    let result = rewrite(&doc, &findings, &graph, epsilon, mode);

    fs::create_dir_all(out)?;
    let targets = ["debiased.txt", "edits.json", "findings.txt", "graph.json"].map(|f| out.join(f));
    let input_abs = fs::canonicalize(input)?;
    for t in &targets {
        if fs::canonicalize(t).is_ok_and(|p| p == input_abs) {
            bail!("refusing to overwrite --input {}", input.display());
        }
    }
    fs::write(&targets[0], &result.text)?;
    write_json(
        &targets[1],
        &json!({
            "version": VERSION,
            "run_config": config.to_json(),
            "epsilon": epsilon,
            "edits": result.edits,
            "dropped": result.dropped,
        }),
    )?;
    let mut report = explain(&findings, &result, &kb, epsilon);
    report.insert_str(0, &format!("# run config: {}\n", serde_json::to_string(&config.to_json())?));
    fs::write(&targets[2], report)?;
    write_json(
        &targets[3],
        &json!({ "version": VERSION, "graph": graph }),
    )?;

    let mut stdout = Vec::new();
    writeln!(
        stdout,
        "{} findings, {} edits; output in {}",
        findings.len(),
        result.edits.len(),
        out.display()
    )?;
    Ok(Outcome {
        stdout: String::from_utf8(stdout)?,
        errors: vec![],
    })
}
