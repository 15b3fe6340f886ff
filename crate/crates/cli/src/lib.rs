//! The `ctxenc` command line: mine commits, encode them, inspect slices,
//! generate messages with the retrieval baseline and evaluate it.

pub mod config;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ctxenc_core::{slice, CommitAnalysis, EncodeMode};
use ctxenc_corpus::miner::CommitRecord;
use ctxenc_corpus::retrieval::{examples_for, prepare};
use ctxenc_corpus::{
    build_record, evaluate, mine_repo, read_corpus_file, read_repo_list, run_experiment,
    split_by_repo, write_corpus, CorpusStats, ExperimentConfig, ReportSections, ReportTable,
    Retriever,
};

pub use config::{ConfigError, RunConfig};

const AFTER_HELP: &str = "\
Settings come from built-in defaults, then the --config file (flat key=value
lines, keys named like the flags), then flags. Exit status: 0 on success,
1 on a usage or configuration error, 2 on a data error.";

#[derive(Debug, Parser)]
#[command(name = "ctxenc", version, about = "Context-encoded code change representations for commit message generation", after_help = AFTER_HELP)]
pub struct Cli {
    /// Flat key=value settings file, overridden by flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Cmd,
}

/// Setting flags; each maps to the config key of the same name.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Slice depth in dependence edges from the changed statements. Three
    /// hops keeps the statements the change actually relies on without
    /// flooding the input [default: 3]
    #[arg(long, global = true, value_name = "N")]
    pub depth: Option<String>,
    /// Dependences to follow: control, data or control+data. Both kinds
    /// together give the most informative context [default: control+data]
    #[arg(long, global = true, value_name = "KINDS")]
    pub edge_kinds: Option<String>,
    /// Slice direction: backward, forward or both. Statements a change
    /// relies on and statements it affects both explain it [default: both]
    #[arg(long, global = true, value_name = "DIR")]
    pub directions: Option<String>,
    /// Follow call and parameter edges into other methods, so a changed
    /// call site brings its callee along [default: true]
    #[arg(long, global = true, value_name = "BOOL")]
    pub interprocedural: Option<String>,
    /// Maximum whitespace tokens in a representation, matching the input
    /// window of typical pretrained code models [default: 512]
    #[arg(long, global = true, value_name = "N")]
    pub token_budget: Option<String>,
    /// Shortest kept commit message in words; shorter ones rarely say
    /// what changed [default: 5]
    #[arg(long, global = true, value_name = "N")]
    pub min_words: Option<String>,
    /// Longest kept commit message in words; longer ones are usually
    /// changelogs [default: 150]
    #[arg(long, global = true, value_name = "N")]
    pub max_words: Option<String>,
    /// Most changed statements in a kept commit; bigger commits are
    /// mostly bulk or tangled changes [default: 20]
    #[arg(long, global = true, value_name = "N")]
    pub max_changes: Option<String>,
    /// Oldest share of each repository's commits used for training
    /// [default: 0.8]
    #[arg(long, global = true, value_name = "R")]
    pub train_ratio: Option<String>,
    /// Next share held out for validation; the newest remainder is the
    /// test split [default: 0.1]
    #[arg(long, global = true, value_name = "R")]
    pub valid_ratio: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        [
            ("depth", &self.depth),
            ("edge-kinds", &self.edge_kinds),
            ("directions", &self.directions),
            ("interprocedural", &self.interprocedural),
            ("token-budget", &self.token_budget),
            ("min-words", &self.min_words),
            ("max-words", &self.max_words),
            ("max-changes", &self.max_changes),
            ("train-ratio", &self.train_ratio),
            ("valid-ratio", &self.valid_ratio),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Mine every repository in a list into a corpus file
    Mine {
        /// One local clone per line; `#` starts a comment; relative paths
        /// are resolved against the list's directory
        #[arg(long, value_name = "FILE")]
        repos: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Add rendered representations to the kept records of a corpus
    Encode {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        /// Output corpus; may equal the input
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Print the dependence graphs, changed ids and slice of one change
    Slice {
        #[arg(long, value_name = "FILE", requires = "commit", conflicts_with_all = ["before", "after"])]
        corpus: Option<PathBuf>,
        /// Commit id or unique prefix
        #[arg(long, value_name = "ID")]
        commit: Option<String>,
        #[arg(long, value_name = "FILE", requires = "after")]
        before: Option<PathBuf>,
        #[arg(long, value_name = "FILE", requires = "before")]
        after: Option<PathBuf>,
    },
    /// Generate messages for the test split, or for one representation
    Generate {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        /// File holding one rendered representation; prints its message
        #[arg(long, value_name = "FILE", conflicts_with = "out")]
        query: Option<PathBuf>,
        /// Line-delimited predictions for the test split
        #[arg(long, value_name = "FILE", required_unless_present = "query")]
        out: Option<PathBuf>,
    },
    /// Evaluate the retrieval baseline and write a line-delimited report
    Eval {
        #[arg(long, value_name = "FILE")]
        corpus: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Query the training split with itself
        #[arg(long)]
        train_on_train: bool,
        /// Extra report sections: any of ablation, depth, buckets, or none
        #[arg(long, value_delimiter = ',', default_value = "ablation,depth,buckets")]
        sections: Vec<String>,
    },
}

/// Failure classes, mapped to exit status 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &cli.config {
        cfg.apply_file(p)?;
    }
    for (k, v) in cli.overrides.pairs() {
        cfg.set(k, v, "command line")?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses arguments and runs a command, returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = resolve_config(&cli)
        .map_err(Failure::from)
        .and_then(|cfg| dispatch(&cli.command, &cfg, out, err));
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn dispatch(
    cmd: &Cmd,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    match cmd {
        Cmd::Mine { repos, out: path } => cmd_mine(repos, path, cfg, out, err)?,
        Cmd::Encode { corpus, out: path } => cmd_encode(corpus, path, cfg, err)?,
        Cmd::Slice {
            corpus,
            commit,
            before,
            after,
        } => {
            let files = match (corpus, commit, before, after) {
                (Some(c), Some(id), _, _) => commit_files(c, id, cfg, err)?,
                (_, _, Some(b), Some(a)) => {
                    let name = a
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    let read = |p: &Path| {
                        fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
                    };
                    vec![(name, read(b)?, read(a)?)]
                }
                _ => {
                    return Err(Failure::Usage(
                        "slice needs --corpus with --commit, or --before with --after".into(),
                    ))
                }
            };
            cmd_slice(&files, cfg, out)?;
        }
        Cmd::Generate {
            corpus,
            query,
            out: path,
        } => cmd_generate(corpus, query.as_deref(), path.as_deref(), cfg, out, err)?,
        Cmd::Eval {
            corpus,
            out: path,
            train_on_train,
            sections,
        } => {
            let mut s = ReportSections {
                ablation: false,
                depth: false,
                buckets: false,
            };
            for name in sections {
                match name.trim() {
                    "ablation" => s.ablation = true,
                    "depth" => s.depth = true,
                    "buckets" => s.buckets = true,
                    "none" => {}
                    other => {
                        return Err(Failure::Usage(format!("unknown report section '{other}'")))
                    }
                }
            }
            cmd_eval(corpus, path, cfg, *train_on_train, s, out, err)?;
        }
    }
    Ok(())
}

/// Writes through a temporary file in the destination directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| anyhow!("writing {}: {}", path.display(), e.error))?;
    Ok(())
}

fn load_corpus(path: &Path, cfg: &RunConfig, err: &mut dyn Write) -> Result<Vec<CommitRecord>> {
    let read = read_corpus_file(path, &cfg.filter())
        .with_context(|| format!("reading corpus {}", path.display()))?;
    if !read.skipped.is_empty() {
        writeln!(
            err,
            "{}: skipped {} malformed line(s): {:?}",
            path.display(),
            read.skipped.len(),
            read.skipped
        )?;
    }
    Ok(read.records)
}

fn corpus_bytes(records: &[CommitRecord], cfg: &RunConfig) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_corpus(&mut buf, records, &cfg.filter())?;
    Ok(buf)
}

pub fn cmd_mine(
    list: &Path,
    path: &Path,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let text = fs::read_to_string(list)
        .with_context(|| format!("reading repository list {}", list.display()))?;
    let base = list.parent().unwrap_or(Path::new("."));
    let filter = cfg.filter();
    let mut records = Vec::new();
    for repo in read_repo_list(&text) {
        let repo = if repo.is_relative() {
            base.join(repo)
        } else {
            repo
        };
        let mined = mine_repo(&repo).with_context(|| format!("mining {}", repo.display()))?;
        let name = repo
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| repo.display().to_string());
        for d in &mined.diagnostics {
            writeln!(err, "{name}: {d}")?;
        }
        records.extend(
            mined
                .commits
                .iter()
                .map(|c| build_record(&name, c, &filter)),
        );
    }
    write_atomic(path, &corpus_bytes(&records, cfg)?)?;
    write!(out, "{}", CorpusStats::from_records(&records).table())?;
    Ok(())
}

pub fn cmd_encode(input: &Path, path: &Path, cfg: &RunConfig, err: &mut dyn Write) -> Result<()> {
    let mut records = load_corpus(input, cfg, err)?;
    let mode = EncodeMode::Context(cfg.slice());
    for r in records.iter_mut().filter(|r| r.is_kept()) {
        let analysis = CommitAnalysis::new(&r.file_triples());
        r.diagnostics = analysis.diagnostics().map(|d| d.to_string()).collect();
        match analysis.encode(mode, cfg.token_budget) {
            Ok(rep) => r.representation = Some(rep.render()),
            Err(e) => {
                r.representation = None;
                r.diagnostics.push(format!("encode: {e}"));
                writeln!(err, "{}: {e}", r.commit_id)?;
            }
        }
    }
    write_atomic(path, &corpus_bytes(&records, cfg)?)
}

type FileTriple = (String, String, String);

fn commit_files(
    corpus: &Path,
    id: &str,
    cfg: &RunConfig,
    err: &mut dyn Write,
) -> Result<Vec<FileTriple>> {
    let records = load_corpus(corpus, cfg, err)?;
    let hits: Vec<&CommitRecord> = records
        .iter()
        .filter(|r| r.commit_id.starts_with(id))
        .collect();
    match hits.as_slice() {
        [r] => Ok(r
            .files
            .iter()
            .map(|f| (f.path.clone(), f.before.clone(), f.after.clone()))
            .collect()),
        [] => bail!("no commit {id} in {}", corpus.display()),
        _ => bail!("commit prefix {id} is ambiguous"),
    }
}

fn ids(set: &BTreeSet<usize>) -> String {
    set.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_slice(files: &[FileTriple], cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let a = CommitAnalysis::new(files);
    let sc = cfg.slice();
    let sides = [
        ("before", &a.before, &a.changes.removed),
        ("after", &a.after, &a.changes.added),
    ];
    for (name, side, changed) in sides {
        writeln!(out, "{name} pdg:")?;
        write!(out, "{}", side.pdg.dump())?;
        let s = slice(&side.pdg, changed, &sc);
        writeln!(out, "{name} changed: {}", ids(changed))?;
        writeln!(out, "{name} slice: {}", ids(&s.ids()))?;
    }
    for d in a.diagnostics() {
        writeln!(out, "diagnostic: {d}")?;
    }
    match a.encode(EncodeMode::Context(sc), cfg.token_budget) {
        Ok(rep) => writeln!(out, "representation:\n{}", rep.render())?,
        Err(e) => writeln!(out, "representation: {e}")?,
    }
    Ok(())
}

pub fn cmd_generate(
    corpus: &Path,
    query: Option<&Path>,
    path: Option<&Path>,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let records = load_corpus(corpus, cfg, err)?;
    let prepared = prepare(&records);
    let examples = examples_for(
        &prepared,
        EncodeMode::Context(cfg.slice()),
        cfg.token_budget,
    );
    let splits = split_by_repo(&examples, |e| &e.repo, cfg.ratios());
    if let Some(q) = query {
        let text = fs::read_to_string(q).with_context(|| format!("reading {}", q.display()))?;
        let retriever = Retriever::train(&splits.train);
        let msg = retriever.generate(&text)?;
        writeln!(out, "{msg}")?;
        return Ok(());
    }
    let eval = evaluate(&splits.test, &splits.train)?;
    let mut buf = Vec::new();
    for p in &eval.predictions {
        serde_json::to_writer(&mut buf, p)?;
        buf.push(b'\n');
    }
    write_atomic(path.expect("--out is required without --query"), &buf)?;
    writeln!(out, "{} predictions", eval.predictions.len())?;
    Ok(())
}

pub fn cmd_eval(
    corpus: &Path,
    path: &Path,
    cfg: &RunConfig,
    train_on_train: bool,
    sections: ReportSections,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let records = load_corpus(corpus, cfg, err)?;
    let rows = run_experiment(
        &records,
        &ExperimentConfig {
            slice: cfg.slice(),
            budget: cfg.token_budget,
            ratios: cfg.ratios(),
            train_on_train,
            sections,
        },
    )?;
    let mut buf = Vec::new();
    for r in &rows {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)?;
    write!(out, "{}", ReportTable(&rows))?;
    Ok(())
}

pub fn main_with_stdio() -> i32 {
    let (stdout, stderr) = (io::stdout(), io::stderr());
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
