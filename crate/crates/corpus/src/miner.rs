//! Commit mining from local git clones, message cleaning, quality filters
//! and the line-delimited corpus format.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use ctxenc_core::CommitAnalysis;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileVersions {
    pub path: String,
    /// Empty when the file does not exist before the commit.
    pub before: String,
    /// Empty when the commit deletes the file.
    pub after: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    TooManyChanges,
    NoChanges,
    TooShort,
    TooLong,
    NotVerbFirst,
    Merge,
    Rollback,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::TooManyChanges => "too-many-changes",
            DropReason::NoChanges => "no-changes",
            DropReason::TooShort => "too-short",
            DropReason::TooLong => "too-long",
            DropReason::NotVerbFirst => "not-verb-first",
            DropReason::Merge => "merge",
            DropReason::Rollback => "rollback",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Kept,
    Dropped(DropReason),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub repo: String,
    pub commit_id: String,
    pub message_raw: String,
    pub message_clean: String,
    pub files: Vec<FileVersions>,
    pub changed_statement_count: usize,
    pub verdict: Verdict,
    pub representation: Option<String>,
    #[serde(default)]
    pub merge: bool,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl CommitRecord {
    pub fn is_kept(&self) -> bool {
        self.verdict == Verdict::Kept
    }

    /// `(path, before, after)` triples for analysis.
    pub fn file_triples(&self) -> Vec<(&str, &str, &str)> {
        self.files
            .iter()
            .map(|f| (f.path.as_str(), f.before.as_str(), f.after.as_str()))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub max_changes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_words: 5,
            max_words: 150,
            max_changes: 20,
        }
    }
}

pub fn word_count(message: &str) -> usize {
    message.split_whitespace().count()
}

impl FilterConfig {
    /// Whether a kept record is consistent with these bounds.
    pub fn admits(&self, r: &CommitRecord) -> bool {
        let w = word_count(&r.message_clean);
        (self.min_words..=self.max_words).contains(&w)
            && (1..=self.max_changes).contains(&r.changed_statement_count)
    }
}

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:https?|ftp)://\S+|\bwww\.\S+").unwrap());
static SENTENCE_END: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.!?](?:\s|$)|\n").unwrap());
static ISSUE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#\d+\b").unwrap());
static HEX: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[0-9a-fA-F]{7,40}\b").unwrap());
static EMPTY_BRACKETS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(\s*\)|\[\s*\]").unwrap());

/// First sentence with issue ids, commit hashes and URLs removed.
pub fn clean_message(raw: &str) -> String {
    let no_urls = URL.replace_all(raw.trim(), "");
    let first = match SENTENCE_END.find(&no_urls) {
        Some(m) => &no_urls[..m.start()],
        None => &no_urls[..],
    };
    let s = ISSUE.replace_all(first, "");
    let s = HEX.replace_all(&s, |c: &regex::Captures| {
        let h = &c[0];
        if h.bytes().any(|b| b.is_ascii_digit()) && h.bytes().any(|b| b.is_ascii_alphabetic()) {
            String::new()
        } else {
            h.to_string()
        }
    });
    let s = EMPTY_BRACKETS.replace_all(&s, "");
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const VERBS: &[&str] = &[
    "add",
    "adjust",
    "allow",
    "apply",
    "avoid",
    "bump",
    "change",
    "check",
    "clarify",
    "clean",
    "cleanup",
    "close",
    "collect",
    "combine",
    "compute",
    "configure",
    "consolidate",
    "convert",
    "copy",
    "correct",
    "create",
    "deduplicate",
    "default",
    "define",
    "delete",
    "deprecate",
    "destroy",
    "detect",
    "disable",
    "display",
    "document",
    "drop",
    "emit",
    "enable",
    "enforce",
    "ensure",
    "expand",
    "expose",
    "extend",
    "extract",
    "fix",
    "flush",
    "forbid",
    "format",
    "generalize",
    "generate",
    "handle",
    "hide",
    "ignore",
    "implement",
    "import",
    "improve",
    "include",
    "increase",
    "initialize",
    "inline",
    "insert",
    "install",
    "introduce",
    "invoke",
    "keep",
    "limit",
    "load",
    "log",
    "make",
    "mark",
    "merge",
    "migrate",
    "move",
    "optimize",
    "override",
    "parse",
    "pass",
    "prefer",
    "prepare",
    "preserve",
    "prevent",
    "print",
    "process",
    "propagate",
    "protect",
    "provide",
    "read",
    "reduce",
    "refactor",
    "register",
    "reject",
    "release",
    "reload",
    "remove",
    "rename",
    "reorder",
    "reorganize",
    "replace",
    "report",
    "require",
    "reset",
    "resolve",
    "restore",
    "restrict",
    "retry",
    "return",
    "reuse",
    "revert",
    "rewrite",
    "run",
    "save",
    "separate",
    "set",
    "share",
    "show",
    "simplify",
    "skip",
    "sort",
    "speed",
    "split",
    "start",
    "stop",
    "store",
    "strip",
    "support",
    "switch",
    "throw",
    "tidy",
    "track",
    "tweak",
    "unify",
    "update",
    "upgrade",
    "use",
    "validate",
    "verify",
    "wrap",
    "write",
];

fn third_person(v: &str) -> String {
    let b = v.as_bytes();
    if v.ends_with('s')
        || v.ends_with("sh")
        || v.ends_with("ch")
        || v.ends_with('x')
        || v.ends_with('z')
        || v.ends_with('o')
    {
        format!("{v}es")
    } else if b.len() > 1 && b[b.len() - 1] == b'y' && !b"aeiou".contains(&b[b.len() - 2]) {
        format!("{}ies", &v[..v.len() - 1])
    } else {
        format!("{v}s")
    }
}

static VERB_FORMS: LazyLock<std::collections::HashSet<String>> = LazyLock::new(|| {
    VERBS
        .iter()
        .flat_map(|v| [v.to_string(), third_person(v)])
        .collect()
});

/// First token is a lexicon verb in base or third-person form.
pub fn is_verb_first(message: &str) -> bool {
    message
        .split_whitespace()
        .next()
        .map(|w| w.trim_end_matches([':', ',']).to_lowercase())
        .is_some_and(|w| VERB_FORMS.contains(&w))
}

fn is_rollback(message: &str) -> bool {
    let m = message.trim_start().to_lowercase();
    m.starts_with("revert") || m.starts_with("rollback")
}

pub fn filter_commit(record: &CommitRecord, config: &FilterConfig) -> Verdict {
    let msg = &record.message_clean;
    let words = word_count(msg);
    let reason = if record.merge {
        DropReason::Merge
    } else if is_rollback(msg) {
        DropReason::Rollback
    } else if record.changed_statement_count == 0 {
        DropReason::NoChanges
    } else if record.changed_statement_count > config.max_changes {
        DropReason::TooManyChanges
    } else if words < config.min_words {
        DropReason::TooShort
    } else if words > config.max_words {
        DropReason::TooLong
    } else if !is_verb_first(msg) {
        DropReason::NotVerbFirst
    } else {
        return Verdict::Kept;
    };
    Verdict::Dropped(reason)
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error("{0} is not a git repository")]
    NotARepository(PathBuf),
    #[error("git {args}: {detail}")]
    Git { args: String, detail: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One non-merge commit touching Java files, with full file texts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawCommit {
    pub commit_id: String,
    pub parents: Vec<String>,
    pub message: String,
    pub files: Vec<FileVersions>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MinedRepo {
    pub commits: Vec<RawCommit>,
    pub merges_skipped: usize,
    pub diagnostics: Vec<String>,
}

fn git(repo: &Path, args: &[&str]) -> Result<Vec<u8>, MineError> {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .output()?;
    if !out.status.success() {
        return Err(MineError::Git {
            args: args.join(" "),
            detail: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(out.stdout)
}

/// A long-running `git cat-file --batch` for blob reads.
struct BlobReader {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl BlobReader {
    fn new(repo: &Path) -> Result<Self, MineError> {
        let mut child = Command::new("git")
            .arg("-C")
            .arg(repo)
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(BlobReader {
            child,
            stdin,
            stdout,
        })
    }

    fn read(&mut self, rev: &str, path: &str) -> Result<Option<String>, MineError> {
        writeln!(self.stdin, "{rev}:{path}")?;
        self.stdin.flush()?;
        let mut header = String::new();
        self.stdout.read_line(&mut header)?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[1] != "blob" {
            return Ok(None);
        }
        let size: usize = parts[2].parse().map_err(|_| MineError::Git {
            args: "cat-file --batch".into(),
            detail: format!("bad header {header:?}"),
        })?;
        let mut buf = vec![0; size + 1];
        self.stdout.read_exact(&mut buf)?;
        buf.pop();
        Ok(Some(String::from_utf8_lossy(&buf).into_owned()))
    }
}

impl Drop for BlobReader {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Non-merge commits touching at least one `.java` file, oldest first.
pub fn mine_repo(repo: &Path) -> Result<MinedRepo, MineError> {
    if git(repo, &["rev-parse", "--git-dir"]).is_err() {
        return Err(MineError::NotARepository(repo.to_path_buf()));
    }
    let mut mined = MinedRepo::default();
    if git(repo, &["rev-parse", "--verify", "-q", "HEAD"]).is_err() {
        return Ok(mined);
    }
    let log = git(
        repo,
        &[
            "log",
            "--reverse",
            "--topo-order",
            "-z",
            "--format=%H%n%P%n%B",
            "HEAD",
        ],
    )?;
    let log = String::from_utf8_lossy(&log);
    let mut blobs = BlobReader::new(repo)?;
    for entry in log.split('\0').filter(|e| !e.trim().is_empty()) {
        let mut lines = entry.trim_start_matches('\n').splitn(3, '\n');
        let id = lines.next().unwrap_or_default().to_string();
        let parents: Vec<String> = lines
            .next()
            .unwrap_or_default()
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let message = lines.next().unwrap_or_default().trim_end().to_string();
        if parents.len() > 1 {
            mined.merges_skipped += 1;
            continue;
        }
        match commit_files(repo, &mut blobs, &id, parents.first().map(String::as_str)) {
            Ok(files) if files.is_empty() => {}
            Ok(files) => mined.commits.push(RawCommit {
                commit_id: id,
                parents,
                message,
                files,
            }),
            Err(e) => mined.diagnostics.push(format!("{id}: skipped: {e}")),
        }
    }
    Ok(mined)
}

fn commit_files(
    repo: &Path,
    blobs: &mut BlobReader,
    id: &str,
    parent: Option<&str>,
) -> Result<Vec<FileVersions>, MineError> {
    let out = git(
        repo,
        &[
            "diff-tree",
            "--root",
            "-r",
            "--no-renames",
            "--no-commit-id",
            "--name-status",
            "-z",
            id,
        ],
    )?;
    let out = String::from_utf8_lossy(&out);
    let fields: Vec<&str> = out.split('\0').filter(|f| !f.is_empty()).collect();
    let mut files = Vec::new();
    for pair in fields.chunks(2) {
        let [status, path] = pair else { continue };
        if !path.ends_with(".java") {
            continue;
        }
        let read = |blobs: &mut BlobReader, rev: &str| -> Result<String, MineError> {
            blobs.read(rev, path)?.ok_or_else(|| MineError::Git {
                args: format!("cat-file {rev}:{path}"),
                detail: "unreadable object".into(),
            })
        };
        let before = match (status.starts_with('A'), parent) {
            (false, Some(p)) => read(blobs, p)?,
            _ => String::new(),
        };
        let after = if status.starts_with('D') {
            String::new()
        } else {
            read(blobs, id)?
        };
        files.push(FileVersions {
            path: path.to_string(),
            before,
            after,
        });
    }
    Ok(files)
}

/// Analyses, cleans and filters one mined commit.
pub fn build_record(repo: &str, raw: &RawCommit, config: &FilterConfig) -> CommitRecord {
    let analysis = CommitAnalysis::new(
        &raw.files
            .iter()
            .map(|f| (f.path.as_str(), f.before.as_str(), f.after.as_str()))
            .collect::<Vec<_>>(),
    );
    let mut record = CommitRecord {
        repo: repo.to_string(),
        commit_id: raw.commit_id.clone(),
        message_raw: raw.message.clone(),
        message_clean: clean_message(&raw.message),
        files: raw.files.clone(),
        changed_statement_count: analysis.changes.changed_count(),
        verdict: Verdict::Kept,
        representation: None,
        merge: raw.parents.len() > 1,
        diagnostics: analysis.diagnostics().map(|d| d.to_string()).collect(),
    };
    record.verdict = filter_commit(&record, config);
    record
}

/// Local repository paths, one per line; `#` starts a comment.
pub fn read_repo_list(text: &str) -> Vec<PathBuf> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(PathBuf::from)
        .collect()
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("record {commit_id} is kept but violates the corpus bounds")]
    InvalidRecord { commit_id: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_corpus<W: Write>(
    mut w: W,
    records: &[CommitRecord],
    config: &FilterConfig,
) -> Result<(), CorpusError> {
    for r in records {
        if r.is_kept() && !config.admits(r) {
            return Err(CorpusError::InvalidRecord {
                commit_id: r.commit_id.clone(),
            });
        }
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReadCorpus {
    pub records: Vec<CommitRecord>,
    /// 1-based line numbers of malformed or invalid lines.
    pub skipped: Vec<usize>,
}

/// Blank lines are ignored; malformed lines are skipped and reported.
pub fn read_corpus<R: BufRead>(r: R, config: &FilterConfig) -> Result<ReadCorpus, CorpusError> {
    let mut out = ReadCorpus::default();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CommitRecord>(&line) {
            Ok(rec) if !rec.is_kept() || config.admits(&rec) => out.records.push(rec),
            _ => out.skipped.push(i + 1),
        }
    }
    Ok(out)
}

pub fn read_corpus_file(path: &Path, config: &FilterConfig) -> Result<ReadCorpus, CorpusError> {
    read_corpus(BufReader::new(fs::File::open(path)?), config)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepoStats {
    pub repo: String,
    pub commits: usize,
    pub changed: usize,
    pub changed_per_commit: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub repos: Vec<RepoStats>,
    pub total: RepoStats,
}

fn row(repo: String, commits: usize, changed: usize) -> RepoStats {
    RepoStats {
        repo,
        commits,
        changed,
        changed_per_commit: if commits == 0 {
            0.0
        } else {
            changed as f64 / commits as f64
        },
    }
}

impl CorpusStats {
    /// Counts kept records only.
    pub fn from_records(records: &[CommitRecord]) -> Self {
        let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for r in records.iter().filter(|r| r.is_kept()) {
            let e = per.entry(&r.repo).or_default();
            e.0 += 1;
            e.1 += r.changed_statement_count;
        }
        let repos: Vec<RepoStats> = per
            .into_iter()
            .map(|(k, (c, s))| row(k.to_string(), c, s))
            .collect();
        let commits = repos.iter().map(|r| r.commits).sum();
        let changed = repos.iter().map(|r| r.changed).sum();
        CorpusStats {
            total: row("Total".into(), commits, changed),
            repos,
        }
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<32} {:>8} {:>8} {:>16}\n",
            "", "#Commit", "#Changed", "#Changed/Commit"
        );
        for r in self.repos.iter().chain(std::iter::once(&self.total)) {
            s.push_str(&format!(
                "{:<32} {:>8} {:>8} {:>16.2}\n",
                r.repo, r.commits, r.changed, r.changed_per_commit
            ));
        }
        s
    }
}
