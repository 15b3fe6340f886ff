//! Nearest-neighbour message generation over bag-of-words vectors of
//! encoded changes, and the evaluation reports built on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ctxenc_core::{CommitAnalysis, EdgeKinds, EncodeMode, SliceConfig};

use crate::metrics::{score_pair, MetricReport, PairScores};
use crate::miner::CommitRecord;

/// Term counts; every stored count is at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowVector {
    pub counts: BTreeMap<String, u64>,
}

impl BowVector {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn norm_sq(&self) -> u128 {
        self.counts
            .values()
            .map(|&c| (c as u128) * (c as u128))
            .sum()
    }

    fn dot(&self, other: &BowVector) -> u128 {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .iter()
            .filter_map(|(t, &a)| large.counts.get(t).map(|&b| a as u128 * b as u128))
            .sum()
    }
}

/// Whitespace tokens, markers included.
pub fn vectorize(representation: &str) -> BowVector {
    let mut counts = BTreeMap::new();
    for tok in representation.split_whitespace() {
        *counts.entry(tok.to_string()).or_insert(0) += 1;
    }
    BowVector { counts }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: BTreeSet<String>,
}

impl Vocabulary {
    pub fn from_vectors<'a>(vectors: impl IntoIterator<Item = &'a BowVector>) -> Self {
        Vocabulary {
            terms: vectors
                .into_iter()
                .flat_map(|v| v.counts.keys().cloned())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops out-of-vocabulary terms.
    pub fn restrict(&self, mut v: BowVector) -> BowVector {
        v.counts.retain(|t, _| self.terms.contains(t));
        v
    }
}

/// Zero when either vector is empty.
pub fn cosine(a: &BowVector, b: &BowVector) -> f64 {
    let (na, nb) = (a.norm_sq(), b.norm_sq());
    if na == 0 || nb == 0 {
        return 0.0;
    }
    (a.dot(b) as f64 / ((na as f64).sqrt() * (nb as f64).sqrt())).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("retrieval corpus is empty")]
    EmptyCorpus,
}

/// Index of the most similar entry; the lowest index wins ties.
///
/// Similarities are compared exactly as `dot² / |t|²` in integers, so
/// ties are real ties and not rounding artefacts.
pub fn nearest_index(query: &BowVector, corpus: &[BowVector]) -> Result<usize, RetrievalError> {
    if corpus.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    // (dot, |t|²) of the best so far; zero-norm entries score 0/1.
    let score = |t: &BowVector| match t.norm_sq() {
        0 => (0u128, 1u128),
        n => (query.dot(t), n),
    };
    let mut best = 0;
    let (mut bd, mut bn) = score(&corpus[0]);
    for (i, t) in corpus.iter().enumerate().skip(1) {
        let (d, n) = score(t);
        // d²/n > bd²/bn, cross-multiplied; values stay far below u128 range
        // for any realistic representation size.
        if d * d * bn > bd * bd * n {
            best = i;
            (bd, bn) = (d, n);
        }
    }
    Ok(best)
}

pub fn nearest<'a>(
    query: &BowVector,
    corpus: &'a [(BowVector, String)],
) -> Result<&'a str, RetrievalError> {
    let vectors: Vec<BowVector> = corpus.iter().map(|(v, _)| v.clone()).collect();
    nearest_index(query, &vectors).map(|i| corpus[i].1.as_str())
}

/// A trained retrieval index.
#[derive(Clone, Debug, Default)]
pub struct Retriever {
    vocabulary: Vocabulary,
    vectors: Vec<BowVector>,
    messages: Vec<String>,
}

impl Retriever {
    pub fn train(train: &[Example]) -> Self {
        let vectors: Vec<BowVector> = train.iter().map(|e| vectorize(&e.representation)).collect();
        Retriever {
            vocabulary: Vocabulary::from_vectors(&vectors),
            vectors,
            messages: train.iter().map(|e| e.message.clone()).collect(),
        }
    }

    pub fn generate(&self, representation: &str) -> Result<&str, RetrievalError> {
        let q = self.vocabulary.restrict(vectorize(representation));
        nearest_index(&q, &self.vectors).map(|i| self.messages[i].as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub repo: String,
    pub commit_id: String,
    pub representation: String,
    pub message: String,
    pub changed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub commit_id: String,
    pub reference: String,
    pub generated: String,
    pub scores: PairScores,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub predictions: Vec<Prediction>,
    pub report: MetricReport,
}

impl Evaluation {
    pub fn bucket_rows(&self, changed: &[usize]) -> Vec<ReportRow> {
        Bucket::ALL
            .iter()
            .map(|b| {
                let scores = self
                    .predictions
                    .iter()
                    .zip(changed)
                    .filter(|(_, &c)| Bucket::of(c) == Some(*b))
                    .map(|(p, _)| p.scores)
                    .collect();
                ReportRow::new("bucket", b.label(), MetricReport::from_scores(scores))
            })
            .collect()
    }
}

pub fn evaluate(test: &[Example], train: &[Example]) -> Result<Evaluation, RetrievalError> {
    let retriever = Retriever::train(train);
    let mut predictions = Vec::with_capacity(test.len());
    for e in test {
        let generated = retriever.generate(&e.representation)?.to_string();
        predictions.push(Prediction {
            commit_id: e.commit_id.clone(),
            scores: score_pair(&generated, &e.message),
            reference: e.message.clone(),
            generated,
        });
    }
    let report = MetricReport::from_scores(predictions.iter().map(|p| p.scores).collect());
    Ok(Evaluation {
        predictions,
        report,
    })
}

/// Changed-statement count ranges: [1,5], (5,10], (10,15], (15,∞).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bucket {
    UpTo5,
    UpTo10,
    UpTo15,
    Over15,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [
        Bucket::UpTo5,
        Bucket::UpTo10,
        Bucket::UpTo15,
        Bucket::Over15,
    ];

    pub fn of(changed: usize) -> Option<Bucket> {
        match changed {
            0 => None,
            1..=5 => Some(Bucket::UpTo5),
            6..=10 => Some(Bucket::UpTo10),
            11..=15 => Some(Bucket::UpTo15),
            _ => Some(Bucket::Over15),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bucket::UpTo5 => "From 1 to 5",
            Bucket::UpTo10 => "From 5 to 10",
            Bucket::UpTo15 => "From 10 to 15",
            Bucket::Over15 => "Over 15",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            valid: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn is_valid(&self) -> bool {
        self.train > 0.0 && self.valid >= 0.0 && self.train + self.valid < 1.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub valid: Vec<T>,
    pub test: Vec<T>,
}

/// Chronological split per repository; `items` must be in history order
/// within each repository.
pub fn split_by_repo<T: Clone>(
    items: &[T],
    repo: impl Fn(&T) -> &str,
    ratios: SplitRatios,
) -> Splits<T> {
    let mut groups: Vec<(&str, Vec<&T>)> = Vec::new();
    for it in items {
        let r = repo(it);
        match groups.iter_mut().find(|(g, _)| *g == r) {
            Some((_, v)) => v.push(it),
            None => groups.push((r, vec![it])),
        }
    }
    let mut out = Splits {
        train: vec![],
        valid: vec![],
        test: vec![],
    };
    for (_, g) in groups {
        let n = g.len();
        let a = (n as f64 * ratios.train).floor() as usize;
        let b = a + (n as f64 * ratios.valid).floor() as usize;
        for (i, it) in g.into_iter().enumerate() {
            let dst = if i < a {
                &mut out.train
            } else if i < b {
                &mut out.valid
            } else {
                &mut out.test
            };
            dst.push(it.clone());
        }
    }
    out
}

/// One line of an evaluation report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub group: String,
    pub label: String,
    pub examples: usize,
    pub bleu4: f64,
    pub rouge_l: f64,
    pub meteor: f64,
}

impl ReportRow {
    pub fn new(group: &str, label: &str, report: MetricReport) -> Self {
        ReportRow {
            group: group.to_string(),
            label: label.to_string(),
            examples: report.examples.len(),
            bleu4: report.bleu4,
            rouge_l: report.rouge_l,
            meteor: report.meteor,
        }
    }
}

pub struct ReportTable<'a>(pub &'a [ReportRow]);

impl fmt::Display for ReportTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<28} {:>8} {:>8} {:>8} {:>8}",
            "group", "setting", "examples", "BLEU", "ROUGE-L", "METEOR"
        )?;
        for r in self.0 {
            writeln!(
                f,
                "{:<10} {:<28} {:>8} {:>8.2} {:>8.2} {:>8.2}",
                r.group, r.label, r.examples, r.bleu4, r.rouge_l, r.meteor
            )?;
        }
        Ok(())
    }
}

/// A kept record with its analysis, ready to be encoded under any setting.
pub struct Prepared<'a> {
    pub record: &'a CommitRecord,
    pub analysis: CommitAnalysis,
}

pub fn prepare(records: &[CommitRecord]) -> Vec<Prepared<'_>> {
    records
        .iter()
        .filter(|r| r.is_kept())
        .map(|record| Prepared {
            analysis: CommitAnalysis::new(&record.file_triples()),
            record,
        })
        .collect()
}

/// Examples under one encoding setting; records whose change encodes to
/// nothing are left out.
pub fn examples_for(prepared: &[Prepared<'_>], mode: EncodeMode, budget: usize) -> Vec<Example> {
    prepared
        .iter()
        .filter_map(|p| {
            let rep = p.analysis.encode(mode, budget).ok()?;
            Some(Example {
                repo: p.record.repo.clone(),
                commit_id: p.record.commit_id.clone(),
                representation: rep.render(),
                message: p.record.message_clean.clone(),
                changed: p.record.changed_statement_count,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportSections {
    pub ablation: bool,
    pub depth: bool,
    pub buckets: bool,
}

impl Default for ReportSections {
    fn default() -> Self {
        ReportSections {
            ablation: true,
            depth: true,
            buckets: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub slice: SliceConfig,
    pub budget: usize,
    pub ratios: SplitRatios,
    /// Evaluate the training split against itself.
    pub train_on_train: bool,
    pub sections: ReportSections,
}

fn run_one(
    prepared: &[Prepared<'_>],
    mode: EncodeMode,
    cfg: &ExperimentConfig,
) -> Result<(Evaluation, Vec<usize>), RetrievalError> {
    let examples = examples_for(prepared, mode, cfg.budget);
    let splits = split_by_repo(&examples, |e| &e.repo, cfg.ratios);
    let test = if cfg.train_on_train {
        &splits.train
    } else {
        &splits.test
    };
    let eval = evaluate(test, &splits.train)?;
    Ok((eval, test.iter().map(|e| e.changed).collect()))
}

/// Overall row for the configured setting, then the requested sections.
pub fn run_experiment(
    records: &[CommitRecord],
    cfg: &ExperimentConfig,
) -> Result<Vec<ReportRow>, RetrievalError> {
    let prepared = prepare(records);
    let base = EncodeMode::Context(cfg.slice);
    let (overall, changed) = run_one(&prepared, base, cfg)?;
    let mut rows = vec![ReportRow::new(
        "overall",
        &setting_label(&cfg.slice),
        overall.report.clone(),
    )];
    if cfg.sections.ablation {
        let settings = [
            ("changed code", EncodeMode::ChangedOnly),
            (
                "+ control",
                EncodeMode::Context(cfg.slice.with_edge_kinds(EdgeKinds::Control)),
            ),
            (
                "+ data",
                EncodeMode::Context(cfg.slice.with_edge_kinds(EdgeKinds::Data)),
            ),
            (
                "+ control+data",
                EncodeMode::Context(cfg.slice.with_edge_kinds(EdgeKinds::Both)),
            ),
        ];
        for (label, mode) in settings {
            rows.push(ReportRow::new(
                "ablation",
                label,
                run_one(&prepared, mode, cfg)?.0.report,
            ));
        }
    }
    if cfg.sections.depth {
        for d in 1..=5 {
            let sc = cfg.slice.with_depth(d).expect("nonzero depth");
            rows.push(ReportRow::new(
                "depth",
                &format!("depth {d}"),
                run_one(&prepared, EncodeMode::Context(sc), cfg)?.0.report,
            ));
        }
    }
    if cfg.sections.buckets {
        rows.extend(overall.bucket_rows(&changed));
    }
    Ok(rows)
}

fn setting_label(c: &SliceConfig) -> String {
    format!("depth {} {} {}", c.depth, c.edge_kinds, c.directions)
}
