//! Sentence-level BLEU-4, ROUGE-L and METEOR over commit messages.
//!
//! All scores are percentages in `[0, 100]`.

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use ctxenc_core::lcs_pairs;

/// Lowercase word tokens; punctuation characters are tokens of their own.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageTokens {
    pub tokens: Vec<String>,
}

impl MessageTokens {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn tokenize(text: &str) -> MessageTokens {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    MessageTokens { tokens }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

/// Uniform 4-gram BLEU with brevity penalty. Unigram precision is raw;
/// higher orders use add-one smoothing.
pub fn bleu4(candidate: &MessageTokens, reference: &MessageTokens) -> f64 {
    let (c, r) = (&candidate.tokens, &reference.tokens);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let cand = ngram_counts(c, n);
        let refs = ngram_counts(r, n);
        let total = c.len().saturating_sub(n - 1);
        let matched: usize = cand
            .iter()
            .map(|(g, &k)| k.min(refs.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if n == 1 {
            if matched == 0 {
                return 0.0;
            }
            matched as f64 / total as f64
        } else {
            (matched + 1) as f64 / (total + 1) as f64
        };
        log_sum += p.ln();
    }
    let bp = if c.len() < r.len() {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    } else {
        1.0
    };
    (100.0 * bp * (log_sum / 4.0).exp()).clamp(0.0, 100.0)
}

pub const ROUGE_BETA: f64 = 1.2;

/// LCS-based F-measure, recall weighted by `ROUGE_BETA`.
pub fn rouge_l(candidate: &MessageTokens, reference: &MessageTokens) -> f64 {
    let (c, r) = (&candidate.tokens, &reference.tokens);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_pairs(c, r).len();
    if l == 0 {
        return 0.0;
    }
    let p = l as f64 / c.len() as f64;
    let rec = l as f64 / r.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (100.0 * (1.0 + b2) * p * rec / (rec + b2 * p)).clamp(0.0, 100.0)
}

/// Exact, then stem, unigram alignment with a fragmentation penalty. A
/// candidate that matches the reference token for token in one chunk
/// carries no penalty.
pub fn meteor(candidate: &MessageTokens, reference: &MessageTokens) -> f64 {
    let (c, r) = (&candidate.tokens, &reference.tokens);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut ref_used = vec![false; r.len()];
    let mut cand_to_ref: Vec<Option<usize>> = vec![None; c.len()];
    align_stage(c, r, &mut cand_to_ref, &mut ref_used, |t| t.to_string());
    let stemmer = Stemmer::create(Algorithm::English);
    align_stage(c, r, &mut cand_to_ref, &mut ref_used, |t| {
        stemmer.stem(t).into_owned()
    });

    let m = cand_to_ref.iter().flatten().count();
    if m == 0 {
        return 0.0;
    }
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for (i, j) in cand_to_ref.iter().enumerate() {
        match (j, prev) {
            (Some(j), Some((pi, pj))) if pi + 1 == i && pj + 1 == *j => {}
            (Some(_), _) => chunks += 1,
            (None, _) => {}
        }
        prev = j.map(|j| (i, j));
    }
    let p = m as f64 / c.len() as f64;
    let rec = m as f64 / r.len() as f64;
    let fmean = 10.0 * p * rec / (rec + 9.0 * p);
    let penalty = if chunks == 1 && m == c.len() && m == r.len() {
        0.0
    } else {
        0.5 * (chunks as f64 / m as f64).powi(3)
    };
    (100.0 * fmean * (1.0 - penalty)).clamp(0.0, 100.0)
}

/// Matches each unaligned candidate token to an unaligned reference token
/// with the same key, preferring the slot right after the previous match.
fn align_stage(
    c: &[String],
    r: &[String],
    cand_to_ref: &mut [Option<usize>],
    ref_used: &mut [bool],
    key: impl Fn(&str) -> String,
) {
    let rkeys: Vec<String> = r.iter().map(|t| key(t)).collect();
    let mut last: Option<usize> = None;
    for i in 0..c.len() {
        if let Some(j) = cand_to_ref[i] {
            last = Some(j);
            continue;
        }
        let k = key(&c[i]);
        let free = |j: usize| !ref_used[j] && rkeys[j] == k;
        let pick = last
            .map(|l| l + 1)
            .filter(|&j| j < r.len() && free(j))
            .or_else(|| (0..r.len()).find(|&j| free(j)));
        if let Some(j) = pick {
            ref_used[j] = true;
            cand_to_ref[i] = Some(j);
            last = Some(j);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub bleu4: f64,
    pub rouge_l: f64,
    pub meteor: f64,
}

pub fn score_pair(candidate: &str, reference: &str) -> PairScores {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    PairScores {
        bleu4: bleu4(&c, &r),
        rouge_l: rouge_l(&c, &r),
        meteor: meteor(&c, &r),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub examples: Vec<PairScores>,
    /// Arithmetic means over `examples`.
    pub bleu4: f64,
    pub rouge_l: f64,
    pub meteor: f64,
}

impl MetricReport {
    pub fn from_scores(examples: Vec<PairScores>) -> Self {
        let n = examples.len().max(1) as f64;
        let mean = |f: fn(&PairScores) -> f64| examples.iter().map(f).sum::<f64>() / n;
        MetricReport {
            bleu4: mean(|s| s.bleu4),
            rouge_l: mean(|s| s.rouge_l),
            meteor: mean(|s| s.meteor),
            examples,
        }
    }
}
