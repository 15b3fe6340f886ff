//! Slow, obviously-correct metric implementations.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "fix", "add", "null", "check", "in", "parser", "lexer", "the", "a", "remove", "unused",
    "import", "update", "cache", "for", "test", ",", ".", "retry", "pool",
];

/// Short messages from a small vocabulary so n-gram overlaps are common.
pub fn random_pair(rng: &mut impl Rng) -> (String, String) {
    let gen = |rng: &mut dyn rand::RngCore| {
        let n = rng.gen_range(1..=10);
        (0..n)
            .map(|_| *WORDS.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let c = gen(rng);
    let r = if rng.gen_bool(0.3) {
        // near copy
        let mut w: Vec<&str> = c.split(' ').collect();
        let i = rng.gen_range(0..w.len());
        w[i] = WORDS.choose(rng).unwrap();
        w.join(" ")
    } else {
        gen(rng)
    };
    (c, r)
}

fn count(hay: &[String], gram: &[String]) -> usize {
    (0..hay.len())
        .filter(|&i| i + gram.len() <= hay.len() && hay[i..i + gram.len()] == *gram)
        .count()
}

pub fn oracle_bleu4(c: &[String], r: &[String]) -> f64 {
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let mut logs = 0.0;
    for n in 1..=4usize {
        let mut seen: Vec<&[String]> = Vec::new();
        let mut clipped = 0;
        let mut total = 0;
        if c.len() >= n {
            for i in 0..=c.len() - n {
                total += 1;
                let g = &c[i..i + n];
                if !seen.contains(&g) {
                    seen.push(g);
                    clipped += count(c, g).min(count(r, g));
                }
            }
        }
        let p = if n == 1 {
            if clipped == 0 {
                return 0.0;
            }
            clipped as f64 / total as f64
        } else {
            (clipped as f64 + 1.0) / (total as f64 + 1.0)
        };
        logs += p.ln() / 4.0;
    }
    let bp = if c.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    100.0 * bp * logs.exp()
}

/// Longest subsequence of `c` (enumerated by bitmask) also found in `r`.
fn brute_lcs(c: &[String], r: &[String]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << c.len()) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let sub: Vec<&String> = (0..c.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &c[i])
            .collect();
        let mut it = r.iter();
        if sub.iter().all(|s| it.any(|x| x == *s)) {
            best = k;
        }
    }
    best
}

pub fn oracle_rouge_l(c: &[String], r: &[String]) -> f64 {
    let l = brute_lcs(c, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let (p, rec) = (l / c.len() as f64, l / r.len() as f64);
    let beta: f64 = 1.2;
    100.0 * (1.0 + beta * beta) * p * rec / (rec + beta * beta * p)
}
