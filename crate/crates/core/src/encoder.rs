//! Merges the before and after slices of a change into one ordered, marked
//! statement sequence and fits it to a token budget.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::differ::ChangeSet;
use crate::model::{SourceVersion, StmtId};
use crate::pdg::ProgramDependenceGraph;
use crate::slicer::{slice, SliceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marker {
    Added,
    Removed,
    Context,
}

impl Marker {
    pub fn symbol(self) -> char {
        match self {
            Marker::Added => '+',
            Marker::Removed => '-',
            Marker::Context => ' ',
        }
    }

    pub fn is_change(self) -> bool {
        self != Marker::Context
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedEntry {
    pub marker: Marker,
    /// Normalized statement text.
    pub text: String,
    pub file: String,
    pub before_id: Option<StmtId>,
    pub after_id: Option<StmtId>,
    /// Dependence distance from the nearest changed statement.
    pub hop: usize,
    pub tokens: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEncodedRepresentation {
    pub entries: Vec<EncodedEntry>,
    pub token_count: usize,
    pub truncated: bool,
}

impl ContextEncodedRepresentation {
    pub fn from_entries(entries: Vec<EncodedEntry>) -> Self {
        let token_count = entries.iter().map(|e| e.tokens).sum();
        ContextEncodedRepresentation {
            entries,
            token_count,
            truncated: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One `"<marker> <text>"` line per entry, each newline-terminated.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push(e.marker.symbol());
            out.push(' ');
            out.push_str(&e.text);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for ContextEncodedRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Budget tokens are the whitespace-delimited lexemes of statement texts.
pub fn token_len(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("change has no added or removed statements")]
    EmptyChange,
}

/// Which unchanged statements accompany the changed ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncodeMode {
    /// Statements within the configured dependence distance.
    Context(SliceConfig),
    /// Changed statements only.
    ChangedOnly,
    /// Every statement within this many positions of a changed statement
    /// in the same file, regardless of dependence.
    Surrounding(usize),
}

/// One side of a change as the encoder needs it.
#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub version: &'a SourceVersion,
    pub pdg: &'a ProgramDependenceGraph,
}

pub fn encode_change(
    before: Side<'_>,
    after: Side<'_>,
    changes: &ChangeSet,
    config: &SliceConfig,
    budget: usize,
) -> Result<ContextEncodedRepresentation, EncodeError> {
    encode_with(before, after, changes, EncodeMode::Context(*config), budget)
}

pub fn encode_with(
    before: Side<'_>,
    after: Side<'_>,
    changes: &ChangeSet,
    mode: EncodeMode,
    budget: usize,
) -> Result<ContextEncodedRepresentation, EncodeError> {
    if changes.is_empty() {
        return Err(EncodeError::EmptyChange);
    }
    let before_hops = neighbourhood(before, &changes.removed, mode);
    let after_hops = neighbourhood(after, &changes.added, mode);
    let after_of = changes.after_of();
    let before_of = changes.before_of();

    let mut keyed: Vec<((String, i64, u8, StmtId), EncodedEntry)> = Vec::new();
    let mut emitted_after: BTreeSet<StmtId> = BTreeSet::new();
    for (&a, &hop) in &after_hops {
        let s = &after.version.statements[a];
        let (marker, before_id, hop) = match before_of.get(&a) {
            Some(&b) => {
                let hop = before_hops.get(&b).map_or(hop, |&h| h.min(hop));
                (Marker::Context, Some(b), hop)
            }
            None if changes.added.contains(&a) => (Marker::Added, None, 0),
            None => continue,
        };
        emitted_after.insert(a);
        let file = after.version.file_of(a).to_string();
        keyed.push((
            (file.clone(), a as i64, 0, 0),
            entry(marker, &s.normalized, file, before_id, Some(a), hop),
        ));
    }
    for (&b, &hop) in &before_hops {
        let s = &before.version.statements[b];
        let file = before.version.file_of(b).to_string();
        match after_of.get(&b) {
            Some(&a) if emitted_after.contains(&a) => {}
            Some(&a) => {
                let file = after.version.file_of(a).to_string();
                keyed.push((
                    (file.clone(), a as i64, 0, 0),
                    entry(Marker::Context, &s.normalized, file, Some(b), Some(a), hop),
                ));
            }
            None if changes.removed.contains(&b) => {
                let anchor = anchor(before.version, &after_of, b);
                keyed.push((
                    (file.clone(), anchor, 1, b),
                    entry(Marker::Removed, &s.normalized, file, Some(b), None, 0),
                ));
            }
            None => {}
        }
    }
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    let rep =
        ContextEncodedRepresentation::from_entries(keyed.into_iter().map(|(_, e)| e).collect());
    Ok(truncate(rep, budget))
}

fn entry(
    marker: Marker,
    text: &str,
    file: String,
    before_id: Option<StmtId>,
    after_id: Option<StmtId>,
    hop: usize,
) -> EncodedEntry {
    EncodedEntry {
        marker,
        text: text.to_string(),
        file,
        before_id,
        after_id,
        hop,
        tokens: token_len(text),
    }
}

/// After-version position of the nearest matched statement preceding `b`
/// in its file, or -1 when there is none.
fn anchor(before: &SourceVersion, after_of: &BTreeMap<StmtId, StmtId>, b: StmtId) -> i64 {
    let path = before.file_of(b);
    let start = before.file(path).map_or(0, |f| f.statements.start);
    (start..b)
        .rev()
        .find_map(|p| after_of.get(&p))
        .map_or(-1, |&a| a as i64)
}

fn neighbourhood(
    side: Side<'_>,
    seeds: &BTreeSet<StmtId>,
    mode: EncodeMode,
) -> BTreeMap<StmtId, usize> {
    match mode {
        EncodeMode::Context(config) => slice(side.pdg, seeds, &config).hops,
        EncodeMode::ChangedOnly => seeds.iter().map(|&s| (s, 0)).collect(),
        EncodeMode::Surrounding(n) => {
            let mut hops = BTreeMap::new();
            for &s in seeds {
                let Some(file) = side.version.file(side.version.file_of(s)) else {
                    continue;
                };
                let r = &file.statements;
                let lo = s.saturating_sub(n).max(r.start);
                let hi = (s + n).min(r.end - 1);
                for id in lo..=hi {
                    let d = id.abs_diff(s);
                    hops.entry(id)
                        .and_modify(|h: &mut usize| *h = (*h).min(d))
                        .or_insert(d);
                }
            }
            hops
        }
    }
}

/// Fits `rep` to `budget` tokens: context entries go first, farthest hop
/// first and later entries before earlier ones at equal hop; then changed
/// entries from the end, always keeping at least one entry.
pub fn truncate(
    mut rep: ContextEncodedRepresentation,
    budget: usize,
) -> ContextEncodedRepresentation {
    if rep.token_count <= budget {
        return rep;
    }
    rep.truncated = true;
    let mut order: Vec<usize> = (0..rep.entries.len())
        .filter(|&i| !rep.entries[i].marker.is_change())
        .collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(rep.entries[i].hop), std::cmp::Reverse(i)));
    let mut drop = vec![false; rep.entries.len()];
    let mut total = rep.token_count;
    for i in order {
        if total <= budget {
            break;
        }
        drop[i] = true;
        total -= rep.entries[i].tokens;
    }
    let mut kept = rep.entries.len() - drop.iter().filter(|d| **d).count();
    for i in (0..rep.entries.len()).rev() {
        if total <= budget || kept <= 1 {
            break;
        }
        if !drop[i] {
            drop[i] = true;
            total -= rep.entries[i].tokens;
            kept -= 1;
        }
    }
    let mut k = 0;
    rep.entries.retain(|_| {
        k += 1;
        !drop[k - 1]
    });
    rep.token_count = total;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::differ::align_versions;
    use crate::model::VersionLabel;
    use crate::parser::parse_version;
    use crate::pdg::build_pdg;

    fn synthetic(hops: &[usize]) -> ContextEncodedRepresentation {
        let mut entries = vec![EncodedEntry {
            marker: Marker::Added,
            text: "seed".into(),
            file: "A.java".into(),
            before_id: None,
            after_id: Some(0),
            hop: 0,
            tokens: 1,
        }];
        for (i, &h) in hops.iter().enumerate() {
            entries.push(EncodedEntry {
                marker: Marker::Context,
                text: format!("c{i}"),
                file: "A.java".into(),
                before_id: Some(i + 1),
                after_id: Some(i + 1),
                hop: h,
                tokens: 1,
            });
        }
        ContextEncodedRepresentation::from_entries(entries)
    }

    #[test]
    fn under_budget_is_unchanged() {
        let rep = synthetic(&[1, 2]);
        assert_eq!(truncate(rep.clone(), 3), rep);
    }

    #[test]
    fn farthest_hops_go_first() {
        let rep = synthetic(&[1, 1, 2, 2, 3, 3, 3, 4, 4, 5]);
        let t = truncate(rep, 8);
        assert!(t.truncated);
        assert_eq!(t.token_count, 8);
        let hops: Vec<usize> = t.entries.iter().skip(1).map(|e| e.hop).collect();
        assert_eq!(hops, [1, 1, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn single_changed_entry_fits_exactly() {
        let rep = synthetic(&[]);
        let t = truncate(rep.clone(), 1);
        assert_eq!(t, rep);
        assert!(!t.truncated);
    }

    #[test]
    fn oversized_changed_entry_is_kept_and_flagged() {
        let mut rep = synthetic(&[]);
        rep.entries[0].tokens = 5;
        rep.token_count = 5;
        let t = truncate(rep, 2);
        assert_eq!(t.entries.len(), 1);
        assert!(t.truncated);
    }

    fn side_by_side(before: &str, after: &str, mode: EncodeMode) -> Result<String, EncodeError> {
        let (b, _) = parse_version(VersionLabel::Before, &[("A.java".into(), before.into())]);
        let (a, _) = parse_version(VersionLabel::After, &[("A.java".into(), after.into())]);
        let (bp, ap) = (build_pdg(&b), build_pdg(&a));
        let cs = align_versions(&b, &a);
        encode_with(
            Side {
                version: &b,
                pdg: &bp,
            },
            Side {
                version: &a,
                pdg: &ap,
            },
            &cs,
            mode,
            512,
        )
        .map(|r| r.render())
    }

    #[test]
    fn seed_only_slice() {
        let out = side_by_side("a();", "a(); b();", EncodeMode::ChangedOnly).unwrap();
        assert_eq!(out, "+ b();\n");
    }

    #[test]
    fn shared_context_is_merged() {
        let before = "int x = 1; int y = 2; f(x + 1, y);";
        let after = "int x = 1; int y = 2; f(x + 2, y);";
        let out = side_by_side(before, after, EncodeMode::Context(SliceConfig::default())).unwrap();
        assert_eq!(
            out,
            "  int x = 1;\n  int y = 2;\n- f(x + 1, y);\n+ f(x + 2, y);\n"
        );
    }

    #[test]
    fn unrelated_statements_stay_out() {
        let before = "int x = 1; int z = 3; use(x);";
        let after = "int x = 1; int z = 3; use(x, x);";
        let out = side_by_side(before, after, EncodeMode::Context(SliceConfig::default())).unwrap();
        assert!(!out.contains("z = 3"));
        let window = side_by_side(before, after, EncodeMode::Surrounding(1)).unwrap();
        assert!(window.contains("z = 3"));
    }

    #[test]
    fn empty_change_is_an_error() {
        assert_eq!(
            side_by_side("a();", "a();", EncodeMode::ChangedOnly),
            Err(EncodeError::EmptyChange)
        );
    }
}
