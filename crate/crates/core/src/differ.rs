//! Statement alignment between the two versions of a change.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{SourceVersion, StmtId};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    /// After-version ids.
    pub added: BTreeSet<StmtId>,
    /// Before-version ids.
    pub removed: BTreeSet<StmtId>,
    /// (before id, after id) of unchanged statements.
    pub matched: BTreeSet<(StmtId, StmtId)>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    pub fn changed_count(&self) -> usize {
        self.added.len() + self.removed.len()
    }

    pub fn after_of(&self) -> BTreeMap<StmtId, StmtId> {
        self.matched.iter().copied().collect()
    }

    pub fn before_of(&self) -> BTreeMap<StmtId, StmtId> {
        self.matched.iter().map(|&(b, a)| (a, b)).collect()
    }
}

/// Index pairs of a longest common subsequence of `a` and `b`, after
/// trimming the common prefix and suffix.
pub fn lcs_pairs<T: Eq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let mut pre = 0;
    while pre < a.len() && pre < b.len() && a[pre] == b[pre] {
        pre += 1;
    }
    let mut suf = 0;
    while suf < a.len() - pre && suf < b.len() - pre && a[a.len() - 1 - suf] == b[b.len() - 1 - suf]
    {
        suf += 1;
    }
    let (ma, mb) = (&a[pre..a.len() - suf], &b[pre..b.len() - suf]);
    let (n, m) = (ma.len(), mb.len());

    // table[i][j] = LCS length of ma[i..] and mb[j..]
    let w = m + 1;
    let mut table = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[i * w + j] = if ma[i] == mb[j] {
                table[(i + 1) * w + j + 1] + 1
            } else {
                table[(i + 1) * w + j].max(table[i * w + j + 1])
            };
        }
    }

    let mut pairs: Vec<(usize, usize)> = (0..pre).map(|i| (i, i)).collect();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if ma[i] == mb[j] {
            pairs.push((pre + i, pre + j));
            i += 1;
            j += 1;
        } else if table[(i + 1) * w + j] >= table[i * w + j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs.extend((0..suf).map(|k| (a.len() - suf + k, b.len() - suf + k)));
    pairs
}

pub fn align_versions(before: &SourceVersion, after: &SourceVersion) -> ChangeSet {
    let mut cs = ChangeSet::default();
    let mut intern: HashMap<&str, u32> = HashMap::new();
    let mut keys = Vec::with_capacity(before.statements.len() + after.statements.len());
    for s in before.statements.iter().chain(&after.statements) {
        let next = intern.len() as u32;
        keys.push(*intern.entry(s.normalized.as_str()).or_insert(next));
    }
    let (bkeys, akeys) = keys.split_at(before.statements.len());

    for bf in &before.files {
        match after.file(&bf.path) {
            Some(af) => {
                let pairs = lcs_pairs(&bkeys[bf.statements.clone()], &akeys[af.statements.clone()]);
                for (i, j) in pairs {
                    cs.matched
                        .insert((bf.statements.start + i, af.statements.start + j));
                }
            }
            None => cs.removed.extend(bf.statements.clone()),
        }
    }
    for af in &after.files {
        if before.file(&af.path).is_none() {
            cs.added.extend(af.statements.clone());
        }
    }
    let mb: BTreeSet<StmtId> = cs.matched.iter().map(|p| p.0).collect();
    let ma: BTreeSet<StmtId> = cs.matched.iter().map(|p| p.1).collect();
    for bf in &before.files {
        if after.file(&bf.path).is_some() {
            cs.removed
                .extend(bf.statements.clone().filter(|id| !mb.contains(id)));
        }
    }
    for af in &after.files {
        if before.file(&af.path).is_some() {
            cs.added
                .extend(af.statements.clone().filter(|id| !ma.contains(id)));
        }
    }
    cs
}
