//! Program dependence graphs: control dependence from post-dominance, data
//! dependence from reaching definitions, call edges by callee name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cfg::{build_cfg, lookup, ControlFlowGraph, Dense};
use crate::model::{SourceVersion, Statement, StmtId, UnitKind, VersionLabel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepKind {
    Control,
    Data,
}

impl DepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DepKind::Control => "control",
            DepKind::Data => "data",
        }
    }
}

impl fmt::Display for DepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: StmtId,
    pub to: StmtId,
    pub kind: DepKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramDependenceGraph {
    pub version_label: VersionLabel,
    /// Nodes are `0..node_count`.
    pub node_count: usize,
    pub edges: BTreeSet<Edge>,
    /// (call site, callee signature).
    pub call_edges: BTreeSet<(StmtId, StmtId)>,
    /// Subset of `call_edges` whose callee takes parameters, so the call
    /// site also feeds the callee's parameter definitions.
    pub param_edges: BTreeSet<(StmtId, StmtId)>,
}

impl ProgramDependenceGraph {
    pub fn new(version_label: VersionLabel, node_count: usize) -> Self {
        ProgramDependenceGraph {
            version_label,
            node_count,
            edges: BTreeSet::new(),
            call_edges: BTreeSet::new(),
            param_edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, from: StmtId, to: StmtId, kind: DepKind) {
        self.edges.insert(Edge { from, to, kind });
    }

    pub fn contains(&self, id: StmtId) -> bool {
        id < self.node_count
    }

    /// One `from kind to` triple per line, sorted by (from, to, kind).
    pub fn dump(&self) -> String {
        let mut rows: Vec<(StmtId, StmtId, &str)> = self
            .edges
            .iter()
            .map(|e| (e.from, e.to, e.kind.as_str()))
            .chain(self.call_edges.iter().map(|&(f, t)| (f, t, "call")))
            .chain(self.param_edges.iter().map(|&(f, t)| (f, t, "param")))
            .collect();
        rows.sort();
        rows.iter()
            .map(|(f, t, k)| format!("{f} {k} {t}\n"))
            .collect()
    }
}

/// Immediate post-dominators over a dense CFG (index 1 is EXIT), by the
/// Cooper-Harvey-Kennedy iteration on the reversed graph. `None` for EXIT
/// and for nodes that cannot reach it.
pub(crate) fn post_dominators(d: &Dense) -> Vec<Option<usize>> {
    let n = d.succ.len();
    // postorder of the reversed graph rooted at EXIT
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![(1usize, 0usize)];
    seen[1] = true;
    while let Some(&mut (v, ref mut k)) = stack.last_mut() {
        if let Some(&w) = d.pred[v].get(*k) {
            *k += 1;
            if !seen[w] {
                seen[w] = true;
                stack.push((w, 0));
            }
        } else {
            order.push(v);
            stack.pop();
        }
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut ipdom: Vec<Option<usize>> = vec![None; n];
    ipdom[1] = Some(1);
    let mut changed = true;
    while changed {
        changed = false;
        for &v in order.iter().rev().filter(|&&v| v != 1) {
            let mut new: Option<usize> = None;
            for &s in &d.succ[v] {
                if ipdom[s].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => s,
                    Some(cur) => intersect(&ipdom, &rank, s, cur),
                });
            }
            if new.is_some() && ipdom[v] != new {
                ipdom[v] = new;
                changed = true;
            }
        }
    }
    ipdom[1] = None;
    ipdom
}

fn intersect(ipdom: &[Option<usize>], rank: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while rank[a] < rank[b] {
            a = ipdom[a].expect("processed node");
        }
        while rank[b] < rank[a] {
            b = ipdom[b].expect("processed node");
        }
    }
    a
}

/// Edges (header, dependent): `s` post-dominates some but not all
/// successors of `h`, with `s != h`.
pub fn control_dependences(
    cfg: &ControlFlowGraph,
    _statements: &[Statement],
) -> BTreeSet<(StmtId, StmtId)> {
    let d = cfg.dense();
    let ipdom = post_dominators(&d);
    let mut out = BTreeSet::new();
    for h in 2..d.succ.len() {
        let succs: BTreeSet<usize> = d.succ[h].iter().copied().collect();
        if succs.len() < 2 {
            continue;
        }
        let stop = ipdom[h];
        for &s in &succs {
            let mut v = Some(s);
            while let Some(cur) = v {
                if Some(cur) == stop || cur == 1 {
                    break;
                }
                if cur != h && cur >= 2 {
                    out.insert((d.stmts[h - 2], d.stmts[cur - 2]));
                }
                v = ipdom[cur];
            }
        }
    }
    out
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Reaching-definitions flow edges (def site, use site).
pub fn data_dependences(
    cfg: &ControlFlowGraph,
    statements: &[Statement],
) -> BTreeSet<(StmtId, StmtId)> {
    let d = cfg.dense();
    let n = d.succ.len();
    let stmt = |k: usize| {
        (k >= 2)
            .then(|| lookup(statements, d.stmts[k - 2]))
            .flatten()
    };

    // definitions: (node, variable)
    let mut defs: Vec<(usize, &str)> = Vec::new();
    let mut by_var: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for k in 2..n {
        if let Some(s) = stmt(k) {
            for v in &s.defs {
                by_var.entry(v).or_default().push(defs.len());
                defs.push((k, v));
            }
        }
    }
    let m = defs.len();
    let mut gens = Vec::with_capacity(n);
    let mut kill = Vec::with_capacity(n);
    for k in 0..n {
        let mut g = Bits::new(m);
        let mut kl = Bits::new(m);
        if let Some(s) = stmt(k) {
            for v in &s.defs {
                for &di in &by_var[v.as_str()] {
                    if defs[di].0 == k {
                        g.set(di);
                    } else {
                        kl.set(di);
                    }
                }
            }
        }
        gens.push(g);
        kill.push(kl);
    }

    let mut out_sets: Vec<Bits> = (0..n).map(|_| Bits::new(m)).collect();
    let mut in_sets: Vec<Bits> = (0..n).map(|_| Bits::new(m)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n {
            let mut inb = Bits::new(m);
            for &p in &d.pred[k] {
                for (w, o) in inb.0.iter_mut().zip(&out_sets[p].0) {
                    *w |= o;
                }
            }
            let mut outb = Bits::new(m);
            for (i, w) in outb.0.iter_mut().enumerate() {
                *w = gens[k].0[i] | (inb.0[i] & !kill[k].0[i]);
            }
            if outb.0 != out_sets[k].0 {
                out_sets[k] = outb;
                changed = true;
            }
            in_sets[k] = inb;
        }
    }

    let mut out = BTreeSet::new();
    for (k, reaching) in in_sets.iter().enumerate().take(n).skip(2) {
        let Some(s) = stmt(k) else { continue };
        for v in &s.uses {
            for &di in by_var.get(v.as_str()).into_iter().flatten() {
                if reaching.get(di) {
                    out.insert((d.stmts[defs[di].0 - 2], d.stmts[k - 2]));
                }
            }
        }
    }
    out
}

/// Per-unit control-flow graphs of a version, in method order.
pub fn build_cfgs(version: &SourceVersion) -> Vec<ControlFlowGraph> {
    version
        .methods
        .iter()
        .map(|m| build_cfg(m, &version.statements))
        .collect()
}

pub fn build_pdg(version: &SourceVersion) -> ProgramDependenceGraph {
    build_pdg_from(version, &build_cfgs(version))
}

pub fn build_pdg_from(
    version: &SourceVersion,
    cfgs: &[ControlFlowGraph],
) -> ProgramDependenceGraph {
    let mut pdg = ProgramDependenceGraph::new(version.label, version.statements.len());
    for cfg in cfgs {
        for (f, t) in control_dependences(cfg, &version.statements) {
            pdg.add_edge(f, t, DepKind::Control);
        }
        for (f, t) in data_dependences(cfg, &version.statements) {
            pdg.add_edge(f, t, DepKind::Data);
        }
    }

    let mut by_name: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, m) in version.methods.iter().enumerate() {
        if m.kind == UnitKind::Method && !m.name.starts_with('<') {
            by_name.entry(m.name.as_str()).or_default().push(i);
        }
    }
    for s in &version.statements {
        for c in &s.callees {
            for &mi in by_name.get(c.as_str()).into_iter().flatten() {
                let callee = &version.methods[mi];
                if callee.entry() == s.id {
                    continue;
                }
                pdg.call_edges.insert((s.id, callee.entry()));
                if !callee.params.is_empty() {
                    pdg.param_edges.insert((s.id, callee.entry()));
                }
            }
        }
    }
    pdg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_version;

    fn pdg_of(src: &str) -> ProgramDependenceGraph {
        let (v, _) = parse_version(VersionLabel::After, &[("A.java".into(), src.into())]);
        build_pdg(&v)
    }

    fn edges(p: &ProgramDependenceGraph, kind: DepKind) -> BTreeSet<(StmtId, StmtId)> {
        p.edges
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| (e.from, e.to))
            .collect()
    }

    fn set(xs: &[(StmtId, StmtId)]) -> BTreeSet<(StmtId, StmtId)> {
        xs.iter().copied().collect()
    }

    #[test]
    fn straight_line_has_no_control_dependence() {
        let p = pdg_of("a(); b(); c();");
        assert!(edges(&p, DepKind::Control).is_empty());
    }

    #[test]
    fn if_body_depends_on_header() {
        let p = pdg_of("if (c) { a(); }");
        assert_eq!(edges(&p, DepKind::Control), set(&[(0, 1)]));
    }

    #[test]
    fn loop_body_depends_on_header() {
        let p = pdg_of("while (c) { a(); b(); }");
        assert_eq!(edges(&p, DepKind::Control), set(&[(0, 1), (0, 2)]));
    }

    #[test]
    fn data_examples() {
        assert_eq!(
            edges(&pdg_of("x = 1; y = x;"), DepKind::Data),
            set(&[(0, 1)])
        );
        assert_eq!(
            edges(&pdg_of("x = 1; x = 2; y = x;"), DepKind::Data),
            set(&[(1, 2)])
        );
        let p = pdg_of("x = 1; if (c) { x = 2; } y = x;");
        assert_eq!(edges(&p, DepKind::Data), set(&[(0, 3), (2, 3)]));
        assert_eq!(edges(&p, DepKind::Control), set(&[(1, 2)]));
    }

    #[test]
    fn early_return_controls_the_rest() {
        let p = pdg_of("class K { void m() { if (c) return; a(); } }");
        // ids: 0 class header, 1 signature, 2 if, 3 return, 4 a()
        let c = edges(&p, DepKind::Control);
        assert!(c.contains(&(2, 3)));
        assert!(c.contains(&(2, 4)));
    }

    #[test]
    fn loop_carried_data_dependence() {
        let p = pdg_of("class K { void m() { int i = 0; while (i < n) { i++; } } }");
        let d = edges(&p, DepKind::Data);
        // 2 decl, 3 while, 4 i++
        assert!(d.contains(&(2, 3)));
        assert!(d.contains(&(4, 3)));
        assert!(d.contains(&(4, 4)));
        assert!(d.contains(&(2, 4)));
    }

    #[test]
    fn fields_do_not_cross_methods() {
        let p = pdg_of("class K { int f; void a() { f = 1; } void b() { g(f); } }");
        assert!(edges(&p, DepKind::Data).is_empty());
    }

    #[test]
    fn call_edges_by_name() {
        let p =
            pdg_of("class K { void a() { b(1); } void b(int x) { use(x); } void c() { d(); } }");
        // 0 class, 1 sig a, 2 b(1), 3 sig b, 4 use(x), 5 sig c, 6 d()
        assert_eq!(p.call_edges, set(&[(2, 3)]));
        assert_eq!(p.param_edges, set(&[(2, 3)]));
        assert!(edges(&p, DepKind::Data).contains(&(3, 4)));
    }

    #[test]
    fn empty_version() {
        let p = build_pdg(&SourceVersion::empty(VersionLabel::Before));
        assert_eq!(p.node_count, 0);
        assert!(p.edges.is_empty() && p.call_edges.is_empty());
        assert_eq!(p.dump(), "");
    }

    #[test]
    fn dump_is_sorted_triples() {
        let p = pdg_of("x = 1; if (x > 0) { y = x; }");
        assert_eq!(p.dump(), "0 data 1\n0 data 2\n1 control 2\n");
    }
}
