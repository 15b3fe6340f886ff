//! Per-method control-flow graphs lowered from the parser's block tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Jump, MethodId, MethodUnit, Node, Statement, StmtId, StmtKind, UnitKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CfgNode {
    Entry,
    Stmt(StmtId),
    Exit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlFlowGraph {
    pub method: MethodId,
    /// `Entry`, the unit's statements in order, then `Exit`.
    pub nodes: Vec<CfgNode>,
    pub edges: BTreeSet<(CfgNode, CfgNode)>,
    pub diagnostics: Vec<String>,
}

impl ControlFlowGraph {
    pub fn successors(&self, n: CfgNode) -> impl Iterator<Item = CfgNode> + '_ {
        self.edges
            .range((n, CfgNode::Entry)..)
            .take_while(move |(f, _)| *f == n)
            .map(|&(_, t)| t)
    }

    pub fn predecessors(&self, n: CfgNode) -> impl Iterator<Item = CfgNode> + '_ {
        self.edges
            .iter()
            .filter(move |(_, t)| *t == n)
            .map(|&(f, _)| f)
    }

    /// Index-based adjacency: 0 is `Entry`, 1 is `Exit`, statement `k` of
    /// `nodes` order maps to `k + 2`.
    pub(crate) fn dense(&self) -> Dense {
        let stmts: Vec<StmtId> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                CfgNode::Stmt(id) => Some(*id),
                _ => None,
            })
            .collect();
        let index: BTreeMap<StmtId, usize> = stmts
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, k + 2))
            .collect();
        let ix = |n: CfgNode| match n {
            CfgNode::Entry => 0,
            CfgNode::Exit => 1,
            CfgNode::Stmt(id) => index[&id],
        };
        let size = stmts.len() + 2;
        let mut succ = vec![Vec::new(); size];
        let mut pred = vec![Vec::new(); size];
        for &(f, t) in &self.edges {
            succ[ix(f)].push(ix(t));
            pred[ix(t)].push(ix(f));
        }
        Dense { stmts, succ, pred }
    }
}

pub(crate) struct Dense {
    pub stmts: Vec<StmtId>,
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
}

/// Finds statement `id` in either a full version list or a slice of it.
pub(crate) fn lookup(statements: &[Statement], id: StmtId) -> Option<&Statement> {
    if let Some(s) = statements.get(id).filter(|s| s.id == id) {
        return Some(s);
    }
    let off = statements.first()?.id;
    statements.get(id.checked_sub(off)?).filter(|s| s.id == id)
}

enum Target {
    Loop { continue_to: CfgNode },
    Switch,
    Block,
}

struct Frame {
    label: Option<String>,
    target: Target,
    breaks: Vec<CfgNode>,
}

struct Lowering<'a> {
    statements: &'a [Statement],
    edges: BTreeSet<(CfgNode, CfgNode)>,
    frames: Vec<Frame>,
    diagnostics: Vec<String>,
}

pub fn build_cfg(method: &MethodUnit, statements: &[Statement]) -> ControlFlowGraph {
    let ids: Vec<StmtId> = method.statement_ids.clone().collect();
    let method_id = lookup(statements, method.entry()).map_or(MethodId(0), |s| s.method);
    let mut low = Lowering {
        statements,
        edges: BTreeSet::new(),
        frames: Vec::new(),
        diagnostics: Vec::new(),
    };
    let outs = match method.kind {
        UnitKind::Method => {
            let sig = CfgNode::Stmt(method.entry());
            low.edge(CfgNode::Entry, sig);
            low.seq(&method.body, vec![sig])
        }
        UnitKind::TopLevel => low.seq(&method.body, vec![CfgNode::Entry]),
    };
    low.connect(&outs, CfgNode::Exit);

    let mut cfg = ControlFlowGraph {
        method: method_id,
        nodes: std::iter::once(CfgNode::Entry)
            .chain(ids.iter().map(|&i| CfgNode::Stmt(i)))
            .chain(std::iter::once(CfgNode::Exit))
            .collect(),
        edges: low.edges,
        diagnostics: low.diagnostics,
    };
    repair(&mut cfg, statements);
    cfg
}

/// Connects statements the lowering left unreachable from ENTRY, or unable
/// to reach EXIT, so both graph invariants always hold.
fn repair(cfg: &mut ControlFlowGraph, statements: &[Statement]) {
    loop {
        let d = cfg.dense();
        let fwd = reach(&d.succ, 0);
        let Some(k) = (2..d.succ.len()).find(|&k| !fwd[k]) else {
            break;
        };
        let id = d.stmts[k - 2];
        cfg.edges.insert((CfgNode::Entry, CfgNode::Stmt(id)));
        cfg.diagnostics.push(format!(
            "unreachable statement at line {}",
            line_of(statements, id)
        ));
    }
    loop {
        let d = cfg.dense();
        let back = reach(&d.pred, 1);
        let Some(k) = (2..d.succ.len()).rev().find(|&k| !back[k]) else {
            break;
        };
        let id = d.stmts[k - 2];
        cfg.edges.insert((CfgNode::Stmt(id), CfgNode::Exit));
        cfg.diagnostics.push(format!(
            "statement at line {} cannot reach exit",
            line_of(statements, id)
        ));
    }
}

fn line_of(statements: &[Statement], id: StmtId) -> usize {
    lookup(statements, id).map_or(0, |s| s.line_span.0)
}

pub(crate) fn reach(adj: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(n) = stack.pop() {
        for &m in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                stack.push(m);
            }
        }
    }
    seen
}

fn first_id(nodes: &[Node]) -> Option<StmtId> {
    let mut ids = Vec::new();
    for n in nodes {
        n.statement_ids(&mut ids);
        if let Some(&id) = ids.first() {
            return Some(id);
        }
    }
    None
}

fn merge(mut a: Vec<CfgNode>, b: impl IntoIterator<Item = CfgNode>) -> Vec<CfgNode> {
    for n in b {
        if !a.contains(&n) {
            a.push(n);
        }
    }
    a
}

impl Lowering<'_> {
    fn edge(&mut self, from: CfgNode, to: CfgNode) {
        self.edges.insert((from, to));
    }

    fn connect(&mut self, preds: &[CfgNode], to: CfgNode) {
        for &p in preds {
            self.edge(p, to);
        }
    }

    fn seq(&mut self, nodes: &[Node], mut preds: Vec<CfgNode>) -> Vec<CfgNode> {
        for n in nodes {
            preds = self.node(n, preds, None);
        }
        preds
    }

    fn stmt(&self, id: StmtId) -> Option<&Statement> {
        lookup(self.statements, id)
    }

    fn node(&mut self, node: &Node, preds: Vec<CfgNode>, label: Option<&str>) -> Vec<CfgNode> {
        match node {
            Node::Simple(id) => self.simple(*id, preds),
            Node::Block(body) => self.seq(body, preds),
            Node::If {
                header,
                then_branch,
                else_branch,
            } => {
                let h = CfgNode::Stmt(*header);
                self.connect(&preds, h);
                let outs = self.seq(then_branch, vec![h]);
                let other = match else_branch {
                    Some(e) => self.seq(e, vec![h]),
                    None => vec![h],
                };
                merge(outs, other)
            }
            Node::Loop { header, body } => {
                let h = CfgNode::Stmt(*header);
                self.connect(&preds, h);
                self.push(label, Target::Loop { continue_to: h });
                let outs = self.seq(body, vec![h]);
                self.connect(&outs, h);
                let breaks = self.pop();
                merge(vec![h], breaks)
            }
            Node::DoWhile { body, tail } => {
                let t = CfgNode::Stmt(*tail);
                self.push(label, Target::Loop { continue_to: t });
                let outs = self.seq(body, preds);
                self.connect(&outs, t);
                if let Some(first) = first_id(body) {
                    self.edge(t, CfgNode::Stmt(first));
                } else {
                    self.edge(t, t);
                }
                let breaks = self.pop();
                merge(vec![t], breaks)
            }
            Node::Switch {
                header,
                body,
                arrow,
            } => {
                let h = CfgNode::Stmt(*header);
                self.connect(&preds, h);
                self.push(label, Target::Switch);
                let mut has_default = false;
                let mut outs = Vec::new();
                let mut cur: Vec<CfgNode> = Vec::new();
                for item in body {
                    let case = match item {
                        Node::Simple(id) => {
                            self.stmt(*id).filter(|s| s.kind == StmtKind::CaseLabel)
                        }
                        _ => None,
                    };
                    if let Some(c) = case {
                        has_default |= c.normalized.starts_with("default");
                        let lp = if *arrow { vec![h] } else { merge(vec![h], cur) };
                        cur = self.node(item, lp, None);
                    } else if *arrow {
                        let o = self.node(item, cur, None);
                        outs = merge(outs, o);
                        cur = Vec::new();
                    } else {
                        cur = self.node(item, cur, None);
                    }
                }
                outs = merge(outs, cur);
                let breaks = self.pop();
                outs = merge(outs, breaks);
                if !has_default {
                    outs = merge(outs, [h]);
                }
                outs
            }
            Node::Try {
                body,
                catches,
                finally,
            } => {
                let mut inner = Vec::new();
                for n in body {
                    n.statement_ids(&mut inner);
                }
                let mut outs = self.seq(body, preds.clone());
                for (h, cb) in catches {
                    let hn = CfgNode::Stmt(*h);
                    if inner.is_empty() {
                        self.connect(&preds, hn);
                    }
                    for &s in &inner {
                        self.edge(CfgNode::Stmt(s), hn);
                    }
                    let o = self.seq(cb, vec![hn]);
                    outs = merge(outs, o);
                }
                match finally {
                    Some(f) => self.seq(f, outs),
                    None => outs,
                }
            }
            Node::Labeled { label, body } => match **body {
                Node::Loop { .. } | Node::DoWhile { .. } | Node::Switch { .. } => {
                    self.node(body, preds, Some(label))
                }
                _ => {
                    self.push(Some(label), Target::Block);
                    let outs = self.node(body, preds, None);
                    let breaks = self.pop();
                    merge(outs, breaks)
                }
            },
        }
    }

    fn simple(&mut self, id: StmtId, preds: Vec<CfgNode>) -> Vec<CfgNode> {
        let n = CfgNode::Stmt(id);
        self.connect(&preds, n);
        let Some(s) = self.stmt(id) else {
            return vec![n];
        };
        let line = s.line_span.0;
        match s.jump() {
            None => vec![n],
            Some(Jump::Return | Jump::Throw) => {
                self.edge(n, CfgNode::Exit);
                Vec::new()
            }
            Some(Jump::Break(label)) => {
                let frame = self.frames.iter_mut().rev().find(|f| match &label {
                    Some(l) => f.label.as_deref() == Some(l.as_str()),
                    None => !matches!(f.target, Target::Block),
                });
                match frame {
                    Some(f) => f.breaks.push(n),
                    None => self.unstructured(n, line, "break", label),
                }
                Vec::new()
            }
            Some(Jump::Continue(label)) => {
                let target = self.frames.iter().rev().find_map(|f| match f.target {
                    Target::Loop { continue_to }
                        if label.is_none() || f.label.as_deref() == label.as_deref() =>
                    {
                        Some(continue_to)
                    }
                    _ => None,
                });
                match target {
                    Some(t) => self.edge(n, t),
                    None => self.unstructured(n, line, "continue", label),
                }
                Vec::new()
            }
        }
    }

    fn unstructured(&mut self, n: CfgNode, line: usize, what: &str, label: Option<String>) {
        self.edge(n, CfgNode::Exit);
        let target = label.map_or_else(
            || "no enclosing target".to_string(),
            |l| format!("unknown label '{l}'"),
        );
        self.diagnostics.push(format!(
            "unstructured {what} at line {line}: {target}; edge to exit"
        ));
    }

    fn push(&mut self, label: Option<&str>, target: Target) {
        self.frames.push(Frame {
            label: label.map(str::to_string),
            target,
            breaks: Vec::new(),
        });
    }

    fn pop(&mut self) -> Vec<CfgNode> {
        self.frames.pop().map(|f| f.breaks).unwrap_or_default()
    }
}
