//! Program generator and brute-force dependence oracle.
//!
//! Programs are built from a tiny structured AST, rendered as one Java
//! method, and analysed twice: by the library and by the routines here,
//! which derive their own CFG from the AST and enumerate paths directly.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;

pub const VARS: [&str; 3] = ["a", "b", "c"];

#[derive(Clone, Debug)]
pub enum G {
    Assign {
        def: usize,
        uses: Vec<usize>,
        compound: bool,
    },
    Call {
        uses: Vec<usize>,
    },
    If {
        cond: Vec<usize>,
        then: Vec<G>,
        els: Option<Vec<G>>,
    },
    While {
        cond: Vec<usize>,
        body: Vec<G>,
    },
    Return,
    Break,
    Continue,
}

pub struct Flat {
    pub text: String,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
}

fn expr(uses: &[usize]) -> String {
    if uses.is_empty() {
        "1".to_string()
    } else {
        uses.iter()
            .map(|&u| VARS[u])
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn names(vs: &[usize]) -> BTreeSet<String> {
    vs.iter().map(|&v| VARS[v].to_string()).collect()
}

fn cond(uses: &[usize]) -> String {
    if uses.is_empty() {
        "flag()".to_string()
    } else {
        format!("{} > 0", expr(uses))
    }
}

/// Statements of `prog` in source order with their expected def/use sets.
pub fn flatten(prog: &[G], out: &mut Vec<Flat>) {
    for g in prog {
        match g {
            G::Assign {
                def,
                uses,
                compound,
            } => {
                let mut u = names(uses);
                let text = if *compound {
                    u.insert(VARS[*def].to_string());
                    format!("{} += {};", VARS[*def], expr(uses))
                } else {
                    format!("{} = {};", VARS[*def], expr(uses))
                };
                out.push(Flat {
                    text,
                    defs: names(&[*def]),
                    uses: u,
                });
            }
            G::Call { uses } => {
                let args = uses.iter().map(|&u| VARS[u]).collect::<Vec<_>>().join(", ");
                out.push(Flat {
                    text: format!("f({args});"),
                    defs: BTreeSet::new(),
                    uses: names(uses),
                });
            }
            G::If { cond: c, then, els } => {
                out.push(Flat {
                    text: format!("if ({})", cond(c)),
                    defs: BTreeSet::new(),
                    uses: names(c),
                });
                flatten(then, out);
                if let Some(e) = els {
                    flatten(e, out);
                }
            }
            G::While { cond: c, body } => {
                out.push(Flat {
                    text: format!("while ({})", cond(c)),
                    defs: BTreeSet::new(),
                    uses: names(c),
                });
                flatten(body, out);
            }
            G::Return => out.push(Flat {
                text: "return;".into(),
                defs: BTreeSet::new(),
                uses: BTreeSet::new(),
            }),
            G::Break => out.push(Flat {
                text: "break;".into(),
                defs: BTreeSet::new(),
                uses: BTreeSet::new(),
            }),
            G::Continue => out.push(Flat {
                text: "continue;".into(),
                defs: BTreeSet::new(),
                uses: BTreeSet::new(),
            }),
        }
    }
}

fn render_block(prog: &[G], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    let mut flat = Vec::new();
    for g in prog {
        match g {
            G::If { cond: c, then, els } => {
                out.push_str(&format!("{pad}if ({}) {{\n", cond(c)));
                render_block(then, indent + 1, out);
                match els {
                    Some(e) => {
                        out.push_str(&format!("{pad}}} else {{\n"));
                        render_block(e, indent + 1, out);
                        out.push_str(&format!("{pad}}}\n"));
                    }
                    None => out.push_str(&format!("{pad}}}\n")),
                }
            }
            G::While { cond: c, body } => {
                out.push_str(&format!("{pad}while ({}) {{\n", cond(c)));
                render_block(body, indent + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
            simple => {
                flat.clear();
                flatten(std::slice::from_ref(simple), &mut flat);
                out.push_str(&format!("{pad}{}\n", flat[0].text));
            }
        }
    }
}

/// `class P { void m() { ... } }`: the class header is statement 0, the
/// signature statement 1, and the body starts at 2.
pub fn render(prog: &[G]) -> String {
    let mut s = String::from("class P {\n    void m() {\n");
    render_block(prog, 2, &mut s);
    s.push_str("    }\n}\n");
    s
}

pub const BODY_OFFSET: usize = 2;

pub fn size(prog: &[G]) -> usize {
    let mut f = Vec::new();
    flatten(prog, &mut f);
    f.len()
}

// Oracle CFG: node 0 ENTRY, 1 EXIT, body statement k is node k + 2.
struct Lower {
    succ: Vec<BTreeSet<usize>>,
    next: usize,
}

struct LoopCtx {
    header: usize,
    breaks: Vec<usize>,
}

impl Lower {
    fn block(&mut self, prog: &[G], mut preds: Vec<usize>, lp: &mut Option<LoopCtx>) -> Vec<usize> {
        for g in prog {
            preds = self.stmt(g, preds, lp);
        }
        preds
    }

    fn take(&mut self, preds: &[usize]) -> usize {
        let n = self.next + 2;
        self.next += 1;
        for &p in preds {
            self.succ[p].insert(n);
        }
        n
    }

    fn stmt(&mut self, g: &G, preds: Vec<usize>, lp: &mut Option<LoopCtx>) -> Vec<usize> {
        match g {
            G::Assign { .. } | G::Call { .. } => vec![self.take(&preds)],
            G::Return => {
                let n = self.take(&preds);
                self.succ[n].insert(1);
                vec![]
            }
            G::Break => {
                let n = self.take(&preds);
                lp.as_mut().expect("break inside loop").breaks.push(n);
                vec![]
            }
            G::Continue => {
                let n = self.take(&preds);
                let h = lp.as_ref().expect("continue inside loop").header;
                self.succ[n].insert(h);
                vec![]
            }
            G::If { then, els, .. } => {
                let h = self.take(&preds);
                let mut outs = self.block(then, vec![h], lp);
                match els {
                    Some(e) => outs.extend(self.block(e, vec![h], lp)),
                    None => outs.push(h),
                }
                outs
            }
            G::While { body, .. } => {
                let h = self.take(&preds);
                let mut inner = Some(LoopCtx {
                    header: h,
                    breaks: vec![],
                });
                let outs = self.block(body, vec![h], &mut inner);
                for o in outs {
                    self.succ[o].insert(h);
                }
                let mut outs = vec![h];
                outs.extend(inner.unwrap().breaks);
                outs
            }
        }
    }
}

pub fn oracle_cfg(prog: &[G]) -> Vec<BTreeSet<usize>> {
    let n = size(prog);
    let mut l = Lower {
        succ: vec![BTreeSet::new(); n + 2],
        next: 0,
    };
    let outs = l.block(prog, vec![0], &mut None);
    for o in outs {
        l.succ[o].insert(1);
    }
    l.succ
}

fn exit_reachable_avoiding(succ: &[BTreeSet<usize>], from: usize, avoid: usize) -> bool {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == 1 {
            return true;
        }
        if v == avoid || seen[v] {
            continue;
        }
        seen[v] = true;
        stack.extend(succ[v].iter().copied());
    }
    false
}

/// `s` post-dominates `n` (reflexive).
fn pdom(succ: &[BTreeSet<usize>], s: usize, n: usize) -> bool {
    s == n || !exit_reachable_avoiding(succ, n, s)
}

/// Searches simple paths `d -> ... -> u` whose interior avoids `killers`.
fn clear_path(succ: &[BTreeSet<usize>], d: usize, u: usize, killers: &BTreeSet<usize>) -> bool {
    fn go(
        succ: &[BTreeSet<usize>],
        v: usize,
        u: usize,
        killers: &BTreeSet<usize>,
        on_path: &mut Vec<bool>,
    ) -> bool {
        for &w in &succ[v] {
            if w == u {
                return true;
            }
            if on_path[w] || killers.contains(&w) || w < 2 {
                continue;
            }
            on_path[w] = true;
            let found = go(succ, w, u, killers, on_path);
            on_path[w] = false;
            if found {
                return true;
            }
        }
        false
    }
    let mut on_path = vec![false; succ.len()];
    on_path[d] = true;
    go(succ, d, u, killers, &mut on_path)
}

pub type EdgeSet = BTreeSet<(usize, usize)>;

/// Expected (control, data) edges between body statements, numbered from 0.
pub fn oracle_edges(prog: &[G]) -> (EdgeSet, EdgeSet) {
    let succ = oracle_cfg(prog);
    let mut flat = Vec::new();
    flatten(prog, &mut flat);
    let n = flat.len();

    let mut control = BTreeSet::new();
    for h in 2..n + 2 {
        if succ[h].len() < 2 {
            continue;
        }
        for s in 2..n + 2 {
            if s == h {
                continue;
            }
            let some = succ[h].iter().any(|&x| pdom(&succ, s, x));
            let all = succ[h].iter().all(|&x| pdom(&succ, s, x));
            if some && !all {
                control.insert((h - 2, s - 2));
            }
        }
    }

    let mut data = BTreeSet::new();
    for d in 0..n {
        for v in &flat[d].defs {
            let killers: BTreeSet<usize> = (0..n)
                .filter(|&k| flat[k].defs.contains(v))
                .map(|k| k + 2)
                .collect();
            for (u, fu) in flat.iter().enumerate() {
                if fu.uses.contains(v) && clear_path(&succ, d + 2, u + 2, &killers) {
                    data.insert((d, u));
                }
            }
        }
    }
    (control, data)
}

const SIMPLE: usize = 4;

fn simple(k: usize) -> G {
    match k {
        0 => G::Assign {
            def: 0,
            uses: vec![1],
            compound: false,
        },
        1 => G::Assign {
            def: 1,
            uses: vec![0],
            compound: false,
        },
        2 => G::Assign {
            def: 0,
            uses: vec![],
            compound: true,
        },
        _ => G::Call { uses: vec![0, 1] },
    }
}

/// Every block of exactly `size` statements over a small alphabet. Jumps
/// only end the then-arm of an else-less `if`, so no statement is dead.
pub fn all_blocks(size: usize, in_loop: bool) -> Vec<Vec<G>> {
    if size == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    // first statement takes `k` slots, the rest of the block `size - k`
    for k in 1..=size {
        let rest = all_blocks(size - k, in_loop);
        for first in all_stmts(k, in_loop) {
            for r in &rest {
                let mut b = vec![first.clone()];
                b.extend(r.iter().cloned());
                out.push(b);
            }
        }
    }
    out
}

fn all_stmts(size: usize, in_loop: bool) -> Vec<G> {
    let mut out = Vec::new();
    if size == 1 {
        out.extend((0..SIMPLE).map(simple));
        return out;
    }
    let inner = size - 1;
    for then in all_blocks(inner, in_loop) {
        out.push(G::If {
            cond: vec![0],
            then,
            els: None,
        });
    }
    let mut jumps = vec![G::Return];
    if in_loop {
        jumps.extend([G::Break, G::Continue]);
    }
    for j in &jumps {
        for mut then in all_blocks(inner - 1, in_loop) {
            then.push(j.clone());
            out.push(G::If {
                cond: vec![1],
                then,
                els: None,
            });
        }
    }
    for t in 1..inner {
        for then in all_blocks(t, in_loop) {
            for els in all_blocks(inner - t, in_loop) {
                out.push(G::If {
                    cond: vec![1],
                    then: then.clone(),
                    els: Some(els),
                });
            }
        }
    }
    for body in all_blocks(inner, true) {
        out.push(G::While {
            cond: vec![0, 1],
            body,
        });
    }
    out
}

fn pick_vars(rng: &mut impl Rng, max: usize) -> Vec<usize> {
    let k = rng.gen_range(0..=max);
    let mut v: Vec<usize> = (0..3).collect();
    for i in 0..3 {
        let j = rng.gen_range(i..3);
        v.swap(i, j);
    }
    v.truncate(k);
    v.sort();
    v
}

/// A random block of at most `budget` statements.
pub fn random_block(rng: &mut impl Rng, budget: &mut usize, depth: usize, in_loop: bool) -> Vec<G> {
    let mut out = Vec::new();
    let len = rng.gen_range(1..=4);
    for _ in 0..len {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        let roll = rng.gen_range(0..10);
        if depth < 3 && roll < 2 && *budget > 0 {
            let cond = pick_vars(rng, 2);
            let mut then = random_block(rng, budget, depth + 1, in_loop);
            let els = if rng.gen_bool(0.4) && *budget > 0 {
                Some(random_block(rng, budget, depth + 1, in_loop))
            } else {
                if *budget > 0 && rng.gen_bool(0.3) {
                    *budget -= 1;
                    then.push(match (in_loop, rng.gen_range(0..3)) {
                        (true, 1) => G::Break,
                        (true, 2) => G::Continue,
                        _ => G::Return,
                    });
                }
                None
            };
            out.push(G::If { cond, then, els });
        } else if depth < 3 && roll < 4 && *budget > 0 {
            let cond = pick_vars(rng, 2);
            let body = random_block(rng, budget, depth + 1, true);
            out.push(G::While { cond, body });
        } else if roll < 9 {
            out.push(G::Assign {
                def: rng.gen_range(0..3),
                uses: pick_vars(rng, 2),
                compound: rng.gen_bool(0.2),
            });
        } else {
            out.push(G::Call {
                uses: pick_vars(rng, 3),
            });
        }
    }
    out
}

pub fn random_program(rng: &mut impl Rng, max_statements: usize) -> Vec<G> {
    let mut budget = max_statements;
    random_block(rng, &mut budget, 0, false)
}

/// A variant of `prog` with some simple statements rewritten, dropped or
/// duplicated, for before/after pairs.
pub fn mutate(rng: &mut impl Rng, prog: &[G]) -> Vec<G> {
    let mut out = Vec::new();
    for g in prog {
        match g {
            G::If { cond, then, els } => out.push(G::If {
                cond: cond.clone(),
                then: keep_nonempty(mutate(rng, then), then),
                els: els.as_ref().map(|e| keep_nonempty(mutate(rng, e), e)),
            }),
            G::While { cond, body } => out.push(G::While {
                cond: cond.clone(),
                body: keep_nonempty(mutate(rng, body), body),
            }),
            G::Assign { .. } | G::Call { .. } => match rng.gen_range(0..10) {
                0 => {}
                1 => out.push(G::Assign {
                    def: rng.gen_range(0..3),
                    uses: pick_vars(rng, 2),
                    compound: false,
                }),
                2 => {
                    out.push(g.clone());
                    out.push(G::Call {
                        uses: pick_vars(rng, 2),
                    });
                }
                _ => out.push(g.clone()),
            },
            jump => out.push(jump.clone()),
        }
    }
    out
}

fn keep_nonempty(v: Vec<G>, orig: &[G]) -> Vec<G> {
    if v.is_empty() {
        orig.to_vec()
    } else {
        v
    }
}
