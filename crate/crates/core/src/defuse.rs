//! Lexical def/use/callee extraction for single statements.
//!
//! Variable identity is a bare name. Member accesses `a.b` and element
//! accesses `a[i]` resolve to the root `a`; writes through them are weak
//! updates (the root is both defined and used). `this.x` resolves to `x`.

use std::collections::BTreeSet;

use crate::lexer::{self, is_keyword, TokKind, Token, MODIFIERS, PRIMITIVES};
use crate::model::StmtKind;

/// Names written, read and invoked by one statement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefUse {
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub callees: BTreeSet<String>,
    /// Set when the statement could not be analysed.
    pub diagnostic: Option<String>,
}

/// How the caller already knows a statement is shaped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Ctx {
    /// Classify from the tokens alone.
    Auto,
    /// A method or constructor signature.
    Signature,
    /// The `while (...);` tail of a do-while.
    DoTail,
}

#[derive(Clone, Debug)]
pub(crate) struct Analysis {
    pub kind: StmtKind,
    pub du: DefUse,
}

/// Extracts the def, use and callee sets of one segmented statement.
pub fn extract_def_use(stmt_text: &str) -> DefUse {
    match lexer::lex(stmt_text) {
        Ok(toks) => analyze(&toks, Ctx::Auto).du,
        Err(e) => DefUse {
            diagnostic: Some(format!("lex error: {e:?}")),
            ..DefUse::default()
        },
    }
}

/// Classifies one statement's kind from its text.
pub fn classify(stmt_text: &str) -> StmtKind {
    lexer::lex(stmt_text)
        .map(|toks| analyze(&toks, Ctx::Auto).kind)
        .unwrap_or(StmtKind::Other)
}

pub(crate) fn analyze(toks: &[Token], ctx: Ctx) -> Analysis {
    let mut du = DefUse::default();
    if toks.is_empty() {
        du.diagnostic = Some("empty statement".into());
        return Analysis {
            kind: StmtKind::Other,
            du,
        };
    }
    if let Err((_, msg)) = lexer::check_balance(toks) {
        du.diagnostic = Some(format!("unbalanced statement: {msg}"));
        return Analysis {
            kind: StmtKind::Other,
            du,
        };
    }
    let kind = statement(toks, ctx, &mut du);
    Analysis { kind, du }
}

fn statement(toks: &[Token], ctx: Ctx, du: &mut DefUse) -> StmtKind {
    let body = match toks.last() {
        Some(t) if t.is(";") => &toks[..toks.len() - 1],
        _ => toks,
    };
    let has_semi = body.len() != toks.len();
    let start = skip_annotations(body, 0);
    let Some(first) = body.get(start) else {
        return StmtKind::Other;
    };
    let body = &body[start..];
    let paren_inner = || -> Option<&[Token]> {
        if body.get(1)?.is("(") {
            let close = matching(body, 1)?;
            Some(&body[2..close])
        } else {
            None
        }
    };

    match first.text.as_str() {
        "else" => statement(&toks[start + 1..], ctx, du),
        "if" | "while" | "switch" | "synchronized" if paren_inner().is_some() => {
            let inner = paren_inner().unwrap_or(&[]);
            expr(inner, du);
            match first.text.as_str() {
                "if" => StmtKind::IfHeader,
                "switch" => StmtKind::SwitchHeader,
                "synchronized" => StmtKind::Other,
                _ if ctx == Ctx::DoTail || has_semi => StmtKind::BlockClose,
                _ => StmtKind::LoopHeader,
            }
        }
        "catch" => {
            if let Some(inner) = paren_inner() {
                if let Some(name) = inner
                    .iter()
                    .rev()
                    .find(|t| t.is_ident() && !is_keyword(&t.text))
                {
                    du.defs.insert(name.text.clone());
                }
            }
            StmtKind::IfHeader
        }
        "for" => {
            if let Some(inner) = paren_inner() {
                for_header(inner, du);
            }
            StmtKind::LoopHeader
        }
        "case" | "default" => {
            let rest = &body[1..];
            let split = rest
                .iter()
                .enumerate()
                .find(|(i, t)| (t.is(":") || t.is("->")) && depth_at(rest, *i) == 0)
                .map(|(i, t)| (i, t.is("->")));
            match split {
                Some((i, arrow)) => {
                    if first.is("case") {
                        expr(&rest[..i], du);
                    }
                    if arrow && i + 1 < rest.len() {
                        statement(&rest[i + 1..], Ctx::Auto, du);
                    }
                }
                None if first.is("case") => {
                    expr(rest, du);
                }
                None => {}
            }
            StmtKind::CaseLabel
        }
        "return" => {
            expr(&body[1..], du);
            StmtKind::Return
        }
        "throw" | "assert" | "yield" => {
            expr(&body[1..], du);
            StmtKind::Other
        }
        "break" | "continue" | "package" | "import" | "do" | "try"
            if !body.get(1).is_some_and(|t| t.is("(")) =>
        {
            StmtKind::Other
        }
        "try" => {
            if let Some(inner) = paren_inner() {
                for part in split_top(inner, ";") {
                    if declaration(part, du).is_none() {
                        expr(part, du);
                    }
                }
            }
            StmtKind::Declaration
        }
        _ => {
            let i = skip_modifiers(body, 0);
            if body.get(i).is_some_and(|t| {
                matches!(t.text.as_str(), "class" | "interface" | "enum" | "record")
            }) || (body.get(i).is_some_and(|t| t.is("@"))
                && body.get(i + 1).is_some_and(|t| t.is("interface")))
            {
                return StmtKind::Other;
            }
            if let Some(sig) = signature(body, ctx == Ctx::Signature) {
                du.defs.extend(sig.params);
                return StmtKind::Declaration;
            }
            if declaration(&body[i..], du).is_some() {
                return StmtKind::Declaration;
            }
            let before = du.defs.len();
            let writes = expr(body, du);
            if writes || du.defs.len() > before {
                StmtKind::Assignment
            } else if !du.callees.is_empty() {
                StmtKind::Call
            } else {
                StmtKind::Other
            }
        }
    }
}

fn for_header(inner: &[Token], du: &mut DefUse) {
    let parts = split_top(inner, ";");
    if parts.len() == 1 {
        // for-each: `Type name : expr`
        if let Some(colon) = inner
            .iter()
            .enumerate()
            .position(|(i, t)| t.is(":") && depth_at(inner, i) == 0)
        {
            if let Some(name) = inner[..colon]
                .iter()
                .rev()
                .find(|t| t.is_ident() && !is_keyword(&t.text))
            {
                du.defs.insert(name.text.clone());
            }
            expr(&inner[colon + 1..], du);
            return;
        }
    }
    for (n, part) in parts.into_iter().enumerate() {
        let i = skip_modifiers(part, 0);
        if n == 0 && declaration(&part[i..], du).is_some() {
            continue;
        }
        expr(part, du);
    }
}

/// Parsed method or constructor signature.
pub(crate) struct Signature {
    pub name: String,
    pub params: Vec<String>,
}

/// Recognises `[modifiers] [<T>] Type name(params) [throws ...]`. With
/// `constructor_ok`, the return type may be absent.
pub(crate) fn signature(toks: &[Token], constructor_ok: bool) -> Option<Signature> {
    let toks = match toks.last() {
        Some(t) if t.is(";") || t.is("{") => &toks[..toks.len() - 1],
        _ => toks,
    };
    let mut i = skip_modifiers(toks, skip_annotations(toks, 0));
    if toks.get(i).is_some_and(|t| t.is("<")) {
        i = skip_angles(toks, i)?;
    }
    let name_at = match parse_type(toks, i) {
        Some(j)
            if toks
                .get(j)
                .is_some_and(|t| t.is_ident() && !is_keyword(&t.text)) =>
        {
            j
        }
        _ if constructor_ok
            && toks
                .get(i)
                .is_some_and(|t| t.is_ident() && !is_keyword(&t.text)) =>
        {
            i
        }
        _ => return None,
    };
    if !toks.get(name_at + 1).is_some_and(|t| t.is("(")) {
        return None;
    }
    let close = matching(toks, name_at + 1)?;
    let mut rest = &toks[close + 1..];
    while rest.first().is_some_and(|t| t.is("[")) && rest.get(1).is_some_and(|t| t.is("]")) {
        rest = &rest[2..];
    }
    if !(rest.is_empty() || rest[0].is("throws")) {
        return None;
    }
    let params = split_top_angles(&toks[name_at + 2..close])
        .into_iter()
        .filter_map(|p| {
            let start = skip_annotations(p, 0);
            p[start..]
                .iter()
                .rev()
                .find(|t| t.is_ident() && !is_keyword(&t.text))
                .map(|t| t.text.clone())
        })
        .collect();
    Some(Signature {
        name: toks[name_at].text.clone(),
        params,
    })
}

/// Local variable or field declaration. Returns the declared names.
fn declaration(toks: &[Token], du: &mut DefUse) -> Option<Vec<String>> {
    let j = parse_type(toks, skip_annotations(toks, 0))?;
    let name = toks.get(j)?;
    if !name.is_ident() || is_keyword(&name.text) {
        return None;
    }
    let follows_ok = |k: usize| match toks.get(k) {
        None => true,
        Some(t) => matches!(t.text.as_str(), "=" | ";" | "," | "[" | ":"),
    };
    if !follows_ok(j + 1) {
        return None;
    }
    let mut names = Vec::new();
    let mut k = j;
    while k < toks.len() {
        // declarator: name ([])* (= init)?
        let name = &toks[k];
        if !name.is_ident() {
            break;
        }
        names.push(name.text.clone());
        du.defs.insert(name.text.clone());
        k += 1;
        while toks.get(k).is_some_and(|t| t.is("[")) {
            k = matching(toks, k)? + 1;
        }
        if toks.get(k).is_some_and(|t| t.is("=")) {
            let init_start = k + 1;
            let mut end = init_start;
            while end < toks.len() {
                let t = &toks[end];
                if t.is("(") || t.is("[") || t.is("{") {
                    end = matching(toks, end)? + 1;
                    continue;
                }
                if t.is(";") {
                    break;
                }
                if t.is(",")
                    && toks
                        .get(end + 1)
                        .is_some_and(|n| n.is_ident() && !is_keyword(&n.text))
                    && match toks.get(end + 2) {
                        None => true,
                        Some(n) => matches!(n.text.as_str(), "=" | "," | ";" | "["),
                    }
                {
                    break;
                }
                end += 1;
            }
            expr(&toks[init_start..end], du);
            k = end;
        }
        if toks.get(k).is_some_and(|t| t.is(",")) {
            k += 1;
        } else {
            break;
        }
    }
    Some(names)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Read,
    Write,
    ReadWrite,
}

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

/// Expression def/use. Returns true when the expression writes a variable.
fn expr(toks: &[Token], du: &mut DefUse) -> bool {
    let n = toks.len();
    let mut role = vec![Role::Read; n];
    let mut skip = vec![false; n];
    let mut writes = false;

    for k in 0..n {
        let t = &toks[k];
        if t.kind != TokKind::Punct {
            continue;
        }
        if ASSIGN_OPS.contains(&t.text.as_str()) {
            if let Some((root, strong)) = lvalue_before(toks, k) {
                role[root] = if t.is("=") && strong {
                    Role::Write
                } else {
                    Role::ReadWrite
                };
                writes = true;
            }
        } else if t.is("++") || t.is("--") {
            let postfix = k > 0 && (toks[k - 1].is_ident() || toks[k - 1].is("]"));
            let target = if postfix {
                lvalue_before(toks, k)
            } else {
                lvalue_after(toks, k + 1)
            };
            if let Some((root, _)) = target {
                role[root] = Role::ReadWrite;
                writes = true;
            }
        }
    }

    for i in 0..n {
        let t = &toks[i];
        // casts: `(Type) operand`
        if t.is("(") {
            if let Some(q) = parse_type(toks, i + 1) {
                if q > i + 1
                    && toks.get(q).is_some_and(|c| c.is(")"))
                    && toks.get(q + 1).is_some_and(|nx| {
                        matches!(
                            nx.kind,
                            TokKind::Ident | TokKind::Number | TokKind::Str | TokKind::Char
                        ) || nx.is("(")
                            || nx.is("!")
                            || nx.is("~")
                    })
                    && !toks.get(q + 1).is_some_and(|nx| nx.is("instanceof"))
                    && (toks[i + 1]
                        .text
                        .chars()
                        .next()
                        .is_some_and(char::is_uppercase)
                        || PRIMITIVES.contains(&toks[i + 1].text.as_str()))
                {
                    skip[i + 1..q].iter_mut().for_each(|s| *s = true);
                }
            }
        }
        if t.is("new") {
            if let Some(q) = parse_type_no_dims(toks, i + 1) {
                if toks.get(q).is_some_and(|c| c.is("(")) {
                    let raw = toks[i + 1..q]
                        .iter()
                        .position(|t| t.is("<"))
                        .map_or(q, |a| i + 1 + a);
                    if let Some(last) = toks[i + 1..raw].iter().rev().find(|t| t.is_ident()) {
                        du.callees.insert(last.text.clone());
                    }
                }
                skip[i + 1..q].iter_mut().for_each(|s| *s = true);
            }
        }
        if t.is("instanceof") {
            if let Some(q) = parse_type(toks, i + 1) {
                skip[i + 1..q].iter_mut().for_each(|s| *s = true);
                if let Some(b) = toks.get(q).filter(|b| b.is_ident() && !is_keyword(&b.text)) {
                    du.defs.insert(b.text.clone());
                    skip[q] = true;
                }
            }
        }
        if t.kind != TokKind::Ident || skip[i] || is_keyword(&t.text) {
            continue;
        }
        let prev = i.checked_sub(1).map(|p| &toks[p]);
        let next = toks.get(i + 1);
        if prev.is_some_and(|p| p.is("@")) {
            continue;
        }
        let member = prev.is_some_and(|p| p.is(".") || p.is("::"));
        let via_this = prev.is_some_and(|p| p.is("."))
            && i >= 2
            && toks[i - 2].is("this")
            && !(i >= 3 && toks[i - 3].is("."));
        if member && !via_this {
            if next.is_some_and(|nx| nx.is("(")) || prev.is_some_and(|p| p.is("::")) {
                du.callees.insert(t.text.clone());
            }
            continue;
        }
        if next.is_some_and(|nx| nx.is("(")) {
            du.callees.insert(t.text.clone());
            continue;
        }
        if next.is_some_and(|nx| nx.is("->")) {
            continue;
        }
        match role[i] {
            Role::Read => {
                du.uses.insert(t.text.clone());
            }
            Role::Write => {
                du.defs.insert(t.text.clone());
            }
            Role::ReadWrite => {
                du.defs.insert(t.text.clone());
                du.uses.insert(t.text.clone());
            }
        }
    }
    writes
}

/// Resolves the root variable of the lvalue ending just before `end`.
/// Returns the root token index and whether the write is a strong update.
fn lvalue_before(toks: &[Token], end: usize) -> Option<(usize, bool)> {
    let mut idents = Vec::new();
    let mut indexed = false;
    let mut j = end.checked_sub(1)?;
    loop {
        let t = &toks[j];
        if t.is("]") {
            j = matching_back(toks, j)?;
            indexed = true;
        } else if t.is_ident() {
            idents.push(j);
            if j >= 1 && toks[j - 1].is(".") {
                j -= 1;
            } else {
                break;
            }
        } else {
            return None;
        }
        j = j.checked_sub(1)?;
    }
    idents.reverse();
    resolve_root(toks, &idents, indexed)
}

fn lvalue_after(toks: &[Token], start: usize) -> Option<(usize, bool)> {
    let mut idents = Vec::new();
    let mut indexed = false;
    let mut j = start;
    while let Some(t) = toks.get(j) {
        if t.is_ident() && (idents.is_empty() || toks[j - 1].is(".")) {
            idents.push(j);
            j += 1;
        } else if t.is(".") && !idents.is_empty() {
            j += 1;
        } else if t.is("[") && !idents.is_empty() {
            j = matching(toks, j)? + 1;
            indexed = true;
        } else {
            break;
        }
    }
    resolve_root(toks, &idents, indexed)
}

fn resolve_root(toks: &[Token], idents: &[usize], indexed: bool) -> Option<(usize, bool)> {
    let (first, rest) = idents.split_first()?;
    if toks[*first].is("this") {
        let (root, tail) = rest.split_first()?;
        return Some((*root, tail.is_empty() && !indexed));
    }
    if is_keyword(&toks[*first].text) {
        return None;
    }
    Some((*first, rest.is_empty() && !indexed))
}

fn skip_annotations(toks: &[Token], mut i: usize) -> usize {
    while toks.get(i).is_some_and(|t| t.is("@"))
        && toks
            .get(i + 1)
            .is_some_and(|t| t.is_ident() && !t.is("interface"))
    {
        i += 2;
        while toks.get(i).is_some_and(|t| t.is(".")) && toks.get(i + 1).is_some_and(Token::is_ident)
        {
            i += 2;
        }
        if toks.get(i).is_some_and(|t| t.is("(")) {
            match matching(toks, i) {
                Some(c) => i = c + 1,
                None => return i,
            }
        }
    }
    i
}

pub(crate) fn skip_modifiers(toks: &[Token], mut i: usize) -> usize {
    loop {
        let j = skip_annotations(toks, i);
        if toks.get(j).is_some_and(|t| {
            MODIFIERS.contains(&t.text.as_str())
                || (t.is("synchronized") && !toks.get(j + 1).is_some_and(|n| n.is("(")))
        }) {
            i = j + 1;
        } else {
            return j;
        }
    }
}

/// Parses a type starting at `i`; returns the index just past it.
pub(crate) fn parse_type(toks: &[Token], i: usize) -> Option<usize> {
    let mut j = parse_type_no_dims(toks, i)?;
    while toks.get(j).is_some_and(|t| t.is("[")) && toks.get(j + 1).is_some_and(|t| t.is("]")) {
        j += 2;
    }
    if toks.get(j).is_some_and(|t| t.is("...")) {
        j += 1;
    }
    Some(j)
}

fn parse_type_no_dims(toks: &[Token], i: usize) -> Option<usize> {
    let t = toks.get(i)?;
    if !t.is_ident() {
        return None;
    }
    if PRIMITIVES.contains(&t.text.as_str()) {
        return Some(i + 1);
    }
    if is_keyword(&t.text) {
        return None;
    }
    let mut j = i + 1;
    loop {
        if toks.get(j).is_some_and(|t| t.is("<")) {
            j = skip_angles(toks, j)?;
        }
        if toks.get(j).is_some_and(|t| t.is("."))
            && toks
                .get(j + 1)
                .is_some_and(|t| t.is_ident() && !is_keyword(&t.text))
        {
            j += 2;
        } else {
            return Some(j);
        }
    }
}

/// Skips a balanced `<...>` group of type arguments starting at `i`.
fn skip_angles(toks: &[Token], i: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut j = i;
    while let Some(t) = toks.get(j) {
        match t.text.as_str() {
            "<" => depth += 1,
            ">" => {
                depth -= 1;
                if depth == 0 {
                    return Some(j + 1);
                }
            }
            "," | "." | "?" | "&" | "[" | "]" | "extends" | "super" | "@" => {}
            _ if t.is_ident() => {}
            _ => return None,
        }
        j += 1;
    }
    None
}

/// Index of the bracket closing the one opened at `open`.
pub(crate) fn matching(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0isize;
    for (j, t) in toks.iter().enumerate().skip(open) {
        if t.kind != TokKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
    }
    None
}

fn matching_back(toks: &[Token], close: usize) -> Option<usize> {
    let mut depth = 0isize;
    for j in (0..=close).rev() {
        let t = &toks[j];
        if t.kind != TokKind::Punct {
            continue;
        }
        match t.text.as_str() {
            ")" | "]" | "}" => depth += 1,
            "(" | "[" | "{" => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
            _ => {}
        }
    }
    None
}

/// Bracket depth just before token `i`.
fn depth_at(toks: &[Token], i: usize) -> isize {
    toks[..i]
        .iter()
        .filter(|t| t.kind == TokKind::Punct)
        .map(|t| match t.text.as_str() {
            "(" | "[" | "{" => 1,
            ")" | "]" | "}" => -1,
            _ => 0,
        })
        .sum()
}

fn split_top<'a>(toks: &'a [Token], sep: &str) -> Vec<&'a [Token]> {
    let mut parts = Vec::new();
    let mut depth = 0isize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            s if s == sep && depth == 0 => {
                parts.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&toks[start..]);
    parts
}

/// Splits a parameter list on commas outside `()`, `[]`, `{}` and `<>`.
fn split_top_angles(toks: &[Token]) -> Vec<&[Token]> {
    let mut parts = Vec::new();
    let mut depth = 0isize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.text.as_str() {
            "(" | "[" | "{" | "<" => depth += 1,
            ")" | "]" | "}" | ">" => depth -= 1,
            "," if depth == 0 => {
                parts.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < toks.len() {
        parts.push(&toks[start..]);
    }
    parts
}
