//! Statement segmentation for a Java subset.
//!
//! One statement per semicolon-terminated simple statement, per control
//! header, per `case`/`default` label and per method signature. Braces,
//! `else`, `try`, `finally` and `do` produce no statement; block structure
//! is recorded in each method's [`Node`] tree and in `nesting`.

use std::ops::Range;

use thiserror::Error;

use crate::defuse::{self, analyze, matching, skip_modifiers, Ctx};
use crate::lexer::{self, Token};
use crate::model::{
    normalize, Diagnostic, MethodId, MethodUnit, Node, SourceFile, SourceVersion, Statement,
    StmtId, UnitKind, VersionLabel,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{path}:{line}: unbalanced source: {detail}")]
    UnbalancedSource {
        path: String,
        line: usize,
        detail: String,
    },
}

/// Statements and method units of one file. Ids are local to the file.
#[derive(Clone, Debug, Default)]
pub struct ParsedFile {
    pub statements: Vec<Statement>,
    pub methods: Vec<MethodUnit>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Segments `source_text` into statements in textual order.
pub fn segment_statements(source_text: &str, path: &str) -> Result<Vec<Statement>, ParseError> {
    parse_file(source_text, path).map(|f| f.statements)
}

pub fn parse_file(source_text: &str, path: &str) -> Result<ParsedFile, ParseError> {
    let toks = lexer::lex(source_text).map_err(|e| {
        let (line, detail) = match e {
            lexer::LexError::UnterminatedComment(l) => (l, "unterminated comment".to_string()),
            lexer::LexError::UnterminatedLiteral(l) => (l, "unterminated literal".to_string()),
        };
        ParseError::UnbalancedSource {
            path: path.to_string(),
            line,
            detail,
        }
    })?;
    lexer::check_balance(&toks).map_err(|(line, detail)| ParseError::UnbalancedSource {
        path: path.to_string(),
        line,
        detail,
    })?;
    let mut p = Parser {
        src: source_text,
        path,
        toks,
        pos: 0,
        out: ParsedFile::default(),
        top: None,
        current: 0,
    };
    p.class_body(false);
    Ok(p.out)
}

/// Parses every file of one version and renumbers statements densely.
/// Files that fail to parse are kept with an empty statement range and a
/// diagnostic.
pub fn parse_version(
    label: VersionLabel,
    files: &[(String, String)],
) -> (SourceVersion, Vec<Diagnostic>) {
    let mut version = SourceVersion::empty(label);
    let mut diagnostics = Vec::new();
    for (path, text) in files {
        let start = version.statements.len();
        match parse_file(text, path) {
            Ok(parsed) => {
                let method_offset = version.methods.len();
                for mut s in parsed.statements {
                    s.id += start;
                    s.method = MethodId(s.method.0 + method_offset);
                    version.statements.push(s);
                }
                for mut m in parsed.methods {
                    m.shift(start);
                    version.methods.push(m);
                }
                diagnostics.extend(parsed.diagnostics);
            }
            Err(e) => {
                let ParseError::UnbalancedSource { line, .. } = &e;
                diagnostics.push(Diagnostic {
                    path: path.clone(),
                    line: *line,
                    message: format!("file skipped: {e}"),
                });
            }
        }
        version.files.push(SourceFile {
            path: path.clone(),
            text: text.clone(),
            statements: start..version.statements.len(),
        });
    }
    (version, diagnostics)
}

struct Parser<'a> {
    src: &'a str,
    path: &'a str,
    toks: Vec<Token>,
    pos: usize,
    out: ParsedFile,
    /// Open top-level unit collecting class-level statements.
    top: Option<usize>,
    current: usize,
}

impl Parser<'_> {
    fn at(&self, i: usize) -> Option<&Token> {
        self.toks.get(i)
    }

    fn is(&self, i: usize, s: &str) -> bool {
        self.at(i).is_some_and(|t| t.is(s))
    }

    fn diag(&mut self, line: usize, message: impl Into<String>) {
        self.out.diagnostics.push(Diagnostic {
            path: self.path.to_string(),
            line,
            message: message.into(),
        });
    }

    fn emit(&mut self, range: Range<usize>, nesting: usize, ctx: Ctx) -> StmtId {
        let toks = &self.toks[range.clone()];
        let (first, last) = (&toks[0], &toks[toks.len() - 1]);
        let span = (first.line, last.end_line);
        let text = self.src[first.start..last.end].trim().to_string();
        let analysis = analyze(toks, ctx);
        let id = self.out.statements.len();
        if let Some(msg) = &analysis.du.diagnostic {
            self.diag(span.0, msg.clone());
        }
        self.out.statements.push(Statement {
            id,
            normalized: normalize(&text),
            text,
            kind: analysis.kind,
            defs: analysis.du.defs,
            uses: analysis.du.uses,
            callees: analysis.du.callees,
            method: MethodId(self.current),
            nesting,
            line_span: span,
        });
        id
    }

    fn emit_top(&mut self, range: Range<usize>) {
        if range.is_empty() {
            return;
        }
        let unit = self.top_unit();
        let id = self.emit(range, 0, Ctx::Auto);
        self.push_top(unit, Node::Simple(id));
    }

    fn push_top(&mut self, unit: usize, node: Node) {
        let m = &mut self.out.methods[unit];
        m.body.push(node);
        m.statement_ids.end = self.out.statements.len();
    }

    fn top_unit(&mut self) -> usize {
        let unit = match self.top {
            Some(u) => u,
            None => {
                let id = self.out.statements.len();
                self.out.methods.push(MethodUnit {
                    name: "<toplevel>".into(),
                    params: Vec::new(),
                    statement_ids: id..id,
                    file: self.path.to_string(),
                    kind: UnitKind::TopLevel,
                    body: Vec::new(),
                });
                let u = self.out.methods.len() - 1;
                self.top = Some(u);
                u
            }
        };
        self.current = unit;
        unit
    }

    fn class_body(&mut self, until_brace: bool) {
        while let Some(t) = self.at(self.pos) {
            if t.is("}") {
                self.pos += 1;
                if until_brace {
                    return;
                }
                continue;
            }
            if t.is(";") {
                self.pos += 1;
                continue;
            }
            self.member();
        }
    }

    /// Finds the first `;`, `{` or `}` at bracket depth zero from `from`.
    fn scan_member(&self, from: usize) -> usize {
        let mut j = from;
        while let Some(t) = self.at(j) {
            match t.text.as_str() {
                "(" | "[" => j = matching(&self.toks, j).map_or(self.toks.len(), |c| c + 1),
                ";" | "{" | "}" => return j,
                _ => j += 1,
            }
        }
        j
    }

    fn member(&mut self) {
        let start = self.pos;
        if self.starts_fragment(start) {
            // method-body statement outside any method (a code fragment)
            let unit = self.top_unit();
            if let Some(node) = self.stmt(0) {
                self.push_top(unit, node);
            }
            if self.pos == start {
                self.pos += 1;
            }
            return;
        }
        let j = self.scan_member(start);
        match self.at(j).map(|t| t.text.as_str()) {
            None => {
                self.emit_top(start..j);
                self.pos = j;
                return;
            }
            Some(";") => {
                self.emit_top(start..j + 1);
                self.pos = j + 1;
                return;
            }
            Some("}") => {
                self.emit_top(start..j);
                self.pos = j;
                return;
            }
            _ => {}
        }
        // `{` at j
        let prefix = &self.toks[start..j];
        let i = skip_modifiers(prefix, 0);
        let decl_kw = prefix.get(i).map(|t| t.text.clone());
        let is_type_decl = matches!(
            decl_kw.as_deref(),
            Some("class" | "interface" | "enum" | "record")
        ) || (prefix.get(i).is_some_and(|t| t.is("@"))
            && prefix.get(i + 1).is_some_and(|t| t.is("interface")));
        if is_type_decl {
            self.emit_top(start..j);
            self.pos = j + 1;
            if decl_kw.as_deref() == Some("enum") {
                self.enum_constants();
            }
            self.class_body(true);
            return;
        }
        let assigns = prefix.iter().any(|t| t.is("=") || t.is("->"));
        if !assigns && prefix.len() == 1 && prefix[0].is("static") {
            self.method("<clinit>".into(), Vec::new(), start..j, Ctx::Auto);
            return;
        }
        if !assigns {
            if let Some(sig) = defuse::signature(prefix, true) {
                self.method(sig.name, sig.params, start..j, Ctx::Signature);
                return;
            }
        }
        // Expression-level brace: field initializer, anonymous class,
        // instance initializer or something outside the subset.
        let end = self.scan_statement_end(start);
        self.emit_top(start..end);
        self.pos = end;
    }

    fn starts_fragment(&self, i: usize) -> bool {
        let Some(t) = self.at(i) else {
            return false;
        };
        match t.text.as_str() {
            "if" | "for" | "while" | "switch" | "synchronized" => self.is(i + 1, "("),
            "do" | "try" | "return" | "throw" | "break" | "continue" => true,
            _ => t.is_ident() && !lexer::is_keyword(&t.text) && self.is(i + 1, ":"),
        }
    }

    fn enum_constants(&mut self) {
        let start = self.pos;
        let mut j = start;
        while let Some(t) = self.at(j) {
            match t.text.as_str() {
                "(" | "[" | "{" => j = matching(&self.toks, j).map_or(self.toks.len(), |c| c + 1),
                ";" => {
                    self.emit_top(start..j + 1);
                    self.pos = j + 1;
                    return;
                }
                "}" => break,
                _ => j += 1,
            }
        }
        self.emit_top(start..j);
        self.pos = j;
    }

    fn method(&mut self, name: String, params: Vec<String>, header: Range<usize>, ctx: Ctx) {
        self.top = None;
        self.out.methods.push(MethodUnit {
            name,
            params,
            statement_ids: 0..0,
            file: self.path.to_string(),
            kind: UnitKind::Method,
            body: Vec::new(),
        });
        let unit = self.out.methods.len() - 1;
        self.current = unit;
        let brace = header.end;
        let sig = self.emit(header, 0, ctx);
        self.pos = brace + 1;
        let body = self.block(0);
        let m = &mut self.out.methods[unit];
        m.statement_ids = sig..self.out.statements.len();
        m.body = body;
    }

    /// Parses block contents after `{` up to and including the matching `}`.
    fn block(&mut self, nesting: usize) -> Vec<Node> {
        let mut nodes = Vec::new();
        while let Some(t) = self.at(self.pos) {
            if t.is("}") {
                self.pos += 1;
                break;
            }
            let before = self.pos;
            if let Some(n) = self.stmt(nesting) {
                nodes.push(n);
            }
            if self.pos == before {
                self.pos += 1;
            }
        }
        nodes
    }

    /// A braced block or a single statement used as a construct body.
    fn body(&mut self, nesting: usize) -> Vec<Node> {
        match self.at(self.pos) {
            Some(t) if t.is("{") => {
                self.pos += 1;
                self.block(nesting)
            }
            Some(t) if t.is("}") => Vec::new(),
            None => Vec::new(),
            Some(_) => self.stmt(nesting).into_iter().collect(),
        }
    }

    /// Emits a `keyword (...)` header. Returns None if the parenthesis is
    /// missing.
    fn header(&mut self, nesting: usize, ctx: Ctx) -> Option<StmtId> {
        let kw = self.pos;
        if !self.is(kw + 1, "(") {
            return None;
        }
        let close = matching(&self.toks, kw + 1)?;
        let mut end = close + 1;
        if ctx == Ctx::DoTail && self.is(end, ";") {
            end += 1;
        }
        self.pos = end;
        Some(self.emit(kw..end, nesting, ctx))
    }

    fn stmt(&mut self, nesting: usize) -> Option<Node> {
        let t = self.at(self.pos)?.clone();
        let next_is_paren = self.is(self.pos + 1, "(");
        match t.text.as_str() {
            "{" => {
                self.pos += 1;
                Some(Node::Block(self.block(nesting + 1)))
            }
            ";" => {
                self.pos += 1;
                None
            }
            "}" => None,
            "if" if next_is_paren => {
                let header = self.header(nesting, Ctx::Auto)?;
                let then_branch = self.body(nesting + 1);
                let else_branch = if self.is(self.pos, "else") {
                    self.pos += 1;
                    if self.is(self.pos, "if") {
                        Some(self.stmt(nesting).into_iter().collect())
                    } else {
                        Some(self.body(nesting + 1))
                    }
                } else {
                    None
                };
                Some(Node::If {
                    header,
                    then_branch,
                    else_branch,
                })
            }
            "while" | "for" if next_is_paren => {
                let header = self.header(nesting, Ctx::Auto)?;
                let body = self.body(nesting + 1);
                Some(Node::Loop { header, body })
            }
            "do" => {
                self.pos += 1;
                let body = self.body(nesting + 1);
                if self.is(self.pos, "while") {
                    if let Some(tail) = self.header(nesting, Ctx::DoTail) {
                        return Some(Node::DoWhile { body, tail });
                    }
                }
                self.diag(t.line, "do without while tail");
                Some(Node::Block(body))
            }
            "switch" if next_is_paren => {
                let header = self.header(nesting, Ctx::Auto)?;
                if !self.is(self.pos, "{") {
                    self.diag(t.line, "switch without body");
                    return Some(Node::Simple(header));
                }
                self.pos += 1;
                let (body, arrow) = self.switch_body(nesting);
                Some(Node::Switch {
                    header,
                    body,
                    arrow,
                })
            }
            "try" => {
                self.pos += 1;
                let mut body = Vec::new();
                if self.is(self.pos, "(") {
                    let close = matching(&self.toks, self.pos)?;
                    let r = self.emit(self.pos - 1..close + 1, nesting, Ctx::Auto);
                    body.push(Node::Simple(r));
                    self.pos = close + 1;
                }
                body.extend(self.body(nesting + 1));
                let mut catches = Vec::new();
                while self.is(self.pos, "catch") && self.is(self.pos + 1, "(") {
                    let Some(h) = self.header(nesting, Ctx::Auto) else {
                        break;
                    };
                    let cb = self.body(nesting + 1);
                    catches.push((h, cb));
                }
                let finally = if self.is(self.pos, "finally") {
                    self.pos += 1;
                    Some(self.body(nesting + 1))
                } else {
                    None
                };
                Some(Node::Try {
                    body,
                    catches,
                    finally,
                })
            }
            "synchronized" if next_is_paren => {
                let header = self.header(nesting, Ctx::Auto)?;
                let body = self.body(nesting + 1);
                Some(Node::Block(vec![Node::Simple(header), Node::Block(body)]))
            }
            "else" => {
                self.diag(t.line, "else without if");
                self.pos += 1;
                None
            }
            _ if t.is_ident() && !lexer::is_keyword(&t.text) && self.is(self.pos + 1, ":") => {
                let label = t.text.clone();
                self.pos += 2;
                let inner = self.stmt(nesting)?;
                Some(Node::Labeled {
                    label,
                    body: Box::new(inner),
                })
            }
            _ => {
                let start = self.pos;
                let end = self.scan_statement_end(start);
                self.pos = end;
                Some(Node::Simple(self.emit(start..end, nesting, Ctx::Auto)))
            }
        }
    }

    fn switch_body(&mut self, nesting: usize) -> (Vec<Node>, bool) {
        let mut nodes = Vec::new();
        let mut arrow = false;
        while let Some(t) = self.at(self.pos) {
            if t.is("}") {
                self.pos += 1;
                break;
            }
            let is_label = t.is("case")
                || (t.is("default") && (self.is(self.pos + 1, ":") || self.is(self.pos + 1, "->")));
            let before = self.pos;
            if is_label {
                let start = self.pos;
                let mut j = start + 1;
                while let Some(u) = self.at(j) {
                    match u.text.as_str() {
                        "(" | "[" | "{" => {
                            j = matching(&self.toks, j).map_or(self.toks.len(), |c| c + 1)
                        }
                        ":" | "->" | ";" | "}" => break,
                        _ => j += 1,
                    }
                }
                let is_arrow = self.is(j, "->");
                let end = if self.is(j, ":") { j + 1 } else { j };
                let label = self.emit(start..end, nesting + 1, Ctx::Auto);
                nodes.push(Node::Simple(label));
                self.pos = if is_arrow { j + 1 } else { end };
                if is_arrow {
                    arrow = true;
                    let b = self.body(nesting + 2);
                    nodes.push(Node::Block(b));
                }
            } else if let Some(n) = self.stmt(nesting + 2) {
                nodes.push(n);
            }
            if self.pos == before {
                self.pos += 1;
            }
        }
        (nodes, arrow)
    }

    /// End (exclusive) of an expression-like statement starting at `from`.
    fn scan_statement_end(&self, from: usize) -> usize {
        let i = skip_modifiers(&self.toks[from..], 0) + from;
        if self
            .at(i)
            .is_some_and(|t| matches!(t.text.as_str(), "class" | "interface" | "enum" | "record"))
        {
            let mut j = i;
            while let Some(t) = self.at(j) {
                if t.is("{") {
                    return matching(&self.toks, j).map_or(self.toks.len(), |c| c + 1);
                }
                if t.is(";") {
                    return j + 1;
                }
                j += 1;
            }
            return j;
        }
        let mut j = from;
        while let Some(t) = self.at(j) {
            match t.text.as_str() {
                "(" | "[" | "{" => j = matching(&self.toks, j).map_or(self.toks.len(), |c| c + 1),
                ";" => return j + 1,
                "}" => return j.max(from + 1),
                _ => j += 1,
            }
        }
        j
    }
}
