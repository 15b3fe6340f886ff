//! Shared domain types: statements, method units, source versions.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Dense index of a statement inside one [`SourceVersion`].
pub type StmtId = usize;

/// Index of a [`MethodUnit`] inside one [`SourceVersion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StmtKind {
    Declaration,
    Assignment,
    Call,
    Return,
    IfHeader,
    LoopHeader,
    SwitchHeader,
    CaseLabel,
    /// The `while (...);` tail of a do-while loop.
    BlockClose,
    Other,
}

impl StmtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StmtKind::Declaration => "declaration",
            StmtKind::Assignment => "assignment",
            StmtKind::Call => "call",
            StmtKind::Return => "return",
            StmtKind::IfHeader => "if-header",
            StmtKind::LoopHeader => "loop-header",
            StmtKind::SwitchHeader => "switch-header",
            StmtKind::CaseLabel => "case-label",
            StmtKind::BlockClose => "block-close",
            StmtKind::Other => "other",
        }
    }
}

impl fmt::Display for StmtKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One parsed source statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: StmtId,
    /// Raw source text, trimmed.
    pub text: String,
    /// Comments stripped, whitespace collapsed.
    pub normalized: String,
    pub kind: StmtKind,
    pub defs: BTreeSet<String>,
    pub uses: BTreeSet<String>,
    pub callees: BTreeSet<String>,
    pub method: MethodId,
    pub nesting: usize,
    /// 1-based, inclusive.
    pub line_span: (usize, usize),
}

/// A non-local transfer of control performed by a statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Jump {
    Return,
    Throw,
    Break(Option<String>),
    Continue(Option<String>),
}

impl Statement {
    pub fn jump(&self) -> Option<Jump> {
        if self.kind == StmtKind::Return {
            return Some(Jump::Return);
        }
        let body = self.normalized.trim_end_matches(';').trim();
        let mut words = body.split_whitespace();
        let first = words.next()?;
        let label = words.next().map(str::to_string);
        match first {
            "throw" => Some(Jump::Throw),
            "break" => Some(Jump::Break(label)),
            "continue" => Some(Jump::Continue(label)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    /// A method, constructor or initializer block. The first statement is
    /// its signature (or initializer header).
    Method,
    /// A run of class-level statements (package, imports, class headers,
    /// fields) between methods.
    TopLevel,
}

/// Block structure of a method body, referencing statements by id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Node {
    Simple(StmtId),
    Block(Vec<Node>),
    If {
        header: StmtId,
        then_branch: Vec<Node>,
        else_branch: Option<Vec<Node>>,
    },
    /// `while` and `for` loops; the header carries the condition.
    Loop {
        header: StmtId,
        body: Vec<Node>,
    },
    DoWhile {
        body: Vec<Node>,
        tail: StmtId,
    },
    /// Case labels appear as `Simple` nodes inside `body`.
    Switch {
        header: StmtId,
        body: Vec<Node>,
        arrow: bool,
    },
    Try {
        body: Vec<Node>,
        catches: Vec<(StmtId, Vec<Node>)>,
        finally: Option<Vec<Node>>,
    },
    Labeled {
        label: String,
        body: Box<Node>,
    },
}

impl Node {
    pub(crate) fn shift(&mut self, offset: usize) {
        fn all(nodes: &mut [Node], offset: usize) {
            nodes.iter_mut().for_each(|n| n.shift(offset));
        }
        match self {
            Node::Simple(id) => *id += offset,
            Node::Block(body) => all(body, offset),
            Node::If {
                header,
                then_branch,
                else_branch,
            } => {
                *header += offset;
                all(then_branch, offset);
                if let Some(e) = else_branch {
                    all(e, offset);
                }
            }
            Node::Loop { header, body } => {
                *header += offset;
                all(body, offset);
            }
            Node::DoWhile { body, tail } => {
                *tail += offset;
                all(body, offset);
            }
            Node::Switch { header, body, .. } => {
                *header += offset;
                all(body, offset);
            }
            Node::Try {
                body,
                catches,
                finally,
            } => {
                all(body, offset);
                for (h, b) in catches {
                    *h += offset;
                    all(b, offset);
                }
                if let Some(f) = finally {
                    all(f, offset);
                }
            }
            Node::Labeled { body, .. } => body.shift(offset),
        }
    }

    /// Every statement id mentioned in this subtree, in source order.
    pub fn statement_ids(&self, out: &mut Vec<StmtId>) {
        fn all(nodes: &[Node], out: &mut Vec<StmtId>) {
            nodes.iter().for_each(|n| n.statement_ids(out));
        }
        match self {
            Node::Simple(id) => out.push(*id),
            Node::Block(body) => all(body, out),
            Node::If {
                header,
                then_branch,
                else_branch,
            } => {
                out.push(*header);
                all(then_branch, out);
                if let Some(e) = else_branch {
                    all(e, out);
                }
            }
            Node::Loop { header, body } => {
                out.push(*header);
                all(body, out);
            }
            Node::DoWhile { body, tail } => {
                all(body, out);
                out.push(*tail);
            }
            Node::Switch { header, body, .. } => {
                out.push(*header);
                all(body, out);
            }
            Node::Try {
                body,
                catches,
                finally,
            } => {
                all(body, out);
                for (h, b) in catches {
                    out.push(*h);
                    all(b, out);
                }
                if let Some(f) = finally {
                    all(f, out);
                }
            }
            Node::Labeled { body, .. } => body.statement_ids(out),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodUnit {
    pub name: String,
    pub params: Vec<String>,
    pub statement_ids: Range<StmtId>,
    pub file: String,
    pub kind: UnitKind,
    /// Block tree of the unit. For methods this excludes the signature;
    /// for top-level units it holds every statement.
    pub body: Vec<Node>,
}

impl MethodUnit {
    /// Id of the signature statement (callee entry point).
    pub fn entry(&self) -> StmtId {
        self.statement_ids.start
    }

    pub(crate) fn shift(&mut self, stmt_offset: usize) {
        self.statement_ids =
            self.statement_ids.start + stmt_offset..self.statement_ids.end + stmt_offset;
        for n in &mut self.body {
            n.shift(stmt_offset);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VersionLabel {
    Before,
    After,
}

impl fmt::Display for VersionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VersionLabel::Before => "before",
            VersionLabel::After => "after",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    /// Statements of this file (empty if the file was skipped).
    pub statements: Range<StmtId>,
}

/// One side (before or after) of a change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceVersion {
    pub label: VersionLabel,
    pub files: Vec<SourceFile>,
    pub statements: Vec<Statement>,
    pub methods: Vec<MethodUnit>,
}

impl SourceVersion {
    pub fn empty(label: VersionLabel) -> Self {
        SourceVersion {
            label,
            files: Vec::new(),
            statements: Vec::new(),
            methods: Vec::new(),
        }
    }

    pub fn file(&self, path: &str) -> Option<&SourceFile> {
        self.files.iter().find(|f| f.path == path)
    }

    pub fn method_of(&self, id: StmtId) -> &MethodUnit {
        &self.methods[self.statements[id].method.0]
    }

    pub fn file_of(&self, id: StmtId) -> &str {
        &self.method_of(id).file
    }
}

/// A non-fatal problem found while analysing a file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path, self.line, self.message)
    }
}

/// Strips comments and collapses whitespace runs to a single space.
///
/// String and character literals are preserved verbatim.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut pending_space = false;
    let push = |out: &mut String, c: char, pending: &mut bool| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
        out.push(c);
    };
    while let Some(c) = chars.next() {
        match c {
            '/' if chars.peek() == Some(&'/') => {
                for n in chars.by_ref() {
                    if n == '\n' {
                        break;
                    }
                }
                pending_space = true;
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = '\0';
                for n in chars.by_ref() {
                    if prev == '*' && n == '/' {
                        break;
                    }
                    prev = n;
                }
                pending_space = true;
            }
            '"' | '\'' => {
                push(&mut out, c, &mut pending_space);
                let mut escaped = false;
                for n in chars.by_ref() {
                    out.push(n);
                    if escaped {
                        escaped = false;
                    } else if n == '\\' {
                        escaped = true;
                    } else if n == c {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => pending_space = true,
            c => push(&mut out, c, &mut pending_space),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_and_strips() {
        assert_eq!(normalize("  int   x =\n 1; // tail"), "int x = 1;");
        assert_eq!(normalize("a /* b */ c"), "a c");
        assert_eq!(normalize("s = \"a  // b\";"), "s = \"a  // b\";");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        for s in [
            "x  =  y /* c */ + 1 ;",
            "if (a   > 0)",
            "c = '\\'' ;  // x",
            "s = \"\\\"\";",
        ] {
            let once = normalize(s);
            assert_eq!(normalize(&once), once);
        }
    }

    #[test]
    fn jump_detection() {
        let mut s = Statement {
            id: 0,
            text: String::new(),
            normalized: "break outer;".into(),
            kind: StmtKind::Other,
            defs: BTreeSet::new(),
            uses: BTreeSet::new(),
            callees: BTreeSet::new(),
            method: MethodId(0),
            nesting: 0,
            line_span: (1, 1),
        };
        assert_eq!(s.jump(), Some(Jump::Break(Some("outer".into()))));
        s.normalized = "continue;".into();
        assert_eq!(s.jump(), Some(Jump::Continue(None)));
        s.normalized = "throw new X();".into();
        assert_eq!(s.jump(), Some(Jump::Throw));
        s.normalized = "breakfast();".into();
        assert_eq!(s.jump(), None);
    }
}
