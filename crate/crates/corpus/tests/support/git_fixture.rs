//! Deterministic synthetic Java repositories, written with `git fast-import`
//! so commit ids are stable across runs.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
enum Stmt {
    Line(String),
    Block(String, Vec<String>),
}

#[derive(Clone, Debug)]
struct Method {
    name: String,
    vars: Vec<String>,
    body: Vec<Stmt>,
}

#[derive(Clone, Debug)]
struct JavaFile {
    path: String,
    class: String,
    fields: Vec<String>,
    methods: Vec<Method>,
}

impl JavaFile {
    fn render(&self) -> String {
        let mut s = format!("package fixture;\n\npublic class {} {{\n", self.class);
        for f in &self.fields {
            let _ = writeln!(s, "    private int {f} = 0;");
        }
        for m in &self.methods {
            let _ = writeln!(s, "\n    public int {}(int p) {{", m.name);
            for st in &m.body {
                match st {
                    Stmt::Line(l) => {
                        let _ = writeln!(s, "        {l}");
                    }
                    Stmt::Block(head, inner) => {
                        let _ = writeln!(s, "        {head} {{");
                        for l in inner {
                            let _ = writeln!(s, "            {l}");
                        }
                        s.push_str("        }\n");
                    }
                }
            }
            s.push_str("        return p;\n    }\n");
        }
        s.push_str("}\n");
        s
    }
}

/// Kind of message a fixture commit carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MessageKind {
    Good,
    Short,
    Long,
    NotVerb,
    Revert,
}

#[derive(Clone, Debug)]
pub struct FixtureCommit {
    pub message: String,
    pub kind: MessageKind,
    /// Touches no Java file.
    pub docs_only: bool,
    pub merge: bool,
    pub large: bool,
}

struct State {
    rng: ChaCha8Rng,
    files: Vec<JavaFile>,
    counter: usize,
}

const VERBS: &[&str] = &[
    "Add", "Fix", "Update", "Remove", "Refactor", "Handle", "Use", "Move", "Simplify", "Adds",
    "Fixes",
];
const NOUNS: &[&str] = &[
    "cache", "counter", "offset", "buffer", "limit", "index", "state", "handler", "value", "total",
];

impl State {
    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn expr(&mut self, m: usize, f: usize) -> String {
        let method = &self.files[f].methods[m];
        let mut pool: Vec<String> = method.vars.clone();
        pool.push("p".into());
        pool.extend(self.files[f].fields.iter().cloned());
        let a = pool.choose(&mut self.rng).unwrap().clone();
        let k = self.rng.gen_range(1..9);
        match self.rng.gen_range(0..3) {
            0 => format!("{a} + {k}"),
            1 => format!("{a} * {k}"),
            _ => {
                let b = pool.choose(&mut self.rng).unwrap().clone();
                format!("{a} - {b}")
            }
        }
    }

    fn new_stmt(&mut self, f: usize, m: usize) -> Stmt {
        let roll = self.rng.gen_range(0..10);
        let e = self.expr(m, f);
        if roll < 5 {
            let v = self.fresh("v");
            self.files[f].methods[m].vars.push(v.clone());
            Stmt::Line(format!("int {v} = {e};"))
        } else if roll < 7 && !self.files[f].methods[m].vars.is_empty() {
            let v = self.files[f].methods[m]
                .vars
                .choose(&mut self.rng)
                .unwrap()
                .clone();
            Stmt::Line(format!("{v} += {e};"))
        } else if roll < 8 && !self.files[f].fields.is_empty() {
            let fld = self.files[f].fields.choose(&mut self.rng).unwrap().clone();
            Stmt::Line(format!("{fld} = {e};"))
        } else {
            let c = self.expr(m, f);
            let t = self.fresh("t");
            let inner = self.expr(m, f);
            let head = if self.rng.gen_bool(0.7) {
                "if"
            } else {
                "while"
            };
            Stmt::Block(
                format!("{head} ({c} > {})", self.rng.gen_range(0..50)),
                vec![format!("int {t} = {inner};")],
            )
        }
    }

    fn new_method(&mut self, f: usize) {
        let name = self.fresh("compute");
        self.files[f].methods.push(Method {
            name,
            vars: vec![],
            body: vec![],
        });
        let m = self.files[f].methods.len() - 1;
        for _ in 0..self.rng.gen_range(2..5) {
            let s = self.new_stmt(f, m);
            self.files[f].methods[m].body.push(s);
        }
    }

    fn new_file(&mut self) {
        let class = self.fresh("Widget");
        let fields = (0..2).map(|_| self.fresh("m")).collect();
        self.files.push(JavaFile {
            path: format!("src/main/java/fixture/{class}.java"),
            class,
            fields,
            methods: vec![],
        });
        let f = self.files.len() - 1;
        self.new_method(f);
        self.new_method(f);
    }

    /// One random edit; returns the name of the touched method.
    fn edit(&mut self) -> String {
        let f = self.rng.gen_range(0..self.files.len());
        let m = self.rng.gen_range(0..self.files[f].methods.len());
        let len = self.files[f].methods[m].body.len();
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let s = self.new_stmt(f, m);
                let at = self.rng.gen_range(0..=len);
                self.files[f].methods[m].body.insert(at, s);
            }
            4 | 5 if len > 1 => {
                let at = self.rng.gen_range(0..len);
                self.files[f].methods[m].body.remove(at);
            }
            6 | 7 if len > 0 => {
                let at = self.rng.gen_range(0..len);
                let e = self.expr(m, f);
                match &mut self.files[f].methods[m].body[at] {
                    Stmt::Line(l) => {
                        if let Some(eq) = l.find(" = ").or_else(|| l.find(" += ")) {
                            let head = l[..eq].to_string();
                            let op = if l[eq..].starts_with(" +=") {
                                "+="
                            } else {
                                "="
                            };
                            *l = format!("{head} {op} {e};");
                        }
                    }
                    Stmt::Block(_, inner) => inner.push(format!("p = {e};")),
                }
            }
            8 if len > 1 => {
                let a = self.rng.gen_range(0..len);
                let b = self.rng.gen_range(0..len);
                self.files[f].methods[m].body.swap(a, b);
            }
            _ => {
                self.new_method(f);
                let callee = self.files[f].methods.last().unwrap().name.clone();
                let v = self.fresh("r");
                self.files[f].methods[m].vars.push(v.clone());
                let at = self.rng.gen_range(0..=len);
                self.files[f].methods[m]
                    .body
                    .insert(at, Stmt::Line(format!("int {v} = {callee}(p);")));
            }
        }
        self.files[f].methods[m].name.clone()
    }

    fn message(&mut self, kind: MessageKind, method: &str, id: usize) -> String {
        let verb = *VERBS.choose(&mut self.rng).unwrap();
        let noun = *NOUNS.choose(&mut self.rng).unwrap();
        let tag = format!("case{id}");
        let mut msg = match kind {
            MessageKind::Good => {
                let extra = [
                    "",
                    " when input is negative",
                    " before the loop",
                    " after reset",
                ]
                .choose(&mut self.rng)
                .unwrap()
                .to_string();
                format!("{verb} {noun} update in {method} for {tag}{extra}")
            }
            MessageKind::Short => format!("{verb} {tag}"),
            MessageKind::Long => {
                let mut s = format!("{verb} {noun} handling in {method} for {tag}");
                for i in 0..160 {
                    let _ = write!(s, " w{i}");
                }
                s
            }
            MessageKind::NotVerb => format!("New {noun} logic in {method} for {tag}"),
            MessageKind::Revert => format!("Revert {noun} change in {method} for {tag}"),
        };
        match self.rng.gen_range(0..8) {
            0 => msg.push_str(&format!(" (#{})", 100 + id)),
            1 => msg.push_str(&format!(" see https://example.org/issues/{id}")),
            2 => msg.push_str(&format!(" {:07x}a", id * 7919)),
            _ => {}
        }
        if self.rng.gen_bool(0.3) {
            msg.push_str(".\n\nLonger explanation of the change follows here.");
        }
        msg
    }
}

fn data(out: &mut Vec<u8>, s: &str) {
    let _ = writeln!(out, "data {}", s.len());
    out.extend_from_slice(s.as_bytes());
    out.push(b'\n');
}

/// Writes a repository of about `commits` commits at `dir` (created by
/// `git init`). Returns the commits in history order.
pub fn build_repo(dir: &Path, seed: u64, commits: usize) -> io::Result<Vec<FixtureCommit>> {
    let st = Command::new("git")
        .args(["init", "-q", "-b", "master"])
        .arg(dir)
        .status()?;
    if !st.success() {
        return Err(io::Error::other("git init failed"));
    }
    let mut state = State {
        rng: ChaCha8Rng::seed_from_u64(seed),
        files: vec![],
        counter: 0,
    };
    let mut stream = Vec::new();
    let mut log = Vec::new();
    let mut prev: Option<usize> = None;
    let mut mark = 0;
    let mut time = 1_600_000_000u64;
    for i in 0..commits {
        time += 3600;
        let roll = state.rng.gen_range(0..100);
        let mut c = FixtureCommit {
            message: String::new(),
            kind: MessageKind::Good,
            docs_only: false,
            merge: false,
            large: false,
        };
        let mut touched: Vec<usize> = Vec::new();
        let mut docs = None;
        let mut side = None;
        if i == 0 || state.files.is_empty() {
            state.new_file();
            touched.push(state.files.len() - 1);
            c.message = format!("Add initial widget sources for case{i}");
        } else if roll < 3 {
            c.docs_only = true;
            docs = Some(format!("notes for revision {i}\n"));
            c.message = format!("Update notes for case{i} in readme");
        } else if roll < 5 {
            // side branch with a docs change, merged back
            mark += 1;
            let _ = writeln!(stream, "commit refs/heads/side{i}\nmark :{mark}");
            let _ = writeln!(
                stream,
                "committer Fixture <fixture@example.org> {time} +0000"
            );
            data(&mut stream, &format!("Update side notes for case{i}\n"));
            if let Some(p) = prev {
                let _ = writeln!(stream, "from :{p}");
            }
            let note = format!("side notes {i}\n");
            let _ = writeln!(stream, "M 100644 inline SIDE.md");
            data(&mut stream, &note);
            side = Some((mark, note));
            log.push(FixtureCommit {
                message: format!("Update side notes for case{i}"),
                kind: MessageKind::Good,
                docs_only: true,
                merge: false,
                large: false,
            });
            c.merge = true;
            c.message = format!("Merge branch side{i} into master for case{i}");
            time += 60;
        } else {
            let edits = if roll < 9 {
                c.large = true;
                state.rng.gen_range(24..32)
            } else {
                state.rng.gen_range(1..4)
            };
            let before: Vec<String> = state.files.iter().map(JavaFile::render).collect();
            let mut method = String::new();
            if (9..12).contains(&roll) {
                state.new_file();
            }
            for _ in 0..edits {
                method = state.edit();
            }
            for (f, file) in state.files.iter().enumerate() {
                if before.get(f) != Some(&file.render()) {
                    touched.push(f);
                }
            }
            c.kind = match roll {
                12..=17 => MessageKind::Short,
                18..=19 => MessageKind::Long,
                20..=24 => MessageKind::NotVerb,
                25..=27 => MessageKind::Revert,
                _ => MessageKind::Good,
            };
            c.message = state.message(c.kind, &method, i);
            c.docs_only = touched.is_empty();
        }
        mark += 1;
        let _ = writeln!(stream, "commit refs/heads/master\nmark :{mark}");
        let _ = writeln!(
            stream,
            "committer Fixture <fixture@example.org> {time} +0000"
        );
        data(&mut stream, &format!("{}\n", c.message));
        if let Some(p) = prev {
            let _ = writeln!(stream, "from :{p}");
        }
        if let Some((m, note)) = &side {
            let _ = writeln!(stream, "merge :{m}");
            let _ = writeln!(stream, "M 100644 inline SIDE.md");
            data(&mut stream, note);
        }
        if let Some(d) = &docs {
            let _ = writeln!(stream, "M 100644 inline README.md");
            data(&mut stream, d);
        }
        for f in touched {
            let _ = writeln!(stream, "M 100644 inline {}", state.files[f].path);
            data(&mut stream, &state.files[f].render());
        }
        prev = Some(mark);
        log.push(c);
    }
    stream.extend_from_slice(b"done\n");

    let mut child = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["fast-import", "--quiet", "--done"])
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()?;
    child.stdin.take().unwrap().write_all(&stream)?;
    if !child.wait()?.success() {
        return Err(io::Error::other("git fast-import failed"));
    }
    Ok(log)
}

/// Runs git with a fixed identity and clock inside `dir`.
pub fn git(dir: &Path, args: &[&str]) -> io::Result<()> {
    let st = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args([
            "-c",
            "user.name=Fixture",
            "-c",
            "user.email=fixture@example.org",
            "-c",
            "commit.gpgsign=false",
        ])
        .args(args)
        .env("GIT_AUTHOR_DATE", "1600000000 +0000")
        .env("GIT_COMMITTER_DATE", "1600000000 +0000")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()?;
    if st.success() {
        Ok(())
    } else {
        Err(io::Error::other(format!("git {args:?} failed")))
    }
}
