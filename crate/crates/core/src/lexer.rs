//! Java-subset tokenizer. Comments are dropped; string and character
//! literals become opaque tokens so their contents never reach def/use
//! extraction.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum TokKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: TokKind,
    pub text: String,
    /// Byte offsets into the lexed source.
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub end_line: usize,
}

impl Token {
    pub fn is(&self, s: &str) -> bool {
        self.text == s
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokKind::Ident
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum LexError {
    UnterminatedComment(usize),
    UnterminatedLiteral(usize),
}

// Longest first. `>>` and `>>>` are deliberately absent so generic closers
// stay individual tokens.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<",
];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start_line = line;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(LexError::UnterminatedComment(start_line));
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        let start_line = line;
        let kind;
        if c == b'"' {
            kind = TokKind::Str;
            if bytes[i..].starts_with(b"\"\"\"") {
                i += 3;
                loop {
                    if i >= bytes.len() {
                        return Err(LexError::UnterminatedLiteral(start_line));
                    }
                    if bytes[i] == b'\\' {
                        i += 2;
                        continue;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    if bytes[i..].starts_with(b"\"\"\"") {
                        i += 3;
                        break;
                    }
                    i += 1;
                }
            } else {
                i = scan_quoted(bytes, i, b'"').ok_or(LexError::UnterminatedLiteral(start_line))?;
            }
        } else if c == b'\'' {
            kind = TokKind::Char;
            i = scan_quoted(bytes, i, b'\'').ok_or(LexError::UnterminatedLiteral(start_line))?;
        } else if c.is_ascii_digit()
            || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
        {
            kind = TokKind::Number;
            i += 1;
            while i < bytes.len() {
                let d = bytes[i];
                let exponent_sign = (d == b'+' || d == b'-')
                    && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P')
                    && !src[start..i].starts_with("0x");
                if d.is_ascii_alphanumeric() || d == b'_' || d == b'.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
        } else if is_ident_start(src, i) {
            kind = TokKind::Ident;
            while i < bytes.len() && is_ident_continue(src, i) {
                i += src[i..].chars().next().map_or(1, char::len_utf8);
            }
        } else {
            kind = TokKind::Punct;
            let op = OPERATORS.iter().find(|op| src[i..].starts_with(**op));
            i += match op {
                Some(op) => op.len(),
                None => src[i..].chars().next().map_or(1, char::len_utf8),
            };
        }
        toks.push(Token {
            kind,
            text: src[start..i].to_string(),
            start,
            end: i,
            line: start_line,
            end_line: line,
        });
    }
    Ok(toks)
}

fn scan_quoted(bytes: &[u8], mut i: usize, quote: u8) -> Option<usize> {
    i += 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return None,
            b if b == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn is_ident_start(src: &str, i: usize) -> bool {
    src[i..]
        .chars()
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
}

fn is_ident_continue(src: &str, i: usize) -> bool {
    src[i..]
        .chars()
        .next()
        .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

pub(crate) const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

pub(crate) const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "double", "float", "int", "long", "short", "void", "var",
];

pub(crate) const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "native",
    "transient",
    "volatile",
    "strictfp",
    "default",
    "sealed",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Checks that `()`, `[]` and `{}` are balanced and properly nested.
pub(crate) fn check_balance(toks: &[Token]) -> Result<(), (usize, String)> {
    let mut stack: Vec<(&str, usize)> = Vec::new();
    for t in toks.iter().filter(|t| t.kind == TokKind::Punct) {
        match t.text.as_str() {
            "(" | "[" | "{" => stack.push((&t.text, t.line)),
            ")" | "]" | "}" => {
                let want = match t.text.as_str() {
                    ")" => "(",
                    "]" => "[",
                    _ => "{",
                };
                match stack.pop() {
                    Some((open, _)) if open == want => {}
                    Some((open, l)) => {
                        return Err((
                            t.line,
                            format!("'{}' at line {} closed by '{}'", open, l, t.text),
                        ))
                    }
                    None => return Err((t.line, format!("unmatched '{}'", t.text))),
                }
            }
            _ => {}
        }
    }
    match stack.pop() {
        Some((open, l)) => Err((l, format!("unclosed '{}'", open))),
        None => Ok(()),
    }
}
