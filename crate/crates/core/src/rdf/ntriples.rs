//! Line-oriented N-Triples reading and writing.
//!
//! Output is canonical: one triple per line, single spaces between terms,
//! plain `xsd:string` literals written without a datatype, and only the
//! characters `"`, `\`, LF and CR escaped inside literals.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::term::{BlankNode, Datatype, Iri, Literal, Term, TermError, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NtErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unsupported literal datatype <{0}>")]
    UnknownDatatype(String),
    #[error("language-tagged literals are not supported")]
    LanguageTag,
    #[error(transparent)]
    Term(TermError),
    #[error("invalid UTF-8")]
    Utf8,
    #[error("read failed: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct NtError {
    pub line: usize,
    pub column: usize,
    pub kind: NtErrorKind,
}

/// Streaming parser; yields one triple per statement line.
pub struct NTriplesReader<R> {
    input: R,
    line_no: usize,
    buf: Vec<u8>,
    failed: bool,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        NTriplesReader {
            input,
            line_no: 0,
            buf: Vec::new(),
            failed: false,
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple, NtError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            self.line_no += 1;
            let n = match self.input.read_until(b'\n', &mut self.buf) {
                Ok(n) => n,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(NtError {
                        line: self.line_no,
                        column: 1,
                        kind: NtErrorKind::Io(e.to_string()),
                    }));
                }
            };
            if n == 0 {
                return None;
            }
            let text = match std::str::from_utf8(&self.buf) {
                Ok(t) => t,
                Err(e) => {
                    self.failed = true;
                    let column = String::from_utf8_lossy(&self.buf[..e.valid_up_to()]).chars().count() + 1;
                    return Some(Err(NtError {
                        line: self.line_no,
                        column,
                        kind: NtErrorKind::Utf8,
                    }));
                }
            };
            let text = text.trim_end_matches(['\n', '\r']);
            match parse_line(text, self.line_no) {
                Ok(Some(t)) => return Some(Ok(t)),
                Ok(None) => continue,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Parses a whole N-Triples document.
pub fn parse_ntriples<R: BufRead>(input: R) -> Result<Vec<Triple>, NtError> {
    NTriplesReader::new(input).collect()
}

pub fn parse_ntriples_str(input: &str) -> Result<Vec<Triple>, NtError> {
    parse_ntriples(input.as_bytes())
}

/// Parses one line; `Ok(None)` for blank and comment lines.
pub fn parse_line(text: &str, line: usize) -> Result<Option<Triple>, NtError> {
    let mut p = LineParser {
        chars: text.chars().collect(),
        pos: 0,
        line,
    };
    p.skip_ws();
    if p.at_end() || p.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match p.peek() {
        Some('<') => p.iri()?,
        Some('_') => p.blank()?,
        _ => return Err(p.err("expected IRI or blank node subject")),
    };
    p.skip_ws();
    if p.peek() != Some('<') {
        return Err(p.err("expected IRI predicate"));
    }
    let predicate = p.iri()?;
    p.skip_ws();
    let object = match p.peek() {
        Some('<') => p.iri()?,
        Some('_') => p.blank()?,
        Some('"') => p.literal()?,
        _ => return Err(p.err("expected IRI, blank node or literal object")),
    };
    p.skip_ws();
    if p.peek() != Some('.') {
        return Err(p.err("expected '.'"));
    }
    p.pos += 1;
    p.skip_ws();
    if !(p.at_end() || p.peek() == Some('#')) {
        return Err(p.err("unexpected content after '.'"));
    }
    Ok(Some(Triple::new(subject, predicate, object)))
}

struct LineParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.pos += 1;
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    fn err_at(&self, pos: usize, kind: NtErrorKind) -> NtError {
        NtError {
            line: self.line,
            column: pos + 1,
            kind,
        }
    }

    fn err(&self, msg: &str) -> NtError {
        self.err_at(self.pos, NtErrorKind::Syntax(msg.to_string()))
    }

    fn uchar(&mut self, len: usize) -> Result<char, NtError> {
        let start = self.pos;
        let mut v = 0u32;
        for _ in 0..len {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.err_at(start, NtErrorKind::Syntax("bad unicode escape".into())))?;
            v = v * 16 + d;
        }
        char::from_u32(v).ok_or_else(|| self.err_at(start, NtErrorKind::Syntax("escape is not a scalar value".into())))
    }

    fn iri_ref(&mut self) -> Result<Iri, NtError> {
        let start = self.pos;
        self.pos += 1; // '<'
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => s.push(self.uchar(4)?),
                    Some('U') => s.push(self.uchar(8)?),
                    _ => return Err(self.err_at(self.pos - 1, NtErrorKind::Syntax("bad escape in IRI".into()))),
                },
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(self.err_at(
                        self.pos - 1,
                        NtErrorKind::Syntax(format!("character {c:?} not allowed in IRI")),
                    ))
                }
                Some(c) => s.push(c),
                None => return Err(self.err("unterminated IRI")),
            }
        }
        Iri::new(s).map_err(|e| self.err_at(start, NtErrorKind::Term(e)))
    }

    fn iri(&mut self) -> Result<Term, NtError> {
        self.iri_ref().map(Term::Iri)
    }

    fn blank(&mut self) -> Result<Term, NtError> {
        let start = self.pos;
        self.pos += 1;
        if self.bump() != Some(':') {
            return Err(self.err_at(start, NtErrorKind::Syntax("expected '_:'".into())));
        }
        let label_start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                self.pos += 1;
            } else {
                break;
            }
        }
        // a trailing '.' terminates the statement, not the label
        while self.pos > label_start && self.chars[self.pos - 1] == '.' {
            self.pos -= 1;
        }
        let label: String = self.chars[label_start..self.pos].iter().collect();
        BlankNode::new(label)
            .map(Term::Blank)
            .map_err(|e| self.err_at(start, NtErrorKind::Term(e)))
    }

    fn literal(&mut self) -> Result<Term, NtError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('t') => s.push('\t'),
                    Some('b') => s.push('\u{8}'),
                    Some('n') => s.push('\n'),
                    Some('r') => s.push('\r'),
                    Some('f') => s.push('\u{c}'),
                    Some('"') => s.push('"'),
                    Some('\'') => s.push('\''),
                    Some('\\') => s.push('\\'),
                    Some('u') => s.push(self.uchar(4)?),
                    Some('U') => s.push(self.uchar(8)?),
                    _ => return Err(self.err_at(self.pos - 1, NtErrorKind::Syntax("bad escape in literal".into()))),
                },
                Some(c) => s.push(c),
                None => return Err(self.err_at(start, NtErrorKind::Syntax("unterminated literal".into()))),
            }
        }
        let datatype = match self.peek() {
            Some('@') => return Err(self.err_at(self.pos, NtErrorKind::LanguageTag)),
            Some('^') => {
                if self.chars.get(self.pos + 1) != Some(&'^') || self.chars.get(self.pos + 2) != Some(&'<') {
                    return Err(self.err("expected '^^<'"));
                }
                self.pos += 2;
                let dt_pos = self.pos;
                let iri = self.iri_ref()?;
                Datatype::from_iri(iri.as_str())
                    .map_err(|_| self.err_at(dt_pos, NtErrorKind::UnknownDatatype(iri.as_str().to_string())))?
            }
            _ => Datatype::String,
        };
        Literal::new(s, datatype)
            .map(Term::Literal)
            .map_err(|e| self.err_at(start, NtErrorKind::Term(e)))
    }
}

/// Writes `triples` in canonical form.
pub fn write_ntriples<'a, W: Write>(mut out: W, triples: impl IntoIterator<Item = &'a Triple>) -> io::Result<()> {
    for t in triples {
        writeln!(out, "{t}")?;
    }
    Ok(())
}

pub fn serialize_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Vec<u8> {
    let mut out = Vec::new();
    write_ntriples(&mut out, triples).expect("writing to a Vec cannot fail");
    out
}
