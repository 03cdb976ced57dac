//! Scannerless recursive-descent parser for the query dialect.
//!
//! ```text
//! script      := block+ insert* "."
//! block       := "SELECT" var+ "WHERE" patternItem+
//! patternItem := "(" term term term ")" [ "AND" filter ]
//! filter      := andExpr ("OR" andExpr)*
//! andExpr     := atom ("AND" atom)*
//! atom        := comparison | "(" filter ")"
//! comparison  := operand ("=" | "<" | ">") operand
//! insert      := "INSERT" "<" itemTerm itemTerm itemObj ">"
//! itemObj     := itemTerm | literal | aggExpr
//! aggExpr     := "COUNT" "(" var ")" | "(" aggExpr "/" aggExpr ")"
//! ```
//!
//! Keywords are case-insensitive and `#` starts a comment running to the end
//! of the line. A `<` opens an IRI reference in term position and is an
//! operator inside filters.

use thiserror::Error;

use super::ast::{
    AggExpr, CmpOp, Dispatch, Filter, InsertTemplate, ItemObject, ItemTerm, Operand, QueryScript, SelectBlock,
};
use crate::ontology::schema;
use crate::rdf::vocab::mesur;
use crate::rdf::{Datatype, DateTimeValue, Iri, Literal, NamespaceError, NamespaceTable, Term};
use crate::store::{PatternTerm, TriplePattern};

/// Nesting limit for parenthesized filters and aggregate expressions.
pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {}", .expected.join(" or "))]
    Syntax { found: String, expected: Vec<&'static str> },
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("`{0}` is not a term of the MESUR schema")]
    UnknownTerm(String),
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("variable ?{var} is not bound by the patterns of its block")]
    Unbound { var: String },
    #[error("variable ?{var} is not bound by any block")]
    UnboundInsert { var: String },
    #[error("variable ?{var} is ambiguous between blocks {blocks:?}")]
    Ambiguous { var: String, blocks: Vec<usize> },
    #[error("template mixes row variables of blocks {0} and {1}")]
    MixedBlocks(usize, usize),
    #[error("a placeholder cannot be a predicate")]
    PlaceholderPredicate,
    #[error("nesting deeper than {MAX_DEPTH}")]
    TooDeep,
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
}

/// A single positioned parse or validation error. Line and column are
/// 1-based; the column counts characters.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

pub fn parse_script(text: &str, ns: &NamespaceTable) -> Result<QueryScript, ParseError> {
    Parser { src: text, pos: 0, ns }.script()
}

/// Parses raw bytes, reporting invalid UTF-8 at the offending position.
pub fn parse_script_bytes(bytes: &[u8], ns: &NamespaceTable) -> Result<QueryScript, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_script(text, ns),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let (line, column) = line_col(valid, valid.len());
            Err(ParseError {
                line,
                column,
                kind: ParseErrorKind::InvalidUtf8,
            })
        }
    }
}

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    (line, before[line_start..].chars().count() + 1)
}

fn is_boundary(c: Option<char>) -> bool {
    match c {
        None => true,
        Some(c) => c.is_whitespace() || matches!(c, '(' | ')' | '<' | '>' | '=' | '/' | '.' | '#'),
    }
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '/' | '%')
}

/// A literal's datatype as seen through a predicate's declared range: bare
/// integers become years for datetime-ranged properties and decimals for
/// decimal-ranged ones.
pub(crate) fn coerce_literal(lit: Literal, predicate: Option<&str>) -> Literal {
    let range = predicate.and_then(|p| schema().literal_range(p));
    match (lit.datatype(), range) {
        (Datatype::Integer, Some(Datatype::DateTime)) => lit
            .lexical()
            .parse::<i32>()
            .ok()
            .and_then(DateTimeValue::from_year)
            .map(Literal::datetime)
            .unwrap_or(lit),
        (Datatype::Integer, Some(Datatype::Decimal)) => Literal::new(lit.lexical(), Datatype::Decimal).unwrap_or(lit),
        _ => lit,
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ns: &'a NamespaceTable,
}

/// Per-block source positions needed for validation after the block ends.
struct BlockSpans {
    projection: Vec<(String, usize)>,
    filter_vars: Vec<(String, usize)>,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.rest().chars().nth(1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let (line, column) = line_col(self.src, pos);
        ParseError { line, column, kind }
    }

    fn found(&self) -> String {
        let rest = self.rest();
        match rest.chars().next() {
            None => "end of input".to_string(),
            Some(c) if is_name_char(c) => {
                let word: String = rest.chars().take_while(|&c| is_name_char(c)).take(32).collect();
                format!("`{word}`")
            }
            Some(c) => format!("{c:?}"),
        }
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        self.error_at(
            self.pos,
            ParseErrorKind::Syntax {
                found: self.found(),
                expected: expected.to_vec(),
            },
        )
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    /// Whether the next word is `kw` (case-insensitive) followed by a boundary.
    fn at_keyword(&mut self, kw: &str) -> bool {
        self.skip_trivia();
        let rest = self.rest();
        let len: usize = rest.chars().take_while(|&c| is_name_char(c)).map(char::len_utf8).sum();
        len == kw.len()
            && rest[..len].eq_ignore_ascii_case(kw)
            && rest[len..]
                .chars()
                .next()
                .is_none_or(|c| c != ':' && is_boundary(Some(c)))
    }

    fn keyword(&mut self, kw: &str, expected: &[&'static str]) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.pos += kw.len();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn punct(&mut self, c: char, expected: &'static str) -> Result<(), ParseError> {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[expected]))
        }
    }

    fn require_boundary(&self) -> Result<(), ParseError> {
        if is_boundary(self.peek()) {
            Ok(())
        } else {
            Err(self.unexpected(&["whitespace"]))
        }
    }

    fn script(&mut self) -> Result<QueryScript, ParseError> {
        let mut blocks = Vec::new();
        let mut spans = Vec::new();
        loop {
            let (block, span) = self.block()?;
            blocks.push(block);
            spans.push(span);
            if !self.at_keyword("SELECT") {
                break;
            }
        }
        self.check_projection_unique(&spans)?;
        let mut inserts = Vec::new();
        while self.at_keyword("INSERT") {
            inserts.push(self.insert(&blocks)?);
        }
        self.skip_trivia();
        if self.peek() != Some('.') {
            let mut expected = vec!["INSERT", "\".\""];
            if inserts.is_empty() {
                expected = vec!["\"(\"", "SELECT", "INSERT", "\".\""];
            }
            return Err(self.unexpected(&expected));
        }
        self.bump();
        self.skip_trivia();
        if self.peek().is_some() {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(QueryScript { blocks, inserts })
    }

    fn check_projection_unique(&self, spans: &[BlockSpans]) -> Result<(), ParseError> {
        for (i, span) in spans.iter().enumerate() {
            for (var, pos) in &span.projection {
                let owners: Vec<usize> = (0..spans.len())
                    .filter(|&j| spans[j].projection.iter().any(|(v, _)| v == var))
                    .collect();
                if owners.len() > 1 && owners[0] != i {
                    return Err(self.error_at(
                        *pos,
                        ParseErrorKind::Ambiguous {
                            var: var.clone(),
                            blocks: owners,
                        },
                    ));
                }
            }
        }
        Ok(())
    }

    fn block(&mut self) -> Result<(SelectBlock, BlockSpans), ParseError> {
        self.keyword("SELECT", &["SELECT"])?;
        let mut spans = BlockSpans {
            projection: Vec::new(),
            filter_vars: Vec::new(),
        };
        loop {
            self.skip_trivia();
            if self.peek() != Some('?') {
                break;
            }
            let pos = self.pos;
            let v = self.var()?;
            if !spans.projection.iter().any(|(p, _)| *p == v) {
                spans.projection.push((v, pos));
            }
        }
        if spans.projection.is_empty() {
            return Err(self.unexpected(&["variable"]));
        }
        self.keyword("WHERE", &["variable", "WHERE"])?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            self.skip_trivia();
            if self.peek() != Some('(') {
                if patterns.is_empty() {
                    return Err(self.unexpected(&["\"(\""]));
                }
                break;
            }
            self.bump();
            let s = self.pattern_term(None)?;
            let p = self.pattern_term(None)?;
            let pred = match &p {
                PatternTerm::Term(t) => t.as_iri().map(str::to_string),
                PatternTerm::Var(_) => None,
            };
            let o = self.pattern_term(pred.as_deref())?;
            self.punct(')', "\")\"")?;
            patterns.push(TriplePattern::new(s, p, o));
            if self.at_keyword("AND") {
                self.pos += 3;
                filters.push(self.filter(0, &mut spans.filter_vars)?);
            }
        }
        let block = SelectBlock {
            projection: spans.projection.iter().map(|(v, _)| v.clone()).collect(),
            patterns,
            filters,
        };
        for (var, pos) in spans.projection.iter().chain(&spans.filter_vars) {
            if !block.binds(var) {
                return Err(self.error_at(*pos, ParseErrorKind::Unbound { var: var.clone() }));
            }
        }
        Ok((block, spans))
    }

    fn var(&mut self) -> Result<String, ParseError> {
        self.skip_trivia();
        if self.peek() != Some('?') {
            return Err(self.unexpected(&["variable"]));
        }
        self.bump();
        let name: String = self.rest().chars().take_while(|&c| is_name_char(c)).collect();
        if name.is_empty() {
            return Err(self.unexpected(&["variable name"]));
        }
        self.pos += name.len();
        self.require_boundary()?;
        Ok(name)
    }

    /// `<iri>` reference; the caller has checked for `<`.
    fn iri_ref(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        self.bump();
        let body: String = self
            .rest()
            .chars()
            .take_while(|&c| c != '>' && !c.is_whitespace() && c != '<')
            .collect();
        self.pos += body.len();
        if self.peek() != Some('>') {
            return Err(self.unexpected(&["\">\""]));
        }
        self.bump();
        self.require_boundary()?;
        let iri = Iri::new(body).map_err(|e| self.error_at(start, ParseErrorKind::InvalidTerm(e.to_string())))?;
        self.check_schema(start, iri.as_str())?;
        Ok(Term::Iri(iri))
    }

    fn check_schema(&self, pos: usize, iri: &str) -> Result<(), ParseError> {
        if iri.starts_with(mesur::NS) && !schema().resolves(iri) {
            return Err(self.error_at(pos, ParseErrorKind::UnknownTerm(iri.to_string())));
        }
        Ok(())
    }

    fn at_prefixed_name(&self) -> bool {
        let rest = self.rest();
        let mut chars = rest.chars();
        if !chars.next().is_some_and(|c| c.is_ascii_alphabetic()) {
            return false;
        }
        let prefix_len = rest.chars().take_while(|&c| is_name_char(c) || c == '-').count();
        rest[prefix_len..].starts_with(':')
    }

    fn prefixed_name(&mut self) -> Result<Term, ParseError> {
        let start = self.pos;
        let len: usize = self
            .rest()
            .chars()
            .take_while(|&c| is_local_char(c))
            .map(char::len_utf8)
            .sum();
        let name = self.rest()[..len].trim_end_matches('.');
        self.pos += name.len();
        self.require_boundary()?;
        let term = self.ns.expand(name).map_err(|e| {
            let kind = match e {
                NamespaceError::UnknownPrefix(p) => ParseErrorKind::UnknownPrefix(p),
                other => ParseErrorKind::InvalidTerm(other.to_string()),
            };
            self.error_at(start, kind)
        })?;
        self.check_schema(start, term.as_iri().unwrap_or_default())?;
        Ok(term)
    }

    fn at_literal(&self) -> bool {
        match self.peek() {
            Some('"') => true,
            Some(c) if c.is_ascii_digit() => true,
            Some('-' | '+') => self.peek2().is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        if self.peek() == Some('"') {
            return self.string_literal();
        }
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        if matches!(bytes.first(), Some(b'-' | b'+')) {
            len += 1;
        }
        let int_start = len;
        while bytes.get(len).is_some_and(u8::is_ascii_digit) {
            len += 1;
        }
        let mut datatype = Datatype::Integer;
        if bytes.get(len) == Some(&b'.') && bytes.get(len + 1).is_some_and(u8::is_ascii_digit) {
            len += 1;
            while bytes.get(len).is_some_and(u8::is_ascii_digit) {
                len += 1;
            }
            datatype = Datatype::Decimal;
        }
        if len == int_start {
            return Err(self.unexpected(&["number"]));
        }
        let start = self.pos;
        let text = &rest[..len];
        self.pos += len;
        self.require_boundary()?;
        Literal::new(text, datatype).map_err(|e| self.error_at(start, ParseErrorKind::InvalidTerm(e.to_string())))
    }

    fn string_literal(&mut self) -> Result<Literal, ParseError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.unexpected(&["'\"'"])),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.peek() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        _ => return Err(self.unexpected(&["escape sequence"])),
                    };
                    self.bump();
                    out.push(c);
                }
                Some(c) => out.push(c),
            }
        }
        self.require_boundary()?;
        Ok(Literal::string(out))
    }

    fn pattern_term(&mut self, predicate: Option<&str>) -> Result<PatternTerm, ParseError> {
        self.skip_trivia();
        match self.peek() {
            Some('?') => Ok(PatternTerm::Var(self.var()?)),
            Some('<') => Ok(PatternTerm::Term(self.iri_ref()?)),
            _ if self.at_prefixed_name() => Ok(PatternTerm::Term(self.prefixed_name()?)),
            _ if self.at_literal() => Ok(PatternTerm::Term(Term::Literal(coerce_literal(
                self.literal()?,
                predicate,
            )))),
            _ => Err(self.unexpected(&["variable", "IRI", "prefixed name", "literal"])),
        }
    }

    fn filter(&mut self, depth: usize, vars: &mut Vec<(String, usize)>) -> Result<Filter, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.error_at(self.pos, ParseErrorKind::TooDeep));
        }
        let mut alts = vec![self.and_expr(depth, vars)?];
        while self.at_keyword("OR") {
            self.pos += 2;
            alts.push(self.and_expr(depth, vars)?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Filter::Or(alts)
        })
    }

    fn and_expr(&mut self, depth: usize, vars: &mut Vec<(String, usize)>) -> Result<Filter, ParseError> {
        let mut parts = vec![self.atom(depth, vars)?];
        while self.at_keyword("AND") {
            self.pos += 3;
            parts.push(self.atom(depth, vars)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Filter::And(parts)
        })
    }

    fn atom(&mut self, depth: usize, vars: &mut Vec<(String, usize)>) -> Result<Filter, ParseError> {
        self.skip_trivia();
        if self.peek() == Some('(') {
            self.bump();
            let inner = self.filter(depth + 1, vars)?;
            self.punct(')', "\")\"")?;
            return Ok(inner);
        }
        let left = self.operand(vars)?;
        self.skip_trivia();
        let op = match self.peek() {
            Some('=') => CmpOp::Eq,
            Some('<') => CmpOp::Lt,
            Some('>') => CmpOp::Gt,
            _ => return Err(self.unexpected(&["\"=\"", "\"<\"", "\">\""])),
        };
        self.bump();
        let right = self.operand(vars)?;
        Ok(Filter::Compare { left, op, right })
    }

    fn operand(&mut self, vars: &mut Vec<(String, usize)>) -> Result<Operand, ParseError> {
        self.skip_trivia();
        if self.peek() == Some('?') {
            let pos = self.pos;
            let v = self.var()?;
            vars.push((v.clone(), pos));
            Ok(Operand::Var(v))
        } else if self.at_literal() {
            Ok(Operand::Value(self.literal()?))
        } else {
            Err(self.unexpected(&["variable", "literal", "\"(\""]))
        }
    }

    fn insert(&mut self, blocks: &[SelectBlock]) -> Result<InsertTemplate, ParseError> {
        self.pos += "INSERT".len();
        self.punct('<', "\"<\"")?;
        let mut var_spans: Vec<(String, usize)> = Vec::new();
        let subject = self.item_term(&mut var_spans)?;
        self.skip_trivia();
        let pred_pos = self.pos;
        let predicate = self.item_term(&mut var_spans)?;
        if matches!(predicate, ItemTerm::Placeholder(_)) {
            return Err(self.error_at(pred_pos, ParseErrorKind::PlaceholderPredicate));
        }
        let pred_iri = match &predicate {
            ItemTerm::Term(t) => t.as_iri().map(str::to_string),
            _ => None,
        };
        self.skip_trivia();
        let mut counts: Vec<(String, usize)> = Vec::new();
        let object = if self.at_keyword("COUNT") || self.peek() == Some('(') {
            ItemObject::Aggregate(self.agg_expr(0, &mut counts)?)
        } else if self.at_literal() {
            ItemObject::Item(ItemTerm::Term(Term::Literal(coerce_literal(
                self.literal()?,
                pred_iri.as_deref(),
            ))))
        } else {
            ItemObject::Item(self.item_term(&mut var_spans)?)
        };
        self.punct('>', "\">\"")?;

        let mut owners: Vec<(String, usize)> = Vec::new();
        let mut dispatch_block: Option<(usize, usize)> = None;
        for (var, pos) in &var_spans {
            let b = self.resolve_owner(blocks, var, *pos)?;
            match dispatch_block {
                Some((other, _)) if other != b => {
                    return Err(self.error_at(*pos, ParseErrorKind::MixedBlocks(other, b)));
                }
                _ => dispatch_block = Some((b, *pos)),
            }
            owners.push((var.clone(), b));
        }
        let object = match object {
            ItemObject::Aggregate(expr) => {
                let mut resolved = Vec::new();
                for (var, pos) in &counts {
                    resolved.push(self.resolve_owner(blocks, var, *pos)?);
                }
                ItemObject::Aggregate(assign_blocks(expr, &mut resolved.into_iter()))
            }
            other => other,
        };
        let dispatch = match dispatch_block {
            Some((b, _)) => Dispatch::PerRow(b),
            None => Dispatch::Once,
        };
        Ok(InsertTemplate {
            subject,
            predicate,
            object,
            dispatch,
            owners,
        })
    }

    /// The block that projects `var`, else the one block that binds it.
    fn resolve_owner(&self, blocks: &[SelectBlock], var: &str, pos: usize) -> Result<usize, ParseError> {
        let projecting: Vec<usize> = (0..blocks.len())
            .filter(|&i| blocks[i].projection.iter().any(|v| v == var))
            .collect();
        let candidates = if projecting.is_empty() {
            (0..blocks.len()).filter(|&i| blocks[i].binds(var)).collect()
        } else {
            projecting
        };
        match candidates.as_slice() {
            [b] => Ok(*b),
            [] => Err(self.error_at(pos, ParseErrorKind::UnboundInsert { var: var.to_string() })),
            _ => Err(self.error_at(
                pos,
                ParseErrorKind::Ambiguous {
                    var: var.to_string(),
                    blocks: candidates,
                },
            )),
        }
    }

    fn item_term(&mut self, vars: &mut Vec<(String, usize)>) -> Result<ItemTerm, ParseError> {
        self.skip_trivia();
        let pos = self.pos;
        match self.peek() {
            Some('?') => {
                let v = self.var()?;
                vars.push((v.clone(), pos));
                Ok(ItemTerm::Var(v))
            }
            Some('<') => Ok(ItemTerm::Term(self.iri_ref()?)),
            Some('_') if self.peek2().is_some_and(|c| c.is_ascii_digit()) => {
                self.bump();
                let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
                self.pos += digits.len();
                self.require_boundary()?;
                Ok(ItemTerm::Placeholder(digits))
            }
            _ if self.at_prefixed_name() => Ok(ItemTerm::Term(self.prefixed_name()?)),
            _ => Err(self.unexpected(&["variable", "IRI", "prefixed name", "placeholder"])),
        }
    }

    fn agg_expr(&mut self, depth: usize, counts: &mut Vec<(String, usize)>) -> Result<AggExpr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(self.error_at(self.pos, ParseErrorKind::TooDeep));
        }
        self.skip_trivia();
        if self.peek() == Some('(') {
            self.bump();
            let left = self.agg_expr(depth + 1, counts)?;
            self.punct('/', "\"/\"")?;
            let right = self.agg_expr(depth + 1, counts)?;
            self.punct(')', "\")\"")?;
            return Ok(AggExpr::Div(Box::new(left), Box::new(right)));
        }
        self.keyword("COUNT", &["COUNT", "\"(\""])?;
        self.punct('(', "\"(\"")?;
        self.skip_trivia();
        let pos = self.pos;
        let var = self.var()?;
        self.punct(')', "\")\"")?;
        counts.push((var.clone(), pos));
        Ok(AggExpr::Count { var, block: usize::MAX })
    }
}

/// Fills COUNT block indexes in left-to-right order.
fn assign_blocks(expr: AggExpr, blocks: &mut impl Iterator<Item = usize>) -> AggExpr {
    match expr {
        AggExpr::Count { var, .. } => AggExpr::Count {
            var,
            block: blocks.next().expect("one owner per COUNT"),
        },
        AggExpr::Div(l, r) => {
            let l = assign_blocks(*l, blocks);
            let r = assign_blocks(*r, blocks);
            AggExpr::Div(Box::new(l), Box::new(r))
        }
    }
}
