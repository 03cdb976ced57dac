use std::fmt;

use thiserror::Error;

use super::datetime::DateTimeValue;
use super::vocab::xsd;
use crate::decimal::Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankLabel(String),
    #[error("invalid {datatype} lexical form {lexical:?}")]
    InvalidLexical { datatype: &'static str, lexical: String },
    #[error("unsupported literal datatype <{0}>")]
    UnknownDatatype(String),
    #[error("literal in subject position")]
    LiteralSubject,
    #[error("predicate must be an IRI, found {0}")]
    NonIriPredicate(String),
}

/// Literal datatypes the ontology uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    DateTime,
}

impl Datatype {
    pub fn iri(self) -> &'static str {
        match self {
            Datatype::String => xsd::STRING,
            Datatype::Integer => xsd::INTEGER,
            Datatype::Decimal => xsd::DECIMAL,
            Datatype::DateTime => xsd::DATE_TIME,
        }
    }

    pub fn from_iri(iri: &str) -> Result<Self, TermError> {
        match iri {
            xsd::STRING => Ok(Datatype::String),
            xsd::INTEGER => Ok(Datatype::Integer),
            xsd::DECIMAL => Ok(Datatype::Decimal),
            xsd::DATE_TIME => Ok(Datatype::DateTime),
            other => Err(TermError::UnknownDatatype(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::DateTime => "datetime",
        }
    }
}

/// Characters that may not appear in an IRI, even escaped.
fn is_forbidden_iri_char(c: char) -> bool {
    c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

pub fn is_valid_iri(s: &str) -> bool {
    let Some(colon) = s.find(':') else {
        return false;
    };
    let scheme = &s[..colon];
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok && !s.chars().any(is_forbidden_iri_char)
}

pub fn is_valid_blank_label(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_alphanumeric() || first == '_')
        && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !s.ends_with('.')
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    pub fn new(s: impl Into<String>) -> Result<Self, TermError> {
        let s = s.into();
        if is_valid_iri(&s) {
            Ok(Iri(s))
        } else {
            Err(TermError::InvalidIri(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Result<Self, TermError> {
        let label = label.into();
        if is_valid_blank_label(&label) {
            Ok(BlankNode(label))
        } else {
            Err(TermError::InvalidBlankLabel(label))
        }
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

/// A typed literal. The lexical form is validated against its datatype on
/// construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

fn is_integer_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
}

impl Literal {
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, TermError> {
        let lexical = lexical.into();
        let ok = match datatype {
            Datatype::String => true,
            Datatype::Integer => is_integer_lexical(&lexical),
            Datatype::Decimal => Decimal::parse(&lexical).is_some(),
            Datatype::DateTime => DateTimeValue::parse(&lexical).is_some(),
        };
        if ok {
            Ok(Literal { lexical, datatype })
        } else {
            Err(TermError::InvalidLexical {
                datatype: datatype.name(),
                lexical,
            })
        }
    }

    pub fn string(s: impl Into<String>) -> Self {
        Literal {
            lexical: s.into(),
            datatype: Datatype::String,
        }
    }

    pub fn integer(i: i64) -> Self {
        Literal {
            lexical: i.to_string(),
            datatype: Datatype::Integer,
        }
    }

    pub fn decimal(d: Decimal) -> Self {
        Literal {
            lexical: d.to_string(),
            datatype: Datatype::Decimal,
        }
    }

    pub fn datetime(d: DateTimeValue) -> Self {
        Literal {
            lexical: d.to_string(),
            datatype: Datatype::DateTime,
        }
    }

    /// A year-precision date-time (`"2007"`).
    pub fn year(year: i32) -> Option<Self> {
        DateTimeValue::from_year(year).map(Literal::datetime)
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn as_datetime(&self) -> Option<DateTimeValue> {
        match self.datatype {
            Datatype::DateTime => DateTimeValue::parse(&self.lexical),
            _ => None,
        }
    }

    pub fn as_decimal(&self) -> Option<Decimal> {
        match self.datatype {
            Datatype::Integer | Datatype::Decimal => Decimal::parse(&self.lexical),
            _ => None,
        }
    }
}

/// An RDF term: the atom of every triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Result<Self, TermError> {
        Iri::new(s).map(Term::Iri)
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, TermError> {
        BlankNode::new(label).map(Term::Blank)
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i.as_str()),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

/// N-Triples surface syntax.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{}>", i.as_str()),
            Term::Blank(b) => write!(f, "_:{}", b.label()),
            Term::Literal(l) => {
                f.write_str("\"")?;
                for c in l.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                match l.datatype {
                    Datatype::String => Ok(()),
                    dt => write!(f, "^^<{}>", dt.iri()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Builds a triple without checking positions; [`Triple::validate`] and
    /// the store's insert enforce them.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }

    pub fn checked(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        let t = Triple::new(subject, predicate, object);
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), TermError> {
        if self.subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        if !self.predicate.is_iri() {
            return Err(TermError::NonIriPredicate(self.predicate.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
