//! Per-rule record of materialized triples.
//!
//! Text format: a header line, then one `@rule <name>` line per entry
//! followed by that entry's triples in canonical N-Triples, sorted.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::rdf::ntriples::parse_line;
use crate::rdf::{NtError, Triple};

const HEADER: &str = "# mesur ledger v1";

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("ledger line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("ledger line {line}: {source}")]
    Triple { line: usize, source: NtError },
    #[error("ledger I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    entries: BTreeMap<String, BTreeSet<Triple>>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, entry: &str, triple: Triple) {
        self.entries.entry(entry.to_string()).or_default().insert(triple);
    }

    pub fn forget(&mut self, entry: &str, triple: &Triple) -> bool {
        let Some(set) = self.entries.get_mut(entry) else {
            return false;
        };
        let removed = set.remove(triple);
        if set.is_empty() {
            self.entries.remove(entry);
        }
        removed
    }

    /// Removes and returns an entry's triples.
    pub fn take(&mut self, entry: &str) -> BTreeSet<Triple> {
        self.entries.remove(entry).unwrap_or_default()
    }

    pub fn triples(&self, entry: &str) -> impl Iterator<Item = &Triple> {
        self.entries.get(entry).into_iter().flatten()
    }

    pub fn rules(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self, entry: &str) -> usize {
        self.entries.get(entry).map_or(0, BTreeSet::len)
    }

    pub fn total(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.entries.values().any(|s| s.contains(triple))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), LedgerError> {
        writeln!(out, "{HEADER}")?;
        for (name, triples) in &self.entries {
            writeln!(out, "@rule {name}")?;
            for t in triples {
                writeln!(out, "{t}")?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self, LedgerError> {
        let mut ledger = Ledger::new();
        let mut current: Option<String> = None;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if lineno == 1 {
                if line != HEADER {
                    return Err(LedgerError::Format {
                        line: 1,
                        message: "missing ledger header".into(),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix("@rule ") {
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(LedgerError::Format {
                        line: lineno,
                        message: format!("bad rule name {name:?}"),
                    });
                }
                current = Some(name.to_string());
                continue;
            }
            let Some(name) = &current else {
                return Err(LedgerError::Format {
                    line: lineno,
                    message: "triple before any @rule line".into(),
                });
            };
            match parse_line(&line, lineno) {
                Ok(Some(t)) => ledger.record(name, t),
                Ok(None) => {}
                Err(source) => return Err(LedgerError::Triple { line: lineno, source }),
            }
        }
        Ok(ledger)
    }
}
