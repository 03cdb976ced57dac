use std::collections::BTreeMap;

use thiserror::Error;

use super::term::{Iri, Term, TermError};
use super::vocab::{mesur, owl, rdf, rdfs, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NamespaceError {
    #[error("unknown prefix `{0}`")]
    UnknownPrefix(String),
    #[error("`{0}` is not a prefixed name")]
    NotPrefixed(String),
    #[error("prefix `{prefix}` is already bound to <{existing}>")]
    Conflict { prefix: String, existing: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

/// URI schemes that pass through [`NamespaceTable::expand`] unchanged when
/// not registered as prefixes, so `urn:issn:1082-9873` reads as an IRI.
const PASSTHROUGH_SCHEMES: &[&str] = &["urn", "http", "https", "info", "mailto", "tag", "file"];

/// Prefix → IRI base map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamespaceTable {
    prefixes: BTreeMap<String, String>,
}

impl Default for NamespaceTable {
    fn default() -> Self {
        let mut prefixes = BTreeMap::new();
        for (p, ns) in [
            ("mesur", mesur::NS),
            ("rdf", rdf::NS),
            ("rdfs", rdfs::NS),
            ("owl", owl::NS),
            ("xsd", xsd::NS),
        ] {
            prefixes.insert(p.to_string(), ns.to_string());
        }
        NamespaceTable { prefixes }
    }
}

impl NamespaceTable {
    pub fn empty() -> Self {
        NamespaceTable {
            prefixes: BTreeMap::new(),
        }
    }

    /// Binds `prefix`. Rebinding to the same base is a no-op; rebinding to a
    /// different base is a conflict.
    pub fn register(&mut self, prefix: &str, base: &str) -> Result<(), NamespaceError> {
        match self.prefixes.get(prefix) {
            Some(existing) if existing != base => Err(NamespaceError::Conflict {
                prefix: prefix.to_string(),
                existing: existing.clone(),
            }),
            Some(_) => Ok(()),
            None => {
                self.prefixes.insert(prefix.to_string(), base.to_string());
                Ok(())
            }
        }
    }

    pub fn base(&self, prefix: &str) -> Option<&str> {
        self.prefixes.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.prefixes.iter().map(|(p, b)| (p.as_str(), b.as_str()))
    }

    pub fn expand(&self, curie: &str) -> Result<Term, NamespaceError> {
        let (prefix, local) = curie
            .split_once(':')
            .ok_or_else(|| NamespaceError::NotPrefixed(curie.to_string()))?;
        match self.prefixes.get(prefix) {
            Some(base) => Ok(Term::Iri(Iri::new(format!("{base}{local}"))?)),
            None if PASSTHROUGH_SCHEMES.contains(&prefix) => Ok(Term::Iri(Iri::new(curie)?)),
            None => Err(NamespaceError::UnknownPrefix(prefix.to_string())),
        }
    }

    /// Shortest prefixed form of `iri` under the registered prefixes.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.prefixes
            .iter()
            .filter(|(_, base)| iri.starts_with(base.as_str()) && iri.len() > base.len())
            .max_by_key(|(_, base)| base.len())
            .map(|(p, base)| format!("{p}:{}", &iri[base.len()..]))
    }
}
