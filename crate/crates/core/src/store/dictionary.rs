use std::collections::HashMap;

use crate::rdf::Term;

/// Dense integer handle for a dictionary-encoded term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub(crate) u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijective `Term ↔ TermId` map. Ids are assigned in first-seen order and
/// never reused, so decoding an id handed out earlier always succeeds.
#[derive(Debug, Default, Clone)]
pub struct Dictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` once the id space is exhausted.
    pub fn encode(&mut self, term: &Term) -> Option<TermId> {
        if let Some(&id) = self.ids.get(term) {
            return Some(id);
        }
        let id = TermId(u32::try_from(self.terms.len()).ok()?);
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        Some(id)
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn decode(&self, id: TermId) -> &Term {
        &self.terms[id.index()]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms.iter().enumerate().map(|(i, t)| (TermId(i as u32), t))
    }
}
