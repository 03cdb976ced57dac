//! Dictionary-encoded triple store with SPO, POS and OSP permutation indexes.
//!
//! All three indexes hold the same set of id-triples at all times; a lookup
//! picks whichever permutation turns the bound slots into a key prefix.
//! Mutation needs `&mut Store`, so the single-writer / many-reader contract
//! is the borrow checker's; callers sharing a store across threads wrap it in
//! an `RwLock`.

mod dictionary;
mod pattern;
mod snapshot;

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::ops::RangeInclusive;

use thiserror::Error;

pub use dictionary::{Dictionary, TermId};
pub use pattern::{Bindings, PatternTerm, TriplePattern};
pub use snapshot::{SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::rdf::{NTriplesReader, NtError, Term, TermError, Triple};

/// Prefix of every blank-node label the system mints.
pub const GENERATED_BLANK_PREFIX: &str = "mesur-gen-";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("term dictionary is full")]
    DictionaryFull,
    #[error(transparent)]
    NTriples(#[from] NtError),
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

type IdTriple = [TermId; 3];

/// Index key orders, as positions into an SPO triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrder {
    Spo,
    Pos,
    Osp,
}

impl IndexOrder {
    fn to_key(self, [s, p, o]: IdTriple) -> IdTriple {
        match self {
            IndexOrder::Spo => [s, p, o],
            IndexOrder::Pos => [p, o, s],
            IndexOrder::Osp => [o, s, p],
        }
    }

    fn key_to_spo(self, k: IdTriple) -> IdTriple {
        match self {
            IndexOrder::Spo => k,
            IndexOrder::Pos => [k[2], k[0], k[1]],
            IndexOrder::Osp => [k[1], k[2], k[0]],
        }
    }

    /// Index and key prefix for a bound-slot signature.
    fn choose(s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> (IndexOrder, Vec<TermId>) {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => (IndexOrder::Spo, vec![s, p, o]),
            (Some(s), Some(p), None) => (IndexOrder::Spo, vec![s, p]),
            (Some(s), None, Some(o)) => (IndexOrder::Osp, vec![o, s]),
            (Some(s), None, None) => (IndexOrder::Spo, vec![s]),
            (None, Some(p), Some(o)) => (IndexOrder::Pos, vec![p, o]),
            (None, Some(p), None) => (IndexOrder::Pos, vec![p]),
            (None, None, Some(o)) => (IndexOrder::Osp, vec![o]),
            (None, None, None) => (IndexOrder::Spo, vec![]),
        }
    }
}

fn prefix_range(prefix: &[TermId]) -> RangeInclusive<IdTriple> {
    let mut lo = [TermId(0); 3];
    let mut hi = [TermId(u32::MAX); 3];
    for (i, id) in prefix.iter().enumerate() {
        lo[i] = *id;
        hi[i] = *id;
    }
    lo..=hi
}

#[derive(Debug, Default, Clone)]
pub struct Store {
    dict: Dictionary,
    spo: BTreeSet<IdTriple>,
    pos: BTreeSet<IdTriple>,
    osp: BTreeSet<IdTriple>,
    blank_counter: u64,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.dict.lookup(term)
    }

    pub fn term(&self, id: TermId) -> &Term {
        self.dict.decode(id)
    }

    fn encode(&mut self, term: &Term) -> Result<TermId, StoreError> {
        self.dict.encode(term).ok_or(StoreError::DictionaryFull)
    }

    fn encode_triple(&mut self, t: &Triple) -> Result<IdTriple, StoreError> {
        t.validate()?;
        Ok([
            self.encode(&t.subject)?,
            self.encode(&t.predicate)?,
            self.encode(&t.object)?,
        ])
    }

    fn lookup_triple(&self, t: &Triple) -> Option<IdTriple> {
        Some([
            self.lookup(&t.subject)?,
            self.lookup(&t.predicate)?,
            self.lookup(&t.object)?,
        ])
    }

    fn insert_ids(&mut self, ids: IdTriple) -> bool {
        if !self.spo.insert(ids) {
            return false;
        }
        self.pos.insert(IndexOrder::Pos.to_key(ids));
        self.osp.insert(IndexOrder::Osp.to_key(ids));
        true
    }

    /// Adds `t`; `Ok(false)` when it was already present.
    pub fn insert(&mut self, t: &Triple) -> Result<bool, StoreError> {
        let ids = self.encode_triple(t)?;
        Ok(self.insert_ids(ids))
    }

    /// Removes `t`; `false` when it was absent.
    pub fn remove(&mut self, t: &Triple) -> bool {
        let Some(ids) = self.lookup_triple(t) else {
            return false;
        };
        if !self.spo.remove(&ids) {
            return false;
        }
        self.pos.remove(&IndexOrder::Pos.to_key(ids));
        self.osp.remove(&IndexOrder::Osp.to_key(ids));
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.lookup_triple(t).is_some_and(|ids| self.spo.contains(&ids))
    }

    /// Bulk insert. Triples are validated up front; nothing is inserted if
    /// any is malformed. Returns the number newly added.
    pub fn extend<'a>(&mut self, triples: impl IntoIterator<Item = &'a Triple>) -> Result<usize, StoreError> {
        let mut batch = Vec::new();
        for t in triples {
            t.validate()?;
            batch.push(t);
        }
        let mut ids = Vec::with_capacity(batch.len());
        for t in batch {
            ids.push(self.encode_triple(t)?);
        }
        Ok(self.load_ids(ids))
    }

    fn load_ids(&mut self, mut ids: Vec<IdTriple>) -> usize {
        if self.spo.is_empty() {
            ids.sort_unstable();
            ids.dedup();
            let n = ids.len();
            self.pos = ids.iter().map(|&t| IndexOrder::Pos.to_key(t)).collect();
            self.osp = ids.iter().map(|&t| IndexOrder::Osp.to_key(t)).collect();
            self.spo = ids.into_iter().collect();
            n
        } else {
            ids.into_iter().filter(|&t| self.insert_ids(t)).count()
        }
    }

    /// Loads an N-Triples stream. Blank labels are scoped to the stream: a
    /// label already used in the store is renamed to a fresh one.
    pub fn load_ntriples<R: BufRead>(&mut self, input: R) -> Result<usize, StoreError> {
        let mut renames: HashMap<Term, Term> = HashMap::new();
        let mut triples = Vec::new();
        for t in NTriplesReader::new(input) {
            let mut t = t?;
            for slot in [&mut t.subject, &mut t.object] {
                if matches!(slot, Term::Blank(_)) {
                    let mapped = match renames.get(slot) {
                        Some(m) => m.clone(),
                        None => {
                            let m = if self.lookup(slot).is_some() {
                                self.fresh_blank()
                            } else {
                                slot.clone()
                            };
                            renames.insert(slot.clone(), m.clone());
                            m
                        }
                    };
                    *slot = mapped;
                }
            }
            triples.push(t);
        }
        self.extend(&triples)
    }

    /// A blank node whose label is not yet in the dictionary.
    pub fn fresh_blank(&mut self) -> Term {
        loop {
            self.blank_counter += 1;
            let t = Term::blank(format!("{GENERATED_BLANK_PREFIX}{}", self.blank_counter))
                .expect("generated label is valid");
            if self.lookup(&t).is_none() {
                // reserve the label so later calls never hand it out again
                self.dict.encode(&t);
                return t;
            }
        }
    }

    /// Id-level scan in the chosen index's key order; yields SPO triples.
    pub fn scan_ids(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = IdTriple> + '_> {
        let (order, prefix) = IndexOrder::choose(s, p, o);
        let index = match order {
            IndexOrder::Spo => &self.spo,
            IndexOrder::Pos => &self.pos,
            IndexOrder::Osp => &self.osp,
        };
        if prefix.is_empty() {
            return Box::new(index.iter().map(move |&k| order.key_to_spo(k)));
        }
        Box::new(index.range(prefix_range(&prefix)).map(move |&k| order.key_to_spo(k)))
    }

    /// Number of triples matching the bound slots, counting at most `cap`.
    pub fn count_ids(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>, cap: usize) -> usize {
        self.scan_ids(s, p, o).take(cap).count()
    }

    /// Triples matching the given constants (`None` = wildcard).
    pub fn triples_matching<'a>(
        &'a self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> Box<dyn Iterator<Item = Triple> + 'a> {
        let resolve = |t: Option<&Term>| match t {
            None => Ok(None),
            Some(t) => self.lookup(t).map(Some).ok_or(()),
        };
        let (Ok(s), Ok(p), Ok(o)) = (resolve(s), resolve(p), resolve(o)) else {
            return Box::new(std::iter::empty());
        };
        Box::new(self.scan_ids(s, p, o).map(move |ids| self.decode_triple(ids)))
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects(&self, subject: &Term, predicate: &Term) -> Vec<Term> {
        self.triples_matching(Some(subject), Some(predicate), None)
            .map(|t| t.object)
            .collect()
    }

    /// Subjects of `(?, predicate, object)`.
    pub fn subjects(&self, predicate: &Term, object: &Term) -> Vec<Term> {
        self.triples_matching(None, Some(predicate), Some(object))
            .map(|t| t.subject)
            .collect()
    }

    /// Whether `term` occurs in any triple.
    pub fn mentions(&self, term: &Term) -> bool {
        let Some(id) = self.lookup(term) else {
            return false;
        };
        self.scan_ids(Some(id), None, None).next().is_some()
            || self.scan_ids(None, None, Some(id)).next().is_some()
            || self.scan_ids(None, Some(id), None).next().is_some()
    }

    pub fn decode_triple(&self, [s, p, o]: IdTriple) -> Triple {
        Triple::new(self.term(s).clone(), self.term(p).clone(), self.term(o).clone())
    }

    /// Every triple, in SPO id order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|&ids| self.decode_triple(ids))
    }

    /// Matches `pattern`, one binding per matching triple, in index order.
    pub fn match_pattern<'a>(&'a self, pattern: &'a TriplePattern) -> Box<dyn Iterator<Item = Bindings> + 'a> {
        let mut bound = [None; 3];
        for (i, slot) in pattern.slots().into_iter().enumerate() {
            if let PatternTerm::Term(t) = slot {
                match self.lookup(t) {
                    Some(id) => bound[i] = Some(id),
                    None => return Box::new(std::iter::empty()),
                }
            }
        }
        let slots = pattern.slots();
        Box::new(self.scan_ids(bound[0], bound[1], bound[2]).filter_map(move |ids| {
            let mut b = Bindings::new();
            for (i, slot) in slots.iter().enumerate() {
                if let PatternTerm::Var(v) = slot {
                    let term = self.term(ids[i]);
                    match b.get(v) {
                        Some(prev) if prev != term => return None,
                        Some(_) => {}
                        None => {
                            b.insert(v.clone(), term.clone());
                        }
                    }
                }
            }
            Some(b)
        }))
    }

    /// Full-scan comparison of the three indexes.
    pub fn indexes_coherent(&self) -> bool {
        let n = self.spo.len();
        if self.pos.len() != n || self.osp.len() != n {
            return false;
        }
        let mut from_pos: Vec<IdTriple> = self.pos.iter().map(|&k| IndexOrder::Pos.key_to_spo(k)).collect();
        let mut from_osp: Vec<IdTriple> = self.osp.iter().map(|&k| IndexOrder::Osp.key_to_spo(k)).collect();
        from_pos.sort_unstable();
        from_osp.sort_unstable();
        self.spo.iter().copied().eq(from_pos.iter().copied()) && self.spo.iter().copied().eq(from_osp.iter().copied())
    }

    /// Raw permutation run, in key order.
    pub fn index_keys(&self, order: IndexOrder) -> impl Iterator<Item = IdTriple> + '_ {
        match order {
            IndexOrder::Spo => self.spo.iter(),
            IndexOrder::Pos => self.pos.iter(),
            IndexOrder::Osp => self.osp.iter(),
        }
        .copied()
    }
}
