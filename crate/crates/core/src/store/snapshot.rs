//! Versioned binary snapshot of a store.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "MESURSNP"
//! version    u32
//! terms      u64      number of dictionary entries
//! triples    u64
//! terms × { tag u8 (0 IRI, 1 blank, 2 literal), [datatype u8], len u32, UTF-8 bytes }
//! SPO run    triples × 3 × u32
//! POS run    triples × 3 × u32
//! OSP run    triples × 3 × u32
//! ```
//!
//! Only terms that occur in some triple are written, sorted by term order,
//! and ids are renumbered densely in that order. The bytes are therefore a
//! function of the triple set alone.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use super::{Dictionary, IdTriple, IndexOrder, Store, StoreError, TermId};
use crate::rdf::{BlankNode, Datatype, Iri, Literal, Term};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"MESURSNP";
pub const SNAPSHOT_VERSION: u32 = 1;

fn datatype_code(d: Datatype) -> u8 {
    match d {
        Datatype::String => 0,
        Datatype::Integer => 1,
        Datatype::Decimal => 2,
        Datatype::DateTime => 3,
    }
}

fn datatype_from_code(c: u8) -> Result<Datatype, StoreError> {
    Ok(match c {
        0 => Datatype::String,
        1 => Datatype::Integer,
        2 => Datatype::Decimal,
        3 => Datatype::DateTime,
        _ => return Err(StoreError::Corrupt(format!("unknown datatype code {c}"))),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, StoreError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, StoreError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8, StoreError> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

impl Store {
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<(), StoreError> {
        let used: BTreeSet<TermId> = self.spo.iter().flat_map(|t| t.iter().copied()).collect();
        let mut terms: Vec<(&Term, TermId)> = used.iter().map(|&id| (self.term(id), id)).collect();
        terms.sort();
        let mut remap = vec![0u32; self.dict.len()];
        for (rank, (_, old)) in terms.iter().enumerate() {
            remap[old.index()] = rank as u32;
        }

        out.write_all(SNAPSHOT_MAGIC)?;
        out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        out.write_all(&(terms.len() as u64).to_le_bytes())?;
        out.write_all(&(self.spo.len() as u64).to_le_bytes())?;
        for (term, _) in &terms {
            let (tag, dt, text) = match term {
                Term::Iri(i) => (0u8, None, i.as_str()),
                Term::Blank(b) => (1, None, b.label()),
                Term::Literal(l) => (2, Some(datatype_code(l.datatype())), l.lexical()),
            };
            out.write_all(&[tag])?;
            if let Some(dt) = dt {
                out.write_all(&[dt])?;
            }
            out.write_all(&(text.len() as u32).to_le_bytes())?;
            out.write_all(text.as_bytes())?;
        }

        let canonical: Vec<IdTriple> = {
            let mut v: Vec<IdTriple> = self.spo.iter().map(|t| t.map(|id| TermId(remap[id.index()]))).collect();
            v.sort_unstable();
            v
        };
        for order in [IndexOrder::Spo, IndexOrder::Pos, IndexOrder::Osp] {
            let mut run: Vec<IdTriple> = canonical.iter().map(|&t| order.to_key(t)).collect();
            run.sort_unstable();
            let mut buf = Vec::with_capacity(run.len() * 12);
            for key in run {
                for id in key {
                    buf.extend_from_slice(&id.0.to_le_bytes());
                }
            }
            out.write_all(&buf)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Store, StoreError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(StoreError::Corrupt("bad magic".into()));
        }
        let version = read_u32(&mut input)?;
        if version != SNAPSHOT_VERSION {
            return Err(StoreError::Version(version));
        }
        let term_count = read_u64(&mut input)?;
        let triple_count = read_u64(&mut input)?;
        if term_count > u32::MAX as u64 {
            return Err(StoreError::Corrupt("term count exceeds id space".into()));
        }

        let mut dict = Dictionary::new();
        let mut previous: Option<Term> = None;
        for _ in 0..term_count {
            let tag = read_u8(&mut input)?;
            let dt = if tag == 2 {
                Some(datatype_from_code(read_u8(&mut input)?)?)
            } else {
                None
            };
            let len = read_u32(&mut input)? as usize;
            let mut bytes = Vec::new();
            (&mut input).take(len as u64).read_to_end(&mut bytes)?;
            if bytes.len() != len {
                return Err(StoreError::Corrupt("truncated term".into()));
            }
            let text = String::from_utf8(bytes).map_err(|_| StoreError::Corrupt("term is not UTF-8".into()))?;
            let term = match (tag, dt) {
                (0, _) => Term::Iri(Iri::new(text)?),
                (1, _) => Term::Blank(BlankNode::new(text)?),
                (2, Some(dt)) => Term::Literal(Literal::new(text, dt)?),
                _ => return Err(StoreError::Corrupt(format!("unknown term tag {tag}"))),
            };
            if previous.as_ref().is_some_and(|p| p >= &term) {
                return Err(StoreError::Corrupt("terms out of order".into()));
            }
            dict.encode(&term);
            previous = Some(term);
        }

        let mut runs: Vec<Vec<IdTriple>> = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut run = Vec::with_capacity(triple_count.min(1 << 24) as usize);
            for _ in 0..triple_count {
                let mut key = [TermId(0); 3];
                for slot in &mut key {
                    let id = read_u32(&mut input)?;
                    if id as u64 >= term_count {
                        return Err(StoreError::Corrupt(format!("term id {id} out of range")));
                    }
                    *slot = TermId(id);
                }
                run.push(key);
            }
            if !run.windows(2).all(|w| w[0] < w[1]) {
                return Err(StoreError::Corrupt("index run not strictly sorted".into()));
            }
            runs.push(run);
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(StoreError::Corrupt("trailing bytes".into()));
        }

        let osp = runs.pop().unwrap();
        let pos = runs.pop().unwrap();
        let spo = runs.pop().unwrap();
        let store = Store {
            dict,
            spo: spo.into_iter().collect(),
            pos: pos.into_iter().collect(),
            osp: osp.into_iter().collect(),
            blank_counter: 0,
        };
        if !store.indexes_coherent() {
            return Err(StoreError::Corrupt("index runs disagree".into()));
        }
        Ok(store)
    }
}
