//! Record store for bibliographic and usage literals kept out of the graph.
//!
//! Records arrive as tab-separated text with a header line. Only structure
//! is mapped into the triple store: titles, author names, pages, volumes,
//! and issues stay here and are reached through [`Sidecar::resolve`].
//!
//! Minted IRIs are deterministic:
//!
//! | node | IRI |
//! |------|-----|
//! | unit | `urn:mesur:doc:<doc_id>` |
//! | publication context | `urn:mesur:publishes:<doc_id>` |
//! | usage context | `urn:mesur:uses:<event_id>` |
//! | author, publisher | `urn:mesur:agent:<hash of role, normalized name, provider>` |
//! | user | `urn:mesur:user:<hash of agent id, provider>` |
//! | collection root | `urn:mesur:group:<hash of normalized collection>` |
//! | collection year | `<root>:<year>`, `partOf` the root |
//! | citation | `urn:mesur:citation:<hash of citing, cited>` |

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::vocab::{mesur, rdf};
use crate::rdf::{DateTimeValue, Literal, Term, Triple};
use crate::store::{Store, StoreError};

pub const SIDECAR_VERSION: u32 = 1;

pub const BIBLIO_COLUMNS: &[&str] = &[
    "title",
    "authors",
    "collection",
    "publisher",
    "date",
    "start_page",
    "end_page",
    "volume",
    "issue",
    "doi",
    "doc_id",
];
pub const USAGE_COLUMNS: &[&str] = &["event_id", "time", "agent", "session", "affiliation", "doc_id"];
pub const CITATION_COLUMNS: &[&str] = &["citing", "cited"];

/// Predicates allowed to carry literal objects in a mapped graph.
pub const LITERAL_PREDICATES: &[&str] = &[
    mesur::HAS_TIME,
    mesur::HAS_SESSION,
    mesur::HAS_ACCESS_TYPE,
    mesur::HAS_WEIGHT,
    mesur::HAS_NUMERIC_VALUE,
    mesur::HAS_START_TIME,
    mesur::HAS_END_TIME,
    mesur::HAS_SOURCE_START_TIME,
    mesur::HAS_SOURCE_END_TIME,
    mesur::HAS_SINK_START_TIME,
    mesur::HAS_SINK_END_TIME,
];

#[derive(Debug, Error)]
pub enum SidecarError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
    #[error("unsupported sidecar version {0}")]
    Version(u32),
    #[error("sidecar I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("sidecar file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiblioRecord {
    pub doc_id: String,
    pub title: Option<String>,
    pub authors: Vec<String>,
    pub collection: Option<String>,
    pub publisher: Option<String>,
    pub date: Option<String>,
    pub start_page: Option<String>,
    pub end_page: Option<String>,
    pub volume: Option<String>,
    pub issue: Option<String>,
    pub doi: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub event_id: String,
    pub time: Option<String>,
    pub agent: Option<String>,
    pub session: Option<String>,
    pub affiliation: Option<String>,
    pub doc_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CitationRecord {
    pub citing: String,
    pub cited: String,
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub loaded: usize,
    pub rejected: Vec<Rejection>,
}

impl IngestReport {
    pub fn counts(&self) -> (usize, usize) {
        (self.loaded, self.rejected.len())
    }
}

/// The two representations of one artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Document { record: BiblioRecord, iri: Term },
    Usage { record: UsageRecord, iri: Term },
}

impl Resolved {
    pub fn iri(&self) -> &Term {
        match self {
            Resolved::Document { iri, .. } | Resolved::Usage { iri, .. } => iri,
        }
    }

    pub fn key(&self) -> &str {
        match self {
            Resolved::Document { record, .. } => &record.doc_id,
            Resolved::Usage { record, .. } => &record.event_id,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MapOptions {
    /// Absolute IRI of the data provider stamped on every event context.
    pub provider: Term,
    /// Mint an `Organization` and an `Affiliation` context from usage
    /// affiliation strings.
    pub affiliations: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MapReport {
    pub publishes: usize,
    pub uses: usize,
    pub citations: usize,
    pub affiliations: usize,
    pub triples_inserted: usize,
}

impl MapReport {
    pub fn contexts(&self) -> usize {
        self.publishes + self.uses + self.citations + self.affiliations
    }
}

/// Bijective identifier ↔ IRI map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    doc_to_iri: BTreeMap<String, Term>,
    iri_to_doc: BTreeMap<Term, String>,
    event_to_iri: BTreeMap<String, Term>,
    iri_to_event: BTreeMap<Term, String>,
}

impl IdMap {
    pub fn doc_iri(&self, doc_id: &str) -> Option<&Term> {
        self.doc_to_iri.get(doc_id)
    }

    pub fn doc_id(&self, iri: &Term) -> Option<&str> {
        self.iri_to_doc.get(iri).map(String::as_str)
    }

    pub fn event_iri(&self, event_id: &str) -> Option<&Term> {
        self.event_to_iri.get(event_id)
    }

    pub fn event_id(&self, iri: &Term) -> Option<&str> {
        self.iri_to_event.get(iri).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.doc_to_iri.len() + self.event_to_iri.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Percent-encodes everything outside a conservative IRI-safe set.
fn encode_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~:/@!$&'()*+,;=".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn hash_hex(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
}

/// Case-folded name with whitespace runs collapsed.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn mint(s: String) -> Term {
    Term::iri(s).expect("minted IRIs are valid")
}

pub fn unit_iri(record: &BiblioRecord) -> Term {
    mint(format!("urn:mesur:doc:{}", encode_segment(&record.doc_id)))
}

pub fn uses_iri(event_id: &str) -> Term {
    mint(format!("urn:mesur:uses:{}", encode_segment(event_id)))
}

pub fn publishes_iri(doc_id: &str) -> Term {
    mint(format!("urn:mesur:publishes:{}", encode_segment(doc_id)))
}

pub fn author_iri(name: &str, provider: &Term) -> Term {
    mint(format!(
        "urn:mesur:agent:{}",
        hash_hex(&["author", &normalize_name(name), &provider.to_string()])
    ))
}

pub fn publisher_iri(name: &str, provider: &Term) -> Term {
    mint(format!(
        "urn:mesur:agent:{}",
        hash_hex(&["publisher", &normalize_name(name), &provider.to_string()])
    ))
}

pub fn user_iri(agent: &str, provider: &Term) -> Term {
    mint(format!("urn:mesur:user:{}", hash_hex(&[agent, &provider.to_string()])))
}

pub fn group_root_iri(collection: &str) -> Term {
    mint(format!("urn:mesur:group:{}", hash_hex(&[&normalize_name(collection)])))
}

fn edition_iri(root: &Term, year: i32) -> Term {
    mint(format!("{}:{year}", root.as_iri().expect("roots are IRIs")))
}

pub fn citation_iri(citing: &str, cited: &str) -> Term {
    mint(format!("urn:mesur:citation:{}", hash_hex(&[citing, cited])))
}

fn organization_iri(name: &str, provider: &Term) -> Term {
    mint(format!(
        "urn:mesur:org:{}",
        hash_hex(&[&normalize_name(name), &provider.to_string()])
    ))
}

fn affiliation_iri(org: &Term, member: &Term) -> Term {
    mint(format!(
        "urn:mesur:affiliation:{}",
        hash_hex(&[&org.to_string(), &member.to_string()])
    ))
}

/// Parsed header: column index for each known column name.
struct Header {
    columns: Vec<&'static str>,
}

impl Header {
    fn parse(line: &str, known: &[&'static str], required: &[&'static str]) -> Result<Header, SidecarError> {
        let mut columns: Vec<&'static str> = Vec::new();
        for raw in line.split('\t') {
            let name = raw.trim();
            let Some(&col) = known.iter().find(|k| **k == name) else {
                return Err(SidecarError::UnknownColumn(name.to_string()));
            };
            if columns.contains(&col) {
                return Err(SidecarError::DuplicateColumn(name.to_string()));
            }
            columns.push(col);
        }
        for r in required {
            if !columns.contains(r) {
                return Err(SidecarError::MissingColumn(r));
            }
        }
        Ok(Header { columns })
    }

    /// Column → non-empty trimmed value.
    fn fields<'a>(&self, line: &'a str) -> Result<BTreeMap<&'static str, &'a str>, String> {
        let values: Vec<&str> = line.split('\t').collect();
        if values.len() != self.columns.len() {
            return Err(format!(
                "expected {} fields, found {}",
                self.columns.len(),
                values.len()
            ));
        }
        Ok(self
            .columns
            .iter()
            .zip(values)
            .map(|(c, v)| (*c, v.trim()))
            .filter(|(_, v)| !v.is_empty())
            .collect())
    }
}

/// Lines of a TSV stream with 1-based numbers, CR stripped, blank lines dropped.
fn tsv_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String), std::io::Error>> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l.trim_end_matches('\r').to_string())))
        .filter(|r| !matches!(r, Ok((_, l)) if l.trim().is_empty()))
}

#[derive(Debug, Clone, Default)]
pub struct Sidecar {
    biblio: BTreeMap<String, BiblioRecord>,
    doi_index: BTreeMap<String, String>,
    usage: BTreeMap<String, UsageRecord>,
    usage_by_doc: BTreeMap<String, BTreeSet<String>>,
    citations: BTreeSet<CitationRecord>,
    ids: IdMap,
}

#[derive(Serialize, Deserialize)]
struct SidecarFile {
    version: u32,
    biblio: Vec<BiblioRecord>,
    usage: Vec<UsageRecord>,
    citations: Vec<CitationRecord>,
}

impl Sidecar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn biblio(&self) -> impl Iterator<Item = &BiblioRecord> {
        self.biblio.values()
    }

    pub fn usage(&self) -> impl Iterator<Item = &UsageRecord> {
        self.usage.values()
    }

    pub fn citations(&self) -> impl Iterator<Item = &CitationRecord> {
        self.citations.iter()
    }

    pub fn biblio_record(&self, doc_id: &str) -> Option<&BiblioRecord> {
        self.biblio.get(doc_id)
    }

    pub fn by_doi(&self, doi: &str) -> Option<&BiblioRecord> {
        self.doi_index.get(doi).and_then(|id| self.biblio.get(id))
    }

    /// Event ids of usage records for `doc_id`.
    pub fn usage_of(&self, doc_id: &str) -> impl Iterator<Item = &str> {
        self.usage_by_doc.get(doc_id).into_iter().flatten().map(String::as_str)
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn is_empty(&self) -> bool {
        self.biblio.is_empty() && self.usage.is_empty() && self.citations.is_empty()
    }

    /// Adds one bibliographic record, or explains why it was refused.
    pub fn add_biblio(&mut self, record: BiblioRecord) -> Result<(), String> {
        if record.doc_id.is_empty() {
            return Err("missing doc_id".into());
        }
        if self.biblio.contains_key(&record.doc_id) {
            return Err(format!("duplicate doc_id {}", record.doc_id));
        }
        if let Some(doi) = &record.doi {
            if self.doi_index.contains_key(doi) {
                return Err(format!("duplicate doi {doi}"));
            }
        }
        if let Some(date) = &record.date {
            if DateTimeValue::parse_lenient(date).is_none() {
                return Err(format!("unparseable date {date:?}"));
            }
        }
        let iri = unit_iri(&record);
        if self.ids.iri_to_doc.contains_key(&iri) {
            return Err(format!("unit IRI {iri} already assigned"));
        }
        if let Some(doi) = &record.doi {
            self.doi_index.insert(doi.clone(), record.doc_id.clone());
        }
        self.ids.doc_to_iri.insert(record.doc_id.clone(), iri.clone());
        self.ids.iri_to_doc.insert(iri, record.doc_id.clone());
        self.biblio.insert(record.doc_id.clone(), record);
        Ok(())
    }

    pub fn add_usage(&mut self, record: UsageRecord) -> Result<(), String> {
        if record.event_id.is_empty() {
            return Err("missing event_id".into());
        }
        if record.doc_id.is_empty() {
            return Err("missing doc_id".into());
        }
        if self.usage.contains_key(&record.event_id) {
            return Err(format!("duplicate event_id {}", record.event_id));
        }
        if !self.biblio.contains_key(&record.doc_id) {
            return Err(format!("doc_id {} has no bibliographic record", record.doc_id));
        }
        if let Some(time) = &record.time {
            if DateTimeValue::parse_lenient(time).is_none() {
                return Err(format!("unparseable time {time:?}"));
            }
        }
        let iri = uses_iri(&record.event_id);
        self.ids.event_to_iri.insert(record.event_id.clone(), iri.clone());
        self.ids.iri_to_event.insert(iri, record.event_id.clone());
        self.usage_by_doc
            .entry(record.doc_id.clone())
            .or_default()
            .insert(record.event_id.clone());
        self.usage.insert(record.event_id.clone(), record);
        Ok(())
    }

    pub fn add_citation(&mut self, record: CitationRecord) -> Result<(), String> {
        for id in [&record.citing, &record.cited] {
            if !self.biblio.contains_key(id) {
                return Err(format!("doc_id {id} has no bibliographic record"));
            }
        }
        if !self.citations.insert(record.clone()) {
            return Err(format!("duplicate citation {} -> {}", record.citing, record.cited));
        }
        Ok(())
    }

    pub fn ingest_biblio<R: BufRead>(&mut self, input: R) -> Result<IngestReport, SidecarError> {
        self.ingest(input, BIBLIO_COLUMNS, &["doc_id"], |sc, f| {
            let get = |c: &str| f.get(c).map(|v| v.to_string());
            let authors = f
                .get("authors")
                .map(|a| {
                    a.split('|')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            sc.add_biblio(BiblioRecord {
                doc_id: get("doc_id").unwrap_or_default(),
                title: get("title"),
                authors,
                collection: get("collection"),
                publisher: get("publisher"),
                date: get("date"),
                start_page: get("start_page"),
                end_page: get("end_page"),
                volume: get("volume"),
                issue: get("issue"),
                doi: get("doi"),
            })
        })
    }

    pub fn ingest_usage<R: BufRead>(&mut self, input: R) -> Result<IngestReport, SidecarError> {
        self.ingest(input, USAGE_COLUMNS, &["event_id", "doc_id"], |sc, f| {
            let get = |c: &str| f.get(c).map(|v| v.to_string());
            sc.add_usage(UsageRecord {
                event_id: get("event_id").unwrap_or_default(),
                time: get("time"),
                agent: get("agent"),
                session: get("session"),
                affiliation: get("affiliation"),
                doc_id: get("doc_id").unwrap_or_default(),
            })
        })
    }

    pub fn ingest_citations<R: BufRead>(&mut self, input: R) -> Result<IngestReport, SidecarError> {
        self.ingest(input, CITATION_COLUMNS, CITATION_COLUMNS, |sc, f| {
            match (f.get("citing"), f.get("cited")) {
                (Some(a), Some(b)) => sc.add_citation(CitationRecord {
                    citing: a.to_string(),
                    cited: b.to_string(),
                }),
                _ => Err("missing citing or cited".into()),
            }
        })
    }

    fn ingest<R: BufRead>(
        &mut self,
        input: R,
        known: &[&'static str],
        required: &[&'static str],
        mut add: impl FnMut(&mut Self, &BTreeMap<&'static str, &str>) -> Result<(), String>,
    ) -> Result<IngestReport, SidecarError> {
        let mut report = IngestReport::default();
        let mut header: Option<Header> = None;
        for line in tsv_lines(input) {
            let (lineno, line) = line?;
            let Some(h) = &header else {
                header = Some(Header::parse(&line, known, required)?);
                continue;
            };
            let outcome = h.fields(&line).and_then(|f| add(self, &f));
            match outcome {
                Ok(()) => report.loaded += 1,
                Err(reason) => {
                    log::debug!("line {lineno} rejected: {reason}");
                    report.rejected.push(Rejection { line: lineno, reason });
                }
            }
        }
        Ok(report)
    }

    /// Looks up a doc_id, event_id, DOI, or mapped IRI.
    pub fn resolve(&self, id: &str) -> Result<Resolved, SidecarError> {
        let doc = |doc_id: &str| {
            self.biblio.get(doc_id).map(|r| Resolved::Document {
                record: r.clone(),
                iri: self.ids.doc_to_iri[doc_id].clone(),
            })
        };
        let event = |event_id: &str| {
            self.usage.get(event_id).map(|r| Resolved::Usage {
                record: r.clone(),
                iri: self.ids.event_to_iri[event_id].clone(),
            })
        };
        if let Some(r) = doc(id).or_else(|| event(id)) {
            return Ok(r);
        }
        if let Some(doc_id) = self.doi_index.get(id) {
            return Ok(doc(doc_id).expect("indexed"));
        }
        let as_iri = id.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(id);
        if let Ok(term) = Term::iri(as_iri) {
            if let Some(doc_id) = self.ids.doc_id(&term) {
                return Ok(doc(doc_id).expect("mapped"));
            }
            if let Some(event_id) = self.ids.event_id(&term) {
                return Ok(event(event_id).expect("mapped"));
            }
        }
        Err(SidecarError::UnknownId(id.to_string()))
    }

    /// Writes the graph structure of every record into `store`.
    pub fn map_to_graph(&self, store: &mut Store, opts: &MapOptions) -> Result<MapReport, SidecarError> {
        let m = mesur::term;
        let mut report = MapReport::default();
        let mut triples: Vec<Triple> = Vec::new();
        let provider = &opts.provider;
        triples.push(Triple::new(provider.clone(), rdf::type_(), m(mesur::ORGANIZATION)));

        for r in self.biblio.values() {
            let ctx = publishes_iri(&r.doc_id);
            let unit = self.ids.doc_to_iri[&r.doc_id].clone();
            let time = r.date.as_deref().and_then(DateTimeValue::parse_lenient);
            triples.push(Triple::new(ctx.clone(), rdf::type_(), m(mesur::PUBLISHES)));
            triples.push(Triple::new(ctx.clone(), m(mesur::HAS_UNIT), unit.clone()));
            triples.push(Triple::new(unit.clone(), rdf::type_(), m(mesur::ARTICLE)));
            triples.push(Triple::new(ctx.clone(), m(mesur::HAS_PROVIDER), provider.clone()));
            if let Some(t) = time {
                triples.push(Triple::new(
                    ctx.clone(),
                    m(mesur::HAS_TIME),
                    Term::Literal(Literal::datetime(t)),
                ));
            }
            if let Some(c) = &r.collection {
                let root = group_root_iri(c);
                triples.push(Triple::new(root.clone(), rdf::type_(), m(mesur::JOURNAL)));
                let group = match time {
                    Some(t) => {
                        let edition = edition_iri(&root, t.year());
                        triples.push(Triple::new(edition.clone(), rdf::type_(), m(mesur::JOURNAL)));
                        triples.push(Triple::new(edition.clone(), m(mesur::PART_OF), root));
                        edition
                    }
                    None => root,
                };
                triples.push(Triple::new(ctx.clone(), m(mesur::HAS_GROUP), group));
            }
            if let Some(p) = &r.publisher {
                let agent = publisher_iri(p, provider);
                triples.push(Triple::new(agent.clone(), rdf::type_(), m(mesur::ORGANIZATION)));
                triples.push(Triple::new(ctx.clone(), m(mesur::HAS_PUBLISHER), agent));
            }
            for a in &r.authors {
                let agent = author_iri(a, provider);
                triples.push(Triple::new(agent.clone(), rdf::type_(), m(mesur::HUMAN)));
                triples.push(Triple::new(ctx.clone(), m(mesur::HAS_AUTHOR), agent));
            }
            report.publishes += 1;
        }

        for u in self.usage.values() {
            let ctx = self.ids.event_to_iri[&u.event_id].clone();
            triples.push(Triple::new(ctx.clone(), rdf::type_(), m(mesur::USES)));
            triples.push(Triple::new(
                ctx.clone(),
                m(mesur::HAS_DOCUMENT),
                self.ids.doc_to_iri[&u.doc_id].clone(),
            ));
            triples.push(Triple::new(ctx.clone(), m(mesur::HAS_PROVIDER), provider.clone()));
            if let Some(t) = u.time.as_deref().and_then(DateTimeValue::parse_lenient) {
                triples.push(Triple::new(
                    ctx.clone(),
                    m(mesur::HAS_TIME),
                    Term::Literal(Literal::datetime(t)),
                ));
            }
            if let Some(s) = &u.session {
                triples.push(Triple::new(
                    ctx.clone(),
                    m(mesur::HAS_SESSION),
                    Term::Literal(Literal::string(s.clone())),
                ));
            }
            if let Some(a) = &u.agent {
                let user = user_iri(a, provider);
                triples.push(Triple::new(user.clone(), rdf::type_(), m(mesur::AGENT)));
                triples.push(Triple::new(ctx.clone(), m(mesur::HAS_USER), user.clone()));
                if let (true, Some(aff)) = (opts.affiliations, &u.affiliation) {
                    let org = organization_iri(aff, provider);
                    let node = affiliation_iri(&org, &user);
                    triples.push(Triple::new(org.clone(), rdf::type_(), m(mesur::ORGANIZATION)));
                    triples.push(Triple::new(node.clone(), rdf::type_(), m(mesur::AFFILIATION)));
                    triples.push(Triple::new(node.clone(), m(mesur::HAS_AFFILIATOR), org));
                    triples.push(Triple::new(node, m(mesur::HAS_AFFILIATEE), user));
                    report.affiliations += 1;
                }
            }
            report.uses += 1;
        }

        for c in &self.citations {
            let node = citation_iri(&c.citing, &c.cited);
            triples.push(Triple::new(node.clone(), rdf::type_(), m(mesur::CITATION)));
            triples.push(Triple::new(
                node.clone(),
                m(mesur::HAS_SOURCE),
                self.ids.doc_to_iri[&c.citing].clone(),
            ));
            triples.push(Triple::new(
                node,
                m(mesur::HAS_SINK),
                self.ids.doc_to_iri[&c.cited].clone(),
            ));
            report.citations += 1;
        }

        if self.is_empty() {
            return Ok(report);
        }
        report.triples_inserted = store.extend(&triples)?;
        Ok(report)
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), SidecarError> {
        let file = SidecarFile {
            version: SIDECAR_VERSION,
            biblio: self.biblio.values().cloned().collect(),
            usage: self.usage.values().cloned().collect(),
            citations: self.citations.iter().cloned().collect(),
        };
        serde_json::to_writer(out, &file)?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Sidecar, SidecarError> {
        let file: SidecarFile = serde_json::from_reader(input)?;
        if file.version != SIDECAR_VERSION {
            return Err(SidecarError::Version(file.version));
        }
        let mut sc = Sidecar::new();
        let corrupt = |reason: String| SidecarError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, reason));
        for r in file.biblio {
            sc.add_biblio(r).map_err(corrupt)?;
        }
        for r in file.usage {
            sc.add_usage(r).map_err(corrupt)?;
        }
        for r in file.citations {
            sc.add_citation(r).map_err(corrupt)?;
        }
        Ok(sc)
    }
}
