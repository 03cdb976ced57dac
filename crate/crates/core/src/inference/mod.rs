//! Re-runnable materialization rules with an exact retraction ledger.
//!
//! Property rules run a registered query script and record every triple the
//! run actually added. Aggregate derivations (group citation, coauthorship,
//! metrics) write one node per deterministic key and replace that node's
//! triples on re-derivation.

mod ledger;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use ledger::{Ledger, LedgerError};

use crate::query::{execute_script, parse_script, QueryError, QueryScript};
use crate::rdf::vocab::{mesur, rdf};
use crate::rdf::{Datatype, Literal, NamespaceTable, Term, Triple};
use crate::store::{Store, StoreError};

/// Ledger key for group-to-group citation nodes.
pub const GROUP_CITATION: &str = "group_citation";
/// Ledger key for coauthorship nodes.
pub const COAUTHOR: &str = "coauthor";
/// Ledger key for metric nodes.
pub const METRIC: &str = "metric";

/// Prefix of every aggregate node IRI.
pub const DERIVED_PREFIX: &str = "urn:mesur:derived:";

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("node {0} does not occur in the store")]
    UnknownNode(String),
    #[error("coauthorship of {0} with itself is undefined")]
    SelfCoauthor(String),
    #[error("empty year window {start}..={end}")]
    EmptyWindow { start: i32, end: i32 },
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self, InferenceError> {
        if start > end || !(0..=9999).contains(&start) || !(0..=9999).contains(&end) {
            return Err(InferenceError::EmptyWindow { start, end });
        }
        Ok(YearRange { start, end })
    }

    pub fn single(year: i32) -> Result<Self, InferenceError> {
        Self::new(year, year)
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// How `partOf` is followed from a group root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartOfMode {
    /// Groups one `partOf` hop below the root.
    Direct,
    /// Groups any positive number of hops below the root.
    #[default]
    Transitive,
}

/// A registered property rule.
#[derive(Debug)]
pub struct Rule {
    pub name: &'static str,
    pub source: &'static str,
    pub description: &'static str,
    /// Properties the rule inserts; each is an inferred property.
    pub produces: &'static [&'static str],
    script: OnceLock<QueryScript>,
}

impl Rule {
    const fn new(
        name: &'static str,
        source: &'static str,
        description: &'static str,
        produces: &'static [&'static str],
    ) -> Self {
        Rule {
            name,
            source,
            description,
            produces,
            script: OnceLock::new(),
        }
    }

    pub fn script(&self) -> &QueryScript {
        self.script.get_or_init(|| {
            parse_script(self.source, &NamespaceTable::default()).expect("registered rule scripts parse")
        })
    }
}

static RULES: [Rule; 5] = [
    Rule::new(
        "authored_by",
        include_str!("rules/authored_by.q"),
        "unit authoredBy author, author authored unit",
        &[mesur::AUTHORED_BY, mesur::AUTHORED],
    ),
    Rule::new(
        "contained_in",
        include_str!("rules/contained_in.q"),
        "unit containedIn group, group contains unit",
        &[mesur::CONTAINED_IN, mesur::CONTAINS],
    ),
    Rule::new(
        "published_by",
        include_str!("rules/published_by.q"),
        "publisher published group, group publishedBy publisher",
        &[mesur::PUBLISHED, mesur::PUBLISHED_BY],
    ),
    Rule::new(
        "used_by",
        include_str!("rules/used_by.q"),
        "article and its group usedBy user, user used both",
        &[mesur::USED_BY, mesur::USED],
    ),
    Rule::new(
        "affiliation",
        include_str!("rules/affiliation.q"),
        "organization hasAffiliate agent, agent hasAffiliation organization",
        &[mesur::HAS_AFFILIATE, mesur::HAS_AFFILIATION],
    ),
];

pub fn rules() -> &'static [Rule] {
    &RULES
}

pub fn rule(name: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.name == name)
}

/// A derived node and the weight or count written on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateNode {
    pub node: Term,
    pub weight: u64,
}

/// Deterministic IRI for an aggregate node of `kind` identified by `key`.
pub fn derived_iri(kind: &str, key: &str) -> Term {
    let digest = Sha256::digest(key.as_bytes());
    let hex: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
    Term::iri(format!("{DERIVED_PREFIX}{kind}:{hex}")).expect("derived IRIs are valid")
}

/// An integral weight as an `xsd:decimal` literal.
pub fn weight_literal(weight: u64) -> Literal {
    Literal::new(weight.to_string(), Datatype::Decimal).expect("digits are a valid decimal")
}

pub fn year_literal(year: i32) -> Literal {
    Literal::year(year).expect("year validated by YearRange")
}

/// Groups reachable below `root` through `partOf`.
pub fn groups_under(store: &Store, root: &Term, mode: PartOfMode) -> BTreeSet<Term> {
    let part_of = mesur::term(mesur::PART_OF);
    let mut out = BTreeSet::new();
    let mut queue: VecDeque<Term> = VecDeque::from([root.clone()]);
    while let Some(g) = queue.pop_front() {
        for child in store.subjects(&part_of, &g) {
            if out.insert(child.clone()) && mode == PartOfMode::Transitive {
                queue.push_back(child);
            }
        }
    }
    out
}

/// Years of the `hasTime` datetimes of `context`.
pub fn context_years<'a>(store: &'a Store, context: &Term) -> impl Iterator<Item = i32> + 'a {
    store
        .objects(context, &mesur::term(mesur::HAS_TIME))
        .into_iter()
        .filter_map(|t| t.as_literal().and_then(Literal::as_datetime))
        .map(|d| d.year())
}

fn has_year_in(store: &Store, context: &Term, window: YearRange) -> bool {
    context_years(store, context).any(|y| window.contains(y))
}

/// Units with a `Publishes` context whose group lies under `root` and whose
/// time falls in `window`.
pub fn published_units(store: &Store, root: &Term, window: YearRange, mode: PartOfMode) -> BTreeSet<Term> {
    let groups = groups_under(store, root, mode);
    let publishes = mesur::term(mesur::PUBLISHES);
    let mut out = BTreeSet::new();
    for g in &groups {
        for ctx in store.subjects(&mesur::term(mesur::HAS_GROUP), g) {
            if !store.contains(&Triple::new(ctx.clone(), rdf::type_(), publishes.clone()))
                || !has_year_in(store, &ctx, window)
            {
                continue;
            }
            out.extend(store.objects(&ctx, &mesur::term(mesur::HAS_UNIT)));
        }
    }
    out
}

/// Units with any `Publishes` context dated within `window`.
pub fn units_published_in(store: &Store, window: YearRange) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for ctx in store.subjects(&rdf::type_(), &mesur::term(mesur::PUBLISHES)) {
        if has_year_in(store, &ctx, window) {
            out.extend(store.objects(&ctx, &mesur::term(mesur::HAS_UNIT)));
        }
    }
    out
}

fn is_unit(store: &Store, node: &Term) -> bool {
    crate::ontology::schema().types_of(node, store).contains(mesur::UNIT)
}

/// Parameters of a group-to-group citation derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCitationRequest {
    pub source_root: Term,
    pub sink_root: Term,
    pub source_window: YearRange,
    pub sink_window: YearRange,
}

#[derive(Debug, Default)]
pub struct InferenceEngine {
    ledger: Ledger,
    pub part_of: PartOfMode,
}

impl InferenceEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_ledger(ledger: Ledger) -> Self {
        InferenceEngine {
            ledger,
            part_of: PartOfMode::default(),
        }
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn into_ledger(self) -> Ledger {
        self.ledger
    }

    /// Runs a registered rule and returns the number of new triples.
    pub fn run_rule(&mut self, name: &str, store: &mut Store) -> Result<usize, InferenceError> {
        let rule = rule(name).ok_or_else(|| InferenceError::UnknownRule(name.to_string()))?;
        let report = execute_script(rule.script(), store)?;
        for t in report.inserted_triples {
            self.ledger.record(rule.name, t);
        }
        log::debug!("rule {} inserted {} triples", rule.name, report.inserted);
        Ok(report.inserted)
    }

    /// Runs every registered rule in registry order.
    pub fn run_all(&mut self, store: &mut Store) -> Result<BTreeMap<&'static str, usize>, InferenceError> {
        let mut out = BTreeMap::new();
        for r in rules() {
            out.insert(r.name, self.run_rule(r.name, store)?);
        }
        Ok(out)
    }

    /// Removes exactly the triples recorded under `name`.
    pub fn retract_rule(&mut self, name: &str, store: &mut Store) -> usize {
        self.ledger.take(name).iter().filter(|t| store.remove(t)).count()
    }

    /// Retracts every ledger entry, property rules and aggregates alike.
    pub fn retract_all(&mut self, store: &mut Store) -> usize {
        let names: Vec<String> = self.ledger.rules().map(str::to_string).collect();
        names.iter().map(|n| self.retract_rule(n, store)).sum()
    }

    /// Replaces everything said about `node` with `triples`, recording the
    /// new triples under `entry`. Returns the number of triples inserted.
    pub fn upsert_node(
        &mut self,
        entry: &str,
        node: &Term,
        triples: Vec<Triple>,
        store: &mut Store,
    ) -> Result<usize, InferenceError> {
        for t in triples.iter() {
            t.validate().map_err(StoreError::from)?;
        }
        let old: Vec<Triple> = store.triples_matching(Some(node), None, None).collect();
        for t in &old {
            store.remove(t);
            self.ledger.forget(entry, t);
        }
        let mut inserted = 0;
        for t in triples {
            if store.insert(&t)? {
                inserted += 1;
                self.ledger.record(entry, t);
            }
        }
        Ok(inserted)
    }

    /// Counts unit-to-unit citations from units published under the source
    /// root in the source window to units published under the sink root in
    /// the sink window, and writes one weighted `Citation` between the roots.
    pub fn derive_group_citation(
        &mut self,
        req: &GroupCitationRequest,
        store: &mut Store,
    ) -> Result<AggregateNode, InferenceError> {
        for root in [&req.source_root, &req.sink_root] {
            if !store.mentions(root) {
                return Err(InferenceError::UnknownNode(root.to_string()));
            }
        }
        let sources = published_units(store, &req.source_root, req.source_window, self.part_of);
        let sinks = published_units(store, &req.sink_root, req.sink_window, self.part_of);
        let mut weight = 0u64;
        for x in store.subjects(&rdf::type_(), &mesur::term(mesur::CITATION)) {
            let hit = store
                .objects(&x, &mesur::term(mesur::HAS_SOURCE))
                .iter()
                .any(|a| sources.contains(a) && is_unit(store, a))
                && store
                    .objects(&x, &mesur::term(mesur::HAS_SINK))
                    .iter()
                    .any(|b| sinks.contains(b) && is_unit(store, b));
            if hit {
                weight += 1;
            }
        }
        let key = format!(
            "{}|{}|{}|{}",
            req.source_root, req.sink_root, req.source_window, req.sink_window
        );
        let node = derived_iri(GROUP_CITATION, &key);
        let m = mesur::term;
        let triples = vec![
            Triple::new(node.clone(), rdf::type_(), m(mesur::CITATION)),
            Triple::new(node.clone(), m(mesur::HAS_SOURCE), req.source_root.clone()),
            Triple::new(node.clone(), m(mesur::HAS_SINK), req.sink_root.clone()),
            Triple::new(
                node.clone(),
                m(mesur::HAS_WEIGHT),
                Term::Literal(weight_literal(weight)),
            ),
            Triple::new(
                node.clone(),
                m(mesur::HAS_SOURCE_START_TIME),
                Term::Literal(year_literal(req.source_window.start)),
            ),
            Triple::new(
                node.clone(),
                m(mesur::HAS_SOURCE_END_TIME),
                Term::Literal(year_literal(req.source_window.end)),
            ),
            Triple::new(
                node.clone(),
                m(mesur::HAS_SINK_START_TIME),
                Term::Literal(year_literal(req.sink_window.start)),
            ),
            Triple::new(
                node.clone(),
                m(mesur::HAS_SINK_END_TIME),
                Term::Literal(year_literal(req.sink_window.end)),
            ),
        ];
        self.upsert_node(GROUP_CITATION, &node, triples, store)?;
        Ok(AggregateNode { node, weight })
    }

    /// Writes the two directed `Coauthor` nodes for `a` and `b`, weighted by
    /// the number of `Publishes` contexts listing both as authors.
    pub fn derive_coauthor(
        &mut self,
        a: &Term,
        b: &Term,
        window: Option<YearRange>,
        store: &mut Store,
    ) -> Result<(AggregateNode, AggregateNode), InferenceError> {
        if a == b {
            return Err(InferenceError::SelfCoauthor(a.to_string()));
        }
        let weight = coauthor_weight(store, a, b, window);
        let forward = self.write_coauthor(a, b, weight, window, store)?;
        let backward = self.write_coauthor(b, a, weight, window, store)?;
        Ok((forward, backward))
    }

    /// Derives coauthorship for every author pair that shares at least one
    /// `Publishes` context. Returns the number of pairs written.
    pub fn derive_all_coauthors(
        &mut self,
        window: Option<YearRange>,
        store: &mut Store,
    ) -> Result<usize, InferenceError> {
        let mut counts: BTreeMap<(Term, Term), u64> = BTreeMap::new();
        for ctx in store.subjects(&rdf::type_(), &mesur::term(mesur::PUBLISHES)) {
            if window.is_some_and(|w| !has_year_in(store, &ctx, w)) {
                continue;
            }
            let authors: BTreeSet<Term> = store
                .objects(&ctx, &mesur::term(mesur::HAS_AUTHOR))
                .into_iter()
                .collect();
            let authors: Vec<Term> = authors.into_iter().collect();
            for i in 0..authors.len() {
                for j in i + 1..authors.len() {
                    *counts.entry((authors[i].clone(), authors[j].clone())).or_default() += 1;
                }
            }
        }
        for ((a, b), w) in &counts {
            self.write_coauthor(a, b, *w, window, store)?;
            self.write_coauthor(b, a, *w, window, store)?;
        }
        Ok(counts.len())
    }

    fn write_coauthor(
        &mut self,
        source: &Term,
        sink: &Term,
        weight: u64,
        window: Option<YearRange>,
        store: &mut Store,
    ) -> Result<AggregateNode, InferenceError> {
        let window_key = window.map_or_else(|| "all".to_string(), |w| w.to_string());
        let node = derived_iri(COAUTHOR, &format!("{source}|{sink}|{window_key}"));
        let m = mesur::term;
        let mut triples = vec![
            Triple::new(node.clone(), rdf::type_(), m(mesur::COAUTHOR)),
            Triple::new(node.clone(), m(mesur::HAS_SOURCE), source.clone()),
            Triple::new(node.clone(), m(mesur::HAS_SINK), sink.clone()),
            Triple::new(
                node.clone(),
                m(mesur::HAS_WEIGHT),
                Term::Literal(weight_literal(weight)),
            ),
        ];
        if let Some(w) = window {
            triples.push(Triple::new(
                node.clone(),
                m(mesur::HAS_START_TIME),
                Term::Literal(year_literal(w.start)),
            ));
            triples.push(Triple::new(
                node.clone(),
                m(mesur::HAS_END_TIME),
                Term::Literal(year_literal(w.end)),
            ));
        }
        self.upsert_node(COAUTHOR, &node, triples, store)?;
        Ok(AggregateNode { node, weight })
    }
}

/// Number of `Publishes` contexts with both `a` and `b` as authors.
pub fn coauthor_weight(store: &Store, a: &Term, b: &Term, window: Option<YearRange>) -> u64 {
    let has_author = mesur::term(mesur::HAS_AUTHOR);
    let publishes = mesur::term(mesur::PUBLISHES);
    store
        .subjects(&has_author, a)
        .into_iter()
        .filter(|ctx| store.contains(&Triple::new(ctx.clone(), has_author.clone(), b.clone())))
        .filter(|ctx| store.contains(&Triple::new(ctx.clone(), rdf::type_(), publishes.clone())))
        .filter(|ctx| window.is_none_or(|w| has_year_in(store, ctx, w)))
        .count() as u64
}
