//! Impact Factor and Usage Impact Factor as `NumericMetric` nodes.
//!
//! For a group root `G`, target year `Y`, and publication window `W`
//! (default `[Y-2, Y-1]`), the denominator is the number of distinct units
//! with a `Publishes` context in a group below `G` dated within `W`.
//!
//! * Impact Factor numerator: distinct (source, sink) unit pairs linked by a
//!   `Citation` whose sink is a window unit and whose source has a
//!   `Publishes` context dated `Y`.
//! * Usage Impact Factor numerator: distinct `Uses` contexts dated `Y`
//!   whose document is a window unit.
//!
//! Values are exact quotients rounded half-to-even at a fixed scale.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decimal::{Decimal, DEFAULT_SCALE};
use crate::inference::{
    derived_iri, published_units, units_published_in, year_literal, InferenceEngine, InferenceError, PartOfMode,
    YearRange, METRIC,
};
use crate::rdf::vocab::{mesur, rdf};
use crate::rdf::{Literal, Term, Triple};
use crate::store::Store;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("group {0} does not occur in the store")]
    UnknownGroup(String),
    #[error("{kind} of {object} for {year} is undefined: no units published in {window}")]
    ZeroDenominator {
        kind: MetricKind,
        object: String,
        year: i32,
        window: YearRange,
    },
    #[error("publication window {window} must end before the target year {year}")]
    WindowAfterYear { window: YearRange, year: i32 },
    #[error("unknown metric `{0}` (expected `if` or `uif`)")]
    UnknownKind(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MetricKind {
    ImpactFactor,
    UsageImpactFactor,
}

impl MetricKind {
    pub fn class_iri(self) -> &'static str {
        match self {
            MetricKind::ImpactFactor => mesur::IMPACT_FACTOR,
            MetricKind::UsageImpactFactor => mesur::USAGE_IMPACT_FACTOR,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::ImpactFactor => "ImpactFactor",
            MetricKind::UsageImpactFactor => "UsageImpactFactor",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "if" | "impactfactor" | "impact_factor" => Ok(MetricKind::ImpactFactor),
            "uif" | "usageimpactfactor" | "usage_impact_factor" => Ok(MetricKind::UsageImpactFactor),
            _ => Err(MetricError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricRequest {
    pub kind: MetricKind,
    /// Group root IRI.
    pub object: Term,
    pub year: i32,
    pub window: YearRange,
}

impl MetricRequest {
    /// A request with the default two-year window preceding `year`.
    pub fn new(kind: MetricKind, object: Term, year: i32) -> Result<Self, MetricError> {
        let window = YearRange::new(year - 2, year - 1)?;
        Ok(MetricRequest {
            kind,
            object,
            year,
            window,
        })
    }

    pub fn with_window(mut self, window: YearRange) -> Result<Self, MetricError> {
        if window.end >= self.year {
            return Err(MetricError::WindowAfterYear {
                window,
                year: self.year,
            });
        }
        self.window = window;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricResult {
    pub request: MetricRequest,
    pub numerator: u64,
    pub denominator: u64,
    pub value: Decimal,
    pub node: Term,
}

/// Column names of [`MetricResult::tsv_line`].
pub const TSV_HEADER: &str = "metric\tobject\tyear\tnumerator\tdenominator\tvalue";

impl MetricResult {
    pub fn tsv_line(&self) -> String {
        let object = self
            .request
            .object
            .as_iri()
            .map_or_else(|| self.request.object.to_string(), str::to_string);
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.request.kind, object, self.request.year, self.numerator, self.denominator, self.value
        )
    }
}

/// Numerator and denominator without writing anything.
pub fn counts(req: &MetricRequest, store: &Store, mode: PartOfMode) -> Result<(u64, u64), MetricError> {
    if !store.mentions(&req.object) {
        return Err(MetricError::UnknownGroup(req.object.to_string()));
    }
    let window_units = published_units(store, &req.object, req.window, mode);
    let target = YearRange::single(req.year)?;
    let numerator = match req.kind {
        MetricKind::ImpactFactor => {
            let citing = units_published_in(store, target);
            let mut pairs: BTreeSet<(Term, Term)> = BTreeSet::new();
            for x in store.subjects(&rdf::type_(), &mesur::term(mesur::CITATION)) {
                let sinks = store.objects(&x, &mesur::term(mesur::HAS_SINK));
                for source in store.objects(&x, &mesur::term(mesur::HAS_SOURCE)) {
                    if !citing.contains(&source) {
                        continue;
                    }
                    for sink in sinks.iter().filter(|s| window_units.contains(*s)) {
                        pairs.insert((source.clone(), sink.clone()));
                    }
                }
            }
            pairs.len() as u64
        }
        MetricKind::UsageImpactFactor => store
            .subjects(&rdf::type_(), &mesur::term(mesur::USES))
            .into_iter()
            .filter(|u| {
                crate::inference::context_years(store, u).any(|y| y == req.year)
                    && store
                        .objects(u, &mesur::term(mesur::HAS_DOCUMENT))
                        .iter()
                        .any(|d| window_units.contains(d))
            })
            .count() as u64,
    };
    Ok((numerator, window_units.len() as u64))
}

/// Computes the metric and upserts its node under the metric ledger entry.
pub fn compute(
    engine: &mut InferenceEngine,
    req: &MetricRequest,
    store: &mut Store,
    precision: u32,
) -> Result<MetricResult, MetricError> {
    let (numerator, denominator) = counts(req, store, engine.part_of)?;
    if denominator == 0 {
        return Err(MetricError::ZeroDenominator {
            kind: req.kind,
            object: req.object.to_string(),
            year: req.year,
            window: req.window,
        });
    }
    let value = Decimal::from_ratio(numerator as u128, denominator as u128, precision).expect("nonzero denominator");
    let key = format!("{}|{}|{}|{}", req.kind, req.object, req.year, req.window);
    let node = derived_iri(METRIC, &key);
    let m = mesur::term;
    let triples = vec![
        Triple::new(node.clone(), rdf::type_(), m(req.kind.class_iri())),
        Triple::new(node.clone(), m(mesur::HAS_OBJECT), req.object.clone()),
        Triple::new(
            node.clone(),
            m(mesur::HAS_START_TIME),
            Term::Literal(year_literal(req.year)),
        ),
        Triple::new(
            node.clone(),
            m(mesur::HAS_END_TIME),
            Term::Literal(year_literal(req.year)),
        ),
        Triple::new(
            node.clone(),
            m(mesur::HAS_NUMERIC_VALUE),
            Term::Literal(Literal::decimal(value)),
        ),
    ];
    engine.upsert_node(METRIC, &node, triples, store)?;
    Ok(MetricResult {
        request: req.clone(),
        numerator,
        denominator,
        value,
        node,
    })
}

pub fn impact_factor(
    engine: &mut InferenceEngine,
    object: Term,
    year: i32,
    store: &mut Store,
) -> Result<MetricResult, MetricError> {
    let req = MetricRequest::new(MetricKind::ImpactFactor, object, year)?;
    compute(engine, &req, store, DEFAULT_SCALE)
}

pub fn usage_impact_factor(
    engine: &mut InferenceEngine,
    object: Term,
    year: i32,
    store: &mut Store,
) -> Result<MetricResult, MetricError> {
    let req = MetricRequest::new(MetricKind::UsageImpactFactor, object, year)?;
    compute(engine, &req, store, DEFAULT_SCALE)
}

/// The equivalent two-block query script. It follows `partOf` one hop, so
/// it agrees with [`counts`] under [`PartOfMode::Direct`] when every unit
/// has one `Publishes` context and every cited pair one `Citation`.
pub fn reference_script(req: &MetricRequest) -> String {
    let g = &req.object;
    let (lo, hi, y) = (req.window.start - 1, req.window.end + 1, req.year);
    let first = match req.kind {
        MetricKind::ImpactFactor => format!(
            "SELECT ?x
WHERE
    ( ?x rdf:type mesur:Publishes )
    ( ?x mesur:hasUnit ?a )
    ( ?x mesur:hasGroup ?b )
    ( ?b mesur:partOf {g} )
    ( ?x mesur:hasTime ?t ) AND (?t > {lo} AND ?t < {hi})
    ( ?y rdf:type mesur:Citation )
    ( ?y mesur:hasSource ?c )
    ( ?y mesur:hasSink ?a )
    ( ?z rdf:type mesur:Publishes )
    ( ?z mesur:hasUnit ?c )
    ( ?z mesur:hasTime ?u ) AND ?u = {y}
"
        ),
        MetricKind::UsageImpactFactor => format!(
            "SELECT ?x
WHERE
    ( ?x rdf:type mesur:Uses )
    ( ?x mesur:hasDocument ?a )
    ( ?x mesur:hasTime ?t ) AND ?t = {y}
    ( ?y rdf:type mesur:Publishes )
    ( ?y mesur:hasUnit ?a )
    ( ?y mesur:hasGroup ?c )
    ( ?c mesur:partOf {g} )
    ( ?y mesur:hasTime ?u ) AND (?u > {lo} AND ?u < {hi})
"
        ),
    };
    format!(
        "{first}
SELECT ?y
WHERE
    ( ?y rdf:type mesur:Publishes )
    ( ?y mesur:hasGroup ?a )
    ( ?a mesur:partOf {g} )
    ( ?y mesur:hasTime ?t ) AND (?t > {lo} AND ?t < {hi})

INSERT < _1 rdf:type mesur:{kind} >
INSERT < _1 mesur:hasObject {g} >
INSERT < _1 mesur:hasStartTime {y} >
INSERT < _1 mesur:hasEndTime {y} >
INSERT < _1 mesur:hasNumericValue (COUNT(?x) / COUNT(?y)) > .
",
        kind = req.kind.name()
    )
}
