//! The query dialect: parenthesized conjunctive patterns with attached
//! filters, `COUNT` aggregates, and `INSERT` templates.
//!
//! A template whose variables all belong to one block fires once per
//! distinct row of that block. A template holding only constants,
//! placeholders, and aggregates fires once per execution. `COUNT(?v)` is the
//! number of distinct solutions of the block that owns `?v`, over all of that
//! block's variables.

mod ast;
mod eval;
mod parser;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use ast::{
    AggExpr, CmpOp, Dispatch, Filter, InsertTemplate, ItemObject, ItemTerm, Operand, QueryScript, SelectBlock,
};
pub use eval::{compare, evaluate_block, EvalError, Solutions};
pub use parser::{parse_script, parse_script_bytes, ParseError, ParseErrorKind, MAX_DEPTH};

use crate::decimal::{Decimal, DEFAULT_SCALE};
use crate::ontology::schema;
use crate::rdf::vocab::rdf;
use crate::rdf::{Datatype, Literal, Term, TermError, Triple};
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("division by zero while computing {metric}")]
    DivisionByZero { metric: String },
    #[error("aggregate arithmetic overflow")]
    Overflow,
    #[error("template produced an invalid triple: {0}")]
    InvalidTriple(#[from] TermError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone)]
pub struct ExecOptions {
    /// Fractional digits of aggregate division results.
    pub precision: u32,
    /// Placeholder label (digits only) → node to use instead of a fresh blank.
    pub placeholders: BTreeMap<String, Term>,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            precision: DEFAULT_SCALE,
            placeholders: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExecutionReport {
    /// Distinct projected rows per block.
    pub block_rows: Vec<usize>,
    /// Distinct full solutions per block; the value `COUNT` sees.
    pub block_solutions: Vec<usize>,
    /// Distinct triples produced by all templates.
    pub generated: usize,
    /// Produced triples that were not already present.
    pub inserted: usize,
    pub inserted_triples: Vec<Triple>,
    pub placeholders: BTreeMap<String, Term>,
}

pub fn execute_script(script: &QueryScript, store: &mut Store) -> Result<ExecutionReport, QueryError> {
    execute_script_with(script, store, &ExecOptions::default())
}

/// Evaluates every block, computes all template triples, then inserts them.
/// Nothing is written when evaluation or aggregate arithmetic fails.
pub fn execute_script_with(
    script: &QueryScript,
    store: &mut Store,
    opts: &ExecOptions,
) -> Result<ExecutionReport, QueryError> {
    let solutions: Vec<Solutions> = script
        .blocks
        .iter()
        .map(|b| evaluate_block(b, store))
        .collect::<Result<_, _>>()?;

    let mut aggregates: Vec<Option<Literal>> = Vec::with_capacity(script.inserts.len());
    for t in &script.inserts {
        aggregates.push(match &t.object {
            ItemObject::Aggregate(expr) => {
                let value = aggregate(expr, &solutions).map_err(|e| match e {
                    AggFailure::DivisionByZero => QueryError::DivisionByZero {
                        metric: metric_name(script, &t.subject),
                    },
                    AggFailure::Overflow => QueryError::Overflow,
                })?;
                Some(aggregate_literal(value, expr, &t.predicate, opts.precision)?)
            }
            ItemObject::Item(_) => None,
        });
    }

    let mut placeholders = BTreeMap::new();
    for t in &script.inserts {
        let object = match &t.object {
            ItemObject::Item(i) => Some(i),
            ItemObject::Aggregate(_) => None,
        };
        for item in [Some(&t.subject), object].into_iter().flatten() {
            if let ItemTerm::Placeholder(label) = item {
                if !placeholders.contains_key(label) {
                    let node = match opts.placeholders.get(label) {
                        Some(n) => n.clone(),
                        None => store.fresh_blank(),
                    };
                    placeholders.insert(label.clone(), node);
                }
            }
        }
    }

    let mut produced: Vec<Triple> = Vec::new();
    let mut seen: BTreeSet<Triple> = BTreeSet::new();
    for (t, agg) in script.inserts.iter().zip(&aggregates) {
        let mut emit = |row: Option<(&Solutions, &Vec<crate::store::TermId>)>| -> Result<(), QueryError> {
            let resolve = |item: &ItemTerm| -> Term {
                match item {
                    ItemTerm::Term(term) => term.clone(),
                    ItemTerm::Placeholder(l) => placeholders[l].clone(),
                    ItemTerm::Var(v) => {
                        let (sols, r) = row.expect("row variables imply per-row dispatch");
                        store.term(r[sols.column(v).expect("owned variable")]).clone()
                    }
                }
            };
            let object = match (&t.object, agg) {
                (_, Some(lit)) => Term::Literal(lit.clone()),
                (ItemObject::Item(i), None) => resolve(i),
                (ItemObject::Aggregate(_), None) => unreachable!("aggregates computed above"),
            };
            let triple = Triple::checked(resolve(&t.subject), resolve(&t.predicate), object)?;
            if seen.insert(triple.clone()) {
                produced.push(triple);
            }
            Ok(())
        };
        match t.dispatch {
            Dispatch::Once => emit(None)?,
            Dispatch::PerRow(b) => {
                for r in &solutions[b].rows {
                    emit(Some((&solutions[b], r)))?;
                }
            }
        }
    }

    let mut report = ExecutionReport {
        block_rows: script
            .blocks
            .iter()
            .zip(&solutions)
            .map(|(b, s)| s.project(&b.projection).len())
            .collect(),
        block_solutions: solutions.iter().map(Solutions::len).collect(),
        generated: produced.len(),
        placeholders,
        ..Default::default()
    };
    for triple in produced {
        if store.insert(&triple)? {
            report.inserted += 1;
            report.inserted_triples.push(triple);
        }
    }
    Ok(report)
}

enum AggFailure {
    DivisionByZero,
    Overflow,
}

/// Exact rational value of an aggregate expression, as (numerator, denominator).
fn aggregate(expr: &AggExpr, solutions: &[Solutions]) -> Result<(u128, u128), AggFailure> {
    match expr {
        AggExpr::Count { block, .. } => Ok((solutions[*block].len() as u128, 1)),
        AggExpr::Div(l, r) => {
            let (a, b) = aggregate(l, solutions)?;
            let (c, d) = aggregate(r, solutions)?;
            if c == 0 {
                return Err(AggFailure::DivisionByZero);
            }
            let num = a.checked_mul(d).ok_or(AggFailure::Overflow)?;
            let den = b.checked_mul(c).ok_or(AggFailure::Overflow)?;
            let g = gcd(num, den);
            Ok((num / g, den / g))
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn aggregate_literal(
    value: (u128, u128),
    expr: &AggExpr,
    predicate: &ItemTerm,
    precision: u32,
) -> Result<Literal, QueryError> {
    let (num, den) = value;
    if let AggExpr::Count { .. } = expr {
        let range = match predicate {
            ItemTerm::Term(t) => t.as_iri().and_then(|p| schema().literal_range(p)),
            _ => None,
        };
        let n = i64::try_from(num).map_err(|_| QueryError::Overflow)?;
        return Ok(match range {
            Some(Datatype::Decimal) => Literal::new(n.to_string(), Datatype::Decimal)?,
            _ => Literal::integer(n),
        });
    }
    let d = Decimal::from_ratio(num, den, precision).ok_or(QueryError::Overflow)?;
    Ok(Literal::decimal(d))
}

/// Local name of the `rdf:type` asserted for `subject` by the script's
/// templates, used to name a failing metric.
fn metric_name(script: &QueryScript, subject: &ItemTerm) -> String {
    script
        .inserts
        .iter()
        .filter(|t| &t.subject == subject)
        .find_map(|t| match (&t.predicate, &t.object) {
            (ItemTerm::Term(p), ItemObject::Item(ItemTerm::Term(Term::Iri(class)))) if p == &rdf::type_() => {
                let iri = class.as_str();
                Some(iri.rsplit(['#', '/', ':']).next().unwrap_or(iri).to_string())
            }
            _ => None,
        })
        .unwrap_or_else(|| "aggregate".to_string())
}
