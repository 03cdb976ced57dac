//! Block evaluation: a greedy static plan followed by an index nested-loop
//! join with filters applied as soon as their variables are bound.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{CmpOp, Filter, Operand, SelectBlock};
use crate::rdf::{Datatype, DateTimeValue, Literal, Term};
use crate::store::{Bindings, PatternTerm, Store, TermId};

/// Cap on range counts used for plan ordering.
const ESTIMATE_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot compare {left} {op} {right}")]
    Incomparable { left: String, op: CmpOp, right: String },
}

/// Distinct solutions of a block over all of its variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solutions {
    pub variables: Vec<String>,
    /// Sorted, duplicate-free; `rows[i][j]` binds `variables[j]`.
    pub rows: Vec<Vec<TermId>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    /// Distinct rows restricted to `vars`, sorted by id.
    pub fn project(&self, vars: &[String]) -> Vec<Vec<TermId>> {
        let cols: Vec<usize> = vars.iter().filter_map(|v| self.column(v)).collect();
        let set: BTreeSet<Vec<TermId>> = self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        set.into_iter().collect()
    }

    /// Distinct projected rows as name → term maps, sorted by term.
    pub fn bindings(&self, vars: &[String], store: &Store) -> Vec<Bindings> {
        let mut out: Vec<Bindings> = self
            .project(vars)
            .into_iter()
            .map(|row| {
                vars.iter()
                    .cloned()
                    .zip(row.into_iter().map(|id| store.term(id).clone()))
                    .collect()
            })
            .collect();
        out.sort_by(|a, b| a.values().cmp(b.values()));
        out
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Const(TermId),
    /// Variable already bound by an earlier step.
    Bound(usize),
    /// First occurrence: binds the variable.
    Bind(usize),
    /// Repeated occurrence within the same pattern.
    Same(usize),
}

struct Step {
    slots: [Slot; 3],
    filters: Vec<usize>,
}

enum CompiledOperand {
    Var(usize),
    Value(Term),
}

enum CompiledFilter {
    Compare(CompiledOperand, CmpOp, CompiledOperand),
    And(Vec<CompiledFilter>),
    Or(Vec<CompiledFilter>),
}

pub fn evaluate_block(block: &SelectBlock, store: &Store) -> Result<Solutions, EvalError> {
    let variables = block.variables();
    let index = |v: &str| variables.iter().position(|x| x == v).expect("pattern variable");
    let mut empty = Solutions {
        variables: variables.clone(),
        rows: Vec::new(),
    };

    // Pattern slots as constants or variable indexes; a constant missing
    // from the dictionary makes the block unsatisfiable.
    let mut patterns: Vec<[Result<TermId, usize>; 3]> = Vec::with_capacity(block.patterns.len());
    for p in &block.patterns {
        let mut slots = [Ok(TermId(0)); 3];
        for (slot, term) in slots.iter_mut().zip(p.slots()) {
            *slot = match term {
                PatternTerm::Term(t) => match store.lookup(t) {
                    Some(id) => Ok(id),
                    None => return Ok(empty),
                },
                PatternTerm::Var(v) => Err(index(v)),
            };
        }
        patterns.push(slots);
    }

    let order = plan(&patterns, variables.len(), store);
    let filters: Vec<(CompiledFilter, Vec<usize>)> = block
        .filters
        .iter()
        .map(|f| {
            (
                compile_filter(f, &index),
                f.variables().iter().map(|v| index(v)).collect(),
            )
        })
        .collect();

    let mut bound = vec![false; variables.len()];
    let mut steps: Vec<Step> = Vec::with_capacity(order.len());
    let mut placed = vec![false; filters.len()];
    for &pi in &order {
        let mut slots = [Slot::Const(TermId(0)); 3];
        let mut local: Vec<usize> = Vec::new();
        for (k, s) in patterns[pi].iter().enumerate() {
            slots[k] = match *s {
                Ok(id) => Slot::Const(id),
                Err(v) if bound[v] => Slot::Bound(v),
                Err(v) if local.contains(&v) => Slot::Same(v),
                Err(v) => {
                    local.push(v);
                    Slot::Bind(v)
                }
            };
        }
        for v in local {
            bound[v] = true;
        }
        let mut here = Vec::new();
        for (fi, (_, vars)) in filters.iter().enumerate() {
            if !placed[fi] && vars.iter().all(|&v| bound[v]) {
                placed[fi] = true;
                here.push(fi);
            }
        }
        steps.push(Step { slots, filters: here });
    }

    let mut out = BTreeSet::new();
    let mut row = vec![TermId(0); variables.len()];
    let ctx = Join {
        store,
        steps: &steps,
        filters: &filters,
    };
    ctx.run(0, &mut row, None, &mut out)?;
    empty.rows = out.into_iter().collect();
    Ok(empty)
}

/// Greedy order: fewest unbound slots given the variables bound so far,
/// then the smallest constant-only index range, then source order.
fn plan(patterns: &[[Result<TermId, usize>; 3]], nvars: usize, store: &Store) -> Vec<usize> {
    let estimates: Vec<usize> = patterns
        .iter()
        .map(|p| {
            let c = |k: usize| p[k].ok();
            store.count_ids(c(0), c(1), c(2), ESTIMATE_CAP)
        })
        .collect();
    let mut bound = vec![false; nvars];
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .min_by_key(|&(_, &i)| {
                let unbound = patterns[i].iter().filter(|s| matches!(s, Err(v) if !bound[*v])).count();
                (unbound, estimates[i], i)
            })
            .expect("non-empty");
        remaining.remove(pos);
        for s in &patterns[best] {
            if let Err(v) = s {
                bound[*v] = true;
            }
        }
        order.push(best);
    }
    order
}

fn compile_filter(f: &Filter, index: &impl Fn(&str) -> usize) -> CompiledFilter {
    let operand = |o: &Operand| match o {
        Operand::Var(v) => CompiledOperand::Var(index(v)),
        Operand::Value(l) => CompiledOperand::Value(Term::Literal(l.clone())),
    };
    match f {
        Filter::Compare { left, op, right } => CompiledFilter::Compare(operand(left), *op, operand(right)),
        Filter::And(fs) => CompiledFilter::And(fs.iter().map(|f| compile_filter(f, index)).collect()),
        Filter::Or(fs) => CompiledFilter::Or(fs.iter().map(|f| compile_filter(f, index)).collect()),
    }
}

struct Join<'a> {
    store: &'a Store,
    steps: &'a [Step],
    filters: &'a [(CompiledFilter, Vec<usize>)],
}

impl Join<'_> {
    /// `failed` carries a filter error raised on a partial row; it surfaces
    /// only if that row completes, so errors do not depend on the join order.
    fn run(
        &self,
        depth: usize,
        row: &mut Vec<TermId>,
        failed: Option<&EvalError>,
        out: &mut BTreeSet<Vec<TermId>>,
    ) -> Result<(), EvalError> {
        let Some(step) = self.steps.get(depth) else {
            if let Some(e) = failed {
                return Err(e.clone());
            }
            out.insert(row.clone());
            return Ok(());
        };
        let key = |s: Slot, row: &[TermId]| match s {
            Slot::Const(id) => Some(id),
            Slot::Bound(v) => Some(row[v]),
            Slot::Bind(_) | Slot::Same(_) => None,
        };
        let [s, p, o] = step.slots;
        let matches: Vec<[TermId; 3]> = self.store.scan_ids(key(s, row), key(p, row), key(o, row)).collect();
        'triples: for t in matches {
            for (k, slot) in step.slots.iter().enumerate() {
                match *slot {
                    Slot::Bind(v) => row[v] = t[k],
                    Slot::Same(v) if row[v] != t[k] => continue 'triples,
                    _ => {}
                }
            }
            let mut error = None;
            for &fi in &step.filters {
                match self.eval(&self.filters[fi].0, row) {
                    Ok(true) => {}
                    Ok(false) => continue 'triples,
                    Err(e) => {
                        error.get_or_insert(e);
                    }
                }
            }
            self.run(depth + 1, row, failed.or(error.as_ref()), out)?;
        }
        Ok(())
    }

    fn eval(&self, f: &CompiledFilter, row: &[TermId]) -> Result<bool, EvalError> {
        match f {
            CompiledFilter::Compare(l, op, r) => {
                let value = |o: &'_ CompiledOperand| -> Term {
                    match o {
                        CompiledOperand::Var(v) => self.store.term(row[*v]).clone(),
                        CompiledOperand::Value(t) => t.clone(),
                    }
                };
                compare(&value(l), *op, &value(r))
            }
            CompiledFilter::And(fs) => {
                for f in fs {
                    if !self.eval(f, row)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            CompiledFilter::Or(fs) => {
                for f in fs {
                    if self.eval(f, row)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// Typed comparison. Datetimes compare at year precision against bare
/// integers; integers and decimals compare numerically; strings compare
/// lexicographically; IRIs and blank nodes support only `=`.
pub fn compare(left: &Term, op: CmpOp, right: &Term) -> Result<bool, EvalError> {
    let ordering = match (left, right) {
        (Term::Literal(a), Term::Literal(b)) => literal_order(a, b),
        (Term::Literal(_), _) | (_, Term::Literal(_)) => None,
        _ if op == CmpOp::Eq => return Ok(left == right),
        _ => None,
    };
    let Some(ord) = ordering else {
        return Err(EvalError::Incomparable {
            left: left.to_string(),
            op,
            right: right.to_string(),
        });
    };
    Ok(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Gt => ord == Ordering::Greater,
    })
}

fn year_of(l: &Literal) -> Option<DateTimeValue> {
    l.lexical().parse::<i32>().ok().and_then(DateTimeValue::from_year)
}

fn literal_order(a: &Literal, b: &Literal) -> Option<Ordering> {
    use Datatype::*;
    match (a.datatype(), b.datatype()) {
        (DateTime, DateTime) => Some(a.as_datetime()?.compare(&b.as_datetime()?)),
        (DateTime, Integer) => Some(a.as_datetime()?.compare(&year_of(b)?)),
        (Integer, DateTime) => Some(year_of(a)?.compare(&b.as_datetime()?)),
        (Integer | Decimal, Integer | Decimal) => Some(a.as_decimal()?.cmp(&b.as_decimal()?)),
        (String, String) => Some(a.lexical().cmp(b.lexical())),
        _ => None,
    }
}
