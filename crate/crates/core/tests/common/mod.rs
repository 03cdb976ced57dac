//! Test support: a synthetic corpus generator and reference implementations
//! that share no code with the evaluator or the store indexes.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use mesur_core::query::{CmpOp, Dispatch, Filter, ItemObject, ItemTerm, Operand, QueryScript, SelectBlock};
use mesur_core::rdf::vocab::{mesur, rdf};
use mesur_core::rdf::{Datatype, Literal, Term, Triple};
use mesur_core::store::PatternTerm;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn iri(s: &str) -> Term {
    Term::iri(s).unwrap()
}

pub fn t(s: &Term, p: &str, o: Term) -> Triple {
    Triple::new(s.clone(), iri(p), o)
}

pub fn year(y: i32) -> Term {
    Term::Literal(Literal::year(y).unwrap())
}

pub fn datetime(lex: &str) -> Term {
    Term::Literal(Literal::new(lex, Datatype::DateTime).unwrap())
}

/// Shape of a generated corpus.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub contexts: usize,
    pub journals: usize,
    pub agents: usize,
    pub years: (i32, i32),
}

impl Profile {
    pub fn sized(contexts: usize) -> Self {
        Profile {
            contexts,
            journals: (contexts / 40).clamp(2, 40),
            agents: (contexts / 3).clamp(4, 1500),
            years: (2000, 2010),
        }
    }
}

pub const ISSNS: &[&str] = &["urn:issn:1082-9873", "urn:issn:1751-1577", "urn:issn:0138-9130"];

pub fn journal_root(i: usize) -> Term {
    match ISSNS.get(i) {
        Some(s) => iri(s),
        None => iri(&format!("urn:issn:9{i:03}-0000")),
    }
}

/// A MESUR-shaped corpus with some noise: optional properties left out,
/// preprints and untyped units mixed in, nested editions, repeated
/// publication contexts for a unit.
pub fn corpus(seed: u64, profile: Profile) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let (y0, y1) = profile.years;
    let mut editions: Vec<(Term, i32)> = Vec::new();
    for j in 0..profile.journals {
        let root = journal_root(j);
        out.push(t(&root, rdf::TYPE, mesur::term(mesur::JOURNAL)));
        for y in y0..=y1 {
            let ed = iri(&format!("{}:{y}", root.as_iri().unwrap()));
            out.push(t(&ed, mesur::PART_OF, root.clone()));
            if rng.gen_bool(0.15) {
                let issue = iri(&format!("{}:{y}:1", root.as_iri().unwrap()));
                out.push(t(&issue, mesur::PART_OF, ed.clone()));
                editions.push((issue, y));
            } else {
                editions.push((ed, y));
            }
        }
    }
    let agents: Vec<Term> = (0..profile.agents).map(|i| iri(&format!("urn:agent:{i}"))).collect();
    let orgs: Vec<Term> = (0..profile.agents / 10 + 2)
        .map(|i| iri(&format!("urn:org:{i}")))
        .collect();
    let publishers: Vec<Term> = (0..profile.journals.max(2))
        .map(|i| iri(&format!("urn:publisher:{i}")))
        .collect();
    for a in &agents {
        out.push(t(a, rdf::TYPE, mesur::term(mesur::HUMAN)));
    }
    let mut units: Vec<Term> = Vec::new();
    for c in 0..profile.contexts {
        let ctx = iri(&format!("urn:ctx:{c}"));
        let roll: f64 = rng.gen();
        if roll < 0.5 || units.is_empty() {
            let unit = if units.is_empty() || rng.gen_bool(0.9) {
                let u = iri(&format!("urn:unit:{}", units.len()));
                match rng.gen_range(0..10) {
                    0 => out.push(t(&u, rdf::TYPE, mesur::term(mesur::PREPRINT_ARTICLE))),
                    1 => {}
                    _ => out.push(t(&u, rdf::TYPE, mesur::term(mesur::ARTICLE))),
                }
                units.push(u.clone());
                u
            } else {
                units.choose(&mut rng).unwrap().clone()
            };
            out.push(t(&ctx, rdf::TYPE, mesur::term(mesur::PUBLISHES)));
            out.push(t(&ctx, mesur::HAS_UNIT, unit));
            let (ed, y) = editions.choose(&mut rng).unwrap().clone();
            if rng.gen_bool(0.9) {
                out.push(t(&ctx, mesur::HAS_GROUP, ed));
            }
            if rng.gen_bool(0.95) {
                out.push(t(&ctx, mesur::HAS_TIME, year(y)));
            }
            if rng.gen_bool(0.7) {
                out.push(t(
                    &ctx,
                    mesur::HAS_PUBLISHER,
                    publishers.choose(&mut rng).unwrap().clone(),
                ));
            }
            let k = rng.gen_range(0..=4);
            for a in agents.choose_multiple(&mut rng, k) {
                out.push(t(&ctx, mesur::HAS_AUTHOR, a.clone()));
            }
        } else if roll < 0.75 {
            out.push(t(&ctx, rdf::TYPE, mesur::term(mesur::USES)));
            out.push(t(&ctx, mesur::HAS_DOCUMENT, units.choose(&mut rng).unwrap().clone()));
            out.push(t(&ctx, mesur::HAS_USER, agents.choose(&mut rng).unwrap().clone()));
            let y = rng.gen_range(y0..=y1);
            let time = if rng.gen_bool(0.5) {
                year(y)
            } else {
                datetime(&format!(
                    "{y}-{:02}-{:02}T{:02}:00:03",
                    rng.gen_range(1..=12),
                    rng.gen_range(1..=28),
                    rng.gen_range(0..24)
                ))
            };
            out.push(t(&ctx, mesur::HAS_TIME, time));
        } else if roll < 0.95 {
            out.push(t(&ctx, rdf::TYPE, mesur::term(mesur::CITATION)));
            out.push(t(&ctx, mesur::HAS_SOURCE, units.choose(&mut rng).unwrap().clone()));
            out.push(t(&ctx, mesur::HAS_SINK, units.choose(&mut rng).unwrap().clone()));
        } else {
            out.push(t(&ctx, rdf::TYPE, mesur::term(mesur::AFFILIATION)));
            out.push(t(&ctx, mesur::HAS_AFFILIATOR, orgs.choose(&mut rng).unwrap().clone()));
            out.push(t(&ctx, mesur::HAS_AFFILIATEE, agents.choose(&mut rng).unwrap().clone()));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Nested-loop reference evaluator

pub type Row = BTreeMap<String, Term>;

fn unify(slot: &PatternTerm, value: &Term, row: &mut Row) -> bool {
    match slot {
        PatternTerm::Term(c) => c == value,
        PatternTerm::Var(v) => match row.get(v) {
            Some(bound) => bound == value,
            None => {
                row.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

/// `(year, full lexical)`; the second part is `None` at year precision.
fn datetime_key(lex: &str) -> (i32, Option<&str>) {
    let digits = lex
        .char_indices()
        .skip(1)
        .find(|&(_, c)| c == '-')
        .map_or(lex.len(), |(i, _)| i);
    let y: i32 = lex[..digits].parse().unwrap();
    (y, (digits < lex.len()).then_some(lex))
}

fn literal_order(a: &Literal, b: &Literal) -> Option<Ordering> {
    use Datatype::*;
    match (a.datatype(), b.datatype()) {
        (DateTime, DateTime) => {
            let (ya, fa) = datetime_key(a.lexical());
            let (yb, fb) = datetime_key(b.lexical());
            match (fa, fb) {
                (Some(x), Some(y)) => Some(x.cmp(y)),
                _ => Some(ya.cmp(&yb)),
            }
        }
        (DateTime, Integer) => Some(datetime_key(a.lexical()).0.cmp(&b.lexical().parse().ok()?)),
        (Integer, DateTime) => literal_order(b, a).map(Ordering::reverse),
        (Integer | Decimal, Integer | Decimal) => {
            let x: f64 = a.lexical().parse().ok()?;
            let y: f64 = b.lexical().parse().ok()?;
            x.partial_cmp(&y)
        }
        (String, String) => Some(a.lexical().cmp(b.lexical())),
        _ => None,
    }
}

/// `None` when the operands are incomparable.
pub fn oracle_compare(l: &Term, op: CmpOp, r: &Term) -> Option<bool> {
    let ord = match (l, r) {
        (Term::Literal(a), Term::Literal(b)) => literal_order(a, b)?,
        (Term::Literal(_), _) | (_, Term::Literal(_)) => return None,
        _ if op == CmpOp::Eq => return Some(l == r),
        _ => return None,
    };
    Some(match op {
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Gt => ord == Ordering::Greater,
    })
}

fn filter_holds(f: &Filter, row: &Row) -> Option<bool> {
    match f {
        Filter::Compare { left, op, right } => {
            let v = |o: &Operand| match o {
                Operand::Var(n) => row[n].clone(),
                Operand::Value(l) => Term::Literal(l.clone()),
            };
            oracle_compare(&v(left), *op, &v(right))
        }
        Filter::And(fs) => {
            let mut all = true;
            for f in fs {
                all &= filter_holds(f, row)?;
            }
            Some(all)
        }
        Filter::Or(fs) => {
            let mut any = false;
            for f in fs {
                any |= filter_holds(f, row)?;
            }
            Some(any)
        }
    }
}

/// Distinct full solutions by plain nested loops in textual pattern order,
/// each level scanning every triple. `None` if a filter meets incomparable
/// operands.
pub fn oracle_solutions(block: &SelectBlock, triples: &[Triple]) -> Option<BTreeSet<Vec<(String, Term)>>> {
    let mut rows: Vec<Row> = vec![Row::new()];
    for p in &block.patterns {
        let [s, pr, o] = p.slots();
        let mut next = Vec::new();
        for row in &rows {
            for tr in triples {
                let mut r = row.clone();
                if unify(s, &tr.subject, &mut r) && unify(pr, &tr.predicate, &mut r) && unify(o, &tr.object, &mut r) {
                    next.push(r);
                }
            }
        }
        rows = next;
    }
    let mut out = BTreeSet::new();
    for row in rows {
        let mut keep = true;
        for f in &block.filters {
            keep &= filter_holds(f, &row)?;
        }
        if keep {
            out.insert(row.into_iter().collect());
        }
    }
    Some(out)
}

/// Triples of every per-row template instantiated over the oracle solutions,
/// plus the solution count of each block.
pub struct ScriptOracle {
    pub per_row: BTreeSet<Triple>,
    pub solutions: Vec<usize>,
}

pub fn oracle_script(script: &QueryScript, triples: &[Triple]) -> Option<ScriptOracle> {
    let sols: Vec<BTreeSet<Vec<(String, Term)>>> = script
        .blocks
        .iter()
        .map(|b| oracle_solutions(b, triples))
        .collect::<Option<_>>()?;
    let mut per_row = BTreeSet::new();
    for tpl in &script.inserts {
        let Dispatch::PerRow(b) = tpl.dispatch else { continue };
        for sol in &sols[b] {
            let row: Row = sol.iter().cloned().collect();
            let item = |i: &ItemTerm| match i {
                ItemTerm::Term(t) => t.clone(),
                ItemTerm::Var(v) => row[v].clone(),
                ItemTerm::Placeholder(_) => unreachable!("placeholders fire once"),
            };
            let ItemObject::Item(o) = &tpl.object else {
                unreachable!("aggregates fire once")
            };
            per_row.insert(Triple::new(item(&tpl.subject), item(&tpl.predicate), item(o)));
        }
    }
    Some(ScriptOracle {
        per_row,
        solutions: sols.iter().map(BTreeSet::len).collect(),
    })
}

// ---------------------------------------------------------------------------
// Graph isomorphism under blank-node relabelling

fn blanks(g: &BTreeSet<Triple>) -> BTreeSet<Term> {
    g.iter()
        .flat_map(|t| [&t.subject, &t.object])
        .filter(|t| matches!(t, Term::Blank(_)))
        .cloned()
        .collect()
}

/// Colour refinement over blank nodes, colours shared between both graphs.
fn refine(graphs: [&BTreeSet<Triple>; 2]) -> [HashMap<Term, u64>; 2] {
    let mut colours: [HashMap<Term, u64>; 2] = graphs.map(|g| blanks(g).into_iter().map(|b| (b, 0)).collect());
    for _ in 0..8 {
        let mut intern: BTreeMap<String, u64> = BTreeMap::new();
        let mut next: [HashMap<Term, u64>; 2] = [HashMap::new(), HashMap::new()];
        let mut sigs: [BTreeMap<Term, Vec<String>>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (k, g) in graphs.iter().enumerate() {
            let name = |t: &Term| match colours[k].get(t) {
                Some(c) => format!("#{c}"),
                None => t.to_string(),
            };
            for tr in g.iter() {
                if let Some(c) = colours[k].get(&tr.subject) {
                    sigs[k].entry(tr.subject.clone()).or_default().push(format!(
                        "{c}>{} {}",
                        tr.predicate,
                        name(&tr.object)
                    ));
                }
                if let Some(c) = colours[k].get(&tr.object) {
                    sigs[k].entry(tr.object.clone()).or_default().push(format!(
                        "{c}<{} {}",
                        tr.predicate,
                        name(&tr.subject)
                    ));
                }
            }
        }
        for k in 0..2 {
            for (b, mut s) in std::mem::take(&mut sigs[k]) {
                s.sort();
                let key = s.join("|");
                let n = intern.len() as u64;
                let id = *intern.entry(key).or_insert(n);
                next[k].insert(b, id);
            }
        }
        colours = next;
    }
    colours
}

/// Whether the two triple sets are equal under some blank-node bijection.
pub fn isomorphic(a: &BTreeSet<Triple>, b: &BTreeSet<Triple>) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let [ca, cb] = refine([a, b]);
    if ca.len() != cb.len() {
        return false;
    }
    let group = |c: &HashMap<Term, u64>| {
        let mut g: BTreeMap<u64, Vec<Term>> = BTreeMap::new();
        for (t, k) in c {
            g.entry(*k).or_default().push(t.clone());
        }
        g.values_mut().for_each(|v| v.sort());
        g
    };
    let (ga, gb) = (group(&ca), group(&cb));
    let mut map: HashMap<Term, Term> = HashMap::new();
    for (colour, xs) in &ga {
        let Some(ys) = gb.get(colour) else { return false };
        if xs.len() != ys.len() {
            return false;
        }
        map.extend(xs.iter().cloned().zip(ys.iter().cloned()));
    }
    let relabel = |t: &Term| map.get(t).cloned().unwrap_or_else(|| t.clone());
    a.iter().all(|tr| {
        b.contains(&Triple::new(
            relabel(&tr.subject),
            tr.predicate.clone(),
            relabel(&tr.object),
        ))
    })
}
