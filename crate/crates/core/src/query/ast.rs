use std::fmt;

use crate::rdf::{Literal, Term};
use crate::store::TriplePattern;

/// A parsed script: one or more SELECT blocks followed by INSERT templates.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryScript {
    pub blocks: Vec<SelectBlock>,
    pub inserts: Vec<InsertTemplate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectBlock {
    /// Projected variable names, without `?`, in source order.
    pub projection: Vec<String>,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl SelectBlock {
    /// Distinct variables bound by the patterns, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.patterns {
            for v in p.variables() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    pub fn binds(&self, var: &str) -> bool {
        self.patterns.iter().any(|p| p.variables().contains(&var))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Var(String),
    Value(Literal),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    Compare { left: Operand, op: CmpOp, right: Operand },
    And(Vec<Filter>),
    Or(Vec<Filter>),
}

impl Filter {
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Filter::Compare { left, right, .. } => {
                for o in [left, right] {
                    if let Operand::Var(v) = o {
                        if !out.contains(&v.as_str()) {
                            out.push(v);
                        }
                    }
                }
            }
            Filter::And(fs) | Filter::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }
}

/// Subject, predicate, or plain object of an INSERT template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemTerm {
    Term(Term),
    Var(String),
    /// `_123`: one fresh node per script execution, shared by every template.
    Placeholder(String),
}

/// Aggregate arithmetic. `block` is the index of the block whose solutions
/// are counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggExpr {
    Count { var: String, block: usize },
    Div(Box<AggExpr>, Box<AggExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemObject {
    Item(ItemTerm),
    Aggregate(AggExpr),
}

/// How often a template fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispatch {
    /// Once per distinct row of the given block.
    PerRow(usize),
    /// Once per script execution.
    Once,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertTemplate {
    pub subject: ItemTerm,
    pub predicate: ItemTerm,
    pub object: ItemObject,
    pub dispatch: Dispatch,
    /// Variable → owning block index, for every row variable in the template.
    pub owners: Vec<(String, usize)>,
}

impl InsertTemplate {
    pub fn owner(&self, var: &str) -> Option<usize> {
        self.owners.iter().find(|(v, _)| v == var).map(|(_, b)| *b)
    }
}
