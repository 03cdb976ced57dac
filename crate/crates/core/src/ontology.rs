//! The compiled-in MESUR schema: class taxonomy, property catalog, and
//! instance validation against domains, ranges, context cardinalities and
//! the no-group restriction on preprint and book publishing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::rdf::vocab::{mesur as m, owl, rdf};
use crate::rdf::{Datatype, Term};
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("unknown class <{0}>")]
    UnknownClass(String),
    #[error("node {0} does not occur in the store")]
    NodeNotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Context,
    Inferred,
    Structural,
}

impl PropertyKind {
    pub fn name(self) -> &'static str {
        match self {
            PropertyKind::Context => "context",
            PropertyKind::Inferred => "inferred",
            PropertyKind::Structural => "structural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    /// Object must be a resource; when typed, of one of these classes.
    Classes(&'static [&'static str]),
    Datatype(Datatype),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub iri: &'static str,
    pub parent: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDef {
    pub iri: &'static str,
    pub kind: PropertyKind,
    pub domain: &'static str,
    pub range: Range,
    pub inverse: Option<&'static str>,
}

/// A single schema breach found on an instance node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownClass {
        class: String,
    },
    UnknownProperty {
        property: String,
    },
    Domain {
        property: &'static str,
        expected: &'static str,
    },
    Range {
        property: &'static str,
        object: Term,
    },
    MissingProperty {
        context: &'static str,
        property: &'static str,
    },
    /// A `Publishes` of a preprint or book that names a group.
    GroupRestriction {
        unit: Term,
        unit_class: &'static str,
    },
    Disjoint {
        first: &'static str,
        second: &'static str,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownClass { class } => write!(f, "unknown class <{class}>"),
            Violation::UnknownProperty { property } => write!(f, "unknown property <{property}>"),
            Violation::Domain { property, expected } => write!(f, "<{property}> used outside its domain <{expected}>"),
            Violation::Range { property, object } => write!(f, "object {object} outside the range of <{property}>"),
            Violation::MissingProperty { context, property } => write!(f, "<{context}> context lacks <{property}>"),
            Violation::GroupRestriction { unit, unit_class } => {
                write!(f, "{unit} is a <{unit_class}> and may not be published in a group")
            }
            Violation::Disjoint { first, second } => write!(f, "typed as both <{first}> and <{second}>"),
        }
    }
}

const AGENT_OR_DOCUMENT: &[&str] = &[m::AGENT, m::DOCUMENT];

const CLASSES: &[(&str, &str)] = &[
    (m::AGENT, owl::THING),
    (m::DOCUMENT, owl::THING),
    (m::CONTEXT, owl::THING),
    (m::HUMAN, m::AGENT),
    (m::ORGANIZATION, m::AGENT),
    (m::GROUP, m::DOCUMENT),
    (m::UNIT, m::DOCUMENT),
    (m::JOURNAL, m::GROUP),
    (m::PROCEEDINGS, m::GROUP),
    (m::EDITED_BOOK, m::GROUP),
    (m::ARTICLE, m::UNIT),
    (m::PREPRINT_ARTICLE, m::UNIT),
    (m::BOOK, m::UNIT),
    (m::EVENT, m::CONTEXT),
    (m::STATE, m::CONTEXT),
    (m::PUBLISHES, m::EVENT),
    (m::USES, m::EVENT),
    (m::WEIGHTED_RELATIONSHIP, m::STATE),
    (m::AFFILIATION, m::STATE),
    (m::METRIC, m::STATE),
    (m::CITATION, m::WEIGHTED_RELATIONSHIP),
    (m::COAUTHOR, m::WEIGHTED_RELATIONSHIP),
    (m::NUMERIC_METRIC, m::METRIC),
    (m::NOMINAL_METRIC, m::METRIC),
    (m::IMPACT_FACTOR, m::NUMERIC_METRIC),
    (m::USAGE_IMPACT_FACTOR, m::NUMERIC_METRIC),
];

fn properties() -> Vec<PropertyDef> {
    use PropertyKind::*;
    let class = |iri, kind, domain, range: &'static [&'static str], inverse| PropertyDef {
        iri,
        kind,
        domain,
        range: Range::Classes(range),
        inverse,
    };
    let literal = |iri, domain, dt| PropertyDef {
        iri,
        kind: Context,
        domain,
        range: Range::Datatype(dt),
        inverse: None,
    };
    vec![
        class(m::HAS_UNIT, Context, m::PUBLISHES, &[m::UNIT], None),
        class(m::HAS_GROUP, Context, m::PUBLISHES, &[m::GROUP], None),
        class(m::HAS_AUTHOR, Context, m::PUBLISHES, &[m::AGENT], None),
        class(m::HAS_PUBLISHER, Context, m::PUBLISHES, &[m::AGENT], None),
        class(m::HAS_PROVIDER, Context, m::EVENT, &[m::AGENT], None),
        literal(m::HAS_TIME, m::EVENT, Datatype::DateTime),
        class(m::HAS_DOCUMENT, Context, m::USES, &[m::DOCUMENT], None),
        class(m::HAS_USER, Context, m::USES, &[m::AGENT], None),
        literal(m::HAS_SESSION, m::USES, Datatype::String),
        literal(m::HAS_ACCESS_TYPE, m::USES, Datatype::String),
        class(
            m::HAS_SOURCE,
            Context,
            m::WEIGHTED_RELATIONSHIP,
            AGENT_OR_DOCUMENT,
            None,
        ),
        class(m::HAS_SINK, Context, m::WEIGHTED_RELATIONSHIP, AGENT_OR_DOCUMENT, None),
        literal(m::HAS_WEIGHT, m::WEIGHTED_RELATIONSHIP, Datatype::Decimal),
        literal(m::HAS_SOURCE_START_TIME, m::WEIGHTED_RELATIONSHIP, Datatype::DateTime),
        literal(m::HAS_SOURCE_END_TIME, m::WEIGHTED_RELATIONSHIP, Datatype::DateTime),
        literal(m::HAS_SINK_START_TIME, m::WEIGHTED_RELATIONSHIP, Datatype::DateTime),
        literal(m::HAS_SINK_END_TIME, m::WEIGHTED_RELATIONSHIP, Datatype::DateTime),
        class(m::HAS_AFFILIATOR, Context, m::AFFILIATION, &[m::ORGANIZATION], None),
        class(m::HAS_AFFILIATEE, Context, m::AFFILIATION, &[m::AGENT], None),
        class(m::HAS_OBJECT, Context, m::METRIC, AGENT_OR_DOCUMENT, None),
        literal(m::HAS_START_TIME, m::STATE, Datatype::DateTime),
        literal(m::HAS_END_TIME, m::STATE, Datatype::DateTime),
        literal(m::HAS_NUMERIC_VALUE, m::NUMERIC_METRIC, Datatype::Decimal),
        class(m::PART_OF, Structural, m::GROUP, &[m::GROUP], None),
        class(m::AUTHORED_BY, Inferred, m::DOCUMENT, &[m::AGENT], Some(m::AUTHORED)),
        class(m::AUTHORED, Inferred, m::AGENT, &[m::DOCUMENT], Some(m::AUTHORED_BY)),
        class(m::PUBLISHED, Inferred, m::AGENT, &[m::DOCUMENT], Some(m::PUBLISHED_BY)),
        class(m::PUBLISHED_BY, Inferred, m::DOCUMENT, &[m::AGENT], Some(m::PUBLISHED)),
        class(m::USED, Inferred, m::AGENT, &[m::DOCUMENT], Some(m::USED_BY)),
        class(m::USED_BY, Inferred, m::DOCUMENT, &[m::AGENT], Some(m::USED)),
        class(m::CONTAINS, Inferred, m::GROUP, &[m::UNIT], Some(m::CONTAINED_IN)),
        class(m::CONTAINED_IN, Inferred, m::UNIT, &[m::GROUP], Some(m::CONTAINS)),
        class(
            m::HAS_AFFILIATE,
            Inferred,
            m::ORGANIZATION,
            &[m::AGENT],
            Some(m::HAS_AFFILIATION),
        ),
        class(
            m::HAS_AFFILIATION,
            Inferred,
            m::AGENT,
            &[m::ORGANIZATION],
            Some(m::HAS_AFFILIATE),
        ),
    ]
}

/// Class pairs treated as disjoint during validation.
pub const DISJOINT: &[(&str, &str)] = &[
    (m::AGENT, m::DOCUMENT),
    (m::AGENT, m::CONTEXT),
    (m::DOCUMENT, m::CONTEXT),
    (m::HUMAN, m::ORGANIZATION),
    (m::GROUP, m::UNIT),
];

/// Properties every instance of a context class must carry.
pub const REQUIRED: &[(&str, &[&str])] = &[
    (m::PUBLISHES, &[m::HAS_UNIT, m::HAS_PROVIDER, m::HAS_TIME]),
    (m::USES, &[m::HAS_DOCUMENT, m::HAS_USER, m::HAS_TIME]),
    (m::CITATION, &[m::HAS_SOURCE, m::HAS_SINK]),
    (m::AFFILIATION, &[m::HAS_AFFILIATOR, m::HAS_AFFILIATEE]),
];

#[derive(Debug)]
pub struct OntologySchema {
    classes: BTreeMap<&'static str, ClassDef>,
    class_order: Vec<&'static str>,
    properties: BTreeMap<&'static str, PropertyDef>,
    property_order: Vec<&'static str>,
}

impl OntologySchema {
    fn build() -> Self {
        let classes = CLASSES
            .iter()
            .map(|&(iri, parent)| (iri, ClassDef { iri, parent }))
            .collect();
        let props = properties();
        OntologySchema {
            classes,
            class_order: CLASSES.iter().map(|c| c.0).collect(),
            property_order: props.iter().map(|p| p.iri).collect(),
            properties: props.into_iter().map(|p| (p.iri, p)).collect(),
        }
    }

    pub fn class(&self, iri: &str) -> Option<&ClassDef> {
        self.classes.get(iri)
    }

    pub fn property(&self, iri: &str) -> Option<&PropertyDef> {
        self.properties.get(iri)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDef> {
        self.class_order.iter().map(|c| &self.classes[c])
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyDef> {
        self.property_order.iter().map(|p| &self.properties[p])
    }

    pub fn resolves(&self, iri: &str) -> bool {
        self.classes.contains_key(iri) || self.properties.contains_key(iri)
    }

    /// `iri` followed by its ancestors, stopping below `owl:Thing`.
    pub fn ancestors(&self, iri: &str) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut cur = self.classes.get(iri);
        while let Some(c) = cur {
            out.push(c.iri);
            cur = self.classes.get(c.parent);
        }
        out
    }

    /// Reflexive-transitive subclass test.
    pub fn is_subclass(&self, child: &str, parent: &str) -> Result<bool, OntologyError> {
        for c in [child, parent] {
            if !self.classes.contains_key(c) && c != owl::THING {
                return Err(OntologyError::UnknownClass(c.to_string()));
            }
        }
        Ok(parent == owl::THING || self.ancestors(child).contains(&parent))
    }

    /// Datatype of a literal-ranged property.
    pub fn literal_range(&self, property: &str) -> Option<Datatype> {
        match self.properties.get(property)?.range {
            Range::Datatype(d) => Some(d),
            Range::Classes(_) => None,
        }
    }

    /// Declared `rdf:type`s of `node` closed under superclass. Types outside
    /// the schema are returned as declared.
    pub fn types_of(&self, node: &Term, store: &Store) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in store.objects(node, &rdf::type_()) {
            let Some(iri) = t.as_iri() else { continue };
            let chain = self.ancestors(iri);
            if chain.is_empty() {
                out.insert(iri.to_string());
            }
            out.extend(chain.into_iter().map(str::to_string));
        }
        out
    }

    pub fn validate_instance(&self, node: &Term, store: &Store) -> Result<Vec<Violation>, OntologyError> {
        if !store.mentions(node) {
            return Err(OntologyError::NodeNotFound(node.to_string()));
        }
        let mut out = Vec::new();
        let types = self.types_of(node, store);

        for t in store.objects(node, &rdf::type_()) {
            if let Some(iri) = t.as_iri() {
                if iri.starts_with(m::NS) && !self.classes.contains_key(iri) {
                    out.push(Violation::UnknownClass { class: iri.to_string() });
                }
            }
        }
        for &(a, b) in DISJOINT {
            if types.contains(a) && types.contains(b) {
                out.push(Violation::Disjoint { first: a, second: b });
            }
        }

        let edges: Vec<_> = store.triples_matching(Some(node), None, None).collect();
        for edge in &edges {
            let Some(p) = edge.predicate.as_iri() else { continue };
            if !p.starts_with(m::NS) {
                continue;
            }
            let Some(def) = self.properties.get(p) else {
                out.push(Violation::UnknownProperty {
                    property: p.to_string(),
                });
                continue;
            };
            if !types.is_empty() && !types.contains(def.domain) {
                out.push(Violation::Domain {
                    property: def.iri,
                    expected: def.domain,
                });
            }
            let in_range = match (def.range, &edge.object) {
                (Range::Datatype(Datatype::Decimal), Term::Literal(l)) => {
                    matches!(l.datatype(), Datatype::Decimal | Datatype::Integer)
                }
                (Range::Datatype(d), Term::Literal(l)) => l.datatype() == d,
                (Range::Datatype(_), _) => false,
                (Range::Classes(_), Term::Literal(_)) => false,
                (Range::Classes(allowed), obj) => {
                    let obj_types = self.types_of(obj, store);
                    obj_types.is_empty() || allowed.iter().any(|c| obj_types.contains(*c))
                }
            };
            if !in_range {
                out.push(Violation::Range {
                    property: def.iri,
                    object: edge.object.clone(),
                });
            }
        }

        for &(ctx, required) in REQUIRED {
            if !types.contains(ctx) {
                continue;
            }
            for &p in required {
                if !edges.iter().any(|e| e.predicate.as_iri() == Some(p)) {
                    out.push(Violation::MissingProperty {
                        context: ctx,
                        property: p,
                    });
                }
            }
        }

        if types.contains(m::PUBLISHES) {
            let has_group = edges.iter().any(|e| e.predicate.as_iri() == Some(m::HAS_GROUP));
            if has_group {
                for unit in store.objects(node, &m::term(m::HAS_UNIT)) {
                    let unit_types = self.types_of(&unit, store);
                    for restricted in [m::PREPRINT_ARTICLE, m::BOOK] {
                        if unit_types.contains(restricted) {
                            out.push(Violation::GroupRestriction {
                                unit: unit.clone(),
                                unit_class: restricted,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// One line per class then per property, tab-separated:
    /// `class <iri> <parent>` and
    /// `property <iri> <kind> <domain> <range> <inverse|->`.
    pub fn export_listing(&self) -> String {
        let mut out = String::new();
        for c in self.classes() {
            out.push_str(&format!("class\t{}\t{}\n", c.iri, c.parent));
        }
        for p in self.properties() {
            let range = match p.range {
                Range::Classes(cs) => cs.join("|"),
                Range::Datatype(d) => d.iri().to_string(),
            };
            out.push_str(&format!(
                "property\t{}\t{}\t{}\t{}\t{}\n",
                p.iri,
                p.kind.name(),
                p.domain,
                range,
                p.inverse.unwrap_or("-")
            ));
        }
        out
    }
}

/// The process-wide schema instance.
pub fn schema() -> &'static OntologySchema {
    static SCHEMA: OnceLock<OntologySchema> = OnceLock::new();
    SCHEMA.get_or_init(OntologySchema::build)
}
