//! IRI constants for the vocabularies the system speaks.

use super::term::{Iri, Term};

fn constant(iri: &str) -> Term {
    Term::Iri(Iri::new(iri).expect("vocabulary constants are valid IRIs"))
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
}

pub mod rdf {
    use crate::rdf::Term;

    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

    pub fn type_() -> Term {
        super::constant(TYPE)
    }
}

pub mod rdfs {
    pub const NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
}

pub mod owl {
    pub const NS: &str = "http://www.w3.org/2002/07/owl#";
    pub const THING: &str = "http://www.w3.org/2002/07/owl#Thing";
}

macro_rules! mesur_vocab {
    (classes { $($c:ident = $cl:literal),* $(,)? } properties { $($p:ident = $pl:literal),* $(,)? }) => {
        $(pub const $c: &str = concat!("http://www.mesur.org/schemas/2007-01/mesur#", $cl);)*
        $(pub const $p: &str = concat!("http://www.mesur.org/schemas/2007-01/mesur#", $pl);)*
        /// Every class constant above.
        pub const CLASSES: &[&str] = &[$($c),*];
        /// Every property constant above.
        pub const PROPERTIES: &[&str] = &[$($p),*];
    };
}

pub mod mesur {
    use crate::rdf::Term;

    pub const NS: &str = "http://www.mesur.org/schemas/2007-01/mesur#";

    pub fn term(iri: &str) -> Term {
        super::constant(iri)
    }

    mesur_vocab! {
        classes {
            AGENT = "Agent",
            HUMAN = "Human",
            ORGANIZATION = "Organization",
            DOCUMENT = "Document",
            GROUP = "Group",
            JOURNAL = "Journal",
            PROCEEDINGS = "Proceedings",
            EDITED_BOOK = "EditedBook",
            UNIT = "Unit",
            ARTICLE = "Article",
            PREPRINT_ARTICLE = "PreprintArticle",
            BOOK = "Book",
            CONTEXT = "Context",
            EVENT = "Event",
            PUBLISHES = "Publishes",
            USES = "Uses",
            STATE = "State",
            WEIGHTED_RELATIONSHIP = "WeightedRelationship",
            CITATION = "Citation",
            COAUTHOR = "Coauthor",
            AFFILIATION = "Affiliation",
            METRIC = "Metric",
            NUMERIC_METRIC = "NumericMetric",
            NOMINAL_METRIC = "NominalMetric",
            IMPACT_FACTOR = "ImpactFactor",
            USAGE_IMPACT_FACTOR = "UsageImpactFactor",
        }
        properties {
            HAS_UNIT = "hasUnit",
            HAS_GROUP = "hasGroup",
            HAS_AUTHOR = "hasAuthor",
            HAS_PUBLISHER = "hasPublisher",
            HAS_PROVIDER = "hasProvider",
            HAS_TIME = "hasTime",
            HAS_DOCUMENT = "hasDocument",
            HAS_USER = "hasUser",
            HAS_SESSION = "hasSession",
            HAS_ACCESS_TYPE = "hasAccessType",
            HAS_SOURCE = "hasSource",
            HAS_SINK = "hasSink",
            HAS_WEIGHT = "hasWeight",
            HAS_SOURCE_START_TIME = "hasSourceStartTime",
            HAS_SOURCE_END_TIME = "hasSourceEndTime",
            HAS_SINK_START_TIME = "hasSinkStartTime",
            HAS_SINK_END_TIME = "hasSinkEndTime",
            HAS_AFFILIATOR = "hasAffiliator",
            HAS_AFFILIATEE = "hasAffiliatee",
            HAS_OBJECT = "hasObject",
            HAS_START_TIME = "hasStartTime",
            HAS_END_TIME = "hasEndTime",
            HAS_NUMERIC_VALUE = "hasNumericValue",
            PART_OF = "partOf",
            AUTHORED_BY = "authoredBy",
            AUTHORED = "authored",
            PUBLISHED = "published",
            PUBLISHED_BY = "publishedBy",
            USED = "used",
            USED_BY = "usedBy",
            CONTAINS = "contains",
            CONTAINED_IN = "containedIn",
            HAS_AFFILIATE = "hasAffiliate",
            HAS_AFFILIATION = "hasAffiliation",
        }
    }
}
