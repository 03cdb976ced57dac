//! Terms, triples, namespaces and N-Triples I/O.

pub mod datetime;
pub mod namespace;
pub mod ntriples;
mod term;
pub mod vocab;

pub use datetime::{DateTimeValue, Precision};
pub use namespace::{NamespaceError, NamespaceTable};
pub use ntriples::{
    parse_ntriples, parse_ntriples_str, serialize_ntriples, write_ntriples, NTriplesReader, NtError, NtErrorKind,
};
pub use term::{is_valid_blank_label, is_valid_iri, BlankNode, Datatype, Iri, Literal, Term, TermError, Triple};
