//! An embedded store for scholarly semantic networks.
//!
//! Bibliographic and usage records live in a relational-style [`sidecar`];
//! only the structure that network analysis needs is mapped into the
//! indexed triple [`store`] as MESUR context nodes (`Publishes`, `Uses`,
//! `Citation`, ...). On top of the store sit a small query dialect
//! ([`query`]), re-runnable materialization rules with an exact retraction
//! ledger ([`inference`]), and citation/usage [`metrics`].
//!
//! ```
//! use mesur_core::query::{execute_script, parse_script};
//! use mesur_core::rdf::{NamespaceTable, Term, Triple};
//! use mesur_core::rdf::vocab::{mesur, rdf};
//! use mesur_core::store::Store;
//!
//! let mut store = Store::new();
//! let ctx = Term::iri("urn:ex:pub1").unwrap();
//! store.insert(&Triple::new(ctx.clone(), rdf::type_(), mesur::term(mesur::PUBLISHES))).unwrap();
//! store.insert(&Triple::new(ctx.clone(), mesur::term(mesur::HAS_UNIT), Term::iri("urn:ex:a").unwrap())).unwrap();
//! store.insert(&Triple::new(ctx, mesur::term(mesur::HAS_AUTHOR), Term::iri("urn:ex:okafor").unwrap())).unwrap();
//!
//! let script = parse_script(
//!     "SELECT ?a ?b WHERE ( ?x rdf:type mesur:Publishes ) ( ?x mesur:hasUnit ?a ) \
//!      ( ?x mesur:hasAuthor ?b ) INSERT < ?a mesur:authoredBy ?b > .",
//!     &NamespaceTable::default(),
//! ).unwrap();
//! let report = execute_script(&script, &mut store).unwrap();
//! assert_eq!(report.inserted, 1);
//! ```

pub mod decimal;
pub mod inference;
pub mod metrics;
pub mod ontology;
pub mod query;
pub mod rdf;
pub mod sidecar;
pub mod store;

pub use decimal::Decimal;
pub use rdf::{Literal, Term, Triple};
pub use store::Store;
