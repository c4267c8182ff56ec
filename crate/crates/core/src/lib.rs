//! Capability and skill model for heterogeneous autonomous robot teams.
//!
//! The crate holds the ontology store and its reasoner, typed construction
//! layers for the structure, capability, property and skill aspects, the
//! skill state machine runtime, and the capability matchmaker and mission
//! planner.

pub mod capability;
pub mod error;
pub mod interface;
pub mod iri;
pub mod kb;
pub mod literal;
pub mod matchmaker;
pub mod mission;
pub mod planner;
pub mod property;
pub mod reasoner;
pub mod runtime;
pub mod seed;
pub mod skill;
pub mod structure;
pub mod turtle;
pub mod vocab;

pub use error::KbError;
pub use iri::Iri;
pub use kb::{Assertion, Axiom, AxiomKind, KnowledgeBase, TermKind};
pub use literal::{Datatype, Decimal, Literal, Value};
pub use turtle::{parse_turtle, serialize_turtle};
