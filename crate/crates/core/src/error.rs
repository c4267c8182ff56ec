use thiserror::Error;

use crate::iri::Iri;
use crate::literal::Datatype;

/// Errors raised by the knowledge base, the Turtle reader and the reasoner.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("invalid IRI `{0}`")]
    InvalidIri(String),
    #[error("`{lexical}` is not a valid {datatype} literal")]
    InvalidLiteral { lexical: String, datatype: Datatype },
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
    #[error("unknown term {0}")]
    UnknownTerm(Iri),
    #[error("invalid axiom: {0}")]
    InvalidAxiom(String),
    #[error("prefix `{prefix}` already bound to <{existing}>, cannot rebind to <{new}>")]
    PrefixConflict {
        prefix: String,
        existing: String,
        new: String,
    },
}
