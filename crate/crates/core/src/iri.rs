use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::KbError;

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, KbError> {
        let value = value.as_ref();
        if value.is_empty() {
            return Err(KbError::InvalidIri(value.to_string()));
        }
        let Some(colon) = value.find(':') else {
            return Err(KbError::InvalidIri(value.to_string()));
        };
        let scheme = &value[..colon];
        let valid_scheme = scheme
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !valid_scheme
            || value
                .chars()
                .any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`'))
        {
            return Err(KbError::InvalidIri(value.to_string()));
        }
        Ok(Iri(Arc::from(value)))
    }

    /// Builds an IRI from a trusted constant. Panics on malformed input.
    pub fn from_static(value: &'static str) -> Self {
        Iri::new(value).unwrap_or_else(|_| panic!("malformed constant IRI {value}"))
    }

    pub(crate) fn min() -> Self {
        Iri(Arc::from(""))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(idx) => &s[idx + 1..],
            None => s.rsplit(':').next().unwrap_or(s),
        }
    }

    /// Namespace part, everything up to and including the last `#` or `/`.
    pub fn namespace(&self) -> &str {
        let s = self.as_str();
        &s[..s.len() - self.local_name().len()]
    }

    /// Appends `suffix` to this IRI's text.
    pub fn child(&self, suffix: &str) -> Result<Self, KbError> {
        Iri::new(format!("{}{}", self.as_str(), suffix))
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Iri {
    type Error = KbError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(value: Iri) -> Self {
        value.0.to_string()
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        self.as_str()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_relative_and_empty() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("Robot").is_err());
        assert!(Iri::new("http://x.org/a b").is_err());
        assert!(Iri::new("1http://x").is_err());
    }

    #[test]
    fn local_name_and_namespace() {
        let iri = Iri::new("https://w3id.org/aur/core#AutonomousRobot").unwrap();
        assert_eq!(iri.local_name(), "AutonomousRobot");
        assert_eq!(iri.namespace(), "https://w3id.org/aur/core#");
        let urn = Iri::new("urn:robot:rover1").unwrap();
        assert_eq!(urn.local_name(), "rover1");
    }
}
