use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::KbError;
use crate::iri::Iri;
use crate::vocab::xsd;

/// Datatypes a literal may carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    Iri,
}

impl Datatype {
    pub const ALL: [Datatype; 5] = [
        Datatype::String,
        Datatype::Integer,
        Datatype::Decimal,
        Datatype::Boolean,
        Datatype::Iri,
    ];

    pub fn iri(self) -> Iri {
        match self {
            Datatype::String => xsd::STRING.clone(),
            Datatype::Integer => xsd::INTEGER.clone(),
            Datatype::Decimal => xsd::DECIMAL.clone(),
            Datatype::Boolean => xsd::BOOLEAN.clone(),
            Datatype::Iri => xsd::ANY_URI.clone(),
        }
    }

    pub fn from_iri(iri: &Iri) -> Option<Self> {
        Datatype::ALL.into_iter().find(|d| &d.iri() == iri)
    }

    /// Short wire tag (`"decimal"`, `"iri"`, ...).
    pub fn tag(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
            Datatype::Iri => "iri",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Datatype::ALL.into_iter().find(|d| d.tag() == tag)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Datatype::Integer | Datatype::Decimal)
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A typed literal. Equality is on lexical form and datatype.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
}

impl Literal {
    /// Validates `lexical` against `datatype`.
    pub fn new(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, KbError> {
        let literal = Literal {
            lexical: lexical.into(),
            datatype,
        };
        literal.value()?;
        Ok(literal)
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal {
            lexical: value.into(),
            datatype: Datatype::String,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Datatype::Integer,
        }
    }

    pub fn boolean(value: bool) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Datatype::Boolean,
        }
    }

    /// Decimal literal from a finite float, using the shortest exact representation.
    pub fn decimal_f64(value: f64) -> Result<Self, KbError> {
        if !value.is_finite() {
            return Err(KbError::InvalidLiteral {
                lexical: value.to_string(),
                datatype: Datatype::Decimal,
            });
        }
        let value = if value == 0.0 { 0.0 } else { value };
        Literal::new(format!("{value}"), Datatype::Decimal)
    }

    pub fn iri(value: &Iri) -> Self {
        Literal {
            lexical: value.to_string(),
            datatype: Datatype::Iri,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn value(&self) -> Result<Value, KbError> {
        let invalid = || KbError::InvalidLiteral {
            lexical: self.lexical.clone(),
            datatype: self.datatype,
        };
        Ok(match self.datatype {
            Datatype::String => Value::String(self.lexical.clone()),
            Datatype::Integer => {
                let trimmed = self.lexical.strip_prefix('+').unwrap_or(&self.lexical);
                if trimmed.is_empty()
                    || !trimmed
                        .strip_prefix('-')
                        .unwrap_or(trimmed)
                        .chars()
                        .all(|c| c.is_ascii_digit())
                {
                    return Err(invalid());
                }
                Value::Number(Decimal(BigRational::from_integer(
                    BigInt::from_str(trimmed).map_err(|_| invalid())?,
                )))
            }
            Datatype::Decimal => Value::Number(self.lexical.parse().map_err(|_| invalid())?),
            Datatype::Boolean => match self.lexical.as_str() {
                "true" | "1" => Value::Boolean(true),
                "false" | "0" => Value::Boolean(false),
                _ => return Err(invalid()),
            },
            Datatype::Iri => Value::Iri(Iri::new(&self.lexical).map_err(|_| invalid())?),
        })
    }

    /// Numeric value as a float, if the literal is numeric.
    pub fn as_f64(&self) -> Option<f64> {
        match self.value().ok()? {
            Value::Number(d) => Some(d.to_f64()),
            _ => None,
        }
    }
}

/// Exact finite decimal, compared as a rational number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(pub BigRational);

impl Decimal {
    pub fn from_i64(value: i64) -> Self {
        Decimal(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl FromStr for Decimal {
    type Err = ();

    /// Accepts `[+-]digits[.digits]` with at least one digit, plus an optional
    /// exponent so that float formatting (`1e-7`) round-trips.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(idx) => (
                &body[..idx],
                body[idx + 1..].parse::<i32>().map_err(|_| ())?,
            ),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(());
        }
        let numerator = if int_part.len() + frac_part.len() <= 18 {
            let mut n: i64 = 0;
            for b in int_part.bytes().chain(frac_part.bytes()) {
                n = n * 10 + i64::from(b - b'0');
            }
            BigInt::from(if negative { -n } else { n })
        } else {
            let digits = format!("{int_part}{frac_part}");
            let n = BigInt::from_str(&digits).map_err(|_| ())?;
            if negative {
                -n
            } else {
                n
            }
        };
        let scale = exponent - frac_part.len() as i32;
        let value = match scale {
            0 => BigRational::from_integer(numerator),
            s if s > 0 => BigRational::from_integer(numerator * num_traits::pow(BigInt::from(10), s as usize)),
            s => BigRational::new(numerator, num_traits::pow(BigInt::from(10), (-s) as usize)),
        };
        Ok(Decimal(value))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            return write!(f, "{}", self.0.numer());
        }
        write!(f, "{}", self.to_f64())
    }
}

/// Interpreted literal value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    String(String),
    Number(Decimal),
    Boolean(bool),
    Iri(Iri),
}

impl Value {
    /// Total order within one kind; `None` across kinds.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Number(a), Value::Number(b)) => Some(a.cmp(b)),
            (Value::String(a), Value::String(b)) => Some(a.cmp(b)),
            (Value::Boolean(a), Value::Boolean(b)) => Some(a.cmp(b)),
            (Value::Iri(a), Value::Iri(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Number(d) if d.0.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_comparison_is_exact() {
        let a: Decimal = "0.1".parse().unwrap();
        let b: Decimal = "0.10".parse().unwrap();
        let c: Decimal = "0.1000000000000000000001".parse().unwrap();
        assert_eq!(a, b);
        assert!(c > a);
        let e: Decimal = "1e-7".parse().unwrap();
        assert_eq!(e, "0.0000001".parse().unwrap());
        assert!("-".parse::<Decimal>().is_err());
        assert!(".".parse::<Decimal>().is_err());
        assert!("1.2.3".parse::<Decimal>().is_err());
    }

    #[test]
    fn literal_validation() {
        assert!(Literal::new("12", Datatype::Integer).is_ok());
        assert!(Literal::new("12.5", Datatype::Integer).is_err());
        assert!(Literal::new("maybe", Datatype::Boolean).is_err());
        assert!(Literal::new("not an iri", Datatype::Iri).is_err());
        assert_eq!(Literal::decimal_f64(-0.0).unwrap().lexical(), "0");
        assert_eq!(Literal::decimal_f64(2.5).unwrap().as_f64(), Some(2.5));
    }

    #[test]
    fn integer_and_decimal_compare_numerically() {
        let i = Literal::integer(100).value().unwrap();
        let d = Literal::new("100.0", Datatype::Decimal).unwrap().value().unwrap();
        assert_eq!(i.compare(&d), Some(Ordering::Equal));
    }
}
