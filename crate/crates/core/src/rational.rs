//! Exact rational g-vectors.
//!
//! Every coset representative (rows of `I`, columns of `J`, the `w` of a rank
//! matrix and the characteristic `i + j - w/2` of each entry) is carried as a
//! [`RationalVector`]. Floating point only enters when a characteristic is
//! handed to the series evaluator.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(Vec<Rational64>);

impl RationalVector {
    pub fn new(entries: Vec<Rational64>) -> Self {
        Self(entries)
    }

    pub fn zeros(g: usize) -> Self {
        Self(vec![Rational64::zero(); g])
    }

    /// `(n_1/d_1, ..., n_g/d_g)`; panics on a zero denominator.
    pub fn from_fractions(numerators: &[i64], denominators: &[i64]) -> Self {
        assert_eq!(numerators.len(), denominators.len());
        Self(
            numerators
                .iter()
                .zip(denominators)
                .map(|(&n, &d)| Rational64::new(n, d))
                .collect(),
        )
    }

    /// The standard unit vector scaled by `scale`.
    pub fn unit(g: usize, index: usize, scale: Rational64) -> Self {
        let mut v = Self::zeros(g);
        v.0[index] = scale;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Rational64] {
        &self.0
    }

    pub fn scale(&self, factor: Rational64) -> Self {
        Self(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// Representative of `self mod Z^g` in `[-1/2, 1/2)^g`, together with the
    /// integer vector `m` such that `self = reduced + m`.
    pub fn reduce_centered(&self) -> (Self, Vec<i64>) {
        let half = Rational64::new(1, 2);
        let shift: Vec<i64> = self.0.iter().map(|x| (x + half).floor().to_integer()).collect();
        let reduced = self
            .0
            .iter()
            .zip(&shift)
            .map(|(x, &m)| x - Rational64::from_integer(m))
            .collect();
        (Self(reduced), shift)
    }

    /// Representative of `self mod Z^g` in `[0, 1)^g`.
    pub fn reduce_unit(&self) -> Self {
        Self(self.0.iter().map(|x| x - x.floor()).collect())
    }

    /// True when `self` and `other` agree modulo `Z^g`.
    pub fn congruent(&self, other: &Self) -> bool {
        (self - other).is_integral()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|x| x.to_f64().expect("rational entry fits in f64"))
            .collect()
    }

    /// Least common multiple of the denominators.
    pub fn denominator_lcm(&self) -> i64 {
        self.0.iter().fold(1, |acc, x| acc.lcm(x.denom()))
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (idx, x) in self.0.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl<'a> Add<&'a RationalVector> for &'a RationalVector {
    type Output = RationalVector;

    fn add(self, rhs: &'a RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "rational vector length mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a RationalVector> for &'a RationalVector {
    type Output = RationalVector;

    fn sub(self, rhs: &'a RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "rational vector length mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;

    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|x| -x).collect())
    }
}

// Serialized as a list of "p/q" strings so exactness survives the report.
impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        strings
            .iter()
            .map(|s| s.parse::<Rational64>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(RationalVector)
    }
}

/// Comma-separated entries such as `1/2,-1/3,0`, optionally in parentheses.
impl std::str::FromStr for RationalVector {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        s.trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|p| p.trim().parse::<Rational64>())
            .collect::<Result<Vec<_>, _>>()
            .map(RationalVector)
            .map_err(|e| crate::error::Error::Usage(format!("cannot parse rational vector {s:?}: {e}")))
    }
}
