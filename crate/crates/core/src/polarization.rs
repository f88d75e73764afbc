//! Polarization types and the finite coset models `I`, `I'`, `J`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::RationalVector;

/// Elementary divisors `(d_1, ..., d_g)` with `d_i | d_{i+1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolarizationType {
    d: Vec<u64>,
    h0: u64,
}

impl PolarizationType {
    pub fn new(d: Vec<u64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidType(d, "dimension must be at least 1".into()));
        }
        if d.contains(&0) {
            return Err(Error::InvalidType(d, "divisors must be positive".into()));
        }
        if let Some(pos) = d.windows(2).position(|p| p[1] % p[0] != 0) {
            let msg = format!("d_{} = {} does not divide d_{} = {}", pos + 1, d[pos], pos + 2, d[pos + 1]);
            return Err(Error::InvalidType(d, msg));
        }
        let h0 = d
            .iter()
            .try_fold(1u64, |acc, &x| acc.checked_mul(x))
            .ok_or_else(|| Error::InvalidType(d.clone(), "h0 overflows".into()))?;
        Ok(Self { d, h0 })
    }

    pub fn g(&self) -> usize {
        self.d.len()
    }

    pub fn divisors(&self) -> &[u64] {
        &self.d
    }

    pub fn h0(&self) -> u64 {
        self.h0
    }

    /// `2^g`, the rank required of each matrix.
    pub fn target_rank(&self) -> usize {
        1 << self.g()
    }

    /// 0-based position of the first `d_i = 2`.
    pub fn first_two(&self) -> Option<usize> {
        self.d.iter().position(|&x| x == 2)
    }
}

impl fmt::Display for PolarizationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.d.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for PolarizationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Accepts `1,2,8`, `(1,2,8)` or `1x2x8`.
impl FromStr for PolarizationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let d = trimmed
            .split([',', 'x', ' '])
            .filter(|p| !p.is_empty())
            .map(|p| p.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Usage(format!("cannot parse type {s:?}: {e}")))?;
        Self::new(d)
    }
}

impl Serialize for PolarizationType {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.d.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolarizationType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let d = Vec::<u64>::deserialize(deserializer)?;
        Self::new(d).map_err(serde::de::Error::custom)
    }
}

/// Row set `I` (models `K_1`), rank-criterion representatives `I'` (models
/// `K_1 / 2K_1`) and column set `J` (models the half periods `Z_2`).
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSets {
    pub i: Vec<RationalVector>,
    pub i_prime: Vec<RationalVector>,
    pub j: Vec<RationalVector>,
}

/// All tuples `0 <= n_a < bounds[a]` in lexicographic order (first
/// coordinate most significant).
pub(crate) fn integer_box(bounds: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::with_capacity(bounds.len())];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..b).map(move |n| {
                    let mut next = prefix.clone();
                    next.push(n);
                    next
                })
            })
            .collect();
    }
    out
}

pub(crate) fn fractions(tuple: &[u64], denominators: &[u64]) -> RationalVector {
    let nums: Vec<i64> = tuple.iter().map(|&n| n as i64).collect();
    let dens: Vec<i64> = denominators.iter().map(|&d| d as i64).collect();
    RationalVector::from_fractions(&nums, &dens)
}

pub fn index_sets(d: &PolarizationType) -> IndexSets {
    let dv = d.divisors();
    let halves = vec![2u64; d.g()];
    let gcd2: Vec<u64> = dv.iter().map(|x| x.gcd(&2)).collect();
    IndexSets {
        i: integer_box(dv).iter().map(|t| fractions(t, dv)).collect(),
        i_prime: integer_box(&gcd2).iter().map(|t| fractions(t, dv)).collect(),
        j: integer_box(&halves).iter().map(|t| fractions(t, &halves)).collect(),
    }
}

/// All divisor chains of length `g` with `min_h0 <= h0 <= max_h0`, sorted by
/// `(h0, lexicographic)`.
pub fn enumerate_types(g: usize, min_h0: u64, max_h0: u64) -> Result<Vec<PolarizationType>> {
    if g == 0 {
        return Err(Error::Usage("g must be at least 1".into()));
    }
    if min_h0 == 0 || min_h0 > max_h0 {
        return Err(Error::Usage(format!("invalid h0 bounds [{min_h0}, {max_h0}]")));
    }
    fn extend(prefix: &mut Vec<u64>, product: u64, g: usize, min: u64, max: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() == g {
            if product >= min {
                out.push(prefix.clone());
            }
            return;
        }
        let base = prefix.last().copied().unwrap_or(1);
        let remaining = (g - prefix.len()) as u32;
        let mut d = base;
        // every later divisor is at least d, so d^remaining must fit
        while d.checked_pow(remaining).and_then(|p| p.checked_mul(product)).is_some_and(|p| p <= max) {
            prefix.push(d);
            extend(prefix, product * d, g, min, max, out);
            prefix.pop();
            d += base;
        }
    }
    let mut raw = Vec::new();
    extend(&mut Vec::with_capacity(g), 1, g, min_h0, max_h0, &mut raw);
    let mut types = raw.into_iter().map(PolarizationType::new).collect::<Result<Vec<_>>>()?;
    types.sort_by(|a, b| (a.h0(), a.divisors()).cmp(&(b.h0(), b.divisors())));
    Ok(types)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(d: &[u64]) -> PolarizationType {
        PolarizationType::new(d.to_vec()).unwrap()
    }

    #[test]
    fn constructor_enforces_chain() {
        assert!(PolarizationType::new(vec![2, 3]).is_err());
        assert!(PolarizationType::new(vec![]).is_err());
        assert!(PolarizationType::new(vec![0, 2]).is_err());
        assert_eq!(t(&[1, 2, 8]).h0(), 16);
        assert_eq!("(1,3,6)".parse::<PolarizationType>().unwrap(), t(&[1, 3, 6]));
        assert_eq!("2x4x4".parse::<PolarizationType>().unwrap(), t(&[2, 4, 4]));
        assert_eq!(t(&[1, 1, 2, 16]).first_two(), Some(2));
    }

    #[test]
    fn index_set_sizes() {
        let s = index_sets(&t(&[1, 1]));
        assert_eq!(s.i, vec![RationalVector::zeros(2)]);
        assert_eq!(s.i_prime, vec![RationalVector::zeros(2)]);
        assert_eq!(s.j.len(), 4);

        let s = index_sets(&t(&[1, 2, 8]));
        assert_eq!((s.i.len(), s.i_prime.len(), s.j.len()), (16, 4, 8));

        let s = index_sets(&t(&[1, 3, 6]));
        assert_eq!((s.i.len(), s.i_prime.len(), s.j.len()), (18, 2, 8));
    }

    #[test]
    fn index_sets_are_ordered_and_reduced() {
        let d = t(&[2, 4, 12]);
        let s = index_sets(&d);
        assert_eq!(s.i[0], RationalVector::zeros(3));
        assert_eq!(s.i[1], RationalVector::from_fractions(&[0, 0, 1], &[1, 1, 12]));
        for set in [&s.i, &s.i_prime, &s.j] {
            for v in set.iter() {
                assert_eq!(&v.reduce_unit(), v);
            }
            for pair in set.windows(2) {
                assert!(!pair[0].congruent(&pair[1]));
            }
        }
        // I' elements are the n_i < gcd(d_i, 2) subset of I, in the same order
        assert_eq!(
            s.i_prime,
            vec![
                RationalVector::from_fractions(&[0, 0, 0], &[1, 1, 1]),
                RationalVector::from_fractions(&[0, 0, 1], &[1, 1, 12]),
                RationalVector::from_fractions(&[0, 1, 0], &[1, 4, 1]),
                RationalVector::from_fractions(&[0, 1, 1], &[1, 4, 12]),
                RationalVector::from_fractions(&[1, 0, 0], &[2, 1, 1]),
                RationalVector::from_fractions(&[1, 0, 1], &[2, 1, 12]),
                RationalVector::from_fractions(&[1, 1, 0], &[2, 4, 1]),
                RationalVector::from_fractions(&[1, 1, 1], &[2, 4, 12]),
            ]
        );
    }

    #[test]
    fn enumeration_examples() {
        let one = enumerate_types(1, 1, 4).unwrap();
        assert_eq!(one, vec![t(&[1]), t(&[2]), t(&[3]), t(&[4])]);
        let two = enumerate_types(2, 4, 4).unwrap();
        assert_eq!(two, vec![t(&[1, 4]), t(&[2, 2])]);
        let three = enumerate_types(3, 15, 48).unwrap();
        for d in [[1, 1, 15], [1, 3, 6], [1, 2, 8], [2, 2, 4], [1, 1, 16], [2, 4, 4]] {
            assert!(three.contains(&t(&d)));
        }
        assert!(enumerate_types(3, 10, 5).is_err());
        assert!(enumerate_types(3, 0, 5).is_err());
    }
}
