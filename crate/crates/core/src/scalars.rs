//! Exact rationals and per-vertex zeta coordinates.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Field element. Always stored in lowest terms with a positive denominator.
pub type Scalar = BigRational;

/// Global vertex number.
pub type Vertex = u32;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// `n / d`; panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Scalar {
    Scalar::new(BigInt::from(n), BigInt::from(d))
}

pub fn inverse(x: &Scalar) -> Result<Scalar> {
    if x.is_zero() {
        Err(Error::DivisionByZero)
    } else {
        Ok(x.recip())
    }
}

/// Parses `"3"`, `"-7"` or `"5/8"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let bad = || Error::ParseScalar(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Scalar::new(n, d))
        }
        None => Ok(Scalar::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Parses a comma-separated list of rationals.
pub fn parse_scalar_list(s: &str) -> Result<Vec<Scalar>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_scalar).collect()
}

/// Distinct coordinates `zeta_i` attached to vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaAssignment {
    values: BTreeMap<Vertex, Scalar>,
}

impl ZetaAssignment {
    pub fn new(values: BTreeMap<Vertex, Scalar>) -> Result<Self> {
        let mut seen: BTreeMap<&Scalar, Vertex> = BTreeMap::new();
        for (v, z) in &values {
            if let Some(prev) = seen.insert(z, *v) {
                return Err(Error::DuplicateZeta(prev, *v));
            }
        }
        Ok(Self { values })
    }

    /// Assigns `values[k]` to vertex `k + 1`.
    pub fn from_values(values: &[Scalar]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(k, z)| (k as Vertex + 1, z.clone()))
                .collect(),
        )
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::from_values(&values.iter().map(|&v| int(v)).collect::<Vec<_>>())
    }

    /// Parses the CLI form `1,2,3,4` (vertices numbered from 1).
    pub fn parse(s: &str) -> Result<Self> {
        Self::from_values(&parse_scalar_list(s)?)
    }

    pub fn get(&self, v: Vertex) -> Result<&Scalar> {
        self.values.get(&v).ok_or(Error::MissingVertex(v))
    }

    /// `zeta_i - zeta_j`.
    pub fn diff(&self, i: Vertex, j: Vertex) -> Result<Scalar> {
        Ok(self.get(i)? - self.get(j)?)
    }

    /// `1 / (zeta_i - zeta_j)`.
    pub fn inv_diff(&self, i: Vertex, j: Vertex) -> Result<Scalar> {
        inverse(&self.diff(i, j)?)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy with vertex numbers renamed through `map`; unmapped
    /// vertices keep their number.
    pub fn relabel(&self, map: &BTreeMap<Vertex, Vertex>) -> Result<Self> {
        Self::new(
            self.values
                .iter()
                .map(|(v, z)| (*map.get(v).unwrap_or(v), z.clone()))
                .collect(),
        )
    }

    /// Colon-separated form used in CSV output, e.g. `1:2:4:3`.
    pub fn to_colon_string(&self) -> String {
        self.values
            .values()
            .map(|z| z.to_string())
            .collect::<Vec<_>>()
            .join(":")
    }
}

pub fn zeta_diff(z: &ZetaAssignment, i: Vertex, j: Vertex) -> Result<Scalar> {
    z.diff(i, j)
}

/// `n` pairwise distinct rationals for vertices `1..=n`, reproducible from `seed`.
///
/// Numerators are drawn from `[-2^20, 2^20]` and denominators from `1..=64`,
/// so a nonzero rational function of modest degree vanishes at a sample with
/// negligible probability.
pub fn sample_distinct_zetas(n: usize, seed: u64) -> ZetaAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<Scalar> = Vec::with_capacity(n);
    while values.len() < n {
        let num: i64 = rng.random_range(-(1 << 20)..=(1 << 20));
        let den: i64 = rng.random_range(1..=64);
        let z = frac(num, den);
        if !values.contains(&z) {
            values.push(z);
        }
    }
    ZetaAssignment::from_values(&values).expect("values are distinct by construction")
}

/// A random rational with small numerator and denominator, for sampling
/// deformation parameters.
pub fn sample_scalar<R: Rng>(rng: &mut R) -> Scalar {
    let num: i64 = rng.random_range(-1000..=1000);
    let den: i64 = rng.random_range(1..=30);
    frac(num, den)
}

pub fn sign_scalar(sign: i32) -> Scalar {
    if sign >= 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_diff_examples() {
        let z = ZetaAssignment::from_ints(&[1, 2, 3, 4]).unwrap();
        assert_eq!(zeta_diff(&z, 3, 4).unwrap(), int(-1));
        assert_eq!(zeta_diff(&z, 2, 2).unwrap(), int(0));
        let z = ZetaAssignment::from_ints(&[0, 1, 3, 8, 17, 21]).unwrap();
        assert_eq!(zeta_diff(&z, 5, 6).unwrap(), int(-4));
        assert_eq!(zeta_diff(&z, 7, 1), Err(Error::MissingVertex(7)));
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(
            ZetaAssignment::from_ints(&[1, 2, 3, 3]),
            Err(Error::DuplicateZeta(3, 4))
        );
        assert!(ZetaAssignment::parse("1,2,3,3").is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_scalar("-5/10").unwrap(), frac(-1, 2));
        assert_eq!(parse_scalar(" 7 ").unwrap(), int(7));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x").is_err());
        let z = ZetaAssignment::parse("0,1,3,8,17,21").unwrap();
        assert_eq!(z.len(), 6);
        assert_eq!(z.to_colon_string(), "0:1:3:8:17:21");
    }

    #[test]
    fn sampling_is_distinct_and_deterministic() {
        for (n, seed) in [(4, 0), (6, 1), (40, 9)] {
            let a = sample_distinct_zetas(n, seed);
            assert_eq!(a.len(), n);
            assert_eq!(a, sample_distinct_zetas(n, seed));
        }
        assert_ne!(sample_distinct_zetas(6, 1), sample_distinct_zetas(6, 2));
    }

    #[test]
    fn relabel_moves_value() {
        let z = ZetaAssignment::from_ints(&[1, 2, 3, 4, 9]).unwrap();
        let r = z.relabel(&[(5, 0)].into_iter().collect()).unwrap();
        assert_eq!(r.get(0).unwrap(), &int(9));
        assert!(r.get(5).is_err());
    }
}
