use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Largest supported alphabet; symbols are stored one per byte.
pub const MAX_ALPHABET: usize = 256;

/// A probability mass function over the alphabet `{0, .., len-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf(Vec<f64>);

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet size must be at least 2, got {}",
                probs.len()
            )));
        }
        if probs.len() > MAX_ALPHABET {
            return Err(Error::InvalidPmf(format!(
                "alphabet size {} exceeds {MAX_ALPHABET}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidPmf(format!("entry {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {total}")));
        }
        Ok(Self(probs))
    }

    /// Uniform law over `alphabet_size` symbols.
    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        Self::new(vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    /// Normalizes non-negative weights into a pmf.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidPmf(format!("weights sum to {total}")));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Wraps a vector already known to be normalized. Used on hot paths
    /// where the values come from a validated computation.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(probs)
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.0[symbol]
    }

    /// Shannon entropy in bits, with 0 log 0 = 0.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.0)
    }

    /// Draws one symbol.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        sample_index(&self.0, rng)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.0
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Entropy in bits of a (sub-)probability vector, 0 log 0 = 0.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Relative entropy D(p || q) in bits; `+inf` when p is not absolutely
/// continuous with respect to q.
pub fn kl_divergence_bits(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pa, &qa) in p.iter().zip(q) {
        if pa > 0.0 {
            if qa <= 0.0 {
                return f64::INFINITY;
            }
            total += pa * (pa / qa).log2();
        }
    }
    total.max(0.0)
}

/// Binary entropy h2(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Inverse-CDF draw from a probability vector. The last symbol with
/// positive mass absorbs rounding in the cumulative sum.
#[inline]
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i as u8;
            }
        }
    }
    last as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_invalid_vectors() {
        assert!(Pmf::new(vec![1.0]).is_err());
        assert!(Pmf::new(vec![0.6, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn entropy_and_divergence() {
        assert_eq!(Pmf::new(vec![1.0, 0.0]).unwrap().entropy_bits(), 0.0);
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert_eq!(kl_divergence_bits(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence_bits(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn sampling_never_returns_zero_mass_symbol() {
        let p = Pmf::new(vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| p.sample(&mut rng) == 1));
    }
}
