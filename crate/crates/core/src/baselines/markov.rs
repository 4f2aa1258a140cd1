use std::f64::consts::LN_2;

use super::SequentialPredictor;
use crate::error::{Error, Result};
use crate::pmf::{Pmf, MAX_ALPHABET};

/// Cap on the context-by-symbol count table.
const MAX_TABLE_CELLS: u64 = 1 << 24;

/// Adaptive k-th order Markov predictor with add-γ smoothing:
/// P(a | context) = (C(context, a) + γ) / (C(context) + |A|γ), counts taken
/// over the sequence so far. Contexts before the start are zero-padded.
#[derive(Clone, Debug)]
pub struct MarkovPlugin {
    order: usize,
    gamma: f64,
    alphabet: usize,
    counts: Vec<u32>,
    totals: Vec<u32>,
    context: usize,
}

impl MarkovPlugin {
    pub fn new(alphabet: usize, order: usize, gamma: f64) -> Result<Self> {
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(Error::InvalidArgument(format!(
                "alphabet size {alphabet} outside 2..={MAX_ALPHABET}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothing parameter must be positive, got {gamma}"
            )));
        }
        let contexts = (alphabet as u64)
            .checked_pow(order as u32)
            .filter(|c| c.saturating_mul(alphabet as u64) <= MAX_TABLE_CELLS)
            .ok_or(Error::OrderTooLarge {
                order,
                cap: (MAX_TABLE_CELLS as f64).log(alphabet as f64) as usize - 1,
            })? as usize;
        Ok(Self {
            order,
            gamma,
            alphabet,
            counts: vec![0; contexts * alphabet],
            totals: vec![0; contexts],
            context: 0,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    fn prob(&self, symbol: usize) -> f64 {
        let c = self.counts[self.context * self.alphabet + symbol] as f64;
        let t = self.totals[self.context] as f64;
        (c + self.gamma) / (t + self.alphabet as f64 * self.gamma)
    }
}

impl SequentialPredictor for MarkovPlugin {
    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn predictive(&self) -> Result<Pmf> {
        Ok(Pmf::from_normalized(
            (0..self.alphabet).map(|a| self.prob(a)).collect(),
        ))
    }

    fn update(&mut self, symbol: u8) -> f64 {
        let s = symbol as usize;
        let ln_p = self.prob(s).ln();
        self.counts[self.context * self.alphabet + s] += 1;
        self.totals[self.context] += 1;
        self.context = (self.context * self.alphabet + s) % self.totals.len();
        ln_p / LN_2
    }
}
