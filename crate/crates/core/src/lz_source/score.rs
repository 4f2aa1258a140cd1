use std::f64::consts::LN_2;
use std::sync::Arc;

use super::tree::Lz78Tree;
use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::node_mixture::{MixtureModel, NodeStateTable};
use crate::pmf::Pmf;
use crate::prior::Prior;

/// The LZ78 sequential probability assignment under prior Π: the next
/// symbol is predicted by q^Π at the current node of the prefix tree.
///
/// The cumulative log loss of this predictor on xⁿ is log₂ 1/Q^{LZ,Π}(xⁿ).
#[derive(Clone, Debug)]
pub struct Lz78Spa {
    tree: Lz78Tree,
    table: NodeStateTable,
}

impl Lz78Spa {
    pub fn new(prior: &Prior) -> Self {
        let mut table = NodeStateTable::new(Arc::new(MixtureModel::new(prior)));
        table.ensure(1);
        Self {
            tree: Lz78Tree::new(prior.alphabet_size()),
            table,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.tree.alphabet_size()
    }

    pub fn tree(&self) -> &Lz78Tree {
        &self.tree
    }

    /// Predictive law of the next symbol.
    pub fn predictive(&self) -> Result<Pmf> {
        let mut out = vec![0.0; self.alphabet_size()];
        self.table
            .predictive_into(self.tree.cursor() as usize, &mut out)?;
        Ok(Pmf::from_normalized(out))
    }

    /// Consumes `symbol`, returning log₂ of the probability it was assigned.
    #[inline]
    pub fn update(&mut self, symbol: u8) -> f64 {
        let node = self.tree.cursor() as usize;
        let ln_p = self.table.update(node, symbol as usize);
        if self.tree.advance(symbol).completed_phrase {
            self.table.ensure(self.tree.node_count());
        }
        ln_p / LN_2
    }

    /// log₂ probability of `symbol` without consuming it.
    pub fn log2_prob(&self, symbol: u8) -> f64 {
        self.table
            .ln_predictive(self.tree.cursor() as usize, symbol as usize)
            / LN_2
    }
}

pub(crate) fn check_symbols(x: &[u8], alphabet: usize) -> Result<()> {
    if let Some(&s) = x.iter().find(|&&s| s as usize >= alphabet) {
        return Err(Error::SymbolOutOfRange {
            symbol: s as usize,
            alphabet_size: alphabet,
        });
    }
    Ok(())
}

/// (1/n) log₂ 1/Q^{LZ,Π}(xⁿ) at each checkpoint. An atoms-only prior that
/// cannot produce `x` yields `+inf` rather than an error.
pub fn score(prior: &Prior, x: &[u8], checkpoints: &[u64]) -> Result<CurveSeries> {
    check_symbols(x, prior.alphabet_size())?;
    check_checkpoints(checkpoints, x.len() as u64, 1)?;
    let mut spa = Lz78Spa::new(prior);
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    let mut total = 0.0f64;
    for (i, &s) in x.iter().enumerate() {
        total += spa.update(s);
        let t = i as u64 + 1;
        if cps.peek() == Some(&&t) {
            cps.next();
            out.push(t, -total / t as f64);
        }
    }
    Ok(out)
}

/// log₂ Q^{LZ,Π}(x).
pub fn log2_probability(prior: &Prior, x: &[u8]) -> Result<f64> {
    check_symbols(x, prior.alphabet_size())?;
    let mut spa = Lz78Spa::new(prior);
    Ok(x.iter().map(|&s| spa.update(s)).sum())
}
