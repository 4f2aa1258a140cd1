//! Per-node Bayesian mixture law q^Π.
//!
//! q^Π(xⁿ) = ∫ Π_a Θ[a]^{C(a|xⁿ)} dΠ(Θ) depends only on the symbol counts of
//! xⁿ. The prior is flattened into atoms and Dirichlet components; each
//! component keeps `ln(prior weight) + ln(likelihood of the counts)` so the
//! predictive is a posterior-weighted average of component predictives.
//! A prior that is a single Dirichlet needs no component weights at all:
//! its predictive is the add-γ rule (C(a) + γ_a) / (n + Σγ).
//!
//! All internal arithmetic is in nats; public log-probabilities are bits.

use std::f64::consts::LN_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::prior::{Component, Prior};
use crate::special::{ln_gamma, ln_sum_exp};

#[derive(Clone, Debug)]
enum ComponentLaw {
    Atom { ln_probs: Vec<f64> },
    Dirichlet { gamma: Vec<f64>, gamma_sum: f64 },
}

impl ComponentLaw {
    #[inline]
    fn ln_predictive(&self, counts: &[u32], total: u32, symbol: usize) -> f64 {
        match self {
            ComponentLaw::Atom { ln_probs } => ln_probs[symbol],
            ComponentLaw::Dirichlet { gamma, gamma_sum } => {
                ((counts[symbol] as f64 + gamma[symbol]) / (total as f64 + gamma_sum)).ln()
            }
        }
    }

    #[inline]
    fn predictive(&self, counts: &[u32], total: u32, symbol: usize) -> f64 {
        match self {
            ComponentLaw::Atom { ln_probs } => ln_probs[symbol].exp(),
            ComponentLaw::Dirichlet { gamma, gamma_sum } => {
                (counts[symbol] as f64 + gamma[symbol]) / (total as f64 + gamma_sum)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum ModelKind {
    Dirichlet { gamma: Vec<f64>, gamma_sum: f64 },
    General {
        components: Vec<ComponentLaw>,
        ln_prior: Vec<f64>,
    },
}

/// The flattened prior used to evaluate q^Π from sufficient statistics.
#[derive(Clone, Debug)]
pub struct MixtureModel {
    alphabet: usize,
    kind: ModelKind,
}

impl MixtureModel {
    pub fn new(prior: &Prior) -> Self {
        let alphabet = prior.alphabet_size();
        let flat = prior.flatten();
        if let [(Component::Dirichlet(d), _)] = flat.as_slice() {
            return Self {
                alphabet,
                kind: ModelKind::Dirichlet {
                    gamma: d.gamma().to_vec(),
                    gamma_sum: d.gamma_sum(),
                },
            };
        }
        let mut components = Vec::with_capacity(flat.len());
        let mut ln_prior = Vec::with_capacity(flat.len());
        for (comp, w) in flat {
            components.push(match comp {
                Component::Atom(p) => ComponentLaw::Atom {
                    ln_probs: p.probs().iter().map(|v| v.ln()).collect(),
                },
                Component::Dirichlet(d) => ComponentLaw::Dirichlet {
                    gamma: d.gamma().to_vec(),
                    gamma_sum: d.gamma_sum(),
                },
            });
            ln_prior.push(w.ln());
        }
        Self {
            alphabet,
            kind: ModelKind::General {
                components,
                ln_prior,
            },
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Number of per-node component log-weights (0 for a pure Dirichlet).
    pub fn weight_slots(&self) -> usize {
        match &self.kind {
            ModelKind::Dirichlet { .. } => 0,
            ModelKind::General { ln_prior, .. } => ln_prior.len(),
        }
    }

    pub(crate) fn init_weights(&self, out: &mut [f64]) {
        if let ModelKind::General { ln_prior, .. } = &self.kind {
            out.copy_from_slice(ln_prior);
        }
    }

    /// ln q(symbol | counts) without modifying the state. Returns `-inf`
    /// when the state itself has probability zero.
    #[inline]
    pub(crate) fn ln_predictive(&self, counts: &[u32], total: u32, ln_w: &[f64], symbol: usize) -> f64 {
        match &self.kind {
            ModelKind::Dirichlet { gamma, gamma_sum } => {
                ((counts[symbol] as f64 + gamma[symbol]) / (total as f64 + gamma_sum)).ln()
            }
            ModelKind::General { components, .. } => {
                let den = ln_sum_exp(ln_w);
                if den == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let mut num = f64::NEG_INFINITY;
                for (c, lw) in components.iter().zip(ln_w) {
                    num = crate::special::ln_add_exp(num, lw + c.ln_predictive(counts, total, symbol));
                }
                num - den
            }
        }
    }

    /// Adds `symbol` to the state and returns ln q(symbol | old counts).
    #[inline]
    pub(crate) fn update(&self, counts: &mut [u32], total: &mut u32, ln_w: &mut [f64], symbol: usize) -> f64 {
        let inc = match &self.kind {
            ModelKind::Dirichlet { gamma, gamma_sum } => {
                ((counts[symbol] as f64 + gamma[symbol]) / (*total as f64 + gamma_sum)).ln()
            }
            ModelKind::General { components, .. } => {
                let den = ln_sum_exp(ln_w);
                for (c, lw) in components.iter().zip(ln_w.iter_mut()) {
                    *lw += c.ln_predictive(counts, *total, symbol);
                }
                if den == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    ln_sum_exp(ln_w) - den
                }
            }
        };
        counts[symbol] += 1;
        *total += 1;
        inc
    }

    /// Writes q(· | counts) into `out`.
    pub(crate) fn predictive_into(&self, counts: &[u32], total: u32, ln_w: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            ModelKind::Dirichlet { gamma, gamma_sum } => {
                let den = total as f64 + gamma_sum;
                for ((o, &c), g) in out.iter_mut().zip(counts).zip(gamma) {
                    *o = (c as f64 + g) / den;
                }
            }
            ModelKind::General { components, .. } => {
                let max = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max == f64::NEG_INFINITY {
                    return Err(Error::ZeroProbabilityState);
                }
                out.iter_mut().for_each(|o| *o = 0.0);
                let mut norm = 0.0;
                for (c, lw) in components.iter().zip(ln_w) {
                    let post = (lw - max).exp();
                    if post == 0.0 {
                        continue;
                    }
                    norm += post;
                    for (a, o) in out.iter_mut().enumerate() {
                        *o += post * c.predictive(counts, total, a);
                    }
                }
                out.iter_mut().for_each(|o| *o /= norm);
            }
        }
        Ok(())
    }

    /// ln q(counts) from the component log-weights (General models only).
    fn ln_marginal_from_weights(&self, ln_w: &[f64]) -> Option<f64> {
        match &self.kind {
            ModelKind::Dirichlet { .. } => None,
            ModelKind::General { .. } => Some(ln_sum_exp(ln_w)),
        }
    }
}

/// Sufficient statistics of one node plus cached component log-weights.
#[derive(Clone, Debug)]
pub struct NodeMixtureState {
    model: Arc<MixtureModel>,
    counts: Vec<u32>,
    total: u32,
    ln_weights: Vec<f64>,
    /// Running Σ ln predictive; authoritative for pure-Dirichlet models.
    ln_marginal: f64,
}

impl NodeMixtureState {
    pub fn new(prior: &Prior) -> Self {
        Self::with_model(Arc::new(MixtureModel::new(prior)))
    }

    pub fn with_model(model: Arc<MixtureModel>) -> Self {
        let mut ln_weights = vec![0.0; model.weight_slots()];
        model.init_weights(&mut ln_weights);
        Self {
            counts: vec![0; model.alphabet_size()],
            total: 0,
            ln_weights,
            ln_marginal: 0.0,
            model,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    /// Component log-weights in nats (empty for a pure Dirichlet prior).
    pub fn component_ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    /// q^Π(· | counts). Errors when the counts have probability zero.
    pub fn predictive(&self) -> Result<Pmf> {
        let mut out = vec![0.0; self.counts.len()];
        self.model
            .predictive_into(&self.counts, self.total, &self.ln_weights, &mut out)?;
        Ok(Pmf::from_normalized(out))
    }

    /// log₂ q^Π(symbol | counts).
    pub fn log2_predictive(&self, symbol: usize) -> Result<f64> {
        self.check_symbol(symbol)?;
        Ok(self
            .model
            .ln_predictive(&self.counts, self.total, &self.ln_weights, symbol)
            / LN_2)
    }

    pub fn update(&mut self, symbol: usize) -> Result<()> {
        self.check_symbol(symbol)?;
        let inc = self
            .model
            .update(&mut self.counts, &mut self.total, &mut self.ln_weights, symbol);
        self.ln_marginal += inc;
        Ok(())
    }

    /// log₂ q^Π of any sequence with these counts (≤ 0, possibly `-inf`).
    pub fn log_marginal(&self) -> f64 {
        self.model
            .ln_marginal_from_weights(&self.ln_weights)
            .unwrap_or(self.ln_marginal)
            / LN_2
    }

    fn check_symbol(&self, symbol: usize) -> Result<()> {
        if symbol >= self.counts.len() {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.counts.len(),
            });
        }
        Ok(())
    }
}

/// log₂ q^Π(counts) from Gamma-function closed forms, independent of the
/// sequential path. Dirichlet components use the Dirichlet-multinomial
/// ratio Γ(Σγ)/Γ(n+Σγ) · Π Γ(c_a+γ_a)/Γ(γ_a).
pub fn closed_form_log_marginal(prior: &Prior, counts: &[u32]) -> f64 {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let terms: Vec<f64> = prior
        .flatten()
        .into_iter()
        .map(|(comp, w)| {
            let ln_lik = match comp {
                Component::Atom(p) => counts
                    .iter()
                    .zip(p.probs())
                    .map(|(&c, &t)| if c == 0 { 0.0 } else { c as f64 * t.ln() })
                    .sum::<f64>(),
                Component::Dirichlet(d) => {
                    let g0 = d.gamma_sum();
                    ln_gamma(g0) - ln_gamma(total as f64 + g0)
                        + counts
                            .iter()
                            .zip(d.gamma())
                            .map(|(&c, &g)| ln_gamma(c as f64 + g) - ln_gamma(g))
                            .sum::<f64>()
                }
            };
            w.ln() + ln_lik
        })
        .collect();
    ln_sum_exp(&terms) / LN_2
}

/// Struct-of-arrays storage of mixture states for every node of a tree.
#[derive(Clone, Debug)]
pub(crate) struct NodeStateTable {
    model: Arc<MixtureModel>,
    counts: Vec<u32>,
    totals: Vec<u32>,
    ln_weights: Vec<f64>,
}

impl NodeStateTable {
    pub fn new(model: Arc<MixtureModel>) -> Self {
        Self {
            model,
            counts: Vec::new(),
            totals: Vec::new(),
            ln_weights: Vec::new(),
        }
    }

    /// Appends fresh states until the table covers `nodes` entries.
    pub fn ensure(&mut self, nodes: usize) {
        let k = self.model.alphabet_size();
        let slots = self.model.weight_slots();
        while self.totals.len() < nodes {
            self.totals.push(0);
            self.counts.extend(std::iter::repeat_n(0, k));
            let start = self.ln_weights.len();
            self.ln_weights.resize(start + slots, 0.0);
            self.model.init_weights(&mut self.ln_weights[start..]);
        }
    }

    #[inline]
    pub fn update(&mut self, node: usize, symbol: usize) -> f64 {
        let k = self.model.alphabet_size();
        let slots = self.model.weight_slots();
        self.model.update(
            &mut self.counts[node * k..(node + 1) * k],
            &mut self.totals[node],
            &mut self.ln_weights[node * slots..(node + 1) * slots],
            symbol,
        )
    }

    #[inline]
    pub fn ln_predictive(&self, node: usize, symbol: usize) -> f64 {
        let k = self.model.alphabet_size();
        let slots = self.model.weight_slots();
        self.model.ln_predictive(
            &self.counts[node * k..(node + 1) * k],
            self.totals[node],
            &self.ln_weights[node * slots..(node + 1) * slots],
            symbol,
        )
    }

    pub fn predictive_into(&self, node: usize, out: &mut [f64]) -> Result<()> {
        let k = self.model.alphabet_size();
        let slots = self.model.weight_slots();
        self.model.predictive_into(
            &self.counts[node * k..(node + 1) * k],
            self.totals[node],
            &self.ln_weights[node * slots..(node + 1) * slots],
            out,
        )
    }
}
