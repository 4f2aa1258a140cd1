use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{Lz78Tree, ROOT};
use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::node_mixture::{MixtureModel, NodeStateTable};
use crate::pmf::sample_index;
use crate::prior::Prior;

/// Source of the two kinds of randomness the generator consumes: node
/// parameters Θ ~ Π and symbols X ~ Θ.
pub trait DrawSource {
    fn draw_theta(&mut self, prior: &Prior, out: &mut [f64]);
    fn draw_symbol(&mut self, theta: &[f64]) -> u8;
}

/// Draws from a single random stream, in order of first node visit
/// interleaved with the per-step symbol draws.
pub struct RngDraws<R>(pub R);

impl<R: Rng> DrawSource for RngDraws<R> {
    #[inline]
    fn draw_theta(&mut self, prior: &Prior, out: &mut [f64]) {
        prior.sample_theta_into(&mut self.0, out);
    }

    #[inline]
    fn draw_symbol(&mut self, theta: &[f64]) -> u8 {
        sample_index(theta, &mut self.0)
    }
}

/// The seeded stream used for every seed-addressed run.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Default)]
pub struct GenerationOptions {
    /// Record the node id whose Θ produced each symbol.
    pub record_b: bool,
    /// Maintain the running log₂ Q^{LZ,Π}(X^t).
    pub track_log_prob: bool,
    /// Checkpoints at which (1/t) log₂ 1/Q(X^t) is recorded; requires
    /// `track_log_prob`.
    pub checkpoints: Vec<u64>,
}

impl GenerationOptions {
    /// Symbols only.
    pub fn symbols() -> Self {
        Self::default()
    }

    /// Everything: B-trace and running log-probability at `checkpoints`.
    pub fn full(checkpoints: Vec<u64>) -> Self {
        Self {
            record_b: true,
            track_log_prob: true,
            checkpoints,
        }
    }
}

/// A realization of the source plus whatever was requested in the options.
#[derive(Clone, Debug)]
pub struct GenerationTrace {
    alphabet: usize,
    pub x: Vec<u8>,
    /// Per-step node id (B_t is that node's Θ).
    pub b_index: Option<Vec<u32>>,
    /// 1-based steps at which the cursor was at the root.
    pub phrase_starts: Vec<u64>,
    /// Realized Θ per node, node-major; NaN for nodes never visited.
    thetas: Vec<f64>,
    /// (1/t) log₂ 1/Q(X^t) at the requested checkpoints.
    pub log_loss: Option<CurveSeries>,
    /// log₂ Q(Xⁿ) (≤ 0).
    pub log2_prob: Option<f64>,
}

impl GenerationTrace {
    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of nodes in the final tree, root included.
    pub fn node_count(&self) -> usize {
        self.thetas.len() / self.alphabet
    }

    /// Θ attached to `node`, if the node was ever visited.
    pub fn theta(&self, node: u32) -> Option<&[f64]> {
        let k = self.alphabet;
        let t = &self.thetas[node as usize * k..(node as usize + 1) * k];
        (!t[0].is_nan()).then_some(t)
    }

    /// B_t for 1-based step `t`; requires the B-trace.
    pub fn b(&self, t: usize) -> Result<&[f64]> {
        let b = self.b_index.as_ref().ok_or(Error::MissingBTrace)?;
        Ok(self.theta(b[t - 1]).expect("visited node has a parameter"))
    }
}

/// Draws Xⁿ from the LZ78 source with the canonical seeded stream.
pub fn generate(prior: &Prior, n: u64, seed: u64, options: &GenerationOptions) -> Result<GenerationTrace> {
    generate_with(prior, n, &mut RngDraws(seeded_rng(seed)), options)
}

/// Draws Xⁿ from the LZ78 source using `draws` for all randomness.
///
/// Each step: attach a fresh Θ to the current node if it has none, emit a
/// symbol from that Θ, then move to the matching child, creating it and
/// returning to the root when it is new.
pub fn generate_with<D: DrawSource>(
    prior: &Prior,
    n: u64,
    draws: &mut D,
    options: &GenerationOptions,
) -> Result<GenerationTrace> {
    if n == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    check_checkpoints(&options.checkpoints, n, 1)?;
    if !options.checkpoints.is_empty() && !options.track_log_prob {
        return Err(Error::InvalidArgument(
            "log-loss checkpoints require track_log_prob".into(),
        ));
    }
    let k = prior.alphabet_size();
    let mut tree = Lz78Tree::new(k);
    let mut thetas = vec![f64::NAN; k];
    let mut x = Vec::with_capacity(n as usize);
    let mut b_index = options.record_b.then(|| Vec::with_capacity(n as usize));
    let mut phrase_starts = Vec::new();
    let mut table = options
        .track_log_prob
        .then(|| NodeStateTable::new(Arc::new(MixtureModel::new(prior))));
    if let Some(t) = table.as_mut() {
        t.ensure(1);
    }
    let mut ln_q = 0.0f64;
    let mut log_loss = CurveSeries::with_capacity(options.checkpoints.len());
    let mut next_cp = options.checkpoints.iter().peekable();

    for t in 1..=n {
        let node = tree.cursor();
        let slot = node as usize * k;
        if thetas[slot].is_nan() {
            draws.draw_theta(prior, &mut thetas[slot..slot + k]);
        }
        let symbol = draws.draw_symbol(&thetas[slot..slot + k]);
        if node == ROOT {
            phrase_starts.push(t);
        }
        if let Some(b) = b_index.as_mut() {
            b.push(node);
        }
        if let Some(table) = table.as_mut() {
            ln_q += table.update(node as usize, symbol as usize);
            if next_cp.peek() == Some(&&t) {
                next_cp.next();
                log_loss.push(t, -ln_q / LN_2 / t as f64);
            }
        }
        x.push(symbol);
        if tree.advance(symbol).completed_phrase {
            thetas.extend(std::iter::repeat_n(f64::NAN, k));
            if let Some(table) = table.as_mut() {
                table.ensure(tree.node_count());
            }
        }
    }

    Ok(GenerationTrace {
        alphabet: k,
        x,
        b_index,
        phrase_starts,
        thetas,
        log_loss: options.track_log_prob.then_some(log_loss),
        log2_prob: options.track_log_prob.then_some(ln_q / LN_2),
    })
}
