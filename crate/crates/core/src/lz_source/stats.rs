use serde::{Deserialize, Serialize};

use super::generate::GenerationTrace;
use super::score::check_symbols;
use super::tree::Lz78Tree;
use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::simplex::SimplexBox;

/// Input to [`phrase_stats`]: a bare sequence, or a trace carrying B.
#[derive(Clone, Copy, Debug)]
pub enum PhraseInput<'a> {
    Sequence { x: &'a [u8], alphabet: usize },
    Trace(&'a GenerationTrace),
}

impl<'a> PhraseInput<'a> {
    fn symbols(&self) -> (&'a [u8], usize) {
        match *self {
            PhraseInput::Sequence { x, alphabet } => (x, alphabet),
            PhraseInput::Trace(t) => (&t.x, t.alphabet_size()),
        }
    }
}

/// Phrase and root-visit statistics of an LZ78 parse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhraseStats {
    pub n: u64,
    /// T_n: completed phrases.
    pub root_visits: u64,
    /// |Z(xⁿ)|: tree nodes including the root.
    pub node_count: u64,
    /// Symbols in the trailing incomplete phrase.
    pub partial_phrase_len: u64,
    /// Length of each completed phrase.
    pub phrase_lengths: Vec<u64>,
    /// N(ℓ) for ℓ = 1..=T_n.
    pub n_of_l: Vec<u64>,
    /// N^A(ℓ) for each requested test set, ℓ = 1..=T_n.
    pub n_a_of_l: Vec<Vec<u64>>,
}

/// Parses the input and counts phrases; N^A(ℓ) is produced for each of
/// `sets` and needs the B-trace.
pub fn phrase_stats(input: PhraseInput<'_>, sets: &[SimplexBox]) -> Result<PhraseStats> {
    let (x, alphabet) = input.symbols();
    check_symbols(x, alphabet)?;
    let b_index = match input {
        PhraseInput::Trace(t) => t.b_index.as_deref(),
        PhraseInput::Sequence { .. } => None,
    };
    if !sets.is_empty() && b_index.is_none() {
        return Err(Error::MissingBTrace);
    }

    let mut tree = Lz78Tree::new(alphabet);
    let mut phrase_lengths = Vec::new();
    let mut n_of_l = Vec::new();
    let mut n_a_of_l = vec![Vec::new(); sets.len()];
    let mut in_set = vec![0u64; sets.len()];
    let mut current = 0u64;
    for (i, &s) in x.iter().enumerate() {
        if let (PhraseInput::Trace(trace), Some(b)) = (input, b_index) {
            let theta = trace.theta(b[i]).expect("visited node has a parameter");
            for (acc, set) in in_set.iter_mut().zip(sets) {
                *acc += set.contains(theta) as u64;
            }
        }
        current += 1;
        if tree.advance(s).completed_phrase {
            phrase_lengths.push(current);
            n_of_l.push(i as u64 + 1);
            for (out, acc) in n_a_of_l.iter_mut().zip(&in_set) {
                out.push(*acc);
            }
            current = 0;
        }
    }
    Ok(PhraseStats {
        n: x.len() as u64,
        root_visits: tree.completed_phrases(),
        node_count: tree.node_count() as u64,
        partial_phrase_len: current,
        phrase_lengths,
        n_of_l,
        n_a_of_l,
    })
}

/// T_n at each checkpoint.
pub fn root_visits_at(x: &[u8], alphabet: usize, checkpoints: &[u64]) -> Result<Vec<u64>> {
    check_symbols(x, alphabet)?;
    check_checkpoints(checkpoints, x.len() as u64, 1)?;
    let mut tree = Lz78Tree::new(alphabet);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    for (i, &s) in x.iter().enumerate() {
        tree.advance(s);
        if cps.peek() == Some(&&(i as u64 + 1)) {
            cps.next();
            out.push(tree.completed_phrases());
        }
    }
    Ok(out)
}

/// T_n log₂ T_n / n at each checkpoint (0 when T_n = 0).
pub fn compression_ratio(x: &[u8], alphabet: usize, checkpoints: &[u64]) -> Result<CurveSeries> {
    let visits = root_visits_at(x, alphabet, checkpoints)?;
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    for (&n, &t) in checkpoints.iter().zip(&visits) {
        let t = t as f64;
        let v = if t > 0.0 { t * t.log2() / n as f64 } else { 0.0 };
        out.push(n, v);
    }
    Ok(out)
}
