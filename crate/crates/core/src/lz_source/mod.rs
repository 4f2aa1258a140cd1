//! The LZ78 probability source.
//!
//! [`generate`] grows an LZ78 prefix tree while drawing symbols: every node
//! owns a parameter Θ ~ Π (drawn the first time the node is visited) and
//! the next symbol is drawn from the current node's Θ. [`score`] evaluates
//! the exact law of the source on any sequence through the per-node
//! factorization Q(xⁿ) = Π_z q^Π(y_z), and [`phrase_stats`] reports the
//! parse statistics T_n, N(ℓ) and N^A(ℓ).

mod generate;
mod score;
mod stats;
mod tree;

pub use generate::{
    generate, generate_with, seeded_rng, DrawSource, GenerationOptions, GenerationTrace, RngDraws,
};
pub(crate) use score::check_symbols;
pub use score::{log2_probability, score, Lz78Spa};
pub use stats::{compression_ratio, phrase_stats, root_visits_at, PhraseInput, PhraseStats};
pub use tree::{Lz78Tree, Step, ROOT};
