//! The LZ78 probability source and its entropic limits.
//!
//! - [`prior`]: laws Π over the simplex and their moments.
//! - [`node_mixture`]: the per-node Bayesian mixture q^Π.
//! - [`lz_source`]: sampling, exact scoring and phrase statistics.
//! - [`empirical`]: r-tuple counts, μ_k, and empirical measures of (B, X).
//! - [`theory`]: entropy rate, Jensen gap and Markov relative-entropy limits.
//! - [`baselines`]: CTW and Markov plug-in sequential probability assignments.
//!
//! Log-probabilities and entropies are in bits throughout.

pub mod baselines;
pub mod curve;
pub mod empirical;
mod error;
pub mod lz_source;
pub mod node_mixture;
pub mod pmf;
pub mod prior;
pub mod record;
pub mod simplex;
pub mod special;
mod text;
pub mod theory;

pub use curve::{log_spaced_checkpoints, CurveSeries};
pub use error::{Error, Result};
pub use pmf::Pmf;
pub use prior::Prior;
pub use simplex::{SimplexBox, TestEvent};
