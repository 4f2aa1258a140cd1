//! Reference sequential probability assignments.
//!
//! Each predictor implements [`SequentialPredictor`]; [`spa_log_loss`] runs
//! one over a sequence and reports the normalized cumulative log loss.

mod ctw;
mod markov;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ctw::{CtwModel, MAX_CTW_DEPTH};
pub use markov::MarkovPlugin;

use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::lz_source::{check_symbols, Lz78Spa};
use crate::pmf::Pmf;
use crate::prior::Prior;
use crate::text::Cursor;

/// A rule assigning a predictive law to the next symbol given the past.
pub trait SequentialPredictor {
    fn alphabet_size(&self) -> usize;

    /// Law of the next symbol.
    fn predictive(&self) -> Result<Pmf>;

    /// Consumes `symbol`, returning log₂ of the probability it was assigned.
    fn update(&mut self, symbol: u8) -> f64;
}

impl SequentialPredictor for Lz78Spa {
    fn alphabet_size(&self) -> usize {
        Lz78Spa::alphabet_size(self)
    }

    fn predictive(&self) -> Result<Pmf> {
        Lz78Spa::predictive(self)
    }

    fn update(&mut self, symbol: u8) -> f64 {
        Lz78Spa::update(self, symbol)
    }
}

/// Which predictor to run.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaConfig {
    /// Binary CTW of the given depth, zero-padded.
    Ctw { depth: usize },
    /// Add-γ Markov plug-in of the given order.
    Markov { order: usize, gamma: f64 },
    /// The LZ78 mixture SPA under a prior.
    Lz78 { prior: Prior },
}

impl SpaConfig {
    fn build(&self, alphabet: usize) -> Result<Box<dyn SequentialPredictor>> {
        Ok(match self {
            SpaConfig::Ctw { depth } => {
                if alphabet != 2 {
                    return Err(Error::AlphabetMismatch {
                        expected: 2,
                        actual: alphabet,
                    });
                }
                Box::new(CtwModel::new(*depth, 0)?)
            }
            SpaConfig::Markov { order, gamma } => Box::new(MarkovPlugin::new(alphabet, *order, *gamma)?),
            SpaConfig::Lz78 { prior } => {
                if prior.alphabet_size() != alphabet {
                    return Err(Error::AlphabetMismatch {
                        expected: prior.alphabet_size(),
                        actual: alphabet,
                    });
                }
                Box::new(Lz78Spa::new(prior))
            }
        })
    }
}

impl fmt::Display for SpaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaConfig::Ctw { depth } => write!(f, "ctw({depth})"),
            SpaConfig::Markov { order, gamma } => write!(f, "markov({order},{gamma})"),
            SpaConfig::Lz78 { prior } => write!(f, "lz78({prior})"),
        }
    }
}

/// Text form: `ctw(D)`, `markov(k,γ)` or `lz78(<prior>)`.
impl FromStr for SpaConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let name = cur.ident()?;
        let cfg = match name {
            "ctw" => {
                cur.expect('(')?;
                let depth = cur.integer()?;
                cur.expect(')')?;
                SpaConfig::Ctw { depth }
            }
            "markov" => {
                cur.expect('(')?;
                let order = cur.integer()?;
                cur.expect(',')?;
                let gamma = cur.number()?;
                cur.expect(')')?;
                SpaConfig::Markov { order, gamma }
            }
            "lz78" => {
                let inner = s.trim();
                let open = inner.find('(').expect("ident was followed by input");
                if !inner.ends_with(')') {
                    return Err(Error::Parse {
                        pos: inner.len(),
                        msg: "expected ')'".into(),
                    });
                }
                let prior = inner[open + 1..inner.len() - 1].parse()?;
                return Ok(SpaConfig::Lz78 { prior });
            }
            other => {
                return cur.error(format!("unknown predictor '{other}' (expected ctw, markov or lz78)"))
            }
        };
        cur.finish()?;
        Ok(cfg)
    }
}

impl Serialize for SpaConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpaConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Runs `predictor` over `x`, emitting (1/t) Σ log₂ 1/p at checkpoints.
pub fn predictor_log_loss<P: SequentialPredictor + ?Sized>(
    predictor: &mut P,
    x: &[u8],
    checkpoints: &[u64],
) -> Result<CurveSeries> {
    check_symbols(x, predictor.alphabet_size())?;
    check_checkpoints(checkpoints, x.len() as u64, 1)?;
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    let mut total = 0.0f64;
    for (i, &s) in x.iter().enumerate() {
        total -= predictor.update(s);
        let t = i as u64 + 1;
        if cps.peek() == Some(&&t) {
            cps.next();
            out.push(t, total / t as f64);
        }
    }
    Ok(out)
}

/// Normalized cumulative log loss of the configured predictor on `x`,
/// whose alphabet has `alphabet` symbols.
pub fn spa_log_loss(
    spa: &SpaConfig,
    alphabet: usize,
    x: &[u8],
    checkpoints: &[u64],
) -> Result<CurveSeries> {
    let mut predictor = spa.build(alphabet)?;
    predictor_log_loss(predictor.as_mut(), x, checkpoints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz_source::score;
    use proptest::prelude::*;

    #[test]
    fn kt_equivalences() {
        let x = [0u8, 1, 0, 1];
        let ctw = spa_log_loss(&SpaConfig::Ctw { depth: 0 }, 2, &x, &[4]).unwrap();
        let expect = (128.0f64 / 3.0).log2() / 4.0;
        assert!((ctw.last().unwrap().1 - expect).abs() < 1e-12);
        assert!((expect - 1.354).abs() < 1e-3);
        let plug = spa_log_loss(&SpaConfig::Markov { order: 0, gamma: 0.5 }, 2, &x, &[4]).unwrap();
        assert!((plug.last().unwrap().1 - expect).abs() < 1e-12);
    }

    #[test]
    fn lz78_view_equals_score() {
        let prior = Prior::jeffreys();
        let x: Vec<u8> = (0..500u32).map(|i| ((i * 7919) % 13 < 5) as u8).collect();
        let cps = [1, 10, 100, 500];
        let a = spa_log_loss(&SpaConfig::Lz78 { prior: prior.clone() }, 2, &x, &cps).unwrap();
        let b = score(&prior, &x, &cps).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_text_round_trip() {
        for s in ["ctw(8)", "markov(3,0.5)", "lz78(dirichlet(0.5,0.5))", "lz78(mix(dirichlet(2,2)@0.05,atoms((0.95,0.05)@0.5,(0.05,0.95)@0.5)@0.95))"] {
            let c: SpaConfig = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<SpaConfig>().unwrap(), c);
        }
        assert!("ctw".parse::<SpaConfig>().is_err());
        assert!("lz78(dirichlet(0.5,0.5)".parse::<SpaConfig>().is_err());
        assert!("tree(3)".parse::<SpaConfig>().is_err());
    }

    #[test]
    fn ctw_rejects_non_binary() {
        assert!(spa_log_loss(&SpaConfig::Ctw { depth: 2 }, 3, &[0, 2], &[2]).is_err());
    }

    proptest! {
        #[test]
        fn predictives_positive_and_normalized(
            x in proptest::collection::vec(0u8..2, 1..80),
            which in 0usize..3,
        ) {
            let spa = [
                SpaConfig::Ctw { depth: 5 },
                SpaConfig::Markov { order: 2, gamma: 0.3 },
                SpaConfig::Lz78 { prior: Prior::dirac_dirichlet(2.0, 0.05, 0.05).unwrap() },
            ][which].clone();
            let mut p = spa.build(2).unwrap();
            for &s in &x {
                let law = p.predictive().unwrap();
                prop_assert!(law.probs().iter().all(|&v| v > 0.0));
                prop_assert!((law.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let bits = p.update(s);
                prop_assert!((bits - law.prob(s as usize).log2()).abs() < 1e-9);
            }
        }
    }
}
