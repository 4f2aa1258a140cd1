//! Limiting quantities of the source.
//!
//! For Θ ~ Π with mean m = E[Θ]:
//!
//! - entropy rate E[H(Θ)],
//! - finite-state / Markov limit μ = H(m),
//! - Jensen gap H(m) - E[H(Θ)] = I(Θ; Y),
//! - relative-entropy rate against a k-th order Markov law P:
//!   Σ_{y ∈ A^k} (Π_j m[y_j]) D(m ∥ P(·|y)) + H(m) - E[H(Θ)].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::lz_source::check_symbols;
use crate::pmf::{kl_divergence_bits, Pmf};
use crate::prior::{Estimate, Prior};
use crate::text::{write_list, Cursor};

/// Cap on the order of a [`MarkovLaw`].
pub const MAX_MARKOV_ORDER: usize = 8;
/// Cap on |A|^k · |A|, the size of a transition table.
const MAX_TABLE_CELLS: usize = 1 << 22;
const STATIONARY_MAX_ITERS: usize = 200_000;
const STATIONARY_TOL: f64 = 1e-15;

/// Distribution of the first k symbols, which have no full context.
#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    /// i.i.d. from the symbol marginal of a stationary law of the chain.
    Stationary,
    /// i.i.d. from the given law.
    Marginal(Pmf),
}

/// A k-th order Markov law on A. Rows are indexed by the context
/// x_{t-k} .. x_{t-1}, oldest symbol most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovLaw {
    order: usize,
    alphabet: usize,
    rows: Vec<Pmf>,
    initial: Initial,
    /// Resolved law of the first k symbols.
    head: Pmf,
}

impl MarkovLaw {
    pub fn new(order: usize, rows: Vec<Pmf>, initial: Initial) -> Result<Self> {
        if order > MAX_MARKOV_ORDER {
            return Err(Error::OrderTooLarge {
                order,
                cap: MAX_MARKOV_ORDER,
            });
        }
        let alphabet = rows
            .first()
            .map(Pmf::alphabet_size)
            .ok_or_else(|| Error::InvalidMarkovLaw("no rows".into()))?;
        let contexts = alphabet
            .checked_pow(order as u32)
            .filter(|c| c.saturating_mul(alphabet) <= MAX_TABLE_CELLS)
            .ok_or_else(|| {
                Error::InvalidMarkovLaw(format!(
                    "{alphabet}^{order} contexts exceed the table cap"
                ))
            })?;
        if rows.len() != contexts {
            return Err(Error::InvalidMarkovLaw(format!(
                "order {order} over {alphabet} symbols needs {contexts} rows, got {}",
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.alphabet_size() != alphabet) {
            return Err(Error::AlphabetMismatch {
                expected: alphabet,
                actual: r.alphabet_size(),
            });
        }
        let head = match &initial {
            Initial::Marginal(p) if p.alphabet_size() != alphabet => {
                return Err(Error::AlphabetMismatch {
                    expected: alphabet,
                    actual: p.alphabet_size(),
                })
            }
            Initial::Marginal(p) => p.clone(),
            Initial::Stationary => stationary_marginal(order, alphabet, &rows),
        };
        Ok(Self {
            order,
            alphabet,
            rows,
            initial,
            head,
        })
    }

    /// The order-0 law drawing every symbol from `p`.
    pub fn iid(p: Pmf) -> Self {
        Self {
            order: 0,
            alphabet: p.alphabet_size(),
            head: p.clone(),
            rows: vec![p],
            initial: Initial::Stationary,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row(&self, context: &[u8]) -> &Pmf {
        assert_eq!(context.len(), self.order);
        let idx = context
            .iter()
            .fold(0usize, |acc, &s| acc * self.alphabet + s as usize);
        &self.rows[idx]
    }

    pub fn initial(&self) -> &Initial {
        &self.initial
    }

    /// Law of each of the first k symbols.
    pub fn head_marginal(&self) -> &Pmf {
        &self.head
    }
}

/// Symbol marginal of a stationary law, by power iteration of the lazy
/// chain ½(I + P) over contexts started from the uniform law.
fn stationary_marginal(order: usize, alphabet: usize, rows: &[Pmf]) -> Pmf {
    if order == 0 {
        return rows[0].clone();
    }
    let states = rows.len();
    let mut v = vec![1.0 / states as f64; states];
    let mut next = vec![0.0; states];
    for _ in 0..STATIONARY_MAX_ITERS {
        next.iter_mut().zip(&v).for_each(|(n, x)| *n = 0.5 * x);
        for (ctx, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let base = (ctx * alphabet) % states;
            for (s, &p) in rows[ctx].probs().iter().enumerate() {
                next[base + s] += 0.5 * mass * p;
            }
        }
        let change: f64 = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut v, &mut next);
        if change < STATIONARY_TOL {
            break;
        }
    }
    let mut marginal = vec![0.0; alphabet];
    for (ctx, &mass) in v.iter().enumerate() {
        for (m, &p) in marginal.iter_mut().zip(rows[ctx].probs()) {
            *m += mass * p;
        }
    }
    Pmf::from_weights(&marginal).expect("stationary marginal has positive mass")
}

impl fmt::Display for MarkovLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 && self.initial == Initial::Stationary {
            return write!(f, "iid{}", self.rows[0]);
        }
        write!(f, "markov({};", self.order)?;
        write_list(f, &self.rows)?;
        if let Initial::Marginal(p) = &self.initial {
            write!(f, ";init{p}")?;
        }
        write!(f, ")")
    }
}

/// Text form: `iid(p0,p1,..)` or `markov(k; (row),(row),..[; init(p0,..)])`.
impl FromStr for MarkovLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let law = match cur.ident()? {
            "iid" => MarkovLaw::iid(Pmf::new(cur.number_tuple()?)?),
            "markov" => {
                cur.expect('(')?;
                let order = cur.integer()?;
                cur.expect(';')?;
                let mut rows = vec![Pmf::new(cur.number_tuple()?)?];
                while cur.eat(',') {
                    rows.push(Pmf::new(cur.number_tuple()?)?);
                }
                let mut initial = Initial::Stationary;
                if cur.eat(';') {
                    if cur.ident()? != "init" {
                        return cur.error("expected 'init'");
                    }
                    initial = Initial::Marginal(Pmf::new(cur.number_tuple()?)?);
                }
                cur.expect(')')?;
                MarkovLaw::new(order, rows, initial)?
            }
            other => return cur.error(format!("unknown law '{other}' (expected iid or markov)")),
        };
        cur.finish()?;
        Ok(law)
    }
}

/// JSON file form of a [`MarkovLaw`].
#[derive(Serialize, Deserialize)]
struct MarkovLawFile {
    order: usize,
    rows: Vec<Pmf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Pmf>,
}

impl Serialize for MarkovLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MarkovLawFile {
            order: self.order,
            rows: self.rows.clone(),
            initial: match &self.initial {
                Initial::Stationary => None,
                Initial::Marginal(p) => Some(p.clone()),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkovLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = MarkovLawFile::deserialize(d)?;
        let initial = file.initial.map_or(Initial::Stationary, Initial::Marginal);
        MarkovLaw::new(file.order, file.rows, initial).map_err(serde::de::Error::custom)
    }
}

/// Serializes an f64 that may be +∞ as the string `"inf"`.
pub mod bits_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t:?}"))),
        }
    }
}

/// Relative-entropy limit against one Markov law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeEntropyLimit {
    pub law: String,
    #[serde(with = "bits_or_inf")]
    pub value: f64,
}

/// Theoretical asymptotes of a prior, in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub units: String,
    pub prior: String,
    pub entropy_rate: f64,
    pub mu_limit: f64,
    pub jensen_gap: f64,
    /// Independent Monte-Carlo estimate of I(Θ; Y).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutual_information: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relative_entropy: Vec<RelativeEntropyLimit>,
}

/// Entropy rate, μ limit and Jensen gap of `prior`.
pub fn limits(prior: &Prior) -> LimitReport {
    let entropy_rate = prior.expected_entropy();
    let mu_limit = prior.entropy_of_mean();
    LimitReport {
        units: "bits".into(),
        prior: prior.to_string(),
        entropy_rate,
        mu_limit,
        jensen_gap: prior.jensen_gap(),
        mutual_information: None,
        relative_entropy: Vec::new(),
    }
}

/// lim (1/n) log₂ Q(Xⁿ)/P(Xⁿ) for X from the source with prior Π and a
/// fixed Markov law P; `+inf` when P gives zero probability to a symbol
/// that m = E[Θ] charges in a context of positive weight.
pub fn relative_entropy_limit(prior: &Prior, law: &MarkovLaw) -> Result<f64> {
    if prior.alphabet_size() != law.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            expected: prior.alphabet_size(),
            actual: law.alphabet_size(),
        });
    }
    let mean = prior.mean_pmf();
    let m = mean.probs();
    let a = law.alphabet_size();
    let mut divergence = 0.0;
    for (ctx, row) in law.rows().iter().enumerate() {
        let mut weight = 1.0;
        let mut rest = ctx;
        for _ in 0..law.order() {
            weight *= m[rest % a];
            rest /= a;
        }
        if weight > 0.0 {
            let d = kl_divergence_bits(m, row.probs());
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            divergence += weight * d;
        }
    }
    Ok(divergence + prior.jensen_gap())
}

/// I(Θ; Y) = E[D(Θ ∥ E[Θ])]: exact over atoms, Monte Carlo over
/// Dirichlet components.
pub fn mutual_information_gap<R: Rng + ?Sized>(
    prior: &Prior,
    rng: &mut R,
    samples: usize,
) -> Estimate {
    let mean = prior.mean_pmf();
    prior.expectation(|theta| kl_divergence_bits(theta, mean.probs()), rng, samples)
}

/// (1/t) log₂ 1/P(x^t) at checkpoints; the first k symbols are scored
/// i.i.d. under the law's head marginal. A zero-probability transition
/// gives `+inf` from that point on.
pub fn markov_law_score(law: &MarkovLaw, x: &[u8], checkpoints: &[u64]) -> Result<CurveSeries> {
    check_symbols(x, law.alphabet_size())?;
    check_checkpoints(checkpoints, x.len() as u64, 1)?;
    let a = law.alphabet_size();
    let contexts = law.rows().len();
    let mut ctx = 0usize;
    let mut total = 0.0f64;
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    for (i, &s) in x.iter().enumerate() {
        let p = if i < law.order() {
            law.head_marginal().prob(s as usize)
        } else {
            law.rows()[ctx].prob(s as usize)
        };
        total -= p.log2();
        ctx = (ctx * a + s as usize) % contexts;
        let t = i as u64 + 1;
        if cps.peek() == Some(&&t) {
            cps.next();
            out.push(t, total / t as f64);
        }
    }
    Ok(out)
}
