//! Empirical measures of a realization.
//!
//! r-grams are counted over sliding (overlapping) windows; windows that
//! would run past the end of the sequence are dropped. The k-th order
//! empirical conditional entropy is the count-weighted form
//!
//! ```text
//! μ_k(x^ℓ) = Σ_{m^{k+1}} (c_{k+1}(m)/W) log₂(c_k(m^k)/c_{k+1}(m)),   W = ℓ - k
//! ```
//!
//! where c_k counts the contexts that precede each of the W windows.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{check_checkpoints, CurveSeries};
use crate::error::{Error, Result};
use crate::lz_source::GenerationTrace;
use crate::prior::{Estimate, Prior};
use crate::simplex::{SimplexBox, TestEvent};

/// Cap on the order of dense r-gram tables.
pub const MAX_TUPLE_ORDER: usize = 12;
/// Cap on μ_k order; orders above [`MAX_DENSE_MU_ORDER`] use a hash table.
pub const MAX_MU_ORDER: usize = 13;
pub const MAX_DENSE_MU_ORDER: usize = 11;
/// Cap on the window length of joint (B, X) events.
pub const MAX_EVENT_ORDER: usize = 8;
/// Dense tables hold at most this many cells.
const DENSE_CELLS_MAX: u64 = 1 << 24;
/// Monte-Carlo draws per Dirichlet component in [`eta_star`].
pub const ETA_STAR_SAMPLES: usize = 1_000_000;

/// Sliding-window r-gram counts. Words are indexed big-endian: the first
/// symbol is the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleCounts {
    order: usize,
    alphabet: usize,
    table: Vec<u64>,
    windows: u64,
}

impl TupleCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Number of windows, len(x) - r + 1.
    pub fn windows(&self) -> u64 {
        self.windows
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    pub fn index_of(&self, word: &[u8]) -> usize {
        word.iter()
            .fold(0usize, |acc, &s| acc * self.alphabet + s as usize)
    }

    pub fn get(&self, word: &[u8]) -> u64 {
        assert_eq!(word.len(), self.order, "word length must equal the order");
        self.table[self.index_of(word)]
    }

    pub fn frequency(&self, word: &[u8]) -> f64 {
        self.get(word) as f64 / self.windows as f64
    }
}

fn table_cells(alphabet: usize, order: usize) -> Option<u64> {
    (alphabet as u64).checked_pow(order as u32)
}

/// Counts every r-gram of `x` over sliding windows.
pub fn tuple_counts(x: &[u8], r: usize, alphabet: usize) -> Result<TupleCounts> {
    crate::lz_source::check_symbols(x, alphabet)?;
    if r == 0 {
        return Err(Error::InvalidArgument("tuple order must be at least 1".into()));
    }
    if r > MAX_TUPLE_ORDER || r > x.len() {
        return Err(Error::OrderTooLarge {
            order: r,
            cap: MAX_TUPLE_ORDER.min(x.len()),
        });
    }
    let cells = match table_cells(alphabet, r) {
        Some(c) if c <= DENSE_CELLS_MAX => c as usize,
        _ => {
            return Err(Error::OrderTooLarge {
                order: r,
                cap: MAX_TUPLE_ORDER,
            })
        }
    };
    let mut table = vec![0u64; cells];
    let mut idx = 0usize;
    for (i, &s) in x.iter().enumerate() {
        idx = (idx * alphabet + s as usize) % cells;
        if i + 1 >= r {
            table[idx] += 1;
        }
    }
    Ok(TupleCounts {
        order: r,
        alphabet,
        table,
        windows: (x.len() - r + 1) as u64,
    })
}

/// μ_k at checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuCurve {
    pub order: usize,
    pub curve: CurveSeries,
}

enum Counter {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

impl Counter {
    /// Increments `key` and returns the previous count.
    #[inline]
    fn bump(&mut self, key: u64) -> u64 {
        match self {
            Counter::Dense(t) => {
                let c = &mut t[key as usize];
                *c += 1;
                *c - 1
            }
            Counter::Sparse(m) => {
                let c = m.entry(key).or_insert(0);
                *c += 1;
                *c - 1
            }
        }
    }
}

/// (c+1) log₂(c+1) - c log₂ c without cancellation.
#[inline]
fn xlogx_step(c: u64) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let c = c as f64;
    (c + 1.0).log2() + c * (1.0 / c).ln_1p() / std::f64::consts::LN_2
}

/// k-th order empirical conditional entropy of every prefix x^ℓ, ℓ in
/// `checkpoints`, in bits.
pub fn mu_k(x: &[u8], k: usize, alphabet: usize, checkpoints: &[u64]) -> Result<MuCurve> {
    crate::lz_source::check_symbols(x, alphabet)?;
    if k > MAX_MU_ORDER {
        return Err(Error::OrderTooLarge {
            order: k,
            cap: MAX_MU_ORDER,
        });
    }
    check_checkpoints(checkpoints, x.len() as u64, k as u64 + 1)?;
    let window_cells = table_cells(alphabet, k + 1).ok_or(Error::OrderTooLarge {
        order: k,
        cap: MAX_MU_ORDER,
    })?;
    let dense = k <= MAX_DENSE_MU_ORDER && window_cells <= DENSE_CELLS_MAX;
    let (mut windows, mut contexts) = if dense {
        (
            Counter::Dense(vec![0; window_cells as usize]),
            Counter::Dense(vec![0; (window_cells / alphabet as u64) as usize]),
        )
    } else {
        (Counter::Sparse(HashMap::new()), Counter::Sparse(HashMap::new()))
    };

    // Σ f(c_k) - Σ f(c_{k+1}) with f(c) = c log₂ c, maintained incrementally.
    let mut ctx_sum = 0.0f64;
    let mut win_sum = 0.0f64;
    let mut idx = 0u64;
    let a = alphabet as u64;
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    let max_bits = (alphabet as f64).log2();
    let mut cps = checkpoints.iter().peekable();
    for (i, &s) in x.iter().enumerate() {
        idx = (idx * a + s as u64) % window_cells;
        let t = i as u64 + 1;
        if t > k as u64 {
            win_sum += xlogx_step(windows.bump(idx));
            ctx_sum += xlogx_step(contexts.bump(idx / a));
        }
        if cps.peek() == Some(&&t) {
            cps.next();
            let w = (t - k as u64) as f64;
            out.push(t, ((ctx_sum - win_sum) / w).clamp(0.0, max_bits));
        }
    }
    Ok(MuCurve { order: k, curve: out })
}

/// M_n(A) = (1/n) #{t ≤ n : B_t ∈ A} at checkpoints, one curve per box.
pub fn empirical_measure_b(
    trace: &GenerationTrace,
    boxes: &[SimplexBox],
    checkpoints: &[u64],
) -> Result<Vec<CurveSeries>> {
    let b = trace.b_index.as_ref().ok_or(Error::MissingBTrace)?;
    check_checkpoints(checkpoints, trace.len() as u64, 1)?;
    if let Some(bx) = boxes.iter().find(|b| b.min_alphabet() > trace.alphabet_size()) {
        return Err(Error::InvalidArgument(format!(
            "{bx} constrains a coordinate outside alphabet size {}",
            trace.alphabet_size()
        )));
    }
    let mut hits = vec![0u64; boxes.len()];
    let mut out = vec![CurveSeries::with_capacity(checkpoints.len()); boxes.len()];
    let mut cps = checkpoints.iter().peekable();
    for (i, &node) in b.iter().enumerate() {
        let theta = trace.theta(node).expect("visited node has a parameter");
        for (h, bx) in hits.iter_mut().zip(boxes) {
            *h += bx.contains(theta) as u64;
        }
        let t = i as u64 + 1;
        if cps.peek() == Some(&&t) {
            cps.next();
            for (curve, h) in out.iter_mut().zip(&hits) {
                curve.push(t, *h as f64 / t as f64);
            }
        }
    }
    Ok(out)
}

/// L^{(r)}(A): fraction of full windows i with X_i^{i+r-1} equal to the
/// event word and B_{i+j-1} ∈ A_j for every j.
pub fn empirical_measure_joint(
    trace: &GenerationTrace,
    event: &TestEvent,
    checkpoints: &[u64],
) -> Result<CurveSeries> {
    let r = event.order();
    if r > MAX_EVENT_ORDER {
        return Err(Error::OrderTooLarge {
            order: r,
            cap: MAX_EVENT_ORDER,
        });
    }
    event.check_alphabet(trace.alphabet_size())?;
    let b = trace.b_index.as_ref().ok_or(Error::MissingBTrace)?;
    check_checkpoints(checkpoints, trace.len() as u64, r as u64)?;
    let word = event.symbols();
    let boxes = event.boxes();
    let mut hits = 0u64;
    let mut out = CurveSeries::with_capacity(checkpoints.len());
    let mut cps = checkpoints.iter().peekable();
    for t in r..=trace.len() {
        let start = t - r;
        let matched = trace.x[start..t] == *word
            && boxes.iter().enumerate().all(|(j, bx)| {
                bx.is_full() || bx.contains(trace.theta(b[start + j]).expect("visited"))
            });
        hits += matched as u64;
        if cps.peek() == Some(&&(t as u64)) {
            cps.next();
            out.push(t as u64, hits as f64 / (t - r + 1) as f64);
        }
    }
    Ok(out)
}

/// η*_r(A) = Π_j E[1{Θ ∈ A_j} Θ[x_j]] for Θ ~ Π: exact over atoms,
/// `samples`-draw Monte Carlo for Dirichlet components.
pub fn eta_star<R: Rng + ?Sized>(
    prior: &Prior,
    event: &TestEvent,
    rng: &mut R,
    samples: usize,
) -> Result<Estimate> {
    event.check_alphabet(prior.alphabet_size())?;
    let factors: Vec<Estimate> = event
        .symbols()
        .iter()
        .zip(event.boxes())
        .map(|(&sym, bx)| {
            prior.expectation(
                |theta| {
                    if bx.contains(theta) {
                        theta[sym as usize]
                    } else {
                        0.0
                    }
                },
                rng,
                samples,
            )
        })
        .collect();
    let value: f64 = factors.iter().map(|f| f.value).product();
    // first-order propagation of independent factor errors
    let var: f64 = (0..factors.len())
        .map(|j| {
            let others: f64 = factors
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, f)| f.value)
                .product();
            (factors[j].std_error * others).powi(2)
        })
        .sum();
    Ok(Estimate {
        value,
        std_error: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz_source::{generate, GenerationOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct evaluation of the count-weighted conditional entropy from
    /// freshly counted k- and (k+1)-grams.
    fn brute_mu(x: &[u8], k: usize) -> f64 {
        let mut win: HashMap<&[u8], u64> = HashMap::new();
        let mut ctx: HashMap<&[u8], u64> = HashMap::new();
        for i in 0..x.len() - k {
            *win.entry(&x[i..i + k + 1]).or_default() += 1;
            *ctx.entry(&x[i..i + k]).or_default() += 1;
        }
        let w = (x.len() - k) as f64;
        win.iter()
            .map(|(m, &c)| c as f64 / w * (ctx[&m[..k]] as f64 / c as f64).log2())
            .sum()
    }

    #[test]
    fn tuple_counts_by_hand() {
        let x = [0u8, 1, 0, 1];
        let t2 = tuple_counts(&x, 2, 2).unwrap();
        assert_eq!(t2.get(&[0, 1]), 2);
        assert_eq!(t2.get(&[1, 0]), 1);
        assert_eq!(t2.get(&[0, 0]), 0);
        assert_eq!(t2.windows(), 3);
        let t1 = tuple_counts(&x, 1, 2).unwrap();
        assert_eq!(t1.table(), &[2, 2]);
        assert!(tuple_counts(&x, 5, 2).is_err());
        assert!(tuple_counts(&x, 13, 2).is_err());
    }

    #[test]
    fn tuple_marginal_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<u8> = (0..5000).map(|_| rng.random_range(0..3)).collect();
        for r in 2..=5 {
            let hi = tuple_counts(&x, r, 3).unwrap();
            let lo = tuple_counts(&x[..x.len() - 1], r - 1, 3).unwrap();
            for (i, &c) in lo.table().iter().enumerate() {
                let summed: u64 = (0..3).map(|a| hi.table()[i * 3 + a]).sum();
                assert_eq!(summed, c);
            }
        }
    }

    #[test]
    fn mu_examples() {
        let c = mu_k(&[0, 1, 0, 1], 1, 2, &[4]).unwrap();
        assert_eq!(c.curve.last(), Some((4, 0.0)));
        let c = mu_k(&[0, 0, 0, 1], 0, 2, &[4]).unwrap();
        assert!((c.curve.last().unwrap().1 - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(matches!(
            mu_k(&[0, 1, 0, 1], 3, 2, &[3]),
            Err(Error::CheckpointTooSmall { .. })
        ));
    }

    #[test]
    fn mu_matches_brute_force_dense_and_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<u8> = (0..3000).map(|_| (rng.random::<f64>() < 0.3) as u8).collect();
        let cps = [20, 100, 777, 3000];
        for k in [0, 1, 3, 7, 11, 12, 13] {
            let c = mu_k(&x, k, 2, &cps).unwrap();
            for &(n, v) in &c.curve.points {
                let b = brute_mu(&x[..n as usize], k);
                assert!((v - b).abs() < 1e-12, "k={k} n={n}: {v} vs {b}");
            }
        }
    }

    #[test]
    fn mu_monotone_in_order_up_to_boundary() {
        let prior = Prior::jeffreys();
        let trace = generate(&prior, 20_000, 3, &GenerationOptions::symbols()).unwrap();
        let n = trace.len() as u64;
        for k in 0..8 {
            let a = mu_k(&trace.x, k, 2, &[n]).unwrap().curve.last().unwrap().1;
            let b = mu_k(&trace.x, k + 1, 2, &[n]).unwrap().curve.last().unwrap().1;
            let eps = (k + 1) as f64 / n as f64;
            assert!(b <= a + eps, "k={k}: {b} > {a}");
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn joint_measure_with_full_boxes_is_tuple_frequency() {
        let trace = generate(
            &Prior::jeffreys(),
            5000,
            4,
            &GenerationOptions {
                record_b: true,
                ..Default::default()
            },
        )
        .unwrap();
        let counts = tuple_counts(&trace.x, 3, 2).unwrap();
        for w in [[0u8, 1, 1], [1, 1, 1], [0, 0, 0]] {
            let e = TestEvent::word(w.to_vec()).unwrap();
            let l = empirical_measure_joint(&trace, &e, &[5000]).unwrap();
            assert_eq!(l.last().unwrap().1, counts.frequency(&w));
        }
        let full = empirical_measure_b(&trace, &[SimplexBox::full()], &[1, 10, 5000]).unwrap();
        assert!(full[0].points.iter().all(|p| p.1 == 1.0));
    }

    #[test]
    fn joint_measure_needs_b() {
        let trace = generate(&Prior::jeffreys(), 100, 4, &GenerationOptions::symbols()).unwrap();
        let e = TestEvent::word(vec![0]).unwrap();
        assert!(matches!(
            empirical_measure_joint(&trace, &e, &[100]),
            Err(Error::MissingBTrace)
        ));
    }

    #[test]
    fn impossible_word_has_zero_measure() {
        let prior: Prior = "atoms((1,0)@1)".parse().unwrap();
        let trace = generate(&prior, 1000, 1, &GenerationOptions::full(vec![])).unwrap();
        let e = TestEvent::word(vec![0, 1]).unwrap();
        let l = empirical_measure_joint(&trace, &e, &[2, 10, 1000]).unwrap();
        assert!(l.points.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn eta_star_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = TestEvent::word(vec![0, 1]).unwrap();
        let v = eta_star(&Prior::jeffreys(), &e, &mut rng, 200_000).unwrap();
        assert!((v.value - 0.25).abs() < 4.0 * v.std_error + 1e-12);

        let single: Prior = "atoms((0.3,0.7)@1)".parse().unwrap();
        let v = eta_star(&single, &TestEvent::word(vec![1, 1]).unwrap(), &mut rng, 10).unwrap();
        assert!((v.value - 0.49).abs() < 1e-15 && v.std_error == 0.0);

        // E[1{θ₁ ≤ ½} θ₁] under Beta(½,½) = 1/4 - 1/(2π)
        let e: TestEvent = "event(1|box(1:0..0.5))".parse().unwrap();
        let v = eta_star(&Prior::jeffreys(), &e, &mut rng, ETA_STAR_SAMPLES).unwrap();
        let exact = 0.25 - 1.0 / (2.0 * std::f64::consts::PI);
        assert!((exact - 0.090_845).abs() < 1e-6);
        assert!((v.value - exact).abs() < 4.0 * v.std_error, "{v:?}");
    }
}
