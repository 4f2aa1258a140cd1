//! Laws over the probability simplex of a finite alphabet.
//!
//! A [`Prior`] is a Dirichlet density, a finite set of weighted atoms, or a
//! weighted mixture of those (one level of nesting). Every prior has a
//! canonical text descriptor:
//!
//! ```text
//! dirichlet(0.5,0.5)
//! atoms((0.05,0.95)@0.5,(0.95,0.05)@0.5)
//! mix(dirichlet(2,2)@0.05,atoms((0.05,0.95)@0.5,(0.95,0.05)@0.5)@0.95)
//! ```
//!
//! which round-trips through [`std::str::FromStr`] and [`std::fmt::Display`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{entropy_bits, Pmf, MASS_TOLERANCE};
use crate::special::digamma;
use crate::text::{write_list, Cursor};

/// Maximum nesting depth; a mixture of leaves has depth 2.
pub const MAX_DEPTH: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Dirichlet {
    gamma: Vec<f64>,
    gamma_sum: f64,
}

impl Dirichlet {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 || gamma.len() > crate::pmf::MAX_ALPHABET {
            return Err(Error::InvalidPrior(format!(
                "dirichlet needs 2..=256 parameters, got {}",
                gamma.len()
            )));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidPrior(format!(
                "dirichlet parameters must be positive, got {g}"
            )));
        }
        let gamma_sum = gamma.iter().sum();
        Ok(Self { gamma, gamma_sum })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma_sum
    }

    /// E[-Σ Θ_a ln Θ_a] in nats via E[-Θ_a ln Θ_a] = (γ_a/γ₀)(ψ(γ₀+1) - ψ(γ_a+1)).
    fn expected_entropy_nats(&self) -> f64 {
        let g0 = self.gamma_sum;
        let psi0 = digamma(g0 + 1.0);
        self.gamma
            .iter()
            .map(|&g| g / g0 * (psi0 - digamma(g + 1.0)))
            .sum()
    }

    /// Draws Θ into `out`. Gamma variates are formed in log space so that
    /// very small concentrations (e.g. 0.01) never normalize 0/0.
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (slot, &g) in out.iter_mut().zip(&self.gamma) {
            *slot = if g < 1.0 {
                // G(g) = G(g + 1) U^{1/g}
                let boosted = Gamma::new(g + 1.0, 1.0).expect("valid shape").sample(rng);
                let u: f64 = 1.0 - rng.random::<f64>();
                boosted.ln() + u.ln() / g
            } else {
                Gamma::new(g, 1.0).expect("valid shape").sample(rng).ln()
            };
        }
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in out.iter_mut() {
            *v /= total;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atoms {
    points: Vec<(Pmf, f64)>,
}

impl Atoms {
    pub fn new(points: Vec<(Pmf, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPrior("atoms prior needs at least one point".into()));
        }
        let k = points[0].0.alphabet_size();
        if points.iter().any(|(p, _)| p.alphabet_size() != k) {
            return Err(Error::InvalidPrior("atoms have differing alphabet sizes".into()));
        }
        check_weights(points.iter().map(|(_, w)| *w))?;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(Pmf, f64)] {
        &self.points
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    components: Vec<(Prior, f64)>,
}

impl Mixture {
    pub fn new(components: Vec<(Prior, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidPrior("mixture needs at least one component".into()));
        }
        let k = components[0].0.alphabet_size();
        if components.iter().any(|(p, _)| p.alphabet_size() != k) {
            return Err(Error::InvalidPrior(
                "mixture components have differing alphabet sizes".into(),
            ));
        }
        if let Some((p, _)) = components.iter().find(|(p, _)| p.depth() + 1 > MAX_DEPTH) {
            return Err(Error::InvalidPrior(format!(
                "mixture nesting deeper than {MAX_DEPTH} levels: {p}"
            )));
        }
        check_weights(components.iter().map(|(_, w)| *w))?;
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(Prior, f64)] {
        &self.components
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    for w in weights {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidPrior(format!("weights must be positive, got {w}")));
        }
        total += w;
    }
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidPrior(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// A law Π over the simplex M(A).
#[derive(Clone, Debug, PartialEq)]
pub enum Prior {
    Dirichlet(Dirichlet),
    Atoms(Atoms),
    Mixture(Mixture),
}

/// A leaf of a flattened prior.
#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Atom(Pmf),
    Dirichlet(Dirichlet),
}

/// A Monte-Carlo (or exact, with zero error) estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_error: 0.0 }
    }
}

impl Prior {
    pub fn dirichlet(gamma: Vec<f64>) -> Result<Self> {
        Dirichlet::new(gamma).map(Prior::Dirichlet)
    }

    /// Symmetric Dirichlet(γ, .., γ).
    pub fn symmetric_dirichlet(alphabet_size: usize, gamma: f64) -> Result<Self> {
        Self::dirichlet(vec![gamma; alphabet_size])
    }

    /// Dirichlet(½, ½): the Jeffreys prior on a binary alphabet.
    pub fn jeffreys() -> Self {
        Self::dirichlet(vec![0.5, 0.5]).expect("valid")
    }

    pub fn atoms(points: Vec<(Pmf, f64)>) -> Result<Self> {
        Atoms::new(points).map(Prior::Atoms)
    }

    pub fn mixture(components: Vec<(Prior, f64)>) -> Result<Self> {
        Mixture::new(components).map(Prior::Mixture)
    }

    /// Binary Dirac–Dirichlet mixture: Dirichlet(γ, γ) with probability
    /// `dirichlet_weight`, otherwise equal point masses at ξ and 1 - ξ.
    pub fn dirac_dirichlet(gamma: f64, xi: f64, dirichlet_weight: f64) -> Result<Self> {
        let atoms = Self::atoms(vec![
            (Pmf::new(vec![1.0 - xi, xi])?, 0.5),
            (Pmf::new(vec![xi, 1.0 - xi])?, 0.5),
        ])?;
        Self::mixture(vec![
            (Self::dirichlet(vec![gamma, gamma])?, dirichlet_weight),
            (atoms, 1.0 - dirichlet_weight),
        ])
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            Prior::Dirichlet(d) => d.gamma.len(),
            Prior::Atoms(a) => a.points[0].0.alphabet_size(),
            Prior::Mixture(m) => m.components[0].0.alphabet_size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Prior::Dirichlet(_) | Prior::Atoms(_) => 1,
            Prior::Mixture(m) => 1 + m.components.iter().map(|(p, _)| p.depth()).max().unwrap_or(0),
        }
    }

    /// True iff some mixture path reaches a Dirichlet component, i.e. the
    /// support of the prior is the whole simplex.
    pub fn has_full_support(&self) -> bool {
        match self {
            Prior::Dirichlet(_) => true,
            Prior::Atoms(_) => false,
            Prior::Mixture(m) => m.components.iter().any(|(p, _)| p.has_full_support()),
        }
    }

    /// Leaf components with their total weights (atoms are split out).
    pub fn flatten(&self) -> Vec<(Component, f64)> {
        let mut out = Vec::new();
        self.flatten_into(1.0, &mut out);
        out
    }

    fn flatten_into(&self, scale: f64, out: &mut Vec<(Component, f64)>) {
        match self {
            Prior::Dirichlet(d) => out.push((Component::Dirichlet(d.clone()), scale)),
            Prior::Atoms(a) => {
                out.extend(a.points.iter().map(|(p, w)| (Component::Atom(p.clone()), scale * w)))
            }
            Prior::Mixture(m) => {
                for (p, w) in &m.components {
                    p.flatten_into(scale * w, out);
                }
            }
        }
    }

    /// Draws Θ ~ Π.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Pmf {
        let mut out = vec![0.0; self.alphabet_size()];
        self.sample_theta_into(rng, &mut out);
        Pmf::from_normalized(out)
    }

    /// Draws Θ ~ Π into a caller-owned buffer of length |A|.
    pub fn sample_theta_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Prior::Dirichlet(d) => d.sample_into(rng, out),
            Prior::Atoms(a) => {
                let i = pick_weighted(a.points.iter().map(|(_, w)| *w), rng);
                out.copy_from_slice(a.points[i].0.probs());
            }
            Prior::Mixture(m) => {
                let i = pick_weighted(m.components.iter().map(|(_, w)| *w), rng);
                m.components[i].0.sample_theta_into(rng, out);
            }
        }
    }

    /// E[Θ].
    pub fn mean_pmf(&self) -> Pmf {
        let mut mean = vec![0.0; self.alphabet_size()];
        for (comp, w) in self.flatten() {
            match comp {
                Component::Atom(p) => {
                    for (m, v) in mean.iter_mut().zip(p.probs()) {
                        *m += w * v;
                    }
                }
                Component::Dirichlet(d) => {
                    for (m, g) in mean.iter_mut().zip(&d.gamma) {
                        *m += w * g / d.gamma_sum;
                    }
                }
            }
        }
        Pmf::from_normalized(mean)
    }

    /// E[H(Θ)] in bits.
    pub fn expected_entropy(&self) -> f64 {
        self.flatten()
            .iter()
            .map(|(comp, w)| {
                w * match comp {
                    Component::Atom(p) => p.entropy_bits(),
                    Component::Dirichlet(d) => d.expected_entropy_nats() / std::f64::consts::LN_2,
                }
            })
            .sum()
    }

    /// H(E[Θ]) in bits.
    pub fn entropy_of_mean(&self) -> f64 {
        entropy_bits(self.mean_pmf().probs())
    }

    /// H(E[Θ]) - E[H(Θ)] in bits.
    pub fn jensen_gap(&self) -> f64 {
        (self.entropy_of_mean() - self.expected_entropy()).max(0.0)
    }

    /// E[f(Θ)]: exact over atoms, `samples`-draw Monte Carlo over each
    /// Dirichlet component. Component standard errors are combined in
    /// quadrature.
    pub fn expectation<F, R>(&self, f: F, rng: &mut R, samples: usize) -> Estimate
    where
        F: Fn(&[f64]) -> f64,
        R: Rng + ?Sized,
    {
        let mut value = 0.0;
        let mut var = 0.0;
        let mut buf = vec![0.0; self.alphabet_size()];
        for (comp, w) in self.flatten() {
            match comp {
                Component::Atom(p) => value += w * f(p.probs()),
                Component::Dirichlet(d) => {
                    let (mut sum, mut sum_sq) = (0.0, 0.0);
                    for _ in 0..samples {
                        d.sample_into(rng, &mut buf);
                        let v = f(&buf);
                        sum += v;
                        sum_sq += v * v;
                    }
                    let n = samples.max(1) as f64;
                    let mean = sum / n;
                    let sample_var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
                    value += w * mean;
                    var += w * w * sample_var / n;
                }
            }
        }
        Estimate {
            value,
            std_error: var.sqrt(),
        }
    }
}

fn pick_weighted<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

impl fmt::Display for Prior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Dirichlet(d) => {
                write!(f, "dirichlet(")?;
                write_list(f, &d.gamma)?;
                write!(f, ")")
            }
            Prior::Atoms(a) => {
                write!(f, "atoms(")?;
                for (i, (p, w)) in a.points.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}@{w}")?;
                }
                write!(f, ")")
            }
            Prior::Mixture(m) => {
                write!(f, "mix(")?;
                for (i, (p, w)) in m.components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}@{w}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl FromStr for Prior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let prior = parse_prior(&mut cur)?;
        cur.finish()?;
        Ok(prior)
    }
}

fn parse_prior(cur: &mut Cursor<'_>) -> Result<Prior> {
    let name = cur.ident()?;
    match name {
        "dirichlet" => Prior::dirichlet(cur.number_tuple()?),
        "atoms" => {
            cur.expect('(')?;
            let mut points = Vec::new();
            loop {
                let probs = cur.number_tuple()?;
                cur.expect('@')?;
                let w = cur.number()?;
                points.push((Pmf::new(probs)?, w));
                if !cur.eat(',') {
                    break;
                }
            }
            cur.expect(')')?;
            Prior::atoms(points)
        }
        "mix" => {
            cur.expect('(')?;
            let mut comps = Vec::new();
            loop {
                let p = parse_prior(cur)?;
                cur.expect('@')?;
                let w = cur.number()?;
                comps.push((p, w));
                if !cur.eat(',') {
                    break;
                }
            }
            cur.expect(')')?;
            Prior::mixture(comps)
        }
        other => cur.error(format!(
            "unknown prior '{other}' (expected dirichlet, atoms or mix)"
        )),
    }
}

impl Serialize for Prior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
