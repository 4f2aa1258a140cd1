use std::f64::consts::LN_2;

use super::SequentialPredictor;
use crate::error::{Error, Result};
use crate::pmf::Pmf;
use crate::special::ln_add_exp;

/// Maximum context depth.
pub const MAX_CTW_DEPTH: usize = 24;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    counts: [u32; 2],
    ln_kt: f64,
    ln_beta: f64,
    children: [u32; 2],
}

impl Node {
    const EMPTY: Node = Node {
        counts: [0, 0],
        ln_kt: 0.0,
        ln_beta: 0.0,
        children: [NONE, NONE],
    };

    #[inline]
    fn ln_kt_step(&self, symbol: usize) -> f64 {
        ((self.counts[symbol] as f64 + 0.5) / ((self.counts[0] + self.counts[1]) as f64 + 1.0)).ln()
    }
}

/// ln(½ e^a + ½ e^b)
#[inline]
fn ln_half_sum(a: f64, b: f64) -> f64 {
    ln_add_exp(a, b) - LN_2
}

/// Binary context-tree weighting of depth D with KT(½) estimators.
///
/// Every node keeps its KT log-probability and its weighted log-probability
/// ln β = ln(½ KT + ½ β(child 0) β(child 1)); leaves at depth D have β = KT.
/// Nodes are created lazily along visited context paths. Contexts before
/// the start of the sequence are padded with a fixed symbol.
#[derive(Clone, Debug)]
pub struct CtwModel {
    depth: usize,
    nodes: Vec<Node>,
    /// Past symbols, most recent in bit 0.
    history: u32,
}

impl CtwModel {
    pub fn new(depth: usize, pad: u8) -> Result<Self> {
        if depth > MAX_CTW_DEPTH {
            return Err(Error::OrderTooLarge {
                order: depth,
                cap: MAX_CTW_DEPTH,
            });
        }
        if pad > 1 {
            return Err(Error::SymbolOutOfRange {
                symbol: pad as usize,
                alphabet_size: 2,
            });
        }
        Ok(Self {
            depth,
            nodes: vec![Node::EMPTY],
            history: if pad == 1 { u32::MAX } else { 0 },
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// ln of the weighted probability of the sequence so far.
    pub fn ln_weighted_probability(&self) -> f64 {
        self.nodes[0].ln_beta
    }

    #[inline]
    fn context_symbol(&self, d: usize) -> usize {
        ((self.history >> d) & 1) as usize
    }

    /// ln β of the root after hypothetically appending `symbol`.
    fn ln_beta_after(&self, symbol: usize) -> f64 {
        let mut path = [NONE; MAX_CTW_DEPTH + 1];
        path[0] = 0;
        for d in 0..self.depth {
            if path[d] == NONE {
                break;
            }
            path[d + 1] = self.nodes[path[d] as usize].children[self.context_symbol(d)];
        }
        let mut below = 0.0;
        for d in (0..=self.depth).rev() {
            let node = match path[d] {
                NONE => &Node::EMPTY,
                id => &self.nodes[id as usize],
            };
            let kt = node.ln_kt + node.ln_kt_step(symbol);
            below = if d == self.depth {
                kt
            } else {
                let sibling = match node.children[1 - self.context_symbol(d)] {
                    NONE => 0.0,
                    id => self.nodes[id as usize].ln_beta,
                };
                ln_half_sum(kt, below + sibling)
            };
        }
        below
    }

    pub fn predict(&self) -> Pmf {
        let root = self.nodes[0].ln_beta;
        let p0 = (self.ln_beta_after(0) - root).exp();
        let p1 = (self.ln_beta_after(1) - root).exp();
        let s = p0 + p1;
        Pmf::from_normalized(vec![p0 / s, p1 / s])
    }

    /// Appends `symbol` and returns log₂ of the probability it was assigned.
    pub fn update(&mut self, symbol: u8) -> f64 {
        assert!(symbol < 2, "CTW is binary");
        let s = symbol as usize;
        let before = self.nodes[0].ln_beta;
        let mut path = [0u32; MAX_CTW_DEPTH + 1];
        for d in 0..self.depth {
            let c = self.context_symbol(d);
            let parent = path[d] as usize;
            let mut child = self.nodes[parent].children[c];
            if child == NONE {
                child = self.nodes.len() as u32;
                self.nodes.push(Node::EMPTY);
                self.nodes[parent].children[c] = child;
            }
            path[d + 1] = child;
        }
        for d in (0..=self.depth).rev() {
            let id = path[d] as usize;
            let step = self.nodes[id].ln_kt_step(s);
            let node = &mut self.nodes[id];
            node.ln_kt += step;
            node.counts[s] += 1;
            let ln_kt = node.ln_kt;
            let children = node.children;
            let beta = if d == self.depth {
                ln_kt
            } else {
                let split: f64 = children
                    .iter()
                    .filter(|&&c| c != NONE)
                    .map(|&c| self.nodes[c as usize].ln_beta)
                    .sum();
                ln_half_sum(ln_kt, split)
            };
            self.nodes[id].ln_beta = beta;
        }
        self.history = (self.history << 1) | symbol as u32;
        (self.nodes[0].ln_beta - before) / LN_2
    }

    #[cfg(test)]
    fn check_invariant(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, n) in self.nodes.iter().enumerate() {
            let has_children = n.children.iter().any(|&c| c != NONE);
            let expect = if !has_children && self.node_depth(i) == self.depth {
                n.ln_kt
            } else {
                let split: f64 = n
                    .children
                    .iter()
                    .filter(|&&c| c != NONE)
                    .map(|&c| self.nodes[c as usize].ln_beta)
                    .sum();
                ln_half_sum(n.ln_kt, split)
            };
            worst = worst.max((expect - n.ln_beta).abs());
        }
        worst
    }

    #[cfg(test)]
    fn node_depth(&self, target: usize) -> usize {
        fn walk(nodes: &[Node], at: usize, d: usize, target: usize) -> Option<usize> {
            if at == target {
                return Some(d);
            }
            nodes[at]
                .children
                .iter()
                .filter(|&&c| c != NONE)
                .find_map(|&c| walk(nodes, c as usize, d + 1, target))
        }
        walk(&self.nodes, 0, 0, target).expect("node is reachable")
    }
}

impl SequentialPredictor for CtwModel {
    fn alphabet_size(&self) -> usize {
        2
    }

    fn predictive(&self) -> Result<Pmf> {
        Ok(self.predict())
    }

    fn update(&mut self, symbol: u8) -> f64 {
        CtwModel::update(self, symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;
    use proptest::prelude::*;

    /// ln KT(a zeros, b ones) = ln Γ(a+½)Γ(b+½) / (π Γ(a+b+1)).
    fn ln_kt(a: u32, b: u32) -> f64 {
        ln_gamma(a as f64 + 0.5) + ln_gamma(b as f64 + 0.5)
            - std::f64::consts::PI.ln()
            - ln_gamma((a + b) as f64 + 1.0)
    }

    /// A context tree: a leaf, or a split on the next-older context symbol.
    #[derive(Clone)]
    enum Tree {
        Leaf,
        Split(Box<Tree>, Box<Tree>),
    }

    fn all_trees(depth_left: usize) -> Vec<Tree> {
        let mut out = vec![Tree::Leaf];
        if depth_left > 0 {
            let sub = all_trees(depth_left - 1);
            for a in &sub {
                for b in &sub {
                    out.push(Tree::Split(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
        }
        out
    }

    /// ln prior (½ per node above the depth limit) and per-leaf counts.
    fn tree_ln_prob(tree: &Tree, depth_left: usize, x: &[u8]) -> f64 {
        fn leaves(t: &Tree, left: usize, suffix: Vec<u8>, out: &mut Vec<Vec<u8>>, ln_prior: &mut f64) {
            if left > 0 {
                *ln_prior -= LN_2;
            }
            match t {
                Tree::Leaf => out.push(suffix),
                Tree::Split(a, b) => {
                    for (sym, child) in [(0u8, a), (1u8, b)] {
                        let mut s = suffix.clone();
                        s.push(sym);
                        leaves(child, left - 1, s, out, ln_prior);
                    }
                }
            }
        }
        let mut suffixes = Vec::new();
        let mut ln_prior = 0.0;
        leaves(tree, depth_left, Vec::new(), &mut suffixes, &mut ln_prior);
        let ctx = |t: usize, d: usize| if t > d { x[t - 1 - d] } else { 0 };
        let mut total = ln_prior;
        for suffix in suffixes {
            let mut counts = [0u32; 2];
            for (t, &s) in x.iter().enumerate() {
                if suffix.iter().enumerate().all(|(d, &c)| ctx(t, d) == c) {
                    counts[s as usize] += 1;
                }
            }
            total += ln_kt(counts[0], counts[1]);
        }
        total
    }

    fn oracle_ln_prob(depth: usize, x: &[u8]) -> f64 {
        let lps: Vec<f64> = all_trees(depth)
            .iter()
            .map(|t| tree_ln_prob(t, depth, x))
            .collect();
        crate::special::ln_sum_exp(&lps)
    }

    fn run(depth: usize, x: &[u8]) -> (CtwModel, f64) {
        let mut m = CtwModel::new(depth, 0).unwrap();
        let total: f64 = x.iter().map(|&s| m.update(s)).sum();
        (m, total)
    }

    #[test]
    fn tree_counts() {
        assert_eq!(all_trees(0).len(), 1);
        assert_eq!(all_trees(1).len(), 2);
        assert_eq!(all_trees(2).len(), 5);
        assert_eq!(all_trees(3).len(), 26);
    }

    #[test]
    fn depth_zero_is_kt() {
        let (_, bits) = run(0, &[0, 1, 0, 1]);
        assert!((bits - (3.0f64 / 128.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn matches_tree_enumeration() {
        for depth in 0..=2 {
            for v in 0u32..256 {
                let x: Vec<u8> = (0..8).map(|i| ((v >> i) & 1) as u8).collect();
                let (m, bits) = run(depth, &x);
                let oracle = oracle_ln_prob(depth, &x);
                assert!((m.ln_weighted_probability() - oracle).abs() < 1e-10);
                assert!((bits * LN_2 - oracle).abs() < 1e-10, "D={depth} x={x:?}");
            }
        }
    }

    #[test]
    fn depth_one_example() {
        // zero padding: context 0 precedes x1, x2 and x4 (symbols 0, 1, 1),
        // context 1 precedes x3 (symbol 0).
        let x = [0u8, 1, 0, 1];
        let expect = ln_half_sum(ln_kt(2, 2), ln_kt(1, 2) + ln_kt(1, 0));
        let (m, _) = run(1, &x);
        assert!((m.ln_weighted_probability() - expect).abs() < 1e-12);
    }

    #[test]
    fn structure_and_symmetry() {
        let m = CtwModel::new(24, 0).unwrap();
        assert_eq!(m.predict().probs(), &[0.5, 0.5]);
        let (m, _) = run(2, &[1]);
        assert_eq!(m.node_count(), 3);
        let (m, _) = run(2, &[0, 1, 1, 0, 1, 0, 0]);
        assert_eq!(m.node_count(), 7);
        assert!(CtwModel::new(25, 0).is_err());
    }

    #[test]
    fn dominates_each_tree() {
        for v in (0u32..256).step_by(7) {
            let x: Vec<u8> = (0..8).map(|i| ((v >> i) & 1) as u8).collect();
            let (m, _) = run(2, &x);
            for t in all_trees(2) {
                assert!(m.ln_weighted_probability() >= tree_ln_prob(&t, 2, &x) - 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn chain_rule_and_invariant(
            x in proptest::collection::vec(0u8..2, 1..120),
            depth in 0usize..10,
            pad in 0u8..2,
        ) {
            let mut m = CtwModel::new(depth, pad).unwrap();
            let mut total = 0.0;
            for &s in &x {
                let p = m.predict();
                prop_assert!(p.probs().iter().all(|&v| v > 0.0));
                let raw0 = (m.ln_beta_after(0) - m.ln_weighted_probability()).exp();
                let raw1 = (m.ln_beta_after(1) - m.ln_weighted_probability()).exp();
                prop_assert!((raw0 + raw1 - 1.0).abs() < 1e-12);
                let bits = m.update(s);
                prop_assert!((bits - p.prob(s as usize).log2()).abs() < 1e-9);
                total += bits;
            }
            prop_assert!(m.check_invariant() < 1e-12);
            prop_assert!((total * LN_2 - m.ln_weighted_probability()).abs() < 1e-9);
        }
    }
}
