//! Test sets on the simplex and single-sequence events.
//!
//! A [`SimplexBox`] is a product of closed per-coordinate intervals
//! intersected with the simplex; unconstrained coordinates range over
//! `[0, 1]`. Text form: `box(1:0..0.5)` is `{θ : θ[1] ∈ [0, 0.5]}` and
//! `box()` is the whole simplex.
//!
//! A [`TestEvent`] pairs a target word with one box per position:
//! `event(0,1 | box(), box(1:0.9..1))`. Omitting the `| ...` part means
//! every box is the whole simplex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Cursor;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimplexBox {
    /// (coordinate, lo, hi), sorted by coordinate, at most one per coordinate.
    constraints: Vec<(usize, f64, f64)>,
}

impl SimplexBox {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn new(mut constraints: Vec<(usize, f64, f64)>) -> Result<Self> {
        constraints.sort_by_key(|c| c.0);
        for w in constraints.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {} constrained twice",
                    w[0].0
                )));
            }
        }
        for &(coord, lo, hi) in &constraints {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "bad interval [{lo}, {hi}] on coordinate {coord}"
                )));
            }
            if coord >= crate::pmf::MAX_ALPHABET {
                return Err(Error::InvalidArgument(format!("coordinate {coord} out of range")));
            }
        }
        Ok(Self { constraints })
    }

    /// `{θ : lo ≤ θ[coord] ≤ hi}`.
    pub fn coordinate(coord: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(coord, lo, hi)])
    }

    pub fn is_full(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[(usize, f64, f64)] {
        &self.constraints
    }

    /// Largest constrained coordinate + 1 (0 for the full simplex).
    pub fn min_alphabet(&self) -> usize {
        self.constraints.iter().map(|c| c.0 + 1).max().unwrap_or(0)
    }

    #[inline]
    pub fn contains(&self, theta: &[f64]) -> bool {
        self.constraints
            .iter()
            .all(|&(c, lo, hi)| theta.get(c).is_some_and(|v| (lo..=hi).contains(v)))
    }
}

impl fmt::Display for SimplexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "box(")?;
        for (i, (c, lo, hi)) in self.constraints.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}:{lo}..{hi}")?;
        }
        write!(f, ")")
    }
}

fn parse_box(cur: &mut Cursor<'_>) -> Result<SimplexBox> {
    let name = cur.ident()?;
    if name != "box" {
        return cur.error(format!("expected 'box', found '{name}'"));
    }
    cur.expect('(')?;
    let mut constraints = Vec::new();
    if !cur.eat(')') {
        loop {
            let coord = cur.integer()?;
            cur.expect(':')?;
            let lo = cur.number()?;
            cur.expect('.')?;
            cur.expect('.')?;
            let hi = cur.number()?;
            constraints.push((coord, lo, hi));
            if !cur.eat(',') {
                break;
            }
        }
        cur.expect(')')?;
    }
    SimplexBox::new(constraints)
}

impl FromStr for SimplexBox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let b = parse_box(&mut cur)?;
        cur.finish()?;
        Ok(b)
    }
}

/// Single-sequence event: `X^r = word` and `Θ_i ∈ boxes[i]` for every i.
#[derive(Clone, Debug, PartialEq)]
pub struct TestEvent {
    word: Vec<u8>,
    boxes: Vec<SimplexBox>,
}

impl TestEvent {
    pub fn new(word: Vec<u8>, boxes: Vec<SimplexBox>) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::InvalidArgument("event word must be non-empty".into()));
        }
        if boxes.len() != word.len() {
            return Err(Error::InvalidArgument(format!(
                "event has {} symbols but {} boxes",
                word.len(),
                boxes.len()
            )));
        }
        Ok(Self { word, boxes })
    }

    /// Event on the word alone (every box is the whole simplex).
    pub fn word(word: Vec<u8>) -> Result<Self> {
        let boxes = vec![SimplexBox::full(); word.len()];
        Self::new(word, boxes)
    }

    pub fn order(&self) -> usize {
        self.word.len()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.word
    }

    pub fn boxes(&self) -> &[SimplexBox] {
        &self.boxes
    }

    pub(crate) fn check_alphabet(&self, alphabet: usize) -> Result<()> {
        if let Some(&s) = self.word.iter().find(|&&s| s as usize >= alphabet) {
            return Err(Error::SymbolOutOfRange {
                symbol: s as usize,
                alphabet_size: alphabet,
            });
        }
        if let Some(b) = self.boxes.iter().find(|b| b.min_alphabet() > alphabet) {
            return Err(Error::InvalidArgument(format!(
                "{b} constrains a coordinate outside alphabet size {alphabet}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TestEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event(")?;
        crate::text::write_list(f, &self.word)?;
        if self.boxes.iter().any(|b| !b.is_full()) {
            write!(f, "|")?;
            crate::text::write_list(f, &self.boxes)?;
        }
        write!(f, ")")
    }
}

impl FromStr for TestEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let name = cur.ident()?;
        if name != "event" {
            return cur.error(format!("expected 'event', found '{name}'"));
        }
        cur.expect('(')?;
        let mut word = Vec::new();
        loop {
            let sym = cur.integer()?;
            if sym >= crate::pmf::MAX_ALPHABET {
                return cur.error(format!("symbol {sym} out of range"));
            }
            word.push(sym as u8);
            if !cur.eat(',') {
                break;
            }
        }
        let event = if cur.eat('|') {
            let mut boxes = vec![parse_box(&mut cur)?];
            while cur.eat(',') {
                boxes.push(parse_box(&mut cur)?);
            }
            TestEvent::new(word, boxes)?
        } else {
            TestEvent::word(word)?
        };
        cur.expect(')')?;
        cur.finish()?;
        Ok(event)
    }
}

macro_rules! serde_via_text {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_text!(SimplexBox);
serde_via_text!(TestEvent);
