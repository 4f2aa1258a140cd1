//! `(n, value)` series sampled at shared log-spaced checkpoints.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default checkpoint density.
pub const POINTS_PER_DECADE: usize = 50;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub points: Vec<(u64, f64)>,
}

impl CurveSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            points: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, n: u64, value: f64) {
        self.points.push((n, value));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<(u64, f64)> {
        self.points.last().copied()
    }

    /// Value at checkpoint `n`, if present.
    pub fn at(&self, n: u64) -> Option<f64> {
        self.points
            .binary_search_by_key(&n, |p| p.0)
            .ok()
            .map(|i| self.points[i].1)
    }

    /// Mean of the values whose checkpoint lies in `[lo, hi]`.
    pub fn mean_over(&self, lo: u64, hi: u64) -> Option<f64> {
        let vals: Vec<f64> = self
            .points
            .iter()
            .filter(|(n, _)| (lo..=hi).contains(n))
            .map(|p| p.1)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Writes `n,value` CSV. Infinite values are written as `inf`/`-inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,value")?;
        for (n, v) in &self.points {
            writeln!(w, "{n},{}", format_value(*v))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "n,value" => {}
            _ => return Err(Error::InvalidArgument("missing 'n,value' header".into())),
        }
        let mut out = Self::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (n, v) = line
                .split_once(',')
                .ok_or_else(|| Error::InvalidArgument(format!("bad csv row '{line}'")))?;
            let n = n
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad checkpoint '{n}'")))?;
            out.push(n, parse_value(v.trim())?);
        }
        Ok(out)
    }
}

pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

pub fn parse_value(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad value '{s}'"))),
    }
}

/// Sorted, de-duplicated checkpoints `round(10^(i/per_decade))` up to and
/// including `n`.
pub fn log_spaced_checkpoints(n: u64, per_decade: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let per_decade = per_decade.max(1) as f64;
    let mut i = 0u32;
    loop {
        let v = 10f64.powf(i as f64 / per_decade).round() as u64;
        if v >= n {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        i += 1;
    }
    out.push(n);
    out
}

/// Validates user checkpoints: sorted strictly increasing, within `1..=len`.
pub(crate) fn check_checkpoints(checkpoints: &[u64], len: u64, min: u64) -> Result<()> {
    for w in checkpoints.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument(
                "checkpoints must be strictly increasing".into(),
            ));
        }
    }
    if let Some(&first) = checkpoints.first() {
        if first < min.max(1) {
            return Err(Error::CheckpointTooSmall {
                checkpoint: first,
                min: min.max(1),
            });
        }
    }
    if let Some(&last) = checkpoints.last() {
        if last > len {
            return Err(Error::CheckpointBeyondEnd {
                checkpoint: last,
                len,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_are_log_spaced() {
        let c = log_spaced_checkpoints(10_000_000, 50);
        assert_eq!(c.first(), Some(&1));
        assert_eq!(c.last(), Some(&10_000_000));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        // 7 decades at 50 per decade, minus collisions among small integers
        assert!(c.len() > 300 && c.len() <= 351, "{}", c.len());
        assert_eq!(log_spaced_checkpoints(1, 50), vec![1]);
        assert_eq!(log_spaced_checkpoints(3, 1), vec![1, 3]);
    }

    #[test]
    fn csv_round_trip_with_infinity() {
        let mut c = CurveSeries::new();
        c.push(1, 0.5);
        c.push(10, f64::INFINITY);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "n,value\n1,0.5\n10,inf\n");
        assert_eq!(CurveSeries::read_csv(&buf[..]).unwrap(), c);
    }
}
