//! Experiment configuration for the `curves` command.
//!
//! The file is flat TOML: scalar keys plus lists, e.g.
//!
//! ```toml
//! prior = "dirichlet(0.5,0.5)"
//! n = 10000000
//! seeds = [1, 2, 3, 4, 5]
//! score = true
//! mu = [0, 5, 10]
//! ctw = [8]
//! markov_laws = ["iid(0.5,0.5)"]
//! boxes = ["box(1:0..0.5)"]
//! events = ["event(0,1|box(1:0..0.5),box())"]
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use lz78_source::baselines::{MarkovPlugin, MAX_CTW_DEPTH};
use lz78_source::empirical::{MAX_EVENT_ORDER, MAX_MU_ORDER};
use lz78_source::theory::MarkovLaw;
use lz78_source::{Error, Prior, SimplexBox, TestEvent};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, FieldContext};

/// A Markov law written in its text form inside the config file.
#[derive(Clone, Debug, PartialEq)]
pub struct LawText(pub MarkovLaw);

impl fmt::Display for LawText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for LawText {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.parse().map(LawText)
    }
}

impl Serialize for LawText {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LawText {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_per_decade() -> usize {
    lz78_source::curve::POINTS_PER_DECADE
}

fn default_gamma() -> f64 {
    0.5
}

fn default_mc_samples() -> usize {
    lz78_source::empirical::ETA_STAR_SAMPLES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub prior: Prior,
    pub n: u64,
    pub seeds: Vec<u64>,
    /// (1/n) log₂ 1/Q(Xⁿ) under the generating prior.
    #[serde(default)]
    pub score: bool,
    /// T_n log₂ T_n / n.
    #[serde(default)]
    pub compression_ratio: bool,
    /// Orders k of μ_k.
    #[serde(default)]
    pub mu: Vec<usize>,
    /// CTW depths.
    #[serde(default)]
    pub ctw: Vec<usize>,
    /// Orders of the add-γ Markov plug-in predictor.
    #[serde(default)]
    pub markov_plugin: Vec<usize>,
    #[serde(default = "default_gamma")]
    pub plugin_gamma: f64,
    /// Priors for LZ78 SPA runs that differ from the generating prior.
    #[serde(default)]
    pub mismatched_priors: Vec<Prior>,
    /// Fixed Markov laws: their log loss, (1/n) log Q/P and the
    /// relative-entropy limit.
    #[serde(default)]
    pub markov_laws: Vec<LawText>,
    /// Simplex boxes A for M_n(A).
    #[serde(default)]
    pub boxes: Vec<SimplexBox>,
    /// Joint events for L_n^{(r)}.
    #[serde(default)]
    pub events: Vec<TestEvent>,
    #[serde(default = "default_per_decade")]
    pub checkpoints_per_decade: usize,
    /// Monte-Carlo draws per Dirichlet component for limits.json.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn bad(field: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every parameter against the library caps, naming the
    /// offending field.
    pub fn validate(&self) -> CliResult<()> {
        let a = self.prior.alphabet_size();
        if self.n == 0 {
            return Err(bad("n", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(bad("seeds", "at least one seed is required"));
        }
        let mut seen = HashSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(bad("seeds", format!("seed {s} is repeated")));
        }
        for (i, &k) in self.mu.iter().enumerate() {
            let fits = (a as u64).checked_pow(k as u32 + 1).is_some();
            if k > MAX_MU_ORDER || !fits {
                return Err(bad(&format!("mu[{i}]"), format!("order {k} exceeds the cap of {MAX_MU_ORDER}")));
            }
        }
        for (i, &d) in self.ctw.iter().enumerate() {
            if a != 2 {
                return Err(bad(&format!("ctw[{i}]"), "CTW needs a binary alphabet"));
            }
            if d > MAX_CTW_DEPTH {
                return Err(bad(&format!("ctw[{i}]"), format!("depth {d} exceeds the cap of {MAX_CTW_DEPTH}")));
            }
        }
        for (i, &k) in self.markov_plugin.iter().enumerate() {
            MarkovPlugin::new(a, k, self.plugin_gamma).field(&format!("markov_plugin[{i}]"))?;
        }
        for (i, p) in self.mismatched_priors.iter().enumerate() {
            if p.alphabet_size() != a {
                return Err(bad(&format!("mismatched_priors[{i}]"), format!("alphabet {} differs from the prior's {a}", p.alphabet_size())));
            }
        }
        for (i, law) in self.markov_laws.iter().enumerate() {
            if law.0.alphabet_size() != a {
                return Err(bad(&format!("markov_laws[{i}]"), format!("alphabet {} differs from the prior's {a}", law.0.alphabet_size())));
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if b.min_alphabet() > a {
                return Err(bad(&format!("boxes[{i}]"), format!("{b} constrains a coordinate outside alphabet size {a}")));
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            let field = format!("events[{i}]");
            if e.order() > MAX_EVENT_ORDER {
                return Err(bad(&field, format!("order {} exceeds the cap of {MAX_EVENT_ORDER}", e.order())));
            }
            if e.order() as u64 > self.n {
                return Err(bad(&field, "longer than the sequence"));
            }
            if e.symbols().iter().any(|&s| s as usize >= a)
                || e.boxes().iter().any(|b| b.min_alphabet() > a)
            {
                return Err(bad(&field, format!("does not fit alphabet size {a}")));
            }
        }
        if self.checkpoints_per_decade == 0 {
            return Err(bad("checkpoints_per_decade", "must be at least 1"));
        }
        if self.mc_samples == 0 {
            return Err(bad("mc_samples", "must be at least 1"));
        }
        if !(self.plugin_gamma.is_finite() && self.plugin_gamma > 0.0) {
            return Err(bad("plugin_gamma", "must be positive"));
        }
        Ok(())
    }

    pub fn needs_b_trace(&self) -> bool {
        !self.boxes.is_empty() || !self.events.is_empty()
    }

    pub fn needs_log_prob(&self) -> bool {
        self.score || !self.markov_laws.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
prior = "mix(dirichlet(2,2)@0.05,atoms((0.95,0.05)@0.5,(0.05,0.95)@0.5)@0.95)"
n = 100000
seeds = [1, 2, 3]
score = true
compression_ratio = true
mu = [0, 5, 13]
ctw = [4]
markov_plugin = [2]
plugin_gamma = 0.5
mismatched_priors = ["dirichlet(0.5,0.5)"]
markov_laws = ["iid(0.5,0.5)", "markov(1;(0.9,0.1),(0.2,0.8))"]
boxes = ["box(1:0..0.5)"]
events = ["event(0,1|box(1:0..0.5),box())"]
checkpoints_per_decade = 20
mc_samples = 1000
output = "runs/dirac_dirichlet"
"#;

    #[test]
    fn round_trips_through_file_form() {
        let cfg = ExperimentConfig::from_toml(FULL).unwrap();
        assert_eq!(cfg.mu, [0, 5, 13]);
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn defaults_apply() {
        let cfg = ExperimentConfig::from_toml("prior = \"dirichlet(0.5,0.5)\"\nn = 10\nseeds = [0]\n").unwrap();
        assert_eq!(cfg.checkpoints_per_decade, 50);
        assert!(!cfg.score && cfg.mu.is_empty());
    }

    #[test]
    fn cap_violations_name_the_field() {
        let base = "prior = \"dirichlet(0.5,0.5)\"\nn = 100\nseeds = [0]\n";
        for (extra, field) in [
            ("mu = [3, 14]", "mu[1]"),
            ("ctw = [25]", "ctw[0]"),
            ("events = [\"event(0,0,0,0,0,0,0,0,0)\"]", "events[0]"),
            ("boxes = [\"box(2:0..1)\"]", "boxes[0]"),
        ] {
            let err = ExperimentConfig::from_toml(&format!("{base}{extra}\n")).unwrap_err();
            assert!(err.to_string().starts_with(field), "{err}");
        }
        let err = ExperimentConfig::from_toml("prior = \"dirichlet(0.5,0.5)\"\nn = 10\nseeds = [1, 1]\n").unwrap_err();
        assert!(err.to_string().contains("seeds"));
        assert!(ExperimentConfig::from_toml("prior = \"dirichlet(0.5,0.5)\"\nn = 10\nseeds = [1]\nbogus = 3\n").is_err());
    }
}
