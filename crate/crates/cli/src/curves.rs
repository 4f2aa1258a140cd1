//! The `curves` command: per-(statistic, seed) CSV files, `limits.json`
//! and `summary.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lz78_source::baselines::{spa_log_loss, SpaConfig};
use lz78_source::empirical::{empirical_measure_b, empirical_measure_joint, eta_star, mu_k};
use lz78_source::lz_source::{compression_ratio, generate, seeded_rng, GenerationOptions, GenerationTrace};
use lz78_source::prior::Estimate;
use lz78_source::theory::{limits, markov_law_score, mutual_information_gap, relative_entropy_limit, LimitReport, RelativeEntropyLimit};
use lz78_source::{log_spaced_checkpoints, CurveSeries};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_json, Bits};

/// One statistic of one realization.
#[derive(Clone, Debug)]
enum Stat {
    Score,
    CompressionRatio,
    Mu(usize),
    Ctw(usize),
    Plugin(usize),
    Mismatched(usize),
    Law(usize),
    LogRatio(usize),
    Box(usize),
    Event(usize),
}

impl Stat {
    /// `<stat>` or `<stat>_<param>`.
    fn key(&self) -> String {
        match self {
            Stat::Score => "score".into(),
            Stat::CompressionRatio => "compression_ratio".into(),
            Stat::Mu(k) => format!("mu_{k}"),
            Stat::Ctw(d) => format!("ctw_{d}"),
            Stat::Plugin(k) => format!("markov_{k}"),
            Stat::Mismatched(i) => format!("lz78_{i}"),
            Stat::Law(i) => format!("law_{i}"),
            Stat::LogRatio(i) => format!("logratio_{i}"),
            Stat::Box(i) => format!("mn_{i}"),
            Stat::Event(i) => format!("ln_{i}"),
        }
    }

    fn describe(&self, cfg: &ExperimentConfig) -> String {
        match self {
            Stat::Score => format!("(1/n) log2 1/Q under {}", cfg.prior),
            Stat::CompressionRatio => "T_n log2 T_n / n".into(),
            Stat::Mu(k) => format!("mu_{k}"),
            Stat::Ctw(d) => format!("ctw({d}) log loss"),
            Stat::Plugin(k) => format!("markov({k},{}) log loss", cfg.plugin_gamma),
            Stat::Mismatched(i) => format!("lz78({}) log loss", cfg.mismatched_priors[*i]),
            Stat::Law(i) => format!("log loss of {}", cfg.markov_laws[*i]),
            Stat::LogRatio(i) => format!("(1/n) log2 Q/P for P = {}", cfg.markov_laws[*i]),
            Stat::Box(i) => format!("M_n({})", cfg.boxes[*i]),
            Stat::Event(i) => format!("L_n({})", cfg.events[*i]),
        }
    }
}

fn requested(cfg: &ExperimentConfig) -> Vec<Stat> {
    let mut out = Vec::new();
    if cfg.score {
        out.push(Stat::Score);
    }
    if cfg.compression_ratio {
        out.push(Stat::CompressionRatio);
    }
    out.extend(cfg.mu.iter().map(|&k| Stat::Mu(k)));
    out.extend(cfg.ctw.iter().map(|&d| Stat::Ctw(d)));
    out.extend(cfg.markov_plugin.iter().map(|&k| Stat::Plugin(k)));
    out.extend((0..cfg.mismatched_priors.len()).map(Stat::Mismatched));
    for i in 0..cfg.markov_laws.len() {
        out.push(Stat::Law(i));
        out.push(Stat::LogRatio(i));
    }
    out.extend((0..cfg.boxes.len()).map(Stat::Box));
    out.extend((0..cfg.events.len()).map(Stat::Event));
    out
}

fn checkpoints_from(all: &[u64], min: u64) -> Vec<u64> {
    all.iter().copied().filter(|&c| c >= min).collect()
}

fn compute(stat: &Stat, cfg: &ExperimentConfig, trace: &GenerationTrace, cps: &[u64]) -> CliResult<CurveSeries> {
    let a = trace.alphabet_size();
    let x = &trace.x;
    Ok(match stat {
        Stat::Score => trace.log_loss.clone().expect("log-loss tracked"),
        Stat::CompressionRatio => compression_ratio(x, a, cps)?,
        Stat::Mu(k) => mu_k(x, *k, a, &checkpoints_from(cps, *k as u64 + 1))?.curve,
        Stat::Ctw(d) => spa_log_loss(&SpaConfig::Ctw { depth: *d }, a, x, cps)?,
        Stat::Plugin(k) => spa_log_loss(
            &SpaConfig::Markov {
                order: *k,
                gamma: cfg.plugin_gamma,
            },
            a,
            x,
            cps,
        )?,
        Stat::Mismatched(i) => spa_log_loss(
            &SpaConfig::Lz78 {
                prior: cfg.mismatched_priors[*i].clone(),
            },
            a,
            x,
            cps,
        )?,
        Stat::Law(i) => markov_law_score(&cfg.markov_laws[*i].0, x, cps)?,
        Stat::LogRatio(i) => {
            let p = markov_law_score(&cfg.markov_laws[*i].0, x, cps)?;
            let q = trace.log_loss.as_ref().expect("log-loss tracked");
            let mut out = CurveSeries::with_capacity(p.len());
            for ((n, lp), (_, lq)) in p.points.iter().zip(&q.points) {
                out.push(*n, lp - lq);
            }
            out
        }
        Stat::Box(i) => empirical_measure_b(trace, std::slice::from_ref(&cfg.boxes[*i]), cps)?.remove(0),
        Stat::Event(i) => {
            let e = &cfg.events[*i];
            empirical_measure_joint(trace, e, &checkpoints_from(cps, e.order() as u64))?
        }
    })
}

#[derive(Serialize)]
struct EstimateEntry {
    descriptor: String,
    value: f64,
    std_error: f64,
}

#[derive(Serialize)]
struct CurveLimits {
    #[serde(flatten)]
    report: LimitReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    box_measure: Vec<EstimateEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    eta_star: Vec<EstimateEntry>,
}

fn theoretical_limits(cfg: &ExperimentConfig, seed: u64) -> CliResult<CurveLimits> {
    let mut rng = seeded_rng(seed);
    let mut report = limits(&cfg.prior);
    report.mutual_information = Some(mutual_information_gap(&cfg.prior, &mut rng, cfg.mc_samples));
    for law in &cfg.markov_laws {
        report.relative_entropy.push(RelativeEntropyLimit {
            law: law.to_string(),
            value: relative_entropy_limit(&cfg.prior, &law.0)?,
        });
    }
    let entry = |descriptor: String, e: Estimate| EstimateEntry {
        descriptor,
        value: e.value,
        std_error: e.std_error,
    };
    let box_measure = cfg
        .boxes
        .iter()
        .map(|b| {
            let e = cfg.prior.expectation(|t| b.contains(t) as u8 as f64, &mut rng, cfg.mc_samples);
            entry(b.to_string(), e)
        })
        .collect();
    let mut etas = Vec::new();
    for e in &cfg.events {
        etas.push(entry(e.to_string(), eta_star(&cfg.prior, e, &mut rng, cfg.mc_samples)?));
    }
    Ok(CurveLimits {
        report,
        box_measure,
        eta_star: etas,
    })
}

#[derive(Serialize)]
struct StatSummary {
    description: String,
    checkpoint: u64,
    seeds: Vec<u64>,
    finals: Vec<Bits>,
    mean: Bits,
    std_dev: Bits,
    min: Bits,
    max: Bits,
}

fn summarize(description: String, seeds: &[u64], finals: &[(u64, f64)]) -> StatSummary {
    let vals: Vec<f64> = finals.iter().map(|f| f.1).collect();
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = if vals.len() > 1 && mean.is_finite() {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    StatSummary {
        description,
        checkpoint: finals.iter().map(|f| f.0).min().unwrap_or(0),
        seeds: seeds.to_vec(),
        finals: vals.iter().map(|&v| Bits(v)).collect(),
        mean: Bits(mean),
        std_dev: Bits(var.sqrt()),
        min: Bits(vals.iter().copied().fold(f64::INFINITY, f64::min)),
        max: Bits(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    }
}

/// Runs the experiment grid into `dir` on a pool of `workers` threads.
pub fn run(cfg: &ExperimentConfig, dir: &Path, workers: usize, seed: u64, force: bool) -> CliResult<()> {
    let summary_path = dir.join("summary.json");
    if summary_path.exists() && !force {
        return Err(CliError::io(
            &summary_path,
            std::io::Error::new(std::io::ErrorKind::AlreadyExists, "already exists (use --force to overwrite)"),
        ));
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let cps = log_spaced_checkpoints(cfg.n, cfg.checkpoints_per_decade);
    let stats = requested(cfg);
    let opts = GenerationOptions {
        record_b: cfg.needs_b_trace(),
        track_log_prob: cfg.needs_log_prob(),
        checkpoints: if cfg.needs_log_prob() { cps.clone() } else { Vec::new() },
    };

    pool.install(|| -> CliResult<()> {
        let traces: Vec<GenerationTrace> = cfg
            .seeds
            .par_iter()
            .map(|&s| generate(&cfg.prior, cfg.n, s, &opts))
            .collect::<Result<_, _>>()?;
        let cells: Vec<(usize, usize)> = (0..stats.len())
            .flat_map(|i| (0..traces.len()).map(move |j| (i, j)))
            .collect();
        let finals: Vec<(u64, f64)> = cells
            .par_iter()
            .map(|&(i, j)| -> CliResult<(u64, f64)> {
                let curve = compute(&stats[i], cfg, &traces[j], &cps)?;
                let name = format!("{}_{}.csv", stats[i].key(), cfg.seeds[j]);
                write_csv(&dir.join(name), &curve, true)?;
                Ok(curve.last().unwrap_or((0, f64::NAN)))
            })
            .collect::<CliResult<_>>()?;

        let mut summary = BTreeMap::new();
        for (i, stat) in stats.iter().enumerate() {
            let per_seed = &finals[i * traces.len()..(i + 1) * traces.len()];
            summary.insert(stat.key(), summarize(stat.describe(cfg), &cfg.seeds, per_seed));
        }
        let limits = theoretical_limits(cfg, seed)?;
        write_json(&dir.join("limits.json"), &limits, true)?;
        fs::write(dir.join("config.toml"), cfg.to_toml()).map_err(|e| CliError::io(&dir.join("config.toml"), e))?;
        write_json(&summary_path, &summary, true)?;
        Ok(())
    })
}
