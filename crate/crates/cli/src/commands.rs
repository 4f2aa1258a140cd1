//! The `generate`, `score`, `dataset`, `theory` and `stats` commands.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lz78_source::baselines::{spa_log_loss, SpaConfig};
use lz78_source::empirical::{empirical_measure_b, empirical_measure_joint, eta_star, mu_k};
use lz78_source::lz_source::{
    compression_ratio, generate, phrase_stats, score, seeded_rng, GenerationOptions, GenerationTrace, PhraseInput,
};
use lz78_source::record::{create_output, read_symbols, record_paths, write_trace_csv, SequenceRecord, FORMAT_VERSION};
use lz78_source::theory::{limits, markov_law_score, mutual_information_gap, relative_entropy_limit, MarkovLaw, RelativeEntropyLimit};
use lz78_source::{log_spaced_checkpoints, Prior, SimplexBox, TestEvent};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, FieldContext};
use crate::output::{emit_csv, emit_json, write_json, Bits};

pub fn require_out(out: Option<&Path>, what: &str) -> CliResult<PathBuf> {
    out.map(Path::to_path_buf)
        .ok_or_else(|| CliError::Config(format!("--out is required for {what}")))
}

/// A Markov law given as a JSON file path or as a text descriptor.
pub fn parse_law(arg: &str) -> CliResult<MarkovLaw> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{arg}: {e}")))
    } else {
        arg.parse().field("law")
    }
}

pub fn cmd_generate(prior: &Prior, n: u64, seed: u64, out: &Path, trace_csv: bool, force: bool) -> CliResult<()> {
    let opts = GenerationOptions {
        record_b: trace_csv,
        ..Default::default()
    };
    let trace = generate(prior, n, seed, &opts).field("n")?;
    let (sym, _) = record_paths(out);
    let record = SequenceRecord::new(prior, seed, trace.x.clone());
    record.write(out, force)?;
    if trace_csv {
        let stem = sym.to_string_lossy();
        let path = PathBuf::from(format!("{}.trace.csv", stem.strip_suffix(".sym").unwrap_or(&stem)));
        let mut w = create_output(&path, force)?;
        write_trace_csv(&trace, &mut w)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

/// Symbols plus the metadata of the record they came from, if any.
pub struct LoadedInput {
    pub symbols: Vec<u8>,
    pub record: Option<SequenceRecord>,
    pub alphabet: usize,
}

/// Loads a record (`.sym` + `.json`) or, without metadata, a bare `.sym`
/// file whose alphabet comes from `alphabet` or `prior`.
pub fn load_input(input: &Path, alphabet: Option<usize>, prior: Option<&Prior>) -> CliResult<LoadedInput> {
    let (sym, json) = record_paths(input);
    if json.is_file() {
        let record = SequenceRecord::read(input)?;
        let a = record.meta.alphabet_size;
        if let Some(k) = alphabet.filter(|&k| k != a) {
            return Err(CliError::Config(format!("--alphabet {k} contradicts the record's alphabet size {a}")));
        }
        return Ok(LoadedInput {
            symbols: record.symbols.clone(),
            alphabet: a,
            record: Some(record),
        });
    }
    let a = alphabet
        .or_else(|| prior.map(Prior::alphabet_size))
        .ok_or_else(|| CliError::Config(format!("{} has no metadata; pass --alphabet or --prior", json.display())))?;
    let path = if sym.is_file() { sym } else { input.to_path_buf() };
    let symbols = read_symbols(&path, a)?;
    Ok(LoadedInput {
        symbols,
        record: None,
        alphabet: a,
    })
}

pub struct ScoreArgs<'a> {
    pub input: &'a Path,
    pub prior: Option<&'a Prior>,
    pub alphabet: Option<usize>,
    pub spa: Option<&'a SpaConfig>,
    pub law: Option<&'a str>,
    pub checkpoints: &'a [u64],
    pub per_decade: usize,
}

pub fn cmd_score(args: &ScoreArgs<'_>, out: Option<&Path>, force: bool) -> CliResult<()> {
    let loaded = load_input(args.input, args.alphabet, args.prior)?;
    let x = &loaded.symbols;
    if x.is_empty() {
        return Err(CliError::Config("input sequence is empty".into()));
    }
    let cps = if args.checkpoints.is_empty() {
        log_spaced_checkpoints(x.len() as u64, args.per_decade)
    } else {
        args.checkpoints.to_vec()
    };
    let curve = if let Some(spa) = args.spa {
        spa_log_loss(spa, loaded.alphabet, x, &cps).field("spa")?
    } else if let Some(law) = args.law {
        markov_law_score(&parse_law(law)?, x, &cps).field("law")?
    } else {
        let prior = match (args.prior, &loaded.record) {
            (Some(p), _) => p.clone(),
            (None, Some(r)) => r.meta.prior.clone(),
            (None, None) => return Err(CliError::Config("--prior is required for inputs without metadata".into())),
        };
        if prior.alphabet_size() != loaded.alphabet {
            return Err(CliError::Config(format!(
                "prior alphabet {} differs from the input alphabet {}",
                prior.alphabet_size(),
                loaded.alphabet
            )));
        }
        score(&prior, x, &cps).field("checkpoints")?
    };
    emit_csv(out, &curve, force)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub split: String,
    pub path: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub prior: Prior,
    pub alphabet_size: usize,
    pub length: u64,
    pub train_count: u64,
    pub eval_count: u64,
    pub seed_base: u64,
    pub files: Vec<ManifestFile>,
}

pub struct DatasetArgs<'a> {
    pub prior: &'a Prior,
    pub length: u64,
    pub train: u64,
    pub eval: u64,
    pub seed_base: u64,
}

/// Train file i uses seed_base + i; eval file j uses
/// seed_base + train + j.
pub fn dataset_manifest(args: &DatasetArgs<'_>) -> CliResult<DatasetManifest> {
    if args.train == 0 || args.eval == 0 {
        return Err(CliError::Config("train and eval counts must be at least 1".into()));
    }
    if args.length == 0 {
        return Err(CliError::Config("length must be at least 1".into()));
    }
    args.seed_base
        .checked_add(args.train + args.eval)
        .ok_or_else(|| CliError::Config("seed_base + file count overflows".into()))?;
    let mut files = Vec::with_capacity((args.train + args.eval) as usize);
    for (split, count, offset) in [("train", args.train, 0), ("eval", args.eval, args.train)] {
        for i in 0..count {
            files.push(ManifestFile {
                split: split.into(),
                path: format!("{split}/{i:05}.sym"),
                seed: args.seed_base + offset + i,
            });
        }
    }
    Ok(DatasetManifest {
        format_version: FORMAT_VERSION,
        prior: args.prior.clone(),
        alphabet_size: args.prior.alphabet_size(),
        length: args.length,
        train_count: args.train,
        eval_count: args.eval,
        seed_base: args.seed_base,
        files,
    })
}

pub fn cmd_dataset(args: &DatasetArgs<'_>, dir: &Path, workers: usize, force: bool) -> CliResult<()> {
    let manifest = dataset_manifest(args)?;
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() && !force {
        return Err(CliError::io(
            &manifest_path,
            std::io::Error::new(std::io::ErrorKind::AlreadyExists, "already exists (use --force to overwrite)"),
        ));
    }
    for split in ["train", "eval"] {
        let d = dir.join(split);
        fs::create_dir_all(&d).map_err(|e| CliError::io(&d, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    pool.install(|| {
        manifest.files.par_iter().try_for_each(|f| -> CliResult<()> {
            let trace = generate(args.prior, args.length, f.seed, &GenerationOptions::symbols())?;
            let path = dir.join(&f.path);
            let mut w = create_output(&path, force)?;
            w.write_all(&trace.x).map_err(|e| CliError::io(&path, e))?;
            w.flush().map_err(|e| CliError::io(&path, e))
        })
    })?;
    write_json(&manifest_path, &manifest, true)
}

pub fn cmd_theory(prior: &Prior, laws: &[String], mc_samples: usize, seed: u64, out: Option<&Path>, force: bool) -> CliResult<()> {
    if mc_samples == 0 {
        return Err(CliError::Config("--mc-samples must be at least 1".into()));
    }
    let mut report = limits(prior);
    report.mutual_information = Some(mutual_information_gap(prior, &mut seeded_rng(seed), mc_samples));
    for arg in laws {
        let law = parse_law(arg)?;
        report.relative_entropy.push(RelativeEntropyLimit {
            law: law.to_string(),
            value: relative_entropy_limit(prior, &law).field("law")?,
        });
    }
    emit_json(out, &report, force)
}

pub struct StatsArgs<'a> {
    pub input: Option<&'a Path>,
    pub prior: Option<&'a Prior>,
    pub n: Option<u64>,
    pub alphabet: Option<usize>,
    pub boxes: &'a [SimplexBox],
    pub events: &'a [TestEvent],
    pub mu: &'a [usize],
    pub phrases: bool,
    pub mc_samples: usize,
}

#[derive(Serialize)]
struct MeasureEntry {
    descriptor: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_std_error: Option<f64>,
}

#[derive(Serialize)]
struct StatsReport {
    n: u64,
    alphabet_size: usize,
    root_visits: u64,
    node_count: u64,
    partial_phrase_len: u64,
    compression_ratio: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    mu: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    box_measure: Vec<MeasureEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    event_measure: Vec<MeasureEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phrase_lengths: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_of_l: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_a_of_l: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<Bits>,
}

/// Symbols, alphabet size, trace (when generated or rebuilt) and prior.
type StatsSource = (Vec<u8>, usize, Option<GenerationTrace>, Option<Prior>);

/// Obtains the sequence, and the B-trace when `need_b`: regenerated from
/// the record's (prior, seed, n), or generated from `--prior/--n/--seed`.
fn stats_source(args: &StatsArgs<'_>, seed: u64, need_b: bool) -> CliResult<StatsSource> {
    let opts = GenerationOptions {
        record_b: need_b,
        ..Default::default()
    };
    match (args.input, args.prior, args.n) {
        (Some(input), _, None) => {
            let loaded = load_input(input, args.alphabet, args.prior)?;
            let prior = args.prior.cloned().or_else(|| loaded.record.as_ref().map(|r| r.meta.prior.clone()));
            if !need_b {
                return Ok((loaded.symbols, loaded.alphabet, None, prior));
            }
            let record = loaded.record.as_ref().ok_or_else(|| {
                CliError::Config("parameter-space statistics need a record with metadata to rebuild the B-trace".into())
            })?;
            let m = &record.meta;
            let trace = generate(&m.prior, m.n, m.seed, &opts)?;
            if trace.x != loaded.symbols {
                return Err(CliError::Config(
                    "record symbols do not match a regeneration from its metadata; B-trace unavailable".into(),
                ));
            }
            Ok((loaded.symbols, loaded.alphabet, Some(trace), prior))
        }
        (None, Some(prior), Some(n)) => {
            let trace = generate(prior, n, seed, &opts).field("n")?;
            let x = trace.x.clone();
            Ok((x, prior.alphabet_size(), Some(trace), Some(prior.clone())))
        }
        _ => Err(CliError::Config("stats needs either --input, or --prior with --n".into())),
    }
}

pub fn cmd_stats(args: &StatsArgs<'_>, seed: u64, out: Option<&Path>, force: bool) -> CliResult<()> {
    let need_b = !args.boxes.is_empty() || !args.events.is_empty();
    let (x, alphabet, trace, prior) = stats_source(args, seed, need_b)?;
    if x.is_empty() {
        return Err(CliError::Config("input sequence is empty".into()));
    }
    let n = x.len() as u64;
    let phrase = match &trace {
        Some(t) if need_b => phrase_stats(PhraseInput::Trace(t), args.boxes)?,
        _ => phrase_stats(PhraseInput::Sequence { x: &x, alphabet }, &[])?,
    };
    let mut mu = BTreeMap::new();
    for &k in args.mu {
        let c = mu_k(&x, k, alphabet, &[n]).field("mu")?;
        mu.insert(k, c.curve.last().expect("one checkpoint").1);
    }
    let mut rng = seeded_rng(seed);
    let mut box_measure = Vec::new();
    let mut event_measure = Vec::new();
    if let (true, Some(t)) = (need_b, &trace) {
        for (b, curve) in args.boxes.iter().zip(empirical_measure_b(t, args.boxes, &[n]).field("box")?) {
            let lim = prior
                .as_ref()
                .map(|p| p.expectation(|th| b.contains(th) as u8 as f64, &mut rng, args.mc_samples));
            box_measure.push(MeasureEntry {
                descriptor: b.to_string(),
                value: curve.last().expect("one checkpoint").1,
                limit: lim.map(|e| e.value),
                limit_std_error: lim.map(|e| e.std_error),
            });
        }
        for e in args.events {
            let curve = empirical_measure_joint(t, e, &[n]).field("event")?;
            let lim = match &prior {
                Some(p) => Some(eta_star(p, e, &mut rng, args.mc_samples).field("event")?),
                None => None,
            };
            event_measure.push(MeasureEntry {
                descriptor: e.to_string(),
                value: curve.last().expect("one checkpoint").1,
                limit: lim.map(|e| e.value),
                limit_std_error: lim.map(|e| e.std_error),
            });
        }
    }
    let score_value = match &prior {
        Some(p) if p.alphabet_size() == alphabet => Some(Bits(score(p, &x, &[n])?.last().expect("one checkpoint").1)),
        _ => None,
    };
    let report = StatsReport {
        n,
        alphabet_size: alphabet,
        root_visits: phrase.root_visits,
        node_count: phrase.node_count,
        partial_phrase_len: phrase.partial_phrase_len,
        compression_ratio: compression_ratio(&x, alphabet, &[n])?.last().expect("one checkpoint").1,
        mu,
        box_measure,
        event_measure,
        n_a_of_l: (args.phrases && need_b).then(|| phrase.n_a_of_l.clone()),
        phrase_lengths: args.phrases.then(|| phrase.phrase_lengths.clone()),
        n_of_l: args.phrases.then(|| phrase.n_of_l.clone()),
        score: score_value,
    };
    emit_json(out, &report, force)
}
