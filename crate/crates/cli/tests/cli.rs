//! End-to-end checks of the `lz78src` binary: formats, exit codes and the
//! range invariants of `curves` outputs.

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use lz78_source::CurveSeries;
use serde_json::Value;

fn lz78src(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lz78src"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = lz78src(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn code(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = lz78src(dir, args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn generate_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--prior", "atoms((0,1)@1)", "--n", "10", "--out", "ones"]);
    assert_eq!(fs::read(d.join("ones.sym")).unwrap(), vec![1u8; 10]);

    ok(d, &["--seed", "78", "generate", "--prior", "dirichlet(0.5,0.5)", "--n", "1000000", "--out", "j"]);
    let bytes = fs::read(d.join("j.sym")).unwrap();
    assert_eq!(bytes.len(), 1_000_000);
    assert!(bytes.iter().all(|&b| b < 2));
    let meta: Value = serde_json::from_slice(&fs::read(d.join("j.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 78);
    assert_eq!(meta["n"], 1_000_000);
    assert_eq!(meta["prior"], "dirichlet(0.5,0.5)");
}

#[test]
fn overwrite_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["generate", "--prior", "dirichlet(1,1)", "--n", "5", "--out", "r"];
    ok(d, &args);
    let (c, err) = code(d, &args);
    assert_eq!(c, 3);
    assert!(err.contains("--force"), "{err}");
    let mut forced = vec!["--force"];
    forced.extend(args);
    ok(d, &forced);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(d, &["generate", "--prior", "dirichlet(0.5)x", "--n", "5", "--out", "a"]).0, 2);
    assert_eq!(code(d, &["generate", "--prior", "dirichlet(0.5,0.5)", "--n", "5"]).0, 2);
    assert_eq!(code(d, &["score", "--input", "missing", "--alphabet", "2"]).0, 3);
    assert_eq!(code(d, &["curves", "missing.toml", "--out", "c"]).0, 3);
    assert_eq!(code(d, &["dataset", "--prior", "dirichlet(1,1)", "--train", "0", "--out", "ds"]).0, 2);
    assert_eq!(code(d, &["--workers", "0", "theory", "--prior", "dirichlet(1,1)"]).0, 2);

    fs::write(d.join("bad.toml"), "prior = \"dirichlet(0.5,0.5)\"\nn = 100\nseeds = [1]\nmu = [2, 14]\n").unwrap();
    let (c, err) = code(d, &["curves", "bad.toml", "--out", "c"]);
    assert_eq!(c, 2);
    assert!(err.contains("mu[1]"), "{err}");
    fs::write(d.join("typo.toml"), "prior = \"dirichlet(0.5,0.5)\"\nn = 100\nseeds = [1]\nsocre = true\n").unwrap();
    assert_eq!(code(d, &["curves", "typo.toml", "--out", "c"]).0, 2);
}

#[test]
fn theory_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(
        d,
        &["theory", "--prior", "dirichlet(0.5,0.5)", "--law", "iid(0.5,0.5)", "--law", "markov(1;(1,0),(0.5,0.5))", "--mc-samples", "1000"],
    );
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert!((v["entropy_rate"].as_f64().unwrap() - 0.557305).abs() < 1e-6);
    assert!((v["relative_entropy"][0]["value"].as_f64().unwrap() - 0.442695).abs() < 1e-6);
    assert_eq!(v["relative_entropy"][1]["value"], "inf");

    fs::write(d.join("law.json"), r#"{"order":0,"rows":[[0.5,0.5]]}"#).unwrap();
    let out = ok(d, &["theory", "--prior", "dirichlet(0.5,0.5)", "--law", "law.json", "--mc-samples", "10"]);
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert!((v["relative_entropy"][0]["value"].as_f64().unwrap() - 0.442695).abs() < 1e-6);
}

#[test]
fn dataset_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "40", "dataset", "--prior", "dirichlet(0.5,0.5)", "--length", "64", "--train", "3", "--eval", "2", "--out", "ds"]);
    let m: Value = serde_json::from_slice(&fs::read(d.join("ds/manifest.json")).unwrap()).unwrap();
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 5);
    let seeds: Vec<u64> = files.iter().map(|f| f["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [40, 41, 42, 43, 44]);
    assert_eq!(files[3]["path"], "eval/00000.sym");
    for f in files {
        assert_eq!(fs::read(d.join("ds").join(f["path"].as_str().unwrap())).unwrap().len(), 64);
    }
    assert_eq!(code(d, &["dataset", "--prior", "dirichlet(0.5,0.5)", "--length", "64", "--train", "3", "--eval", "2", "--out", "ds"]).0, 3);
}

#[test]
fn score_modes_agree_with_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "5", "generate", "--prior", "dirichlet(0.5,0.5)", "--n", "5000", "--out", "r"]);
    let read = |bytes: Vec<u8>| CurveSeries::read_csv(BufReader::new(&bytes[..])).unwrap();
    let own = read(ok(d, &["score", "--input", "r", "--checkpoints", "100,5000"]));
    let explicit = read(ok(d, &["score", "--input", "r.sym", "--prior", "dirichlet(0.5,0.5)", "--checkpoints", "100,5000"]));
    assert_eq!(own, explicit);
    let fair = read(ok(d, &["score", "--input", "r", "--law", "iid(0.5,0.5)", "--checkpoints", "5000"]));
    assert_eq!(fair.last().unwrap().1, 1.0);
    let ctw = read(ok(d, &["score", "--input", "r", "--spa", "ctw(6)"]));
    assert_eq!(ctw.last().unwrap().0, 5000);
    assert_eq!(code(d, &["score", "--input", "r", "--prior", "dirichlet(1,1,1)"]).0, 2);
}

#[test]
fn stats_rebuilds_the_parameter_trace() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "3", "generate", "--prior", "dirichlet(0.5,0.5)", "--n", "20000", "--out", "r"]);
    let out = ok(d, &["stats", "--input", "r", "--mu", "2", "--box", "box(0:0..0.5)", "--phrases", "--mc-samples", "1000"]);
    let v: Value = serde_json::from_slice(&out).unwrap();
    let t = v["root_visits"].as_u64().unwrap();
    assert_eq!(v["node_count"].as_u64().unwrap(), t + 1);
    assert_eq!(v["phrase_lengths"].as_array().unwrap().len() as u64, t);
    let m = v["box_measure"][0]["value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&m));

    // A record whose symbols no longer match its metadata cannot supply B.
    let mut sym = fs::read(d.join("r.sym")).unwrap();
    sym[0] ^= 1;
    fs::write(d.join("r.sym"), sym).unwrap();
    assert_eq!(code(d, &["stats", "--input", "r", "--box", "box()"]).0, 2);
    ok(d, &["stats", "--input", "r", "--mu", "1"]);
}

#[test]
fn curves_outputs_parse_and_respect_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.toml"),
        r#"
prior = "dirichlet(0.5,0.5)"
n = 50000
seeds = [1, 2]
score = true
compression_ratio = true
mu = [0, 5, 13]
ctw = [4]
markov_plugin = [1]
markov_laws = ["iid(0.5,0.5)"]
boxes = ["box(0:0..0.5)"]
events = ["event(0,1|box(1:0..0.5),box())"]
checkpoints_per_decade = 10
mc_samples = 2000
"#,
    )
    .unwrap();
    ok(d, &["--workers", "2", "curves", "exp.toml", "--out", "out"]);
    let out = d.join("out");
    let mut files = 0;
    for e in fs::read_dir(&out).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if !name.ends_with(".csv") {
            continue;
        }
        files += 1;
        let c = CurveSeries::read_csv(BufReader::new(fs::File::open(&p).unwrap())).unwrap();
        assert_eq!(c.last().unwrap().0, 50_000, "{name}");
        assert!(c.points.windows(2).all(|w| w[0].0 < w[1].0), "{name}");
        let range = if name.starts_with("mu_") || name.starts_with("mn_") || name.starts_with("ln_") {
            0.0..=1.0
        } else if name.starts_with("logratio_") {
            f64::NEG_INFINITY..=f64::INFINITY
        } else {
            0.0..=f64::INFINITY
        };
        assert!(c.points.iter().all(|p| range.contains(&p.1)), "{name}");
    }
    // score, compression ratio, 3 mu, ctw, plug-in, law, log ratio, M_n, L_n
    assert_eq!(files, 11 * 2);
    let summary: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mu_13"]["seeds"].as_array().unwrap().len(), 2);
    let limits: Value = serde_json::from_slice(&fs::read(out.join("limits.json")).unwrap()).unwrap();
    assert!((limits["entropy_rate"].as_f64().unwrap() - 0.557305).abs() < 1e-6);
    let cfg = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(cfg.contains("mu = [0, 5, 13]"), "{cfg}");
}
