//! On-disk sequence records.
//!
//! A record `<name>` is the pair `<name>.sym` (one byte per symbol, values
//! 0..|A|-1) and `<name>.json` (alphabet size, prior descriptor, seed,
//! length and format version).

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lz_source::{check_symbols, GenerationTrace};
use crate::prior::Prior;

pub const FORMAT_VERSION: u32 = 1;

/// Metadata stored next to a `.sym` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub alphabet_size: usize,
    pub prior: Prior,
    pub seed: u64,
    pub n: u64,
    pub format_version: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRecord {
    pub meta: SequenceMeta,
    pub symbols: Vec<u8>,
}

/// Paths of the `.sym` and `.json` halves of the record named `base`. A
/// trailing `.sym` or `.json` on `base` is ignored.
pub fn record_paths(base: &Path) -> (PathBuf, PathBuf) {
    let text = base.to_string_lossy();
    let stem = text
        .strip_suffix(".sym")
        .or_else(|| text.strip_suffix(".json"))
        .unwrap_or(&text);
    (
        PathBuf::from(format!("{stem}.sym")),
        PathBuf::from(format!("{stem}.json")),
    )
}

/// Creates `path` for writing; refuses to replace an existing file unless
/// `overwrite` is set.
pub fn create_output(path: &Path, overwrite: bool) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let file = if overwrite {
        File::create(path)
    } else {
        OpenOptions::new().write(true).create_new(true).open(path)
    };
    let file = file.map_err(|e| {
        if e.kind() == io::ErrorKind::AlreadyExists {
            io::Error::new(
                e.kind(),
                format!("{} already exists (use --force to overwrite)", path.display()),
            )
        } else {
            io::Error::new(e.kind(), format!("{}: {e}", path.display()))
        }
    })?;
    Ok(BufWriter::new(file))
}

impl SequenceRecord {
    pub fn new(prior: &Prior, seed: u64, symbols: Vec<u8>) -> Self {
        Self {
            meta: SequenceMeta {
                alphabet_size: prior.alphabet_size(),
                prior: prior.clone(),
                seed,
                n: symbols.len() as u64,
                format_version: FORMAT_VERSION,
            },
            symbols,
        }
    }

    pub fn write(&self, base: &Path, overwrite: bool) -> Result<()> {
        let (sym, json) = record_paths(base);
        if !overwrite {
            for p in [&sym, &json] {
                if p.exists() {
                    return Err(io::Error::new(
                        io::ErrorKind::AlreadyExists,
                        format!("{} already exists (use --force to overwrite)", p.display()),
                    )
                    .into());
                }
            }
        }
        let mut w = create_output(&sym, overwrite)?;
        w.write_all(&self.symbols)?;
        w.flush()?;
        let mut w = create_output(&json, overwrite)?;
        serde_json::to_writer_pretty(&mut w, &self.meta)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read(base: &Path) -> Result<Self> {
        let (sym, json) = record_paths(base);
        let meta: SequenceMeta = serde_json::from_reader(io::BufReader::new(open(&json)?))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "{}: unsupported format version {}",
                json.display(),
                meta.format_version
            )));
        }
        if meta.alphabet_size != meta.prior.alphabet_size() {
            return Err(Error::AlphabetMismatch {
                expected: meta.prior.alphabet_size(),
                actual: meta.alphabet_size,
            });
        }
        let symbols = read_symbols(&sym, meta.alphabet_size)?;
        if symbols.len() as u64 != meta.n {
            return Err(Error::InvalidArgument(format!(
                "{}: {} symbols, metadata declares {}",
                sym.display(),
                symbols.len(),
                meta.n
            )));
        }
        Ok(Self { meta, symbols })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// Reads a byte-per-symbol file and checks every symbol is below
/// `alphabet`.
pub fn read_symbols(path: &Path, alphabet: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    check_symbols(&bytes, alphabet)?;
    Ok(bytes)
}

/// Writes the per-step trace as CSV: `t,symbol,node_id,is_phrase_start`.
pub fn write_trace_csv<W: Write>(trace: &GenerationTrace, mut w: W) -> Result<()> {
    let b = trace.b_index.as_ref().ok_or(Error::MissingBTrace)?;
    writeln!(w, "t,symbol,node_id,is_phrase_start")?;
    let mut starts = trace.phrase_starts.iter().peekable();
    for (i, (&s, &node)) in trace.x.iter().zip(b).enumerate() {
        let t = i as u64 + 1;
        let start = starts.peek() == Some(&&t);
        if start {
            starts.next();
        }
        writeln!(w, "{t},{s},{node},{}", start as u8)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lz_source::{generate, GenerationOptions};

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("run");
        let prior = Prior::jeffreys();
        let trace = generate(&prior, 1000, 78, &GenerationOptions::symbols()).unwrap();
        let rec = SequenceRecord::new(&prior, 78, trace.x.clone());
        rec.write(&base, false).unwrap();
        assert_eq!(fs::read(dir.path().join("run.sym")).unwrap(), trace.x);
        let back = SequenceRecord::read(&dir.path().join("run.json")).unwrap();
        assert_eq!(back, rec);
        let err = rec.write(&base, false).unwrap_err();
        assert!(matches!(err, Error::Io(e) if e.kind() == io::ErrorKind::AlreadyExists));
        rec.write(&base, true).unwrap();
    }

    #[test]
    fn rejects_inconsistent_files() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("r");
        SequenceRecord::new(&Prior::jeffreys(), 1, vec![0, 1, 1]).write(&base, false).unwrap();
        fs::write(dir.path().join("r.sym"), [0u8, 2]).unwrap();
        assert!(SequenceRecord::read(&base).is_err());
        fs::write(dir.path().join("r.sym"), [0u8, 1]).unwrap();
        assert!(SequenceRecord::read(&base).is_err());
    }

    #[test]
    fn trace_csv() {
        let prior: Prior = "atoms((0,1)@1)".parse().unwrap();
        let trace = generate(&prior, 4, 0, &GenerationOptions::full(vec![])).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&trace, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "t,symbol,node_id,is_phrase_start\n1,1,0,1\n2,1,0,1\n3,1,1,0\n4,1,0,1\n"
        );
    }
}
