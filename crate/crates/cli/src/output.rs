use std::io::{self, Write};
use std::path::Path;

use lz78_source::record::create_output;
use lz78_source::CurveSeries;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// An f64 in bits that serializes +∞ as `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bits(pub f64);

impl Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_nan() {
            s.serialize_none()
        } else {
            lz78_source::theory::bits_or_inf::serialize(&self.0, s)
        }
    }
}

fn wrap(path: &Path) -> impl Fn(lz78_source::Error) -> CliError + '_ {
    move |e| match e {
        lz78_source::Error::Io(io) => CliError::io(path, io),
        other => other.into(),
    }
}

pub fn write_csv(path: &Path, curve: &CurveSeries, overwrite: bool) -> CliResult<()> {
    let mut w = create_output(path, overwrite).map_err(wrap(path))?;
    curve.write_csv(&mut w).map_err(wrap(path))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, overwrite: bool) -> CliResult<()> {
    let mut w = create_output(path, overwrite).map_err(wrap(path))?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T, overwrite: bool) -> CliResult<()> {
    match path {
        Some(p) => write_json(p, value, overwrite),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, value).map_err(|e| CliError::io(Path::new("<stdout>"), e.into()))?;
            writeln!(lock).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn emit_csv(path: Option<&Path>, curve: &CurveSeries, overwrite: bool) -> CliResult<()> {
    match path {
        Some(p) => write_csv(p, curve, overwrite),
        None => {
            let stdout = io::stdout();
            curve.write_csv(stdout.lock()).map_err(wrap(Path::new("<stdout>")))
        }
    }
}
