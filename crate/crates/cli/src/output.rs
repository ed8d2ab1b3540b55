//! Table and document writers: to a directory when one is given, otherwise
//! to stdout.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}

/// Serializes `rows` as CSV, with an explicit header.
pub fn csv_bytes<R: Serialize>(header: &[&str], rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.into_inner().map_err(io_err)
}

pub fn json_bytes<V: Serialize>(value: &V) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(io_err)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to `dir/name`, or to stdout without a directory.
pub fn emit(dir: Option<&Path>, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    match dir {
        Some(d) => {
            ensure_dir(d)?;
            let path = d.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(io_err)?;
            out.flush().map_err(io_err)
        }
    }
}
