//! Atomic JSON and CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use epchiral::{Complex64, ContinuationState};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(&target, e))?;
    tmp.persist(&target)
        .map_err(|e| CliError::io(&target, e.error))?;
    Ok(target)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::Serialize)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(CliError::Csv)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::Csv)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(csv::Error::from(e.into_error())))
}

fn level_columns(n: usize) -> impl Iterator<Item = String> {
    (1..=n).flat_map(|k| [format!("E{k}_re"), format!("E{k}_im")])
}

fn level_values(state: &ContinuationState, s: usize) -> impl Iterator<Item = String> + '_ {
    state
        .tracks
        .iter()
        .flat_map(move |t| [t[s].re.to_string(), t[s].im.to_string()])
}

/// Tracks of a real-axis sweep: `lambda, E1_re, E1_im, ...`.
pub fn sweep_csv(state: &ContinuationState) -> Result<Vec<u8>, CliError> {
    let header = std::iter::once("lambda".to_string())
        .chain(level_columns(state.tracks.len()))
        .collect();
    let rows = (0..state.lambdas.len())
        .map(|s| {
            std::iter::once(state.lambdas[s].re.to_string())
                .chain(level_values(state, s))
                .collect()
        })
        .collect();
    csv_bytes(header, rows)
}

/// Tracks along a complex path: `step, lambda_re, lambda_im, E1_re, E1_im, ...`.
pub fn path_csv(state: &ContinuationState) -> Result<Vec<u8>, CliError> {
    let header = ["step", "lambda_re", "lambda_im"]
        .into_iter()
        .map(String::from)
        .chain(level_columns(state.tracks.len()))
        .collect();
    let rows = state
        .lambdas
        .iter()
        .enumerate()
        .map(|(s, l): (usize, &Complex64)| {
            [s.to_string(), l.re.to_string(), l.im.to_string()]
                .into_iter()
                .chain(level_values(state, s))
                .collect()
        })
        .collect();
    csv_bytes(header, rows)
}
