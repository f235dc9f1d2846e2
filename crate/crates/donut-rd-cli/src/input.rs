//! CSV ingestion: header-validated x/y columns, cutoff normalization, and
//! row-numbered rejection of malformed values.

use std::path::Path;

use donut_rd::Sample;

use crate::CliError;

/// Read `path` into a cutoff-normalized sample. Row numbers in error
/// messages count file lines, with the header as line 1.
pub fn read_sample(path: &Path, cutoff: f64) -> Result<Sample, CliError> {
    if !cutoff.is_finite() {
        return Err(CliError::Config(format!(
            "cutoff must be finite, got {cutoff}"
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| open_error(path, e))?;

    let headers = reader
        .headers()
        .map_err(|e| read_error(path, &e))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let x_col = column("x").ok_or_else(|| {
        CliError::Config(format!("{}: missing required column 'x'", path.display()))
    })?;
    let y_col = column("y").ok_or_else(|| {
        CliError::Config(format!("{}: missing required column 'y'", path.display()))
    })?;
    if column("weight").is_some() {
        eprintln!(
            "warning: {}: column 'weight' is ignored (unweighted estimation only)",
            path.display()
        );
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| read_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        xs.push(parse_cell(&record, x_col, "x", path, line)? - cutoff);
        ys.push(parse_cell(&record, y_col, "y", path, line)?);
    }

    Sample::new(xs, ys).map_err(CliError::from)
}

fn parse_cell(
    record: &csv::StringRecord,
    col: usize,
    name: &str,
    path: &Path,
    line: u64,
) -> Result<f64, CliError> {
    let reject = |what: String| {
        CliError::Config(format!("{}: row {line}: {what}", path.display()))
    };
    let raw = record
        .get(col)
        .ok_or_else(|| reject(format!("missing '{name}' value")))?;
    if raw.is_empty() {
        return Err(reject(format!("empty '{name}' value")));
    }
    let value: f64 = raw
        .parse()
        .map_err(|_| reject(format!("'{name}' is not a number: {raw:?}")))?;
    if !value.is_finite() {
        return Err(reject(format!("'{name}' must be finite, got {raw}")));
    }
    Ok(value)
}

fn open_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        CliError::Io(format!("cannot read {}: {e}", path.display()))
    } else {
        CliError::Config(format!("{}: {e}", path.display()))
    }
}

fn read_error(path: &Path, e: &csv::Error) -> CliError {
    if e.is_io_error() {
        return CliError::Io(format!("error reading {}: {e}", path.display()));
    }
    let line = e
        .position()
        .map(|p| format!("row {}: ", p.line()))
        .unwrap_or_default();
    CliError::Config(format!("{}: {line}{e}", path.display()))
}
