use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{format_float, DataError, Dataset, TaskKind};
use crate::matrix::{CscMatrix, Design};

fn parse_number(token: &str, line: usize) -> Result<f64, DataError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::NonNumeric {
            line,
            token: token.to_string(),
        })
}

/// Reads LIBSVM text: `<label> <index>:<value> ...` with 1-based, strictly
/// increasing indices. Blank lines and lines starting with `#` are skipped.
///
/// Labels must form a subset of `{-1, +1}` or of `{0, 1}`; `0` maps to `-1`.
/// The dimension is the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset, DataError> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_token = tokens.next().expect("nonempty line has a token");
        if label_token.contains(':') {
            return Err(DataError::Malformed {
                line: lineno,
                reason: "missing label".into(),
            });
        }
        labels.push(parse_number(label_token, lineno)?);

        let mut row = Vec::new();
        let mut last = 0usize;
        for token in tokens {
            let (idx, val) = token.split_once(':').ok_or_else(|| DataError::Malformed {
                line: lineno,
                reason: format!("expected index:value, found {token:?}"),
            })?;
            let index: usize = idx.parse().map_err(|_| DataError::Malformed {
                line: lineno,
                reason: format!("bad feature index {idx:?}"),
            })?;
            if index == 0 {
                return Err(DataError::Malformed {
                    line: lineno,
                    reason: "feature indices are 1-based".into(),
                });
            }
            if index <= last {
                return Err(DataError::NonIncreasingIndex {
                    line: lineno,
                    index,
                });
            }
            last = index;
            row.push((index - 1, parse_number(val, lineno)?));
        }
        dim = dim.max(last);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(DataError::NoSamples);
    }
    let labels = normalize_labels(labels)?;
    let matrix = Design::Sparse(CscMatrix::from_rows(rows.len(), dim, &rows));
    Ok(Dataset {
        matrix,
        target: labels,
        kind: TaskKind::Classification,
        ground_truth: None,
    })
}

fn normalize_labels(labels: Vec<f64>) -> Result<Vec<f64>, DataError> {
    let signed = labels.iter().all(|&l| l == 1.0 || l == -1.0);
    let binary = labels.iter().all(|&l| l == 1.0 || l == 0.0);
    if signed {
        return Ok(labels);
    }
    if binary {
        return Ok(labels
            .into_iter()
            .map(|l| if l == 0.0 { -1.0 } else { 1.0 })
            .collect());
    }
    let mut distinct: Vec<f64> = Vec::new();
    for l in labels {
        if !distinct.contains(&l) {
            distinct.push(l);
        }
    }
    distinct.sort_by(f64::total_cmp);
    Err(DataError::UnsupportedLabels(distinct))
}

pub fn read_libsvm(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    parse_libsvm(BufReader::new(File::open(path)?))
}

/// Writes a dataset as LIBSVM text. Dense rows are written with every entry
/// so values survive bit-for-bit; labels use `+1` / `-1`.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut out: W) -> Result<(), DataError> {
    for (row, label) in dataset.matrix.to_rows().iter().zip(&dataset.target) {
        match dataset.kind {
            TaskKind::Classification if *label > 0.0 => out.write_all(b"+1")?,
            TaskKind::Classification => out.write_all(b"-1")?,
            TaskKind::Regression => out.write_all(format_float(*label).as_bytes())?,
        }
        for &(j, v) in row {
            write!(out, " {}:{}", j + 1, format_float(v))?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
