//! `cdkit-dataset v1` text container.
//!
//! ```text
//! cdkit-dataset v1 <regression|classification> <n_samples> <dim> <dense|sparse>
//! <target values, whitespace separated, one line>
//! <one line per sample: dense = all dim values; sparse = 1-based index:value>
//! # beta_star                 (optional)
//! <dim values>
//! ```
//!
//! Every number is written with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{format_float, DataError, Dataset, TaskKind};
use crate::matrix::{CscMatrix, Design};

pub const CONTAINER_MAGIC: &str = "cdkit-dataset";
const VERSION: &str = "v1";
const BETA_MARKER: &str = "# beta_star";

pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> Result<(), DataError> {
    let layout = if dataset.matrix.is_sparse() { "sparse" } else { "dense" };
    writeln!(
        out,
        "{CONTAINER_MAGIC} {VERSION} {} {} {} {layout}",
        dataset.kind,
        dataset.n_samples(),
        dataset.dim()
    )?;
    write_values(&mut out, &dataset.target)?;
    match &dataset.matrix {
        Design::Dense(m) => {
            for i in 0..m.nrows() {
                let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
                write_values(&mut out, &row)?;
            }
        }
        Design::Sparse(m) => {
            for row in m.to_rows() {
                let line: Vec<String> = row
                    .iter()
                    .map(|&(j, v)| format!("{}:{}", j + 1, format_float(v)))
                    .collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    if let Some(beta) = &dataset.ground_truth {
        writeln!(out, "{BETA_MARKER}")?;
        write_values(&mut out, beta)?;
    }
    out.flush()?;
    Ok(())
}

fn write_values<W: Write>(out: &mut W, values: &[f64]) -> Result<(), DataError> {
    let line: Vec<String> = values.iter().map(|&v| format_float(v)).collect();
    writeln!(out, "{}", line.join(" "))?;
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    write_dataset(dataset, BufWriter::new(File::create(path)?))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    read_dataset(BufReader::new(File::open(path)?))
}

fn parse_values(line: &str, lineno: usize, expected: usize) -> Result<Vec<f64>, DataError> {
    let values = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| DataError::NonNumeric {
                line: lineno,
                token: t.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != expected {
        return Err(DataError::Malformed {
            line: lineno,
            reason: format!("expected {expected} values, found {}", values.len()),
        });
    }
    Ok(values)
}

fn parse_sparse_row(line: &str, lineno: usize, dim: usize) -> Result<Vec<(usize, f64)>, DataError> {
    let mut row = Vec::new();
    let mut last = 0usize;
    for token in line.split_whitespace() {
        let (idx, val) = token.split_once(':').ok_or_else(|| DataError::Malformed {
            line: lineno,
            reason: format!("expected index:value, found {token:?}"),
        })?;
        let index: usize = idx.parse().map_err(|_| DataError::Malformed {
            line: lineno,
            reason: format!("bad index {idx:?}"),
        })?;
        if index == 0 || index > dim {
            return Err(DataError::Malformed {
                line: lineno,
                reason: format!("index {index} outside 1..={dim}"),
            });
        }
        if index <= last {
            return Err(DataError::NonIncreasingIndex { line: lineno, index });
        }
        last = index;
        let value = val.parse::<f64>().map_err(|_| DataError::NonNumeric {
            line: lineno,
            token: val.to_string(),
        })?;
        row.push((index - 1, value));
    }
    Ok(row)
}

struct Header {
    kind: TaskKind,
    n_samples: usize,
    dim: usize,
    sparse: bool,
}

fn parse_header(line: &str) -> Result<Header, DataError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.first() != Some(&CONTAINER_MAGIC) {
        return Err(DataError::Header(format!("missing {CONTAINER_MAGIC:?} magic")));
    }
    match fields.get(1) {
        Some(&VERSION) => {}
        Some(v) => return Err(DataError::Version(v.to_string())),
        None => return Err(DataError::Header("missing version".into())),
    }
    if fields.len() != 6 {
        return Err(DataError::Header(format!("expected 6 fields, found {}", fields.len())));
    }
    let kind = match fields[2] {
        "regression" => TaskKind::Regression,
        "classification" => TaskKind::Classification,
        other => return Err(DataError::Header(format!("unknown kind {other:?}"))),
    };
    let count = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| DataError::Header(format!("bad {what} {s:?}")))
    };
    let n_samples = count(fields[3], "sample count")?;
    let dim = count(fields[4], "dimension")?;
    let sparse = match fields[5] {
        "dense" => false,
        "sparse" => true,
        other => return Err(DataError::Header(format!("unknown layout {other:?}"))),
    };
    Ok(Header {
        kind,
        n_samples,
        dim,
        sparse,
    })
}

struct Lines<R> {
    inner: std::iter::Enumerate<std::io::Lines<R>>,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<(usize, String)>, DataError> {
        match self.inner.next() {
            Some((i, Ok(l))) => Ok(Some((i + 1, l))),
            Some((_, Err(e))) => Err(e.into()),
            None => Ok(None),
        }
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String), DataError> {
        self.next()?
            .ok_or_else(|| DataError::Header(format!("unexpected end of file reading {what}")))
    }
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Dataset, DataError> {
    let mut lines = Lines {
        inner: reader.lines().enumerate(),
    };

    let (_, header_line) = lines.expect("header")?;
    let header = parse_header(&header_line)?;
    if header.n_samples == 0 {
        return Err(DataError::NoSamples);
    }

    let (n, line) = lines.expect("target")?;
    let target = parse_values(&line, n, header.n_samples)?;
    if header.kind == TaskKind::Classification {
        if let Some(bad) = target.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(DataError::UnsupportedLabels(vec![*bad]));
        }
    }

    let matrix = if header.sparse {
        let mut rows = Vec::with_capacity(header.n_samples);
        for _ in 0..header.n_samples {
            let (n, line) = lines.expect("matrix row")?;
            rows.push(parse_sparse_row(&line, n, header.dim)?);
        }
        Design::Sparse(CscMatrix::from_rows(header.n_samples, header.dim, &rows))
    } else {
        let mut data = Vec::with_capacity(header.n_samples * header.dim);
        for _ in 0..header.n_samples {
            let (n, line) = lines.expect("matrix row")?;
            data.extend(parse_values(&line, n, header.dim)?);
        }
        Design::Dense(DMatrix::from_row_slice(header.n_samples, header.dim, &data))
    };

    let mut ground_truth = None;
    while let Some((n, line)) = lines.next()? {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == BETA_MARKER && ground_truth.is_none() {
            let (n, values) = lines.expect("beta_star")?;
            ground_truth = Some(parse_values(&values, n, header.dim)?);
            continue;
        }
        return Err(DataError::Malformed {
            line: n,
            reason: "unexpected trailing content".into(),
        });
    }

    Ok(Dataset {
        matrix,
        target,
        kind: header.kind,
        ground_truth,
    })
}
