//! CSV ingestion and output.
//!
//! Accepted dialect: UTF-8, comma delimiter, `\n` or `\r\n` line endings, no
//! quoting, a header row of column names followed by rows of decimal
//! numbers. Rows are observations, columns variables. Empty cells, `NA`,
//! non-finite values and anything else that is not a plain number are
//! rejected; missing data are never imputed.
//!
//! Numbers are written with 17 significant digits so `f64` values survive a
//! write/read cycle unchanged.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub names: Vec<String>,
    pub matrix: DenseMatrix,
}

/// 17 significant digits in scientific notation, e.g. `-1.2500000000000000e-3`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}

/// Parses CSV from any reader. Rows and columns in errors are 1-based, with
/// the header on row 1.
pub fn read_csv<R: Read>(reader: R) -> Result<LabeledMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.byte_records();

    let header = match records.next() {
        None => return Err(Error::EmptyFile),
        Some(r) => r.map_err(csv_error)?,
    };
    let names = header
        .iter()
        .enumerate()
        .map(|(c, field)| {
            std::str::from_utf8(field)
                .map(str::to_owned)
                .map_err(|_| Error::Parse {
                    row: 1,
                    col: c + 1,
                    token: String::from_utf8_lossy(field).into_owned(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let cols = names.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if record.len() != cols {
            return Err(Error::RaggedRow(row));
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, field)| parse_cell(field).ok_or_else(|| Error::Parse {
                row,
                col: c + 1,
                token: String::from_utf8_lossy(field).into_owned(),
            }))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile);
    }

    let n = rows.len();
    let mut data = vec![0.0; n * cols];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            data[j * n + i] = *v;
        }
    }
    Ok(LabeledMatrix {
        names,
        matrix: DenseMatrix::from_col_major(n, cols, data)?,
    })
}

fn parse_cell(field: &[u8]) -> Option<f64> {
    let text = std::str::from_utf8(field).ok()?;
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        other => Error::InvalidArgument(format!("{other:?}")),
    }
}

/// Column names must not contain commas, quotes or line breaks.
pub fn write_csv_to<W: Write>(mut w: W, matrix: &DenseMatrix, names: &[String]) -> Result<()> {
    if names.len() != matrix.cols() {
        return Err(Error::Shape(format!(
            "{} names for {} columns",
            names.len(),
            matrix.cols()
        )));
    }
    if let Some(bad) = names.iter().find(|n| n.contains([',', '"', '\n', '\r'])) {
        return Err(Error::InvalidArgument(format!("column name {bad:?} is not representable")));
    }
    let io = |e| Error::io("<csv>", e);
    writeln!(w, "{}", names.join(",")).map_err(io)?;
    let mut line = String::new();
    for i in 0..matrix.rows() {
        line.clear();
        for j in 0..matrix.cols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_number(matrix.get(i, j)));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_csv(path: impl AsRef<Path>, matrix: &DenseMatrix, names: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(BufWriter::new(file), matrix, names).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        e => e,
    })
}

/// `x0, x1, ...`
pub fn default_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{j}")).collect()
}
