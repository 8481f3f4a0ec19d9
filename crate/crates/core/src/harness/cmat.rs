//! CMAT text format for complex matrices.
//!
//! ```text
//! # optional comment lines
//! %%CMAT <rows> <cols>
//! <re> <im>        (rows * cols lines, row-major)
//! ```
//!
//! Components are written with 17 significant digits, which round-trips
//! every binary64 value.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::matrix::CMatrix;
use crate::precision::CScalar;

#[derive(Debug, Error)]
pub enum CmatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> CmatError {
    CmatError::Parse {
        line,
        message: message.into(),
    }
}

pub fn format_cmat(m: &CMatrix) -> String {
    let mut out = String::with_capacity(48 * m.data().len() + 32);
    writeln!(out, "%%CMAT {} {}", m.rows(), m.cols()).expect("write to string");
    for z in m.data() {
        writeln!(out, "{:.16e} {:.16e}", z.re, z.im).expect("write to string");
    }
    out
}

pub fn parse_cmat(text: &str) -> Result<CMatrix, CmatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (header_line, header) = loop {
        match lines.next() {
            None => return Err(parse_err(1, "missing %%CMAT header")),
            Some((_, l)) if l.is_empty() || l.starts_with('#') => continue,
            Some(found) => break found,
        }
    };
    let mut fields = header.split_whitespace();
    if fields.next() != Some("%%CMAT") {
        return Err(parse_err(header_line, "expected '%%CMAT <rows> <cols>' header"));
    }
    let dim = |tok: Option<&str>, what: &str| -> Result<usize, CmatError> {
        let tok = tok.ok_or_else(|| parse_err(header_line, format!("missing {what}")))?;
        match tok.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(parse_err(header_line, format!("invalid {what} '{tok}'"))),
        }
    };
    let rows = dim(fields.next(), "row count")?;
    let cols = dim(fields.next(), "column count")?;
    if let Some(extra) = fields.next() {
        return Err(parse_err(header_line, format!("unexpected header token '{extra}'")));
    }

    let expected = rows * cols;
    let mut data = Vec::with_capacity(expected);
    let mut last_line = header_line;
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if data.len() == expected {
            return Err(parse_err(
                line_no,
                format!("header declares {rows}x{cols} = {expected} entries but more lines follow"),
            ));
        }
        let mut toks = line.split_whitespace();
        let mut component = |name: &str| -> Result<f64, CmatError> {
            let tok = toks
                .next()
                .ok_or_else(|| parse_err(line_no, format!("missing {name} part")))?;
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric token '{tok}'")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value '{tok}'")));
            }
            Ok(v)
        };
        let re = component("real")?;
        let im = component("imaginary")?;
        if let Some(extra) = toks.next() {
            return Err(parse_err(line_no, format!("unexpected token '{extra}'")));
        }
        data.push(CScalar::new(re, im));
        last_line = line_no;
    }
    if data.len() != expected {
        return Err(parse_err(
            last_line,
            format!(
                "header declares {rows}x{cols} = {expected} entries but only {} found",
                data.len()
            ),
        ));
    }
    Ok(CMatrix::from_vec(rows, cols, data))
}

pub fn read_cmat(path: impl AsRef<Path>) -> Result<CMatrix, CmatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CmatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_cmat(&text)
}

pub fn write_cmat(path: impl AsRef<Path>, m: &CMatrix) -> Result<(), CmatError> {
    let path = path.as_ref();
    fs::write(path, format_cmat(m)).map_err(|source| CmatError::Io {
        path: path.display().to_string(),
        source,
    })
}
