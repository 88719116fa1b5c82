//! Plain-text matrix and vector files.
//!
//! One matrix row per line, whitespace-separated tokens. `-inf` is `ε`,
//! `inf` / `+inf` is `ε′`; everything else must parse as a literal of the
//! chosen number type. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use crate::error::{Result, TropError};
use crate::matrix::{TropMatrix, TropVector};
use crate::semiring::{ExtScalar, Number};

/// Non-empty rows of `text` as `(line number, [(column, token)])`, both 1-based.
fn tokenize(text: &str) -> Vec<(usize, Vec<(usize, &str)>)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in line
            .char_indices()
            .chain(std::iter::once((line.len(), ' ')))
        {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((line[..s].chars().count() + 1, &line[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        if !tokens.is_empty() {
            out.push((idx + 1, tokens));
        }
    }
    out
}

/// Every finite-looking token in `text`, for choosing a number type.
pub fn literal_tokens(text: &str) -> impl Iterator<Item = &str> {
    tokenize(text)
        .into_iter()
        .flat_map(|(_, row)| row.into_iter().map(|(_, t)| t))
        .filter(|t| !matches!(t.to_ascii_lowercase().as_str(), "-inf" | "inf" | "+inf"))
}

pub fn parse_matrix<N: Number>(text: &str) -> Result<TropMatrix<N>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (line, tokens) in tokenize(text) {
        let row = tokens
            .into_iter()
            .map(|(column, token)| {
                ExtScalar::parse_token(token).ok_or_else(|| TropError::Token {
                    line,
                    column,
                    token: token.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(TropError::Ragged {
                    line,
                    expected: w,
                    found: row.len(),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    TropMatrix::from_rows(rows)
}

/// A vector stored as a single row or a single column.
pub fn parse_vector<N: Number>(text: &str) -> Result<TropVector<N>> {
    let m = parse_matrix::<N>(text)?;
    match m.shape() {
        (1, _) => Ok(m.row(0)),
        (_, 1) => Ok(m.column(0)),
        (r, c) => Err(TropError::Shape {
            op: "parse_vector",
            expected: "a single row or column".into(),
            found: format!("{r}×{c}"),
        }),
    }
}

pub fn serialize_matrix<N: Number>(m: &TropMatrix<N>) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row_slice(i).iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// One vector per line, in matrix format.
pub fn serialize_vectors<N: Number>(vs: &[TropVector<N>]) -> String {
    let mut out = String::new();
    for v in vs {
        let row: Vec<String> = v.entries().iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Reads generators written one per line.
pub fn parse_vectors<N: Number>(text: &str) -> Result<Vec<TropVector<N>>> {
    let m = parse_matrix::<N>(text)?;
    Ok((0..m.rows()).map(|i| m.row(i)).collect())
}
