//! Text formats read and written by the command-line tool.

pub mod edges;
pub mod report;
pub mod space;
pub mod taxonomy;
pub mod word2vec;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{AppError, Result};

/// Nine significant digits, in scientific notation.
pub fn decimal(x: f64) -> String {
    format!("{x:.8e}")
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| AppError::io(path, e))
}

/// Numbered lines with any trailing `\r` removed.
pub(crate) fn numbered_lines<'a, R: BufRead + 'a>(
    reader: R,
    path: &'a Path,
) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader.lines().enumerate().map(move |(i, line)| {
        let mut line = line.map_err(|e| AppError::io(path, e))?;
        if line.ends_with('\r') {
            line.pop();
        }
        Ok((i + 1, line))
    })
}

pub(crate) fn syntax(path: &Path, line: usize, message: impl Into<String>) -> AppError {
    AppError::Syntax { path: path.to_path_buf(), line, message: message.into() }
}

pub(crate) fn parse_decimal(token: &str, path: &Path, line: usize) -> Result<f64> {
    let x: f64 = token.parse().map_err(|_| syntax(path, line, format!("not a number: {token:?}")))?;
    if !x.is_finite() {
        return Err(syntax(path, line, format!("non-finite value {token:?}")));
    }
    Ok(x)
}

/// Lines that carry data: blank lines and `#` comments are skipped.
pub(crate) fn is_content(line: &str) -> bool {
    !line.trim().is_empty() && !line.starts_with('#')
}
