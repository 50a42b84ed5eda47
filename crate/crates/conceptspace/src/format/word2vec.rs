//! word2vec text format: a `N d` header, then one `name v1 ... vd` line per
//! row. Rows are split from the right, so names may contain single spaces.

use std::io::{BufRead, Write};
use std::path::Path;

use conceptspace_core::EmbeddingTable;

use super::{decimal, numbered_lines, open, parse_decimal, syntax};
use crate::error::{AppError, Result};

pub fn load_embeddings<R: BufRead>(reader: R, path: &Path) -> Result<EmbeddingTable> {
    let mut lines = numbered_lines(reader, path);
    let (_, header) = lines.next().transpose()?.ok_or_else(|| syntax(path, 1, "missing `N d` header"))?;
    let (n, d) = match header.split_whitespace().collect::<Vec<_>>()[..] {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) if d > 0 => (n, d),
            _ => return Err(syntax(path, 1, format!("malformed header {header:?}"))),
        },
        _ => return Err(syntax(path, 1, format!("malformed header {header:?}"))),
    };
    let mut table = EmbeddingTable::new(d);
    let mut values = vec![0.0; d];
    for line in lines {
        let (no, line) = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if table.len() == n {
            return Err(syntax(path, no, format!("more rows than the {n} announced in the header")));
        }
        let mut tokens = line.rsplitn(d + 1, ' ');
        for slot in values.iter_mut().rev() {
            let token = tokens.next().filter(|t| !t.is_empty());
            let Some(token) = token else {
                return Err(syntax(path, no, format!("expected a name and {d} values")));
            };
            *slot = parse_decimal(token, path, no)?;
        }
        let name = tokens.next().filter(|t| !t.is_empty() && !t.ends_with(' '));
        let Some(name) = name else {
            return Err(syntax(path, no, format!("expected a name and {d} values")));
        };
        table.insert(name, &values).map_err(|e| syntax(path, no, e.to_string()))?;
    }
    if table.len() != n {
        return Err(syntax(path, 1, format!("header announces {n} rows, found {}", table.len())));
    }
    Ok(table)
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    load_embeddings(open(path)?, path)
}

/// Names must be non-empty, free of line breaks and tabs, and must not start
/// or end with whitespace, otherwise they would not survive a reload.
pub fn save_embeddings<W: Write>(table: &EmbeddingTable, mut out: W) -> Result<(), SaveError> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for (name, vector) in table.iter() {
        if name.is_empty() || name.trim() != name || name.contains(['\n', '\r', '\t']) || name.contains("  ") {
            return Err(SaveError::Name(name.to_string()));
        }
        out.write_all(name.as_bytes())?;
        for x in vector {
            write!(out, " {}", decimal(*x))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum SaveError {
    #[error("entity name {0:?} cannot be written in word2vec text format")]
    Name(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<SaveError> for AppError {
    fn from(e: SaveError) -> Self {
        match e {
            SaveError::Io(e) => AppError::io("<output>", e),
            SaveError::Name(_) => AppError::Usage(e.to_string()),
        }
    }
}
