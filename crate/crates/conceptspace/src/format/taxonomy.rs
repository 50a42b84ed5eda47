//! Taxonomy triples: one `subject<TAB>predicate<TAB>object` per line with
//! predicate `typeOf` or `subclassOf`. Blank lines and lines starting with `#`
//! are ignored.

use std::io::{BufRead, Write};
use std::path::Path;

use conceptspace_core::{Predicate, Taxonomy, TaxonomyBuilder};

use super::{is_content, numbered_lines, open, syntax};
use crate::error::{AppError, Result};

pub fn parse_taxonomy<R: BufRead>(reader: R, path: &Path) -> Result<Taxonomy> {
    let mut builder = TaxonomyBuilder::new();
    for line in numbered_lines(reader, path) {
        let (n, line) = line?;
        if !is_content(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [s, p, o] = fields[..] else {
            return Err(syntax(path, n, format!("expected 3 tab-separated fields, found {}", fields.len())));
        };
        let predicate: Predicate = p
            .parse()
            .map_err(|_| syntax(path, n, format!("unknown predicate {p:?} (expected typeOf or subclassOf)")))?;
        if s.is_empty() || o.is_empty() {
            return Err(syntax(path, n, "empty subject or object"));
        }
        builder.add(s, predicate, o);
    }
    builder.build().map_err(|source| AppError::Invalid { path: path.to_path_buf(), source })
}

pub fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    parse_taxonomy(open(path)?, path)
}

/// Canonical serialization: all `typeOf` triples, then all `subclassOf`
/// triples, each group sorted.
pub fn write_taxonomy<W: Write>(taxonomy: &Taxonomy, mut out: W) -> std::io::Result<()> {
    for (s, p, o) in taxonomy.triples() {
        writeln!(out, "{s}\t{p}\t{o}")?;
    }
    Ok(())
}
