//! Undirected edge lists: one `u<TAB>v` per line. Blank lines and `#`
//! comments are ignored; duplicates collapse and self-loops are counted and
//! dropped.

use std::io::BufRead;
use std::path::Path;

use conceptspace_core::graph::{GraphBuilder, LoadStats};
use conceptspace_core::Graph;

use super::{is_content, numbered_lines, open, syntax};
use crate::error::Result;

pub fn parse_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<(Graph, LoadStats)> {
    let mut builder = GraphBuilder::new();
    for line in numbered_lines(reader, path) {
        let (n, line) = line?;
        if !is_content(&line) {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>()[..] {
            [u, v] if !u.is_empty() && !v.is_empty() => builder.add_edge(u, v),
            ref fields => {
                return Err(syntax(path, n, format!("expected `u<TAB>v`, found {} field(s)", fields.len())))
            }
        }
    }
    Ok(builder.build())
}

pub fn read_edge_list(path: &Path) -> Result<(Graph, LoadStats)> {
    parse_edge_list(open(path)?, path)
}
