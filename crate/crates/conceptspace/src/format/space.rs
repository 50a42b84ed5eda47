//! Concept-space files.
//!
//! ```text
//! concept k d margin_scale stopped_epoch
//! center (k values)
//! W row 1 (d values)
//! ...
//! W row k
//! log
//! epoch train_loss val_loss      (epoch 0 is the initialization)
//! ```
//!
//! The header is split from the right so concept names may contain spaces.

use std::io::{BufRead, Write};
use std::path::Path;

use conceptspace_core::space::ConceptCenter;
use conceptspace_core::{ConceptSpace, EpochStats, Matrix, Space};

use super::{decimal, numbered_lines, open, parse_decimal, syntax};
use crate::error::Result;

pub fn save_space<W: Write>(space: &ConceptSpace, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        space.concept,
        space.output_dim(),
        space.input_dim(),
        decimal(space.margin_scale),
        space.stopped_epoch
    )?;
    write_row(&mut out, &space.center.center)?;
    for i in 0..space.output_dim() {
        write_row(&mut out, space.projection.row(i))?;
    }
    writeln!(out, "log")?;
    for e in std::iter::once(&space.initial).chain(&space.training_log) {
        writeln!(out, "{} {} {}", e.epoch, decimal(e.train_loss), decimal(e.val_loss))?;
    }
    Ok(())
}

fn write_row<W: Write>(out: &mut W, row: &[f64]) -> std::io::Result<()> {
    let cells: Vec<String> = row.iter().map(|x| decimal(*x)).collect();
    writeln!(out, "{}", cells.join(" "))
}

/// Batch and triplet counts are not stored and load as zero; the best epoch
/// is recovered from the log.
pub fn load_space<R: BufRead>(reader: R, path: &Path) -> Result<ConceptSpace> {
    let mut lines = numbered_lines(reader, path);
    let mut next = |what: &str| -> Result<(usize, String)> {
        lines.next().transpose()?.ok_or_else(|| syntax(path, 0, format!("unexpected end of file, expected {what}")))
    };
    let (n, header) = next("header")?;
    let fields: Vec<&str> = header.rsplitn(5, ' ').collect();
    let [stopped, lambda, d, k, concept] = fields[..] else {
        return Err(syntax(path, n, "expected `concept k d margin_scale stopped_epoch`"));
    };
    let int = |s: &str| s.parse::<usize>().map_err(|_| syntax(path, n, format!("not an integer: {s:?}")));
    let (k, d, stopped_epoch) = (int(k)?, int(d)?, int(stopped)?);
    let margin_scale = parse_decimal(lambda, path, n)?;
    if concept.is_empty() || k == 0 || d == 0 {
        return Err(syntax(path, n, "empty concept name or zero dimension"));
    }

    let row = |(n, line): (usize, String), len: usize| -> Result<Vec<f64>> {
        let values = line.split_whitespace().map(|t| parse_decimal(t, path, n)).collect::<Result<Vec<_>>>()?;
        if values.len() != len {
            return Err(syntax(path, n, format!("expected {len} values, found {}", values.len())));
        }
        Ok(values)
    };
    let center = row(next("center")?, k)?;
    let mut data = Vec::with_capacity(k * d);
    for _ in 0..k {
        data.extend(row(next("projection row")?, d)?);
    }
    let (n, marker) = next("log")?;
    if marker.trim() != "log" {
        return Err(syntax(path, n, "expected `log`"));
    }
    let mut log = Vec::new();
    for (n, line) in lines.by_ref().collect::<Result<Vec<_>>>()? {
        if line.trim().is_empty() {
            continue;
        }
        let [epoch, train, val] = line.split_whitespace().collect::<Vec<_>>()[..] else {
            return Err(syntax(path, n, "expected `epoch train_loss val_loss`"));
        };
        let epoch = epoch.parse::<usize>().map_err(|_| syntax(path, n, "bad epoch"))?;
        if epoch != log.len() {
            return Err(syntax(path, n, format!("expected epoch {}", log.len())));
        }
        log.push(EpochStats {
            epoch,
            train_loss: parse_decimal(train, path, n)?,
            val_loss: parse_decimal(val, path, n)?,
            batches: 0,
            triplets: 0,
        });
    }
    if log.is_empty() {
        return Err(syntax(path, 0, "log has no epoch 0 row"));
    }
    if log.len() - 1 != stopped_epoch {
        return Err(syntax(path, 1, format!("log ends at epoch {}, header says {stopped_epoch}", log.len() - 1)));
    }
    let initial = log.remove(0);
    let mut best_epoch = 0;
    let mut best = f64::INFINITY;
    for e in &log {
        if e.val_loss < best {
            best = e.val_loss;
            best_epoch = e.epoch;
        }
    }
    Ok(ConceptSpace {
        concept: concept.to_string(),
        projection: Matrix::from_vec(k, d, data)?,
        center: ConceptCenter { concept: concept.to_string(), center, space: Space::Projected },
        margin_scale,
        initial,
        training_log: log,
        stopped_epoch,
        best_epoch,
    })
}

pub fn read_space(path: &Path) -> Result<ConceptSpace> {
    load_space(open(path)?, path)
}
