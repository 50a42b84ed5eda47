//! Plot-ready CSV exports of score reports and level summaries.

use std::io::Write;

use conceptspace_core::{LevelSummary, ScoreReport};

use super::decimal;

pub const REPORT_HEADER: [&str; 6] = ["query", "concept", "method", "score", "applicable", "rank"];
pub const LEVEL_HEADER: [&str; 4] = ["level", "embedding_method", "mean_val_loss", "n_concepts"];

/// One row per scored concept and method, grouped by method and ranked.
pub fn write_report<W: Write>(report: &ScoreReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for row in &report.rows {
        w.write_record([
            report.query.as_str(),
            &row.concept,
            row.method.as_str(),
            &decimal(row.score),
            if row.applicable { "true" } else { "false" },
            &row.rank.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_levels<W: Write>(summaries: &[LevelSummary], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LEVEL_HEADER)?;
    for s in summaries {
        w.write_record([
            &s.level.to_string(),
            &s.embedding,
            &decimal(s.mean_val_loss),
            &s.concepts.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
