//! Plain-text CSV for sweep output. JSON goes through `serde` directly on
//! the result types.
//!
//! Numbers are written with 15 significant digits in scientific notation;
//! re-parsing and re-writing a file reproduces it byte for byte.

use std::io::{self, Write};

use crate::delayed_choice::MorphingPoint;

pub fn format_sig15(value: f64) -> String {
    format!("{value:.14e}")
}

/// One row of a CSV table; `None` is written as an empty field.
pub type CsvRow = Vec<Option<f64>>;

pub fn write_csv<W: Write>(mut out: W, header: &[&str], rows: &[CsvRow]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.map(format_sig15).unwrap_or_default()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Parses CSV written by [`write_csv`] into its header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<CsvRow>), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().ok_or("empty input")?.split(',').map(|s| s.trim().to_string()).collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(format!("row {}: expected {} fields, got {}", i + 1, header.len(), fields.len()));
            }
            fields
                .iter()
                .map(|f| {
                    let f = f.trim();
                    if f.is_empty() {
                        Ok(None)
                    } else {
                        f.parse().map(Some).map_err(|e| format!("row {}: {e}", i + 1))
                    }
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

pub const MORPHING_HEADER: [&str; 3] = ["phi", "alpha", "intensity"];

/// Writes `phi,alpha,intensity` rows in the order given.
pub fn write_morphing_csv<W: Write>(out: W, points: &[MorphingPoint]) -> io::Result<()> {
    let rows: Vec<CsvRow> = points.iter().map(|p| vec![Some(p.phi.0), Some(p.alpha.0), Some(p.intensity)]).collect();
    write_csv(out, &MORPHING_HEADER, &rows)
}

/// Reads `(φ, α, intensity)` rows back from [`write_morphing_csv`] output.
pub fn parse_morphing_csv(text: &str) -> Result<Vec<[f64; 3]>, String> {
    let (header, rows) = parse_csv(text)?;
    if header != MORPHING_HEADER {
        return Err(format!("unexpected header: {header:?}"));
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| match r.as_slice() {
            [Some(a), Some(b), Some(c)] => Ok([*a, *b, *c]),
            _ => Err(format!("row {}: missing value", i + 1)),
        })
        .collect()
}
