//! Trial-row CSV.
//!
//! The first line is both the schema version and the column header:
//!
//! ```text
//! # f2csv v1: trial,seed,exact_f2,estimate,relative_error,squared_relative_error,encoded_bits,fixed_width_bits,wall_time_ns
//! ```
//!
//! The wall-time column can be dropped so that identical configs produce
//! byte-identical files. Floats use Rust's shortest round-trippable
//! representation, so parsing the file back recovers every field exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::experiments::TrialRow;

pub const CSV_VERSION: &str = "f2csv v1";

const COLUMNS: &str =
    "trial,seed,exact_f2,estimate,relative_error,squared_relative_error,encoded_bits,fixed_width_bits";

fn header(include_walltime: bool) -> String {
    if include_walltime {
        format!("# {CSV_VERSION}: {COLUMNS},wall_time_ns")
    } else {
        format!("# {CSV_VERSION}: {COLUMNS}")
    }
}

/// Writes the header line plus one line per row.
pub fn write_csv<W: Write>(
    mut w: W,
    rows: &[TrialRow],
    include_walltime: bool,
) -> std::io::Result<()> {
    writeln!(w, "{}", header(include_walltime))?;
    for r in rows {
        write!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.exact_f2,
            r.estimate,
            r.relative_error,
            r.squared_relative_error,
            r.encoded_bits,
            r.fixed_width_bits
        )?;
        if include_walltime {
            write!(w, ",{}", r.wall_time_ns)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes rows to `path`; a zero-row input produces a header-only file.
pub fn emit_csv(path: &Path, rows: &[TrialRow], include_walltime: bool) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(BufWriter::new(file), rows, include_walltime)
        .with_context(|| format!("writing {}", path.display()))
}

/// Parses a file written by [`write_csv`]. Rows without the wall-time
/// column get `wall_time_ns = 0`.
pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<TrialRow>> {
    let mut lines = BufReader::new(reader).lines();
    let header_line = match lines.next() {
        Some(l) => l?,
        None => bail!("empty file, missing header"),
    };
    if !header_line.starts_with(&format!("# {CSV_VERSION}:")) {
        bail!("unrecognized header {header_line:?}");
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 && fields.len() != 9 {
            bail!("row {i}: expected 8 or 9 fields, got {}", fields.len());
        }
        let ctx = |field: &str| format!("row {i}, field {field}");
        rows.push(TrialRow {
            trial: fields[0].parse().with_context(|| ctx("trial"))?,
            seed: fields[1].parse().with_context(|| ctx("seed"))?,
            exact_f2: fields[2].parse().with_context(|| ctx("exact_f2"))?,
            estimate: fields[3].parse().with_context(|| ctx("estimate"))?,
            relative_error: fields[4].parse().with_context(|| ctx("relative_error"))?,
            squared_relative_error: fields[5]
                .parse()
                .with_context(|| ctx("squared_relative_error"))?,
            encoded_bits: fields[6].parse().with_context(|| ctx("encoded_bits"))?,
            fixed_width_bits: fields[7].parse().with_context(|| ctx("fixed_width_bits"))?,
            wall_time_ns: if fields.len() == 9 {
                fields[8].parse().with_context(|| ctx("wall_time_ns"))?
            } else {
                0
            },
        });
    }
    Ok(rows)
}
