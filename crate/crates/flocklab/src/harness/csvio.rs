//! CSV output: RFC-4180 records (CRLF line endings, quoted only when
//! needed) with floats printed to 17 significant digits so every value
//! round-trips to the exact bit pattern.

use std::path::Path;

use csv::{Terminator, WriterBuilder};

use crate::error::Result;

/// Shortest-faithful rendering: 17 significant digits in scientific
/// notation, which round-trips every finite `f64`.
pub fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a header plus numeric rows.  Rows shorter or longer than the header
/// surface as a `csv` error rather than silent misalignment.
pub fn write_numeric_csv(
    path: impl AsRef<Path>,
    header: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = WriterBuilder::new()
        .terminator(Terminator::CRLF)
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| float17(*v)))?;
    }
    w.flush()?;
    Ok(())
}
