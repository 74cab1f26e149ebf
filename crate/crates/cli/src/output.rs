//! Deterministic CSV writing: fixed column order, 17 significant digits,
//! byte-identical on reruns.

use std::io::{BufWriter, Write};
use std::path::Path;

/// 17 significant digits round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a header plus data lines, overwriting any existing file.
pub fn write_lines(
    path: &Path,
    header: &str,
    lines: impl Iterator<Item = String>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for line in lines {
        writeln!(w, "{line}")?;
    }
    w.flush()
}
