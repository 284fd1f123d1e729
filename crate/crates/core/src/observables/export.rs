//! CSV writers. Every file starts with a `# units: natural` line followed by
//! the column header; floats use 12 significant digits so reruns are
//! byte-identical.

use std::io::{self, Write};

use super::{MomentumDistribution, WignerMap};

pub const UNITS_LINE: &str = "# units: natural";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes a header and rows of floats.
pub fn write_table<W: Write>(out: &mut W, columns: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    writeln!(out, "{UNITS_LINE}")?;
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_momentum_distribution<W: Write>(out: &mut W, dist: &MomentumDistribution) -> io::Result<()> {
    let rows: Vec<Vec<f64>> = dist
        .momenta
        .iter()
        .zip(&dist.density)
        .map(|(&p, &d)| vec![p, d])
        .collect();
    write_table(out, &["p", "density"], &rows)
}

/// Long format: one `x,p,wigner` row per cell, x outer.
pub fn write_wigner<W: Write>(out: &mut W, map: &WignerMap) -> io::Result<()> {
    writeln!(out, "{UNITS_LINE}")?;
    writeln!(out, "x,p,wigner")?;
    for (i, &x) in map.x_axis.iter().enumerate() {
        for (j, &p) in map.p_axis.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_float(x), fmt_float(p), fmt_float(map.values[[i, j]]))?;
        }
    }
    Ok(())
}
