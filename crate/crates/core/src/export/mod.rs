//! CSV and VTK writers.

pub mod vtk;

use std::io::{self, Write};

/// Writes one CSV row with every value in `{:.16e}` form, which round-trips
/// `f64` exactly and does not depend on the platform.
pub fn csv_row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:.16e}")?;
    }
    w.write_all(b"\n")
}

/// Like [`csv_row`] with extra preformatted fields appended.
pub fn csv_fields<W: Write>(w: &mut W, values: &[f64], extra: &[String]) -> io::Result<()> {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            w.write_all(b",")?;
        }
        write!(w, "{v:.16e}")?;
    }
    for e in extra {
        write!(w, ",{e}")?;
    }
    w.write_all(b"\n")
}
