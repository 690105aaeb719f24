//! Legacy ASCII VTK structured grids.

use std::io::{self, Write};

use crate::dsl::Vec3;

/// Writes `points` (first index fastest) as an `nx` by `ny` structured grid
/// with one scalar point-data array per entry of `fields`.
pub fn write_structured_grid<W: Write>(
    w: &mut W,
    title: &str,
    nx: usize,
    ny: usize,
    points: &[Vec3],
    fields: &[(&str, Vec<f64>)],
) -> io::Result<()> {
    let n = nx * ny;
    if points.len() != n || fields.iter().any(|(_, v)| v.len() != n) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "point or field count does not match the grid",
        ));
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_GRID")?;
    writeln!(w, "DIMENSIONS {nx} {ny} 1")?;
    writeln!(w, "POINTS {n} double")?;
    for p in points {
        writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }
    if !fields.is_empty() {
        writeln!(w, "POINT_DATA {n}")?;
    }
    for (name, values) in fields {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(w, "{v:.16e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_counts() {
        let pts: Vec<Vec3> = (0..6).map(|k| Vec3::new(k as f64, 0.0, 0.0)).collect();
        let mut out = Vec::new();
        write_structured_grid(&mut out, "t", 3, 2, &pts, &[("a", vec![1.0; 6])]).unwrap();
        let s = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[4], "DIMENSIONS 3 2 1");
        assert_eq!(lines[5], "POINTS 6 double");
        assert_eq!(lines[12], "POINT_DATA 6");
        assert_eq!(lines.len(), 6 + 6 + 3 + 6);
        assert!(write_structured_grid(&mut Vec::new(), "t", 2, 2, &pts, &[]).is_err());
    }
}
