//! Forward and inverse samples of the curvature-net coordinates.

use std::io::{self, Write};
use std::sync::Arc;

use super::directions::{det, DirectionField};
use super::trace::{Branch, Family, InverseJet, TraceError, Tracer};
use crate::dsl::{Domain, Surface};
use crate::forms::FormsError;
use crate::grid::Grid2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReparamError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("seed ({0}, {1}) lies outside the parameter domain")]
    SeedOutside(f64, f64),
    #[error("seed is an umbilic point; pick another with --seed-x/--seed-y")]
    UmbilicSeed,
    #[error("grid needs at least 3 points per axis, got {nx}x{ny}")]
    GridTooCoarse { nx: usize, ny: usize },
    #[error("coordinate image is degenerate: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Curvature-net coordinates `(S, T)` of a surface. `S` is constant along
/// lines of the second principal direction and grows along the first; `T`
/// the other way round. Both vanish at the seed and equal signed offsets
/// along their transversal axis lines.
pub struct Reparametrization {
    pub tracer: Tracer,
    pub s_family: Family,
    pub t_family: Family,
    pub seed: (f64, f64),
}

impl Reparametrization {
    pub fn new(
        surface: Arc<dyn Surface>,
        nx: usize,
        ny: usize,
        seed: (f64, f64),
    ) -> Result<Reparametrization, ReparamError> {
        if nx < 3 || ny < 3 {
            return Err(ReparamError::GridTooCoarse { nx, ny });
        }
        let domain = surface.domain();
        if !domain.contains(seed.0, seed.1) {
            return Err(ReparamError::SeedOutside(seed.0, seed.1));
        }
        let field = DirectionField::compute(surface.as_ref(), domain, nx, ny, seed)?;
        let at_seed = *field.dirs.get(field.seed.0, field.seed.1);
        if at_seed.umbilic {
            return Err(ReparamError::UmbilicSeed);
        }
        let (d1, d2) = (at_seed.d1, at_seed.d2);
        let s_family = Family::through(Branch::Second, d2, seed, |e| det(e, d2));
        let t_family = Family::through(Branch::First, d1, seed, |e| det(d1, e));
        let hx = domain.width() / (nx - 1) as f64;
        let hy = domain.height() / (ny - 1) as f64;
        let tracer = Tracer::new(surface, Arc::new(field), 0.5 * hx.min(hy));
        Ok(Reparametrization {
            tracer,
            s_family,
            t_family,
            seed,
        })
    }

    pub fn field(&self) -> &DirectionField {
        &self.tracer.field
    }

    pub fn domain(&self) -> Domain {
        self.tracer.domain
    }

    pub fn surface(&self) -> &Arc<dyn Surface> {
        &self.tracer.surface
    }

    /// `(S, T)` at `(x, y)`; the flag reports a curve that left the domain on
    /// its way to the transversal.
    pub fn forward(&self, x: f64, y: f64) -> Result<(f64, f64, bool), TraceError> {
        let s = self.tracer.label_at(&self.s_family, x, y)?;
        let t = self.tracer.label_at(&self.t_family, x, y)?;
        Ok((s.label, t.label, s.left_domain || t.left_domain))
    }

    pub fn inverse(&self, s: f64, t: f64) -> Result<InverseJet, TraceError> {
        self.tracer.inverse(&self.s_family, &self.t_family, s, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardSample {
    pub s: f64,
    pub t: f64,
    pub valid: bool,
    pub left_domain: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseSample {
    pub x: f64,
    pub y: f64,
    pub valid: bool,
    /// `det d(X, Y) / d(S, T)`.
    pub jacobian: f64,
}

/// Sampled coordinate change between the parameter domain and the image
/// region of the new coordinates.
#[derive(Debug, Clone)]
pub struct ReparamMap {
    pub method: &'static str,
    pub seed: (f64, f64),
    /// `(S, T)` at the nodes of the original parameter grid.
    pub forward: Grid2<ForwardSample>,
    /// Image of the domain boundary, counter-clockwise in the source.
    pub boundary: Vec<[f64; 2]>,
    /// Preimages on a grid over the bounding rectangle of the image.
    pub inverse: Grid2<InverseSample>,
    /// Largest axis-aligned rectangle found inside the image.
    pub patch: Domain,
    pub diagnostics: Vec<String>,
}

impl ReparamMap {
    pub fn bounds(&self) -> Domain {
        self.inverse.domain
    }

    pub fn min_jacobian(&self) -> f64 {
        self.inverse
            .data
            .iter()
            .filter(|s| s.valid)
            .map(|s| s.jacobian)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn valid_fraction(&self) -> f64 {
        let n = self.inverse.data.iter().filter(|s| s.valid).count();
        n as f64 / self.inverse.data.len() as f64
    }

    /// CSV with columns `X,Y,S,T`; untraceable nodes carry `NaN`.
    pub fn write_forward_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "X,Y,S,T")?;
        for (i, j, f) in self.forward.iter() {
            let (x, y) = self.forward.coords(i, j);
            let (s, t) = if f.valid { (f.s, f.t) } else { (f64::NAN, f64::NAN) };
            crate::export::csv_row(w, &[x, y, s, t])?;
        }
        Ok(())
    }

    /// CSV with columns `S,T,X,Y,valid`.
    pub fn write_inverse_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "S,T,X,Y,valid")?;
        for (i, j, v) in self.inverse.iter() {
            let (s, t) = self.inverse.coords(i, j);
            let (x, y) = if v.valid { (v.x, v.y) } else { (f64::NAN, f64::NAN) };
            crate::export::csv_fields(w, &[s, t, x, y], &[u8::from(v.valid).to_string()])?;
        }
        Ok(())
    }
}

/// Samples the forward map on the `nx x ny` source grid, the inverse on a
/// grid of the same size over the image's bounding rectangle, and finds the
/// rectangular patch.
pub fn build_map(rep: &Reparametrization, nx: usize, ny: usize) -> Result<ReparamMap, ReparamError> {
    let domain = rep.domain();
    let mut diagnostics = Vec::new();
    let mut failures = 0usize;
    let mut first_failure = None;
    let mut left = 0usize;
    let forward = Grid2::from_fn(nx, ny, domain, |i, j| {
        let (x, y) = (domain.node_x(i, nx), domain.node_y(j, ny));
        match rep.forward(x, y) {
            Ok((s, t, l)) => {
                left += usize::from(l);
                ForwardSample {
                    s,
                    t,
                    valid: true,
                    left_domain: l,
                }
            }
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| format!("({x}, {y}): {e}"));
                ForwardSample {
                    s: f64::NAN,
                    t: f64::NAN,
                    valid: false,
                    left_domain: false,
                }
            }
        }
    });
    if failures > 0 {
        diagnostics.push(format!(
            "{failures} source nodes could not be traced; first: {}",
            first_failure.unwrap_or_default()
        ));
    }
    if left > 0 {
        diagnostics.push(format!(
            "{left} source nodes reach the transversal only outside the domain"
        ));
    }

    let boundary = boundary_image(&forward);
    if boundary.len() < 3 {
        return Err(ReparamError::Degenerate("boundary image has fewer than 3 points".into()));
    }
    let bounds = bounding_rect(&boundary)
        .ok_or_else(|| ReparamError::Degenerate("boundary image has zero area".into()))?;

    let mut inv_fail = 0usize;
    let inverse = Grid2::from_fn(nx, ny, bounds, |i, j| {
        let (s, t) = (bounds.node_x(i, nx), bounds.node_y(j, ny));
        let invalid = InverseSample {
            x: f64::NAN,
            y: f64::NAN,
            valid: false,
            jacobian: f64::NAN,
        };
        if !point_in_polygon(&boundary, [s, t]) {
            return invalid;
        }
        match rep.inverse(s, t) {
            Ok(jet) if jet.jacobian() > 0.0 && inside(&domain, jet.xy) => InverseSample {
                x: jet.xy[0],
                y: jet.xy[1],
                valid: true,
                jacobian: jet.jacobian(),
            },
            _ => {
                inv_fail += 1;
                invalid
            }
        }
    });
    if inv_fail > 0 {
        diagnostics.push(format!(
            "{inv_fail} image nodes inside the boundary polygon have no preimage"
        ));
    }

    let patch = inscribed_rectangle(&boundary, bounds, 256, [0.0, 0.0])
        .ok_or_else(|| ReparamError::Degenerate("no rectangle fits inside the image".into()))?;
    Ok(ReparamMap {
        method: "curvature-lines",
        seed: rep.seed,
        forward,
        boundary,
        inverse,
        patch,
        diagnostics,
    })
}

fn inside(d: &Domain, p: [f64; 2]) -> bool {
    let eps = 1e-9 * d.size();
    p[0] >= d.x_lo - eps && p[0] <= d.x_hi + eps && p[1] >= d.y_lo - eps && p[1] <= d.y_hi + eps
}

/// Valid forward samples along the grid boundary, counter-clockwise.
fn boundary_image(g: &Grid2<ForwardSample>) -> Vec<[f64; 2]> {
    let (nx, ny) = (g.nx, g.ny);
    let mut idx = Vec::with_capacity(2 * (nx + ny));
    idx.extend((0..nx).map(|i| (i, 0)));
    idx.extend((1..ny).map(|j| (nx - 1, j)));
    idx.extend((0..nx - 1).rev().map(|i| (i, ny - 1)));
    idx.extend((1..ny - 1).rev().map(|j| (0, j)));
    idx.into_iter()
        .map(|(i, j)| g.get(i, j))
        .filter(|f| f.valid)
        .map(|f| [f.s, f.t])
        .collect()
}

fn bounding_rect(pts: &[[f64; 2]]) -> Option<Domain> {
    let mut d = Domain {
        x_lo: f64::INFINITY,
        x_hi: f64::NEG_INFINITY,
        y_lo: f64::INFINITY,
        y_hi: f64::NEG_INFINITY,
    };
    for p in pts {
        d.x_lo = d.x_lo.min(p[0]);
        d.x_hi = d.x_hi.max(p[0]);
        d.y_lo = d.y_lo.min(p[1]);
        d.y_hi = d.y_hi.max(p[1]);
    }
    Domain::new(d.x_lo, d.x_hi, d.y_lo, d.y_hi)
}

/// Even-odd rule.
pub fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Largest-area axis-aligned rectangle of raster cells whose corners all lie
/// inside the polygon, pulled in by half a cell on each side.
/// Rectangles within 2% of the largest area are ranked by the distance of
/// their centre from `prefer`.
pub fn inscribed_rectangle(poly: &[[f64; 2]], bounds: Domain, res: usize, prefer: [f64; 2]) -> Option<Domain> {
    let corner = Grid2::from_fn(res + 1, res + 1, bounds, |i, j| {
        point_in_polygon(poly, [bounds.node_x(i, res + 1), bounds.node_y(j, res + 1)])
    });
    let cell_ok = |i: usize, j: usize| {
        *corner.get(i, j) && *corner.get(i + 1, j) && *corner.get(i, j + 1) && *corner.get(i + 1, j + 1)
    };
    // largest rectangle in a histogram, row by row
    let mut heights = vec![0usize; res];
    let mut found: Vec<(usize, usize, usize, usize, usize)> = Vec::new(); // area, i0, i1, j0, j1
    for j in 0..res {
        for (i, h) in heights.iter_mut().enumerate() {
            *h = if cell_ok(i, j) { *h + 1 } else { 0 };
        }
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..=res {
            let h = if i < res { heights[i] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] <= h {
                    break;
                }
                stack.pop();
                let height = heights[top];
                let left = stack.last().map_or(0, |&l| l + 1);
                let area = height * (i - left);
                if area > 0 {
                    found.push((area, left, i, j + 1 - height, j + 1));
                }
            }
            stack.push(i);
        }
    }
    let max_area = found.iter().map(|r| r.0).max()?;
    let (cw, ch) = (bounds.width() / res as f64, bounds.height() / res as f64);
    let dist = |r: &(usize, usize, usize, usize, usize)| {
        let cx = bounds.x_lo + 0.5 * (r.1 + r.2) as f64 * cw;
        let cy = bounds.y_lo + 0.5 * (r.3 + r.4) as f64 * ch;
        (cx - prefer[0]).hypot(cy - prefer[1])
    };
    let &(_, i0, i1, j0, j1) = found
        .iter()
        .filter(|r| r.0 as f64 >= 0.98 * max_area as f64)
        .min_by(|a, b| dist(a).total_cmp(&dist(b)))?;
    Domain::new(
        bounds.x_lo + (i0 as f64 + 0.5) * cw,
        bounds.x_lo + (i1 as f64 - 0.5) * cw,
        bounds.y_lo + (j0 as f64 + 0.5) * ch,
        bounds.y_lo + (j1 as f64 - 0.5) * ch,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_polygon() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon(&sq, [0.5, 0.5]));
        assert!(!point_in_polygon(&sq, [1.5, 0.5]));
        let r = inscribed_rectangle(&sq, Domain::new(0.0, 1.0, 0.0, 1.0).unwrap(), 64, [0.5, 0.5]).unwrap();
        assert!(r.width() > 0.95 && r.height() > 0.95);
    }

    #[test]
    fn diamond_gets_a_near_optimal_centred_rectangle() {
        let dia = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        let b = Domain::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let r = inscribed_rectangle(&dia, b, 128, [0.0, 0.0]).unwrap();
        // the optimum is the square of side 1
        assert!(r.width() * r.height() > 0.9, "{r:?}");
        assert!(r.x_lo < 0.0 && r.x_hi > 0.0 && r.y_lo < 0.0 && r.y_hi > 0.0);
        for (x, y) in [(r.x_lo, r.y_lo), (r.x_hi, r.y_hi), (r.x_lo, r.y_hi), (r.x_hi, r.y_lo)] {
            assert!(x.abs() + y.abs() <= 1.0);
        }
    }
}
