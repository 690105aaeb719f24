//! First and second fundamental forms and the orthogonal-net compatibility
//! check.

use std::io::{self, Write};

use crate::dsl::{Domain, Surface, SurfaceError, SurfaceJet, Vec3};
use crate::grid::{Grid2, GridDiffer};

/// Relative area-element floor below which a point counts as singular.
pub const REGULARITY_TOL: f64 = 1e-12;

/// Relative size below which `F` and `M` count as zero.
pub const VANISH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    /// `r_X x r_Y`, never flipped.
    pub r_n: Vec3,
    /// `|r_N|`.
    pub delta: f64,
    pub normal: Vec3,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormsError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("surface is singular at ({u}, {v}): area element {delta:e}")]
    Singular { u: f64, v: f64, delta: f64 },
    #[error("grid needs at least 3 points per axis, got {nx}x{ny}")]
    GridTooCoarse { nx: usize, ny: usize },
}

impl FundamentalForms {
    /// Forms from a surface jet; `scale` is the length unit for the
    /// regularity test.
    pub fn from_jet(j: &SurfaceJet, scale: f64) -> Option<FundamentalForms> {
        let r_n = j.ru.cross(&j.rv);
        let delta = r_n.norm();
        if !(delta >= REGULARITY_TOL * scale * scale) {
            return None;
        }
        let normal = r_n / delta;
        Some(FundamentalForms {
            e: j.ru.dot(&j.ru),
            f: j.ru.dot(&j.rv),
            g: j.rv.dot(&j.rv),
            l: j.ruu.dot(&normal),
            m: j.ruv.dot(&normal),
            n: j.rvv.dot(&normal),
            r_n,
            delta,
            normal,
        })
    }

    /// Forms of an orthogonal curvature net with no normal data, as
    /// recovered from growth functions.
    pub fn orthogonal(e: f64, g: f64, l: f64, n: f64) -> FundamentalForms {
        let delta = (e * g).sqrt();
        FundamentalForms {
            e,
            f: 0.0,
            g,
            l,
            m: 0.0,
            n,
            r_n: Vec3::new(0.0, 0.0, delta),
            delta,
            normal: Vec3::z(),
        }
    }

    pub fn gaussian_curvature(&self) -> f64 {
        (self.l * self.n - self.m * self.m) / (self.e * self.g - self.f * self.f)
    }
}

pub fn forms_at<S: Surface + ?Sized>(s: &S, u: f64, v: f64) -> Result<FundamentalForms, FormsError> {
    let j = s.jet(u, v)?;
    let r_n = j.ru.cross(&j.rv);
    FundamentalForms::from_jet(&j, s.length_scale()).ok_or(FormsError::Singular {
        u,
        v,
        delta: r_n.norm(),
    })
}

/// Fundamental forms sampled on a uniform grid over the surface domain.
#[derive(Debug, Clone)]
pub struct FormsGrid {
    pub grid: Grid2<FundamentalForms>,
    /// Length unit of the sampled surface.
    pub scale: f64,
}

impl FormsGrid {
    pub fn sample<S: Surface + ?Sized>(s: &S, nx: usize, ny: usize) -> Result<FormsGrid, FormsError> {
        Self::sample_on(s, s.domain(), nx, ny)
    }

    pub fn sample_on<S: Surface + ?Sized>(
        s: &S,
        domain: Domain,
        nx: usize,
        ny: usize,
    ) -> Result<FormsGrid, FormsError> {
        if nx < 3 || ny < 3 {
            return Err(FormsError::GridTooCoarse { nx, ny });
        }
        let grid = Grid2::try_from_fn(nx, ny, domain, |i, j| {
            forms_at(s, domain.node_x(i, nx), domain.node_y(j, ny))
        })?;
        Ok(FormsGrid {
            grid,
            scale: s.length_scale(),
        })
    }

    pub fn max_abs_f(&self) -> f64 {
        self.grid.data.iter().map(|f| f.f.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_m(&self) -> f64 {
        self.grid.data.iter().map(|f| f.m.abs()).fold(0.0, f64::max)
    }

    /// True when the coordinate curves are not already an orthogonal
    /// curvature net.
    pub fn needs_reparam(&self) -> bool {
        self.needs_reparam_at(VANISH_TOL)
    }

    /// As [`Self::needs_reparam`] with `F` and `M` compared against
    /// `rel * scale^2` and `rel * scale`.
    pub fn needs_reparam_at(&self, rel: f64) -> bool {
        self.max_abs_f() > rel * self.scale * self.scale || self.max_abs_m() > rel * self.scale
    }

    /// CSV with columns `X,Y,E,F,G,L,M,N,Delta`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "X,Y,E,F,G,L,M,N,Delta")?;
        for (i, j, f) in self.grid.iter() {
            let (x, y) = self.grid.coords(i, j);
            crate::export::csv_row(w, &[x, y, f.e, f.f, f.g, f.l, f.m, f.n, f.delta])?;
        }
        Ok(())
    }
}

/// Maxima of the compatibility residuals over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompatibilityResidual {
    pub gauss: f64,
    pub codazzi_1: f64,
    pub codazzi_2: f64,
}

impl CompatibilityResidual {
    pub fn max(&self) -> f64 {
        self.gauss.max(self.codazzi_1).max(self.codazzi_2)
    }
}

/// Gauss and Codazzi residuals of an orthogonal net (`F = M = 0`):
///
/// ```text
/// LN/(EG) + 1/(2W) [ (E_v/W)_v + (G_u/W)_u ],   W = sqrt(EG)
/// L_v - E_v H,   N_u - G_u H,   H = (L/E + N/G)/2
/// ```
///
/// Derivatives use centred nine-point stencils (fewer on small grids), so
/// only nodes with a full stencil are scored. `F` and `M` are ignored.
pub fn gauss_codazzi_residual(
    grid: &Grid2<FundamentalForms>,
) -> Result<CompatibilityResidual, FormsError> {
    let (nx, ny) = (grid.nx, grid.ny);
    let d = GridDiffer::new(grid).ok_or(FormsError::GridTooCoarse { nx, ny })?;
    let comp = |f: fn(&FundamentalForms) -> f64| grid.map(f);
    let (e, g, l, n) = (comp(|f| f.e), comp(|f| f.g), comp(|f| f.l), comp(|f| f.n));
    let mut out = CompatibilityResidual::default();
    for j in 0..ny {
        for i in 0..nx {
            if !d.is_interior(i, j) {
                continue;
            }
            let ff = grid.get(i, j);
            let (ev, evv, eu) = (d.dy(&e, i, j), d.dyy(&e, i, j), d.dx(&e, i, j));
            let (gu, guu, gv) = (d.dx(&g, i, j), d.dxx(&g, i, j), d.dy(&g, i, j));
            let eg = ff.e * ff.g;
            let w = eg.sqrt();
            let w_u = (eu * ff.g + ff.e * gu) / (2.0 * w);
            let w_v = (ev * ff.g + ff.e * gv) / (2.0 * w);
            let term_v = evv / w - ev * w_v / eg;
            let term_u = guu / w - gu * w_u / eg;
            let k_int = -(term_u + term_v) / (2.0 * w);
            let k_ext = ff.l * ff.n / eg;
            let h = 0.5 * (ff.l / ff.e + ff.n / ff.g);
            let c1 = d.dy(&l, i, j) - ev * h;
            let c2 = d.dx(&n, i, j) - gu * h;
            out.gauss = out.gauss.max((k_ext - k_int).abs());
            out.codazzi_1 = out.codazzi_1.max(c1.abs());
            out.codazzi_2 = out.codazzi_2.max(c2.abs());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ParametricSurface;
    use std::f64::consts::PI;

    fn surf(x: &str, y: &str, z: &str) -> ParametricSurface {
        ParametricSurface::from_strs("t", x, y, z, Domain::UNIT).unwrap()
    }

    #[test]
    fn plane() {
        let f = forms_at(&surf("X", "Y", "0"), 0.3, 0.7).unwrap();
        assert_eq!((f.e, f.f, f.g, f.l, f.m, f.n), (1.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(f.normal, Vec3::z());
    }

    #[test]
    fn cone_point() {
        let cone = surf("X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X");
        let f = forms_at(&cone, 0.5, 0.25).unwrap();
        assert!((f.e - 2.0).abs() < 1e-14);
        assert!(f.f.abs() < 1e-14);
        assert!((f.g - PI * PI).abs() < 1e-12);
        assert!(f.m.abs() < 1e-14);
        assert!((f.delta * f.delta - (f.e * f.g - f.f * f.f)).abs() < 1e-12 * f.delta * f.delta);
    }

    #[test]
    fn helicoid_twist() {
        let h = surf("X*sin(4*pi*Y)", "X*cos(4*pi*Y)", "2*Y");
        for x in [0.1, 0.25, 0.8] {
            let f = forms_at(&h, x, 0.3).unwrap();
            let expect = 4.0 * PI / (1.0 + 4.0 * PI * PI * x * x).sqrt();
            assert!((f.m - expect).abs() < 1e-12 * expect, "{} vs {expect}", f.m);
        }
    }

    #[test]
    fn singular_point_is_rejected() {
        let cone = surf("X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X");
        assert!(matches!(
            forms_at(&cone, 0.0, 0.5),
            Err(FormsError::Singular { .. })
        ));
    }

    #[test]
    fn torus_is_compatible_and_perturbed_torus_is_not() {
        let torus = surf(
            "0.5*(cos(2*pi*X) + 2)*cos(2*pi*Y)",
            "-0.5*(cos(2*pi*X) + 2)*sin(2*pi*Y)",
            "0.5*sin(2*pi*X)",
        );
        let fg = FormsGrid::sample(&torus, 41, 41).unwrap();
        assert!(!fg.needs_reparam());
        let r = gauss_codazzi_residual(&fg.grid).unwrap();
        assert!(r.max() <= 1e-4, "{r:?}");
        let mut bad = fg.grid.clone();
        for f in &mut bad.data {
            f.n += 0.1;
        }
        assert!(gauss_codazzi_residual(&bad).unwrap().max() > 1e-2);
    }

    #[test]
    fn plane_residual_is_zero() {
        let fg = FormsGrid::sample(&surf("X", "Y", "0"), 5, 5).unwrap();
        assert_eq!(gauss_codazzi_residual(&fg.grid).unwrap().max(), 0.0);
        let coarse = Grid2::from_fn(2, 5, Domain::UNIT, |_, _| FundamentalForms::orthogonal(1.0, 1.0, 0.0, 0.0));
        assert!(gauss_codazzi_residual(&coarse).is_err());
    }
}
