//! Rebuilds a surface from growth functions, as an independent check that the
//! growth encodes the target shape.
//!
//! Growth gives back an orthogonal curvature net,
//! `E = l1_0^2, G = l2_0^2, L = -l1_0 l1_1, N = -l2_0 l2_1`, and the moving
//! frame `(r, r_u, r_v, n)` is integrated through the Gauss-Weingarten
//! equations, first along the `v = v0` row and then up every column.

use std::io::{self, Write};

use nalgebra::{Matrix3, SVD};

use crate::dsl::{Surface, SurfaceError, Vec3};
use crate::export::csv_row;
use crate::forms::{gauss_codazzi_residual, FormsError, FundamentalForms};
use crate::grid::{fornberg_weights, Grid2, GridDiffer};
use crate::growth::GrowthField;

/// Largest Gauss-Codazzi residual accepted before integrating.
pub const COMPATIBILITY_TOL: f64 = 1e-4;
/// Largest relative metric drift of the integrated frame.
pub const DRIFT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("in-plane growth must be positive, found ({l1}, {l2})")]
    NonPositive { l1: f64, l2: f64 },
    #[error("forms are incompatible: Gauss-Codazzi residual {residual:.3e} exceeds {tol:.1e}")]
    Incompatible { residual: f64, tol: f64 },
    #[error("frame drifted by {drift:.3e} (limit {tol:.1e})")]
    Drift { drift: f64, tol: f64 },
    #[error("grids differ in shape: {0:?} vs {1:?}")]
    Shape((usize, usize), (usize, usize)),
    #[error("growth field has no gradient terms")]
    Order0Only,
}

pub fn forms_from_growth(field: &GrowthField) -> Result<Grid2<FundamentalForms>, ReconstructError> {
    if field.order0_only {
        return Err(ReconstructError::Order0Only);
    }
    let g = &field.samples;
    Grid2::try_from_fn(g.nx, g.ny, g.domain, |i, j| {
        let s = g.get(i, j);
        if !(s.l1_0 > 0.0 && s.l2_0 > 0.0) {
            return Err(ReconstructError::NonPositive { l1: s.l1_0, l2: s.l2_0 });
        }
        Ok(FundamentalForms::orthogonal(
            s.l1_0 * s.l1_0,
            s.l2_0 * s.l2_0,
            -s.l1_0 * s.l1_1,
            -s.l2_0 * s.l2_1,
        ))
    })
}

/// Moving frame at a grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameState {
    pub r: Vec3,
    pub r_u: Vec3,
    pub r_v: Vec3,
    pub n: Vec3,
}

impl FrameState {
    /// Largest deviation from the metric `E, G, F = 0` and from a unit normal
    /// orthogonal to both tangents, relative to the local lengths.
    pub fn drift(&self, e: f64, g: f64) -> f64 {
        let (a, b) = (e.sqrt(), g.sqrt());
        [
            (self.r_u.norm_squared() - e).abs() / e,
            (self.r_v.norm_squared() - g).abs() / g,
            self.r_u.dot(&self.r_v).abs() / (a * b),
            (self.n.norm() - 1.0).abs(),
            self.n.dot(&self.r_u).abs() / a,
            self.n.dot(&self.r_v).abs() / b,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn to_array(self) -> [f64; 12] {
        let mut y = [0.0; 12];
        for (k, v) in [self.r, self.r_u, self.r_v, self.n].iter().enumerate() {
            y[3 * k..3 * k + 3].copy_from_slice(v.as_slice());
        }
        y
    }

    fn from_array(y: &[f64; 12]) -> FrameState {
        let v = |k: usize| Vec3::new(y[3 * k], y[3 * k + 1], y[3 * k + 2]);
        FrameState {
            r: v(0),
            r_u: v(1),
            r_v: v(2),
            n: v(3),
        }
    }
}

/// Forms and first derivatives of `E` and `G` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coeffs([f64; 8]);

impl Coeffs {
    fn get(&self) -> (f64, f64, f64, f64, f64, f64, f64, f64) {
        let c = self.0;
        (c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7])
    }

    /// Frame derivative along `u` (`along_u`) or `v`.
    fn rhs(&self, along_u: bool, y: &[f64; 12]) -> [f64; 12] {
        let (e, g, l, n, e_u, e_v, g_u, g_v) = self.get();
        let f = FrameState::from_array(y);
        let r_uv = f.r_u * (e_v / (2.0 * e)) + f.r_v * (g_u / (2.0 * g));
        let d = if along_u {
            FrameState {
                r: f.r_u,
                r_u: f.r_u * (e_u / (2.0 * e)) - f.r_v * (e_v / (2.0 * g)) + f.n * l,
                r_v: r_uv,
                n: -f.r_u * (l / e),
            }
        } else {
            FrameState {
                r: f.r_v,
                r_u: r_uv,
                r_v: -f.r_u * (g_u / (2.0 * e)) + f.r_v * (g_v / (2.0 * g)) + f.n * n,
                n: -f.r_v * (n / g),
            }
        };
        d.to_array()
    }
}

fn axpy(y: &[f64; 12], h: f64, k: &[f64; 12]) -> [f64; 12] {
    let mut out = *y;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

/// Six-point Lagrange interpolation at fractional node position `z` (fewer
/// points on short lines).
fn interpolate(samples: &[Coeffs], z: f64) -> Coeffs {
    let n = samples.len();
    let width = 6.min(n);
    let k = (z.floor().max(0.0) as usize).min(n - 2);
    let start = (k + 1).saturating_sub(width / 2).min(n - width);
    let xs: Vec<f64> = (start..start + width).map(|p| p as f64).collect();
    let w = &fornberg_weights(z, &xs, 0)[0];
    let mut c = [0.0; 8];
    for (p, wp) in w.iter().enumerate() {
        for (cq, sq) in c.iter_mut().zip(samples[start + p].0.iter()) {
            *cq += wp * sq;
        }
    }
    Coeffs(c)
}

/// Largest relative rate in the frame equations, `|E_u| / 2E` and the like.
fn stiffness(c: &Coeffs) -> f64 {
    let (e, g, l, n, e_u, e_v, g_u, g_v) = c.get();
    [
        e_u / (2.0 * e),
        e_v / (2.0 * e),
        g_u / (2.0 * g),
        g_v / (2.0 * g),
        e_v / (2.0 * g),
        g_u / (2.0 * e),
        l / e.sqrt(),
        n / g.sqrt(),
    ]
    .iter()
    .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Step-size times rate above which an interval is split.
const MAX_STEP_RATE: f64 = 0.5;

/// Classical RK4 along a line of nodes. Intervals where the coefficients vary
/// fast relative to the spacing, as near a coordinate pole, are split into
/// substeps with interpolated coefficients.
fn march(start: FrameState, along_u: bool, h: f64, samples: &[Coeffs]) -> Vec<FrameState> {
    let mut y = start.to_array();
    let mut out = vec![start];
    for k in 0..samples.len() - 1 {
        let rate = stiffness(&samples[k]).max(stiffness(&samples[k + 1]));
        let m = ((h * rate / MAX_STEP_RATE).ceil() as usize).clamp(1, 4096);
        let hs = h / m as f64;
        let at = |z: f64| interpolate(samples, z);
        let mut lo = samples[k];
        for q in 0..m {
            let z0 = k as f64 + q as f64 / m as f64;
            let mid = at(z0 + 0.5 / m as f64);
            let hi = if q + 1 == m { samples[k + 1] } else { at(z0 + 1.0 / m as f64) };
            let k1 = lo.rhs(along_u, &y);
            let k2 = mid.rhs(along_u, &axpy(&y, 0.5 * hs, &k1));
            let k3 = mid.rhs(along_u, &axpy(&y, 0.5 * hs, &k2));
            let k4 = hi.rhs(along_u, &axpy(&y, hs, &k3));
            for p in 0..12 {
                y[p] += hs / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
            }
            lo = hi;
        }
        out.push(FrameState::from_array(&y));
    }
    out
}

/// Integrated frames plus diagnostics.
#[derive(Debug, Clone)]
pub struct FrameGrid {
    pub frames: Grid2<FrameState>,
    /// Gauss-Codazzi residual of the input forms.
    pub compatibility: f64,
    /// Largest position gap between row-first and column-first marching,
    /// relative to the extent of the result.
    pub path_gap: f64,
    /// Largest metric drift over the grid.
    pub drift: f64,
}

/// Integrates the frame equations for an orthogonal curvature net. The seed
/// frame at the first node is `r = 0`, `r_u = sqrt(E) e1`, `r_v = sqrt(G) e2`,
/// `n = e3`.
pub fn integrate_frame(forms: &Grid2<FundamentalForms>) -> Result<FrameGrid, ReconstructError> {
    integrate_frame_gated(forms, Gates::default())
}

/// Thresholds that reject a reconstruction before or after integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gates {
    pub compatibility: f64,
    pub drift: f64,
}

impl Default for Gates {
    fn default() -> Self {
        Gates {
            compatibility: COMPATIBILITY_TOL,
            drift: DRIFT_TOL,
        }
    }
}

pub fn integrate_frame_gated(forms: &Grid2<FundamentalForms>, gates: Gates) -> Result<FrameGrid, ReconstructError> {
    let (nx, ny) = (forms.nx, forms.ny);
    let compat = gauss_codazzi_residual(forms)?.max();
    if !(compat <= gates.compatibility) {
        return Err(ReconstructError::Incompatible {
            residual: compat,
            tol: gates.compatibility,
        });
    }
    let d = GridDiffer::new(forms).ok_or(FormsError::GridTooCoarse { nx, ny })?;
    let e = forms.map(|f| f.e);
    let g = forms.map(|f| f.g);
    let coeffs = Grid2::from_fn(nx, ny, forms.domain, |i, j| {
        let f = forms.get(i, j);
        Coeffs([
            f.e,
            f.g,
            f.l,
            f.n,
            d.dx(&e, i, j),
            d.dy(&e, i, j),
            d.dx(&g, i, j),
            d.dy(&g, i, j),
        ])
    });
    let f0 = forms.get(0, 0);
    let seed = FrameState {
        r: Vec3::zeros(),
        r_u: Vec3::x() * f0.e.sqrt(),
        r_v: Vec3::y() * f0.g.sqrt(),
        n: Vec3::z(),
    };
    let (hx, hy) = (forms.hx(), forms.hy());
    let row = |j: usize| -> Vec<Coeffs> { (0..nx).map(|i| *coeffs.get(i, j)).collect() };
    let col = |i: usize| -> Vec<Coeffs> { (0..ny).map(|j| *coeffs.get(i, j)).collect() };

    let base = march(seed, true, hx, &row(0));
    let mut frames = Grid2::from_fn(nx, ny, forms.domain, |_, _| seed);
    for (i, start) in base.iter().enumerate() {
        for (j, fr) in march(*start, false, hy, &col(i)).into_iter().enumerate() {
            *frames.get_mut(i, j) = fr;
        }
    }

    let side = march(seed, false, hy, &col(0));
    let mut path_gap: f64 = 0.0;
    for (j, start) in side.iter().enumerate() {
        for (i, fr) in march(*start, true, hx, &row(j)).into_iter().enumerate() {
            path_gap = path_gap.max((fr.r - frames.get(i, j).r).norm());
        }
    }
    let extent = bbox_diagonal(frames.data.iter().map(|f| &f.r));
    if extent > 0.0 {
        path_gap /= extent;
    }

    let drift = frames
        .iter()
        .map(|(i, j, fr)| {
            let f = forms.get(i, j);
            fr.drift(f.e, f.g)
        })
        .fold(0.0, f64::max);
    if !(drift <= gates.drift) {
        return Err(ReconstructError::Drift { drift, tol: gates.drift });
    }
    Ok(FrameGrid {
        frames,
        compatibility: compat,
        path_gap,
        drift,
    })
}

pub fn bbox_diagonal<'a>(points: impl Iterator<Item = &'a Vec3>) -> f64 {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let d = (hi - lo).norm();
    if d.is_finite() {
        d
    } else {
        0.0
    }
}

/// Proper rigid motion `p -> rotation p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl RigidMotion {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Least-squares rotation and translation taking `from` onto `to`, never a
/// reflection. The flag is set when the point sets do not span three
/// dimensions, so the rotation about their plane or line is not unique.
pub fn kabsch(from: &[Vec3], to: &[Vec3]) -> (RigidMotion, bool) {
    let n = from.len().max(1) as f64;
    let ca = from.iter().sum::<Vec3>() / n;
    let cb = to.iter().sum::<Vec3>() / n;
    let mut h = Matrix3::zeros();
    for (a, b) in from.iter().zip(to) {
        h += (a - ca) * (b - cb).transpose();
    }
    let svd = SVD::new(h, true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let s = svd.singular_values;
    let smax = s.max();
    let ambiguous = s.iter().filter(|&&x| x > 1e-12 * smax).count() < 3;
    let mut dm = Matrix3::identity();
    if (v_t.transpose() * u.transpose()).determinant() < 0.0 {
        dm[(2, 2)] = -1.0;
    }
    let rotation = v_t.transpose() * dm * u.transpose();
    (
        RigidMotion {
            rotation,
            translation: cb - rotation * ca,
        },
        ambiguous,
    )
}

#[derive(Debug, Clone)]
pub struct ReconstructionReport {
    /// Reconstructed points moved onto the target.
    pub points: Grid2<Vec3>,
    pub motion: RigidMotion,
    /// Point deviations as fractions of the target's bounding-box diagonal.
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub deviations: Grid2<f64>,
    pub compatibility: f64,
    pub path_gap: f64,
    pub drift: f64,
    pub ambiguous: bool,
    pub params: [&'static str; 2],
}

pub fn align_and_score(
    frames: &FrameGrid,
    target: &Grid2<Vec3>,
    params: [&'static str; 2],
) -> Result<ReconstructionReport, ReconstructError> {
    let rec = &frames.frames;
    if (rec.nx, rec.ny) != (target.nx, target.ny) {
        return Err(ReconstructError::Shape((rec.nx, rec.ny), (target.nx, target.ny)));
    }
    let from: Vec<Vec3> = rec.data.iter().map(|f| f.r).collect();
    let (motion, ambiguous) = kabsch(&from, &target.data);
    let diag = bbox_diagonal(target.data.iter());
    let unit = if diag > 0.0 { diag } else { 1.0 };
    let points = Grid2::from_fn(rec.nx, rec.ny, rec.domain, |i, j| motion.apply(&rec.get(i, j).r));
    let deviations = Grid2::from_fn(rec.nx, rec.ny, rec.domain, |i, j| {
        (points.get(i, j) - target.get(i, j)).norm() / unit
    });
    let max_deviation = deviations.data.iter().copied().fold(0.0, f64::max);
    let mean_deviation = deviations.data.iter().sum::<f64>() / deviations.data.len() as f64;
    Ok(ReconstructionReport {
        points,
        motion,
        max_deviation,
        mean_deviation,
        deviations,
        compatibility: frames.compatibility,
        path_gap: frames.path_gap,
        drift: frames.drift,
        ambiguous,
        params,
    })
}

/// Target points of `surface` on the grid of `like`.
pub fn target_grid<S: Surface + ?Sized, T>(surface: &S, like: &Grid2<T>) -> Result<Grid2<Vec3>, ReconstructError> {
    Grid2::try_from_fn(like.nx, like.ny, like.domain, |i, j| {
        let (u, v) = like.coords(i, j);
        Ok(surface.point(u, v)?)
    })
}

/// Growth field to aligned reconstruction of `surface`.
pub fn reconstruct<S: Surface + ?Sized>(
    field: &GrowthField,
    surface: &S,
) -> Result<ReconstructionReport, ReconstructError> {
    reconstruct_gated(field, surface, Gates::default())
}

pub fn reconstruct_gated<S: Surface + ?Sized>(
    field: &GrowthField,
    surface: &S,
    gates: Gates,
) -> Result<ReconstructionReport, ReconstructError> {
    let forms = forms_from_growth(field)?;
    let frames = integrate_frame_gated(&forms, gates)?;
    let target = target_grid(surface, &field.samples)?;
    align_and_score(&frames, &target, field.params)
}

impl ReconstructionReport {
    /// Columns `p1, p2, x, y, z, deviation`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{},{},x,y,z,deviation", self.params[0], self.params[1])?;
        for (i, j, p) in self.points.iter() {
            let (u, v) = self.points.coords(i, j);
            csv_row(w, &[u, v, p.x, p.y, p.z, *self.deviations.get(i, j)])?;
        }
        Ok(())
    }

    pub fn write_vtk<W: Write>(&self, w: &mut W) -> io::Result<()> {
        crate::export::vtk::write_structured_grid(
            w,
            "reconstructed surface",
            self.points.nx,
            self.points.ny,
            &self.points.data,
            &[("deviation", self.deviations.data.clone())],
        )
    }
}

/// Observed order of convergence from errors at successively halved
/// spacings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Domain, ParametricSurface};
    use crate::growth::{assemble_field, synthesize, GrowthSample, NetTolerance};
    use std::f64::consts::PI;

    #[test]
    fn unit_growth_gives_a_flat_sheet() {
        let g = Grid2::from_fn(11, 11, Domain::UNIT, |_, _| GrowthSample::UNIT);
        let field = assemble_field(g, 0.01, ["X", "Y"]).unwrap();
        let forms = forms_from_growth(&field).unwrap();
        let f = forms.get(3, 4);
        assert_eq!((f.e, f.g, f.l, f.n), (1.0, 1.0, 0.0, 0.0));
        let fr = integrate_frame(&forms).unwrap();
        for (i, j, s) in fr.frames.iter() {
            let (x, y) = fr.frames.coords(i, j);
            assert!((s.r - Vec3::new(x, y, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn kabsch_recovers_a_rotation() {
        let pts: Vec<Vec3> = (0..20)
            .map(|k| {
                let t = k as f64;
                Vec3::new(t.sin(), (1.3 * t).cos(), 0.1 * t)
            })
            .collect();
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), PI / 6.0);
        let moved: Vec<Vec3> = pts.iter().map(|p| rot * p + Vec3::new(1.0, -2.0, 0.5)).collect();
        let (m, amb) = kabsch(&pts, &moved);
        assert!(!amb);
        assert!((m.rotation - rot.matrix()).abs().max() < 1e-12);
        assert!((m.rotation.determinant() - 1.0).abs() < 1e-12);
        for (a, b) in pts.iter().zip(&moved) {
            assert!((m.apply(a) - b).norm() < 1e-12);
        }
    }

    #[test]
    fn kabsch_refuses_mirrors() {
        let pts: Vec<Vec3> = (0..10)
            .map(|k| Vec3::new(k as f64, (k * k) as f64 * 0.1, (k as f64).sin()))
            .collect();
        let mirrored: Vec<Vec3> = pts.iter().map(|p| Vec3::new(-p.x, p.y, p.z)).collect();
        let (m, _) = kabsch(&pts, &mirrored);
        assert!((m.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cone_forms_from_growth() {
        let cone = ParametricSurface::from_strs("cone", "X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X", Domain::UNIT).unwrap();
        let d = Domain::new(0.5, 0.6, 0.0, 0.1).unwrap();
        let g = synthesize(&cone.with_domain(d), 3, 3, NetTolerance::for_surface(&cone)).unwrap();
        let field = assemble_field(g, 0.01, ["X", "Y"]).unwrap();
        let f = *forms_from_growth(&field).unwrap().get(0, 0);
        assert!((f.e - 2.0).abs() < 1e-14);
        assert!((f.g - PI * PI).abs() < 1e-12);
        assert!(f.l.abs() < 1e-14);
        assert!((f.n + 2f64.sqrt() * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn torus_round_trip() {
        let torus = ParametricSurface::from_strs(
            "torus",
            "0.5*(cos(2*pi*X)+2)*cos(2*pi*Y)",
            "-0.5*(cos(2*pi*X)+2)*sin(2*pi*Y)",
            "0.5*sin(2*pi*X)",
            Domain::UNIT,
        )
        .unwrap();
        let g = synthesize(&torus, 41, 41, NetTolerance::for_surface(&torus)).unwrap();
        let field = assemble_field(g, 0.01, ["X", "Y"]).unwrap();
        let rep = reconstruct(&field, &torus).unwrap();
        assert!(rep.max_deviation < 1e-4, "{}", rep.max_deviation);
        assert!(rep.path_gap < 1e-4);
        assert!((rep.motion.rotation.determinant() - 1.0).abs() < 1e-12);
    }
}
