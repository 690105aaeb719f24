//! Plate-theory stress of a grown plate, used to certify that synthesized
//! growth leaves it stress free.
//!
//! Stresses are nominal stresses expanded in the height `Z` above the bottom
//! face, `S = S0 + Z S1`, and are reported in units of `2 C0`, the
//! neo-Hookean modulus. A stress tensor is stored by columns: the images of
//! `e1`, `e2` and the thickness direction `k`.

pub mod dual;

use std::fmt;
use std::io::{self, Write};

use nalgebra::Matrix3;

use crate::dsl::{Surface, SurfaceError, SurfaceJet, Vec3};
use crate::export::csv_row;
use crate::forms::FundamentalForms;
use crate::growth::{GrowthField, GrowthSample};
use crate::grid::{Grid2, GridDiffer};
use dual::{D, DV};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("area element vanishes at ({u}, {v})")]
    Singular { u: f64, v: f64 },
    #[error("in-plane growth ({l1}, {l2}) is not positive at ({u}, {v})")]
    NonPositiveGrowth { u: f64, v: f64, l1: f64, l2: f64 },
    #[error("grid needs at least 3 points per axis, got {nx}x{ny}")]
    GridTooCoarse { nx: usize, ny: usize },
    #[error("growth field has no gradient terms")]
    Order0Only,
}

/// Plate state at one point: the bottom-face position and the coefficients
/// of its expansion through the thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateState {
    pub r0: Vec3,
    pub r1: Vec3,
    pub r2: Vec3,
    pub p0: f64,
    pub p1: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub r_n: Vec3,
    pub delta: f64,
    pub normal: Vec3,
    pub s_bar: Vec3,
    pub t1: Vec3,
    pub t2: Vec3,
    pub q1: Vec3,
    pub q2: Vec3,
    pub h_bar: Vec3,
    /// `2 C0`.
    pub modulus: f64,
    pub thickness: f64,
    growth: GrowthSample,
    rx: DV,
    ry: DV,
    rn: DV,
    lam0: D,
}

fn pw(x: f64, n: i32) -> f64 {
    x.powi(n)
}

impl PlateState {
    pub fn new(
        j: &SurfaceJet,
        g: &GrowthSample,
        modulus: f64,
        thickness: f64,
        at: (f64, f64),
    ) -> Result<PlateState, VerifyError> {
        if !(g.l1_0 > 0.0 && g.l2_0 > 0.0) {
            return Err(VerifyError::NonPositiveGrowth {
                u: at.0,
                v: at.1,
                l1: g.l1_0,
                l2: g.l2_0,
            });
        }
        if g.l1_1.is_nan() || g.l2_1.is_nan() {
            return Err(VerifyError::Order0Only);
        }
        let rx = DV::new(j.ru, j.ruu, j.ruv);
        let ry = DV::new(j.rv, j.ruv, j.rvv);
        let l1 = D::new(g.l1_0, g.grad_l1_0[0], g.grad_l1_0[1]);
        let l2 = D::new(g.l2_0, g.grad_l2_0[0], g.grad_l2_0[1]);
        let rn = rx.cross(&ry);
        let delta = rn.dot(&rn).sqrt();
        if !(delta.v > 0.0) {
            return Err(VerifyError::Singular { u: at.0, v: at.1 });
        }
        let lam0 = l1 * l2;
        let lam1 = g.l1_1 * g.l2_0 + g.l2_1 * g.l1_0;
        let (l0, dl) = (lam0.v, delta.v);
        let normal = rn.v / dl;
        let s_bar = rn.x.cross(&ry.v) - rn.y.cross(&rx.v);
        let t1 = (l2 / l1) * rx;
        let t2 = (l1 / l2) * ry;
        let w = lam0.powi(2) / delta.powi(2);
        let q1 = w * rn.cross(&rx);
        let q2 = w * rn.cross(&ry);
        let h_bar = t1.x + t2.y - s_bar * (pw(l0, 3) / pw(dl, 4))
            + rn.v * (l0 * lam1 / pw(dl, 2))
            + (q2.x - q1.y) * (l0 / pw(dl, 2));
        let sn = s_bar.dot(&rn.v);
        let hn = h_bar.dot(&rn.v);
        let r2 = -h_bar / l0 + rn.v * (lam1 / pw(dl, 2) - l0 * l0 * sn / pw(dl, 6) + hn / (l0 * dl * dl));
        let p1 = modulus * (l0 * lam1 / pw(dl, 2) - pw(l0, 3) * sn / pw(dl, 6) + hn / pw(dl, 2));
        Ok(PlateState {
            r0: j.r,
            r1: normal * (l0 / dl),
            r2,
            p0: modulus * l0 * l0 / dl,
            p1,
            lambda0: l0,
            lambda1: lam1,
            r_n: rn.v,
            delta: dl,
            normal,
            s_bar,
            t1: t1.v,
            t2: t2.v,
            q1: q1.v,
            q2: q2.v,
            h_bar,
            modulus,
            thickness,
            growth: *g,
            rx,
            ry,
            rn,
            lam0,
        })
    }

    /// Leading stress coefficient.
    pub fn s0(&self) -> Matrix3<f64> {
        let g = &self.growth;
        let (l0, dl) = (self.lambda0, self.delta);
        let rn = self.r_n;
        let (rx, ry) = (self.rx.v, self.ry.v);
        let k = pw(l0, 3) / pw(dl, 4);
        let c1 = rn.cross(&ry) * k + rx * (g.l2_0 / g.l1_0);
        let c2 = -rn.cross(&rx) * k + ry * (g.l1_0 / g.l2_0);
        Matrix3::from_columns(&[c1, c2, Vec3::zeros()]) * self.modulus
    }

    /// First-order stress coefficient. The shear term of the `e2` column is
    /// taken along `r_Y`.
    pub fn s1(&self) -> Matrix3<f64> {
        let g = &self.growth;
        let (l0, dl) = (self.lambda0, self.delta);
        let rn = &self.rn;
        let (rx, ry) = (self.rx.v, self.ry.v);
        let h = self.h_bar;
        let k = l0 * self.lambda1 - pw(l0, 3) * self.s_bar.dot(&rn.v) / pw(dl, 4) + h.dot(&rn.v);
        let a = (self.lam0 / self.rn_delta2()) * *rn;
        let c1 = rn.v.cross(&rn.y) * (pw(l0, 4) / pw(dl, 6))
            + ry.cross(&h) * (l0 / pw(dl, 2))
            + rx * ((g.l2_1 * g.l1_0 - g.l1_1 * g.l2_0) / pw(g.l1_0, 2))
            + rn.v.cross(&ry) * (2.0 * l0 / pw(dl, 4) * k)
            + a.x * (g.l2_0 / g.l1_0);
        let c2 = -rn.v.cross(&rn.x) * (pw(l0, 4) / pw(dl, 6)) - rx.cross(&h) * (l0 / pw(dl, 2))
            + ry * ((g.l1_1 * g.l2_0 - g.l2_1 * g.l1_0) / pw(g.l2_0, 2))
            - rn.v.cross(&rx) * (2.0 * l0 / pw(dl, 4) * k)
            + a.y * (g.l1_0 / g.l2_0);
        let w = self.lam0 / self.rn_delta2();
        let bx = w * rn.cross(&self.rx);
        let by = w * rn.cross(&self.ry);
        let c3 = -h + rn.v * (l0 * self.lambda1 / pw(dl, 2)) + (by.x * -1.0 + bx.y) * (l0 * l0 / pw(dl, 2));
        Matrix3::from_columns(&[c1, c2, c3]) * self.modulus
    }

    /// Thickness-averaged stress to first order.
    pub fn s_mean(&self) -> Matrix3<f64> {
        self.s0() + self.s1() * (0.5 * self.thickness)
    }

    /// Norm of the thickness-direction identity that holds in any orthogonal
    /// net grown by the metric: `h_bar - L1 r_N / D + d_X(r_N x r_Y / D) -
    /// d_Y(r_N x r_X / D)`.
    pub fn thickness_identity_residual(&self) -> f64 {
        let inv = self.rn_delta2().sqrt().recip();
        let a = inv * self.rn.cross(&self.ry);
        let b = inv * self.rn.cross(&self.rx);
        (self.h_bar - self.r_n * (self.lambda1 / self.delta) + a.x - b.y).norm()
    }

    /// Edge traction `S_mean^T n` for an in-plane outward normal `n`.
    pub fn traction(&self, n: [f64; 2]) -> Vec3 {
        let s = self.s_mean();
        s.column(0) * n[0] + s.column(1) * n[1]
    }

    /// Bending moment about the mid-plane on an edge with normal `n`, to
    /// leading order in the thickness: `h^2 / 12 (t1 x r1 + t0 x r2)` where
    /// `t0`, `t1` are the edge tractions of `S0`, `S1`.
    pub fn moment(&self, n: [f64; 2]) -> Vec3 {
        let (s0, s1) = (self.s0(), self.s1());
        let t0: Vec3 = s0.column(0) * n[0] + s0.column(1) * n[1];
        let t1: Vec3 = s1.column(0) * n[0] + s1.column(1) * n[1];
        (t1.cross(&self.r1) + t0.cross(&self.r2)) * (self.thickness * self.thickness / 12.0)
    }

    fn rn_delta2(&self) -> D {
        self.rn.dot(&self.rn)
    }
}

/// Coefficients that multiply `r_X` and `r_Y` in the two tangential
/// first-order equations once `M = 0`. Both vanish for gradient growth
/// `l_1 = -L / l1_0`, `l2_1 = -N / l2_0`.
pub fn bending_brackets(f: &FundamentalForms, g: &GrowthSample) -> (f64, f64) {
    let (a, b) = (g.l1_0, g.l2_0);
    let lam1 = g.l1_1 * b + g.l2_1 * a;
    let common = 3.0 * lam1 + 2.0 * (b * b * f.l + a * a * f.n) / (a * b);
    let shear = g.l2_1 * a - g.l1_1 * b;
    (common + 2.0 * b * f.l / a - shear, common + 2.0 * a * f.n / b + shear)
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Per-point residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResidual {
    pub s0: f64,
    pub s1: f64,
    pub thickness_identity: f64,
    /// Divergence of the mean stress; NaN where the stencil does not fit.
    pub divergence: f64,
    /// Edge traction and moment; NaN away from the boundary.
    pub traction: f64,
    pub moment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressTolerance {
    pub s0: f64,
    pub s1: f64,
    pub thickness_identity: f64,
    pub plate: f64,
    pub boundary: f64,
}

impl Default for StressTolerance {
    fn default() -> Self {
        StressTolerance::scaled(1e-8)
    }
}

impl StressTolerance {
    /// Tolerances keyed to the first-order stress bound `s1`; the others keep
    /// their default ratios to it.
    pub fn scaled(s1: f64) -> StressTolerance {
        StressTolerance {
            s0: s1 * 1e-2,
            s1,
            thickness_identity: s1 * 1e-1,
            plate: s1 * 1e2,
            boundary: s1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StressSummary {
    pub s0: f64,
    pub s1: f64,
    pub thickness_identity: f64,
    pub plate: f64,
    pub traction: f64,
    pub moment: f64,
    pub brackets: f64,
}

impl StressSummary {
    /// Names of the checks that exceed `tol`.
    pub fn failures(&self, tol: &StressTolerance) -> Vec<String> {
        let checks = [
            ("S0", self.s0, tol.s0),
            ("S1", self.s1, tol.s1),
            ("thickness identity", self.thickness_identity, tol.thickness_identity),
            ("plate divergence", self.plate, tol.plate),
            ("edge traction", self.traction, tol.boundary),
            ("edge moment", self.moment, tol.boundary),
        ];
        checks
            .iter()
            .filter(|(_, v, t)| !(v <= t))
            .map(|(n, v, t)| format!("{n} residual {v:.3e} > {t:.1e}"))
            .collect()
    }
}

impl fmt::Display for StressSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max |S0|            {:.3e}", self.s0)?;
        writeln!(f, "max |S1|            {:.3e}", self.s1)?;
        writeln!(f, "thickness identity  {:.3e}", self.thickness_identity)?;
        writeln!(f, "plate divergence    {:.3e}", self.plate)?;
        writeln!(f, "edge traction       {:.3e}", self.traction)?;
        writeln!(f, "edge moment         {:.3e}", self.moment)?;
        writeln!(f, "bending brackets    {:.3e}", self.brackets)
    }
}

#[derive(Debug, Clone)]
pub struct StressReport {
    pub points: Grid2<PointResidual>,
    pub params: [&'static str; 2],
    pub modulus: f64,
    pub thickness: f64,
    pub summary: StressSummary,
}

impl StressReport {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "{},{},s0,s1,thickness_identity,divergence,traction,moment",
            self.params[0], self.params[1]
        )?;
        for (i, j, p) in self.points.iter() {
            let (u, v) = self.points.coords(i, j);
            csv_row(
                w,
                &[u, v, p.s0, p.s1, p.thickness_identity, p.divergence, p.traction, p.moment],
            )?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "stress residuals in units of 2 C0 = {}, thickness {}", self.modulus, self.thickness)?;
        write!(w, "{}", self.summary)
    }
}

/// Outward normals of the edges through node `(i, j)`.
fn edge_normals(i: usize, j: usize, nx: usize, ny: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    if i == 0 {
        out.push([-1.0, 0.0]);
    }
    if i + 1 == nx {
        out.push([1.0, 0.0]);
    }
    if j == 0 {
        out.push([0.0, -1.0]);
    }
    if j + 1 == ny {
        out.push([0.0, 1.0]);
    }
    out
}

/// Evaluates every residual of `field` grown on `surface`, whose parameters
/// must be those of the field grid.
pub fn verify<S: Surface + ?Sized>(surface: &S, field: &GrowthField, modulus: f64) -> Result<StressReport, VerifyError> {
    let g = &field.samples;
    let (nx, ny) = (g.nx, g.ny);
    let differ = GridDiffer::new(g).ok_or(VerifyError::GridTooCoarse { nx, ny })?;
    let scale = surface.length_scale();
    let mut brackets: f64 = 0.0;
    let states = Grid2::try_from_fn(nx, ny, g.domain, |i, j| {
        let (u, v) = g.coords(i, j);
        let jet = surface.jet(u, v)?;
        let s = g.get(i, j);
        if let Some(f) = FundamentalForms::from_jet(&jet, scale) {
            let (b1, b2) = bending_brackets(&f, s);
            brackets = brackets.max(b1.abs()).max(b2.abs());
        }
        PlateState::new(&jet, s, modulus, field.thickness, (u, v))
    })?;
    let mean = states.map(|s| s.s_mean());
    let comp = |col: usize, row: usize| mean.map(|m| m[(row, col)]);
    let c1: Vec<Grid2<f64>> = (0..3).map(|r| comp(0, r)).collect();
    let c2: Vec<Grid2<f64>> = (0..3).map(|r| comp(1, r)).collect();
    let points = Grid2::from_fn(nx, ny, g.domain, |i, j| {
        let st = states.get(i, j);
        let divergence = if differ.is_interior(i, j) {
            (0..3)
                .map(|r| {
                    let d = differ.dx(&c1[r], i, j) + differ.dy(&c2[r], i, j);
                    d * d
                })
                .sum::<f64>()
                .sqrt()
        } else {
            f64::NAN
        };
        let normals = edge_normals(i, j, nx, ny);
        let (traction, moment) = if normals.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            normals.iter().fold((0.0f64, 0.0f64), |(t, m), n| {
                (t.max(st.traction(*n).norm()), m.max(st.moment(*n).norm()))
            })
        };
        PointResidual {
            s0: max_abs(&st.s0()),
            s1: max_abs(&st.s1()),
            thickness_identity: st.thickness_identity_residual(),
            divergence,
            traction,
            moment,
        }
    });
    let fold = |f: fn(&PointResidual) -> f64| {
        points
            .data
            .iter()
            .map(f)
            .filter(|v| !v.is_nan())
            .fold(0.0f64, f64::max)
    };
    let summary = StressSummary {
        s0: fold(|p| p.s0),
        s1: fold(|p| p.s1),
        thickness_identity: fold(|p| p.thickness_identity),
        plate: fold(|p| p.divergence),
        traction: fold(|p| p.traction),
        moment: fold(|p| p.moment),
        brackets,
    };
    Ok(StressReport {
        points,
        params: field.params,
        modulus,
        thickness: field.thickness,
        summary,
    })
}
