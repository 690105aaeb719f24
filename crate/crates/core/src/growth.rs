//! Growth functions that make a plate take a target shape without stress.
//!
//! With an orthogonal curvature net the in-plane growth is the metric stretch,
//! `l1_0 = sqrt(E)`, `l2_0 = sqrt(G)`, and the through-thickness gradients are
//! the curvatures, `l1_1 = -L / l1_0`, `l2_1 = -N / l2_0`. Growth at height `Z`
//! is `l_0 + l_1 Z`.

use std::io::{self, Write};

use crate::dsl::{Domain, Surface, SurfaceJet};
use crate::export::csv_row;
use crate::forms::{FormsError, FundamentalForms, VANISH_TOL};
use crate::grid::Grid2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GrowthError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("E G - F^2 = {det:e} is not positive")]
    NotRegular { det: f64 },
    #[error("F = {f:e} exceeds the tolerance {tol:e}; reparametrize first")]
    NotOrthogonal { f: f64, tol: f64 },
    #[error("M = {m:e} exceeds the tolerance {tol:e}; reparametrize first")]
    NotCurvatureNet { m: f64, tol: f64 },
    #[error("growth l{component} = {value:e} is not positive at ({u}, {v}), Z = {z}")]
    NonPositive {
        u: f64,
        v: f64,
        component: u8,
        z: f64,
        value: f64,
    },
    #[error("plate thickness must be positive, got {0}")]
    BadThickness(f64),
}

/// In-plane growth for a general metric. Reduces to [`order0_orthogonal`]
/// when `F = 0`.
pub fn order0_general(f: &FundamentalForms) -> Result<(f64, f64), GrowthError> {
    let det = f.e * f.g - f.f * f.f;
    if !(det > 0.0 && f.e > 0.0 && f.g > 0.0) {
        return Err(GrowthError::NotRegular { det });
    }
    let d6 = det.powf(1.0 / 6.0);
    Ok((
        f.e.cbrt() * d6 / f.g.powf(1.0 / 6.0),
        f.g.cbrt() * d6 / f.e.powf(1.0 / 6.0),
    ))
}

pub fn order0_orthogonal(f: &FundamentalForms, tol_f: f64) -> Result<(f64, f64), GrowthError> {
    if !(f.f.abs() <= tol_f) {
        return Err(GrowthError::NotOrthogonal { f: f.f, tol: tol_f });
    }
    if !(f.e > 0.0 && f.g > 0.0) {
        return Err(GrowthError::NotRegular { det: f.e * f.g });
    }
    Ok((f.e.sqrt(), f.g.sqrt()))
}

pub fn order1(f: &FundamentalForms, l1_0: f64, l2_0: f64, tol_m: f64) -> Result<(f64, f64), GrowthError> {
    if !(f.m.abs() <= tol_m) {
        return Err(GrowthError::NotCurvatureNet { m: f.m, tol: tol_m });
    }
    Ok((-f.l / l1_0, -f.n / l2_0))
}

/// Absolute tolerances for treating `F` and `M` as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetTolerance {
    pub f: f64,
    pub m: f64,
}

impl NetTolerance {
    /// `rel * scale^2` for `F` and `rel * scale` for `M`.
    pub fn relative(rel: f64, scale: f64) -> NetTolerance {
        NetTolerance {
            f: rel * scale * scale,
            m: rel * scale,
        }
    }

    pub fn for_surface<S: Surface + ?Sized>(s: &S) -> NetTolerance {
        NetTolerance::relative(VANISH_TOL, s.length_scale())
    }
}

/// Growth at one parameter point, with the parametric gradient of the
/// in-plane part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSample {
    pub l1_0: f64,
    pub l2_0: f64,
    pub l1_1: f64,
    pub l2_1: f64,
    pub grad_l1_0: [f64; 2],
    pub grad_l2_0: [f64; 2],
}

impl GrowthSample {
    pub const UNIT: GrowthSample = GrowthSample {
        l1_0: 1.0,
        l2_0: 1.0,
        l1_1: 0.0,
        l2_1: 0.0,
        grad_l1_0: [0.0; 2],
        grad_l2_0: [0.0; 2],
    };

    /// Growth ratios `(l1, l2)` at height `z`.
    pub fn at(&self, z: f64) -> (f64, f64) {
        (self.l1_0 + self.l1_1 * z, self.l2_0 + self.l2_1 * z)
    }

    /// Gradients follow from `E_X = 2 r_X . r_XX` and its relatives.
    pub fn from_jet(j: &SurfaceJet, f: &FundamentalForms, tol: NetTolerance) -> Result<GrowthSample, GrowthError> {
        let (l1_0, l2_0) = order0_orthogonal(f, tol.f)?;
        let (l1_1, l2_1) = order1(f, l1_0, l2_0, tol.m)?;
        let e_x = 2.0 * j.ru.dot(&j.ruu);
        let e_y = 2.0 * j.ru.dot(&j.ruv);
        let g_x = 2.0 * j.rv.dot(&j.ruv);
        let g_y = 2.0 * j.rv.dot(&j.rvv);
        Ok(GrowthSample {
            l1_0,
            l2_0,
            l1_1,
            l2_1,
            grad_l1_0: [e_x / (2.0 * l1_0), e_y / (2.0 * l1_0)],
            grad_l2_0: [g_x / (2.0 * l2_0), g_y / (2.0 * l2_0)],
        })
    }
}

pub fn growth_at<S: Surface + ?Sized>(s: &S, u: f64, v: f64, tol: NetTolerance) -> Result<GrowthSample, GrowthError> {
    let j = s.jet(u, v).map_err(FormsError::from)?;
    let f = FundamentalForms::from_jet(&j, s.length_scale()).ok_or(FormsError::Singular {
        u,
        v,
        delta: j.ru.cross(&j.rv).norm(),
    })?;
    GrowthSample::from_jet(&j, &f, tol)
}

/// Samples growth on an `nx` by `ny` grid over the surface domain.
pub fn synthesize<S: Surface + ?Sized>(
    s: &S,
    nx: usize,
    ny: usize,
    tol: NetTolerance,
) -> Result<Grid2<GrowthSample>, GrowthError> {
    if nx < 2 || ny < 2 {
        return Err(FormsError::GridTooCoarse { nx, ny }.into());
    }
    let d = s.domain();
    Grid2::try_from_fn(nx, ny, d, |i, j| growth_at(s, d.node_x(i, nx), d.node_y(j, ny), tol))
}

/// In-plane growth from the general-metric formula. The gradient terms are
/// unknown without a curvature net, so they and the gradients are NaN.
pub fn synthesize_general<S: Surface + ?Sized>(
    s: &S,
    nx: usize,
    ny: usize,
) -> Result<Grid2<GrowthSample>, GrowthError> {
    if nx < 2 || ny < 2 {
        return Err(FormsError::GridTooCoarse { nx, ny }.into());
    }
    let d = s.domain();
    Grid2::try_from_fn(nx, ny, d, |i, j| {
        let (u, v) = (d.node_x(i, nx), d.node_y(j, ny));
        let f = crate::forms::forms_at(s, u, v)?;
        let (l1_0, l2_0) = order0_general(&f)?;
        Ok(GrowthSample {
            l1_0,
            l2_0,
            l1_1: f64::NAN,
            l2_1: f64::NAN,
            grad_l1_0: [f64::NAN; 2],
            grad_l2_0: [f64::NAN; 2],
        })
    })
}

/// Growth functions on a parameter grid for a plate of thickness `thickness`.
#[derive(Debug, Clone)]
pub struct GrowthField {
    pub samples: Grid2<GrowthSample>,
    pub thickness: f64,
    /// Names of the two parameters, `X, Y` or `S, T`.
    pub params: [&'static str; 2],
    /// Set when only the in-plane part is meaningful.
    pub order0_only: bool,
}

/// Wraps sampled growth into a field, checking that both ratios stay positive
/// through the thickness. Growth is linear in `Z`, so the faces suffice.
pub fn assemble_field(
    samples: Grid2<GrowthSample>,
    thickness: f64,
    params: [&'static str; 2],
) -> Result<GrowthField, GrowthError> {
    if !(thickness > 0.0 && thickness.is_finite()) {
        return Err(GrowthError::BadThickness(thickness));
    }
    let order0_only = samples.data.iter().any(|s| s.l1_1.is_nan() || s.l2_1.is_nan());
    for (i, j, s) in samples.iter() {
        let (u, v) = samples.coords(i, j);
        let zs: &[f64] = if order0_only { &[0.0] } else { &[0.0, thickness] };
        for &z in zs {
            let (a, b) = s.at(z);
            for (component, value) in [(1, a), (2, b)] {
                if !(value > 0.0) {
                    return Err(GrowthError::NonPositive {
                        u,
                        v,
                        component,
                        z,
                        value,
                    });
                }
            }
        }
    }
    Ok(GrowthField {
        samples,
        thickness,
        params,
        order0_only,
    })
}

impl GrowthField {
    pub fn domain(&self) -> Domain {
        self.samples.domain
    }

    /// Columns `p1, p2, l1_0, l2_0, l1_1, l2_1` named after the parameters.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{},{},l1_0,l2_0,l1_1,l2_1", self.params[0], self.params[1])?;
        for (i, j, s) in self.samples.iter() {
            let (u, v) = self.samples.coords(i, j);
            csv_row(w, &[u, v, s.l1_0, s.l2_0, s.l1_1, s.l2_1])?;
        }
        Ok(())
    }

    /// A copy with one of the four growth grids multiplied by `factor`.
    /// Gradients of a scaled in-plane grid scale with it.
    pub fn perturbed(&self, which: GrowthComponent, factor: f64) -> GrowthField {
        let mut out = self.clone();
        for s in out.samples.data.iter_mut() {
            match which {
                GrowthComponent::L1_0 => {
                    s.l1_0 *= factor;
                    s.grad_l1_0 = s.grad_l1_0.map(|g| g * factor);
                }
                GrowthComponent::L2_0 => {
                    s.l2_0 *= factor;
                    s.grad_l2_0 = s.grad_l2_0.map(|g| g * factor);
                }
                GrowthComponent::L1_1 => s.l1_1 *= factor,
                GrowthComponent::L2_1 => s.l2_1 *= factor,
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthComponent {
    L1_0,
    L2_0,
    L1_1,
    L2_1,
}

impl GrowthComponent {
    pub const ALL: [GrowthComponent; 4] = [
        GrowthComponent::L1_0,
        GrowthComponent::L2_0,
        GrowthComponent::L1_1,
        GrowthComponent::L2_1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrowthComponent::L1_0 => "l1_0",
            GrowthComponent::L2_0 => "l2_0",
            GrowthComponent::L1_1 => "l1_1",
            GrowthComponent::L2_1 => "l2_1",
        }
    }
}
