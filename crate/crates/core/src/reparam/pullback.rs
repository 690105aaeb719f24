//! The target surface in curvature-net coordinates.

use std::sync::{Arc, OnceLock};

use super::map::Reparametrization;
use crate::dsl::{Domain, Surface, SurfaceError, SurfaceJet, Vec3};

/// `r*(S, T) = r(X(S, T), Y(S, T))` with derivatives by the chain rule
/// through the traced inverse.
pub struct PulledBackSurface {
    pub rep: Arc<Reparametrization>,
    pub patch: Domain,
    scale: OnceLock<f64>,
}

impl PulledBackSurface {
    pub fn new(rep: Arc<Reparametrization>, patch: Domain) -> Self {
        PulledBackSurface {
            rep,
            patch,
            scale: OnceLock::new(),
        }
    }
}

impl Surface for PulledBackSurface {
    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet, SurfaceError> {
        let inv = self.rep.inverse(s, t).map_err(|e| SurfaceError::Map {
            u: s,
            v: t,
            message: e.to_string(),
        })?;
        let j = self.rep.surface().jet(inv.xy[0], inv.xy[1])?;
        Ok(chain(&j, &inv.d_s, &inv.d_t, &inv.d_ss, &inv.d_st, &inv.d_tt))
    }

    fn domain(&self) -> Domain {
        self.patch
    }

    fn length_scale(&self) -> f64 {
        *self.scale.get_or_init(|| crate::dsl::sampled_diagonal(self))
    }
}

/// Jet of `r(g(s, t))` from the jet of `r` and the derivatives of `g`.
pub fn chain(
    j: &SurfaceJet,
    g_s: &[f64; 2],
    g_t: &[f64; 2],
    g_ss: &[f64; 2],
    g_st: &[f64; 2],
    g_tt: &[f64; 2],
) -> SurfaceJet {
    let first = |g: &[f64; 2]| j.ru * g[0] + j.rv * g[1];
    let hess = |p: &[f64; 2], q: &[f64; 2]| -> Vec3 {
        j.ruu * (p[0] * q[0]) + j.ruv * (p[0] * q[1] + p[1] * q[0]) + j.rvv * (p[1] * q[1])
    };
    SurfaceJet {
        r: j.r,
        ru: first(g_s),
        rv: first(g_t),
        ruu: hess(g_s, g_s) + first(g_ss),
        ruv: hess(g_s, g_t) + first(g_st),
        rvv: hess(g_t, g_t) + first(g_tt),
    }
}

/// `r*(S, T) = r(S + X0, T + Y0)`: coordinates already form a curvature net.
pub struct ShiftedSurface {
    pub inner: Arc<dyn Surface>,
    pub shift: (f64, f64),
}

impl Surface for ShiftedSurface {
    fn jet(&self, s: f64, t: f64) -> Result<SurfaceJet, SurfaceError> {
        self.inner.jet(s + self.shift.0, t + self.shift.1)
    }

    fn domain(&self) -> Domain {
        let d = self.inner.domain();
        Domain {
            x_lo: d.x_lo - self.shift.0,
            x_hi: d.x_hi - self.shift.0,
            y_lo: d.y_lo - self.shift.1,
            y_hi: d.y_hi - self.shift.1,
        }
    }

    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
}
