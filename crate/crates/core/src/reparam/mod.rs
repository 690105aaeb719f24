//! Change of parameters to an orthogonal curvature net.
//!
//! Strategies are registered by name: `identity` for surfaces whose
//! coordinate curves are already lines of curvature, `curvature-lines` for the
//! general case, which traces principal-direction curves numerically.

pub mod directions;
pub mod map;
pub mod ode;
pub mod pullback;
pub mod trace;

use std::sync::Arc;

pub use directions::{principal_directions, DirectionField, PrincipalDirections};
pub use map::{build_map, ForwardSample, InverseSample, ReparamError, ReparamMap, Reparametrization};
pub use pullback::{PulledBackSurface, ShiftedSurface};
pub use trace::{InverseJet, TraceError};

use crate::dsl::{Domain, Surface};
use crate::grid::Grid2;
use crate::registry::Registry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReparamOptions {
    pub nx: usize,
    pub ny: usize,
    pub seed: (f64, f64),
}

/// A coordinate change together with the target surface in the new
/// coordinates, defined over `map.patch`.
pub struct Reparam {
    pub map: ReparamMap,
    pub surface: Arc<dyn Surface>,
    pub tracing: Option<Arc<Reparametrization>>,
}

pub trait Reparametrizer: Send + Sync {
    fn description(&self) -> &'static str;

    fn build(&self, surface: Arc<dyn Surface>, opts: &ReparamOptions) -> Result<Reparam, ReparamError>;
}

pub struct Identity;

impl Reparametrizer for Identity {
    fn description(&self) -> &'static str {
        "keep the coordinates, shifted so the seed is the origin"
    }

    fn build(&self, surface: Arc<dyn Surface>, opts: &ReparamOptions) -> Result<Reparam, ReparamError> {
        let ReparamOptions { nx, ny, seed } = *opts;
        if nx < 3 || ny < 3 {
            return Err(ReparamError::GridTooCoarse { nx, ny });
        }
        let d = surface.domain();
        if !d.contains(seed.0, seed.1) {
            return Err(ReparamError::SeedOutside(seed.0, seed.1));
        }
        let shifted = ShiftedSurface {
            inner: surface,
            shift: seed,
        };
        let patch = shifted.domain();
        let forward = Grid2::from_fn(nx, ny, d, |i, j| ForwardSample {
            s: d.node_x(i, nx) - seed.0,
            t: d.node_y(j, ny) - seed.1,
            valid: true,
            left_domain: false,
        });
        let inverse = Grid2::from_fn(nx, ny, patch, |i, j| InverseSample {
            x: d.node_x(i, nx),
            y: d.node_y(j, ny),
            valid: true,
            jacobian: 1.0,
        });
        let boundary = vec![
            [patch.x_lo, patch.y_lo],
            [patch.x_hi, patch.y_lo],
            [patch.x_hi, patch.y_hi],
            [patch.x_lo, patch.y_hi],
        ];
        Ok(Reparam {
            map: ReparamMap {
                method: "identity",
                seed,
                forward,
                boundary,
                inverse,
                patch,
                diagnostics: Vec::new(),
            },
            surface: Arc::new(shifted),
            tracing: None,
        })
    }
}

pub struct CurvatureLines;

impl Reparametrizer for CurvatureLines {
    fn description(&self) -> &'static str {
        "trace principal-curvature lines and label them along axis transversals"
    }

    fn build(&self, surface: Arc<dyn Surface>, opts: &ReparamOptions) -> Result<Reparam, ReparamError> {
        let rep = Arc::new(Reparametrization::new(surface, opts.nx, opts.ny, opts.seed)?);
        let map = build_map(&rep, opts.nx, opts.ny)?;
        let pulled = PulledBackSurface::new(rep.clone(), map.patch);
        Ok(Reparam {
            map,
            surface: Arc::new(pulled),
            tracing: Some(rep),
        })
    }
}

pub fn registry() -> Registry<dyn Reparametrizer> {
    let mut r: Registry<dyn Reparametrizer> = Registry::new("reparametrizer");
    r.register("identity", Box::new(Identity))
        .register("curvature-lines", Box::new(CurvatureLines));
    r
}

/// Default seed: the centre of the domain.
pub fn default_seed(d: &Domain) -> (f64, f64) {
    d.center()
}
