use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};

use super::expr::{BinOp, EvalError, Expr};
use super::jet::Jet2;
use super::parser::{parse, ParseError};
use crate::kv::{KvError, KvFile};

pub type Vec3 = Vector3<f64>;

/// Rectangular parameter domain `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub const UNIT: Domain = Domain {
        x_lo: 0.0,
        x_hi: 1.0,
        y_lo: 0.0,
        y_hi: 1.0,
    };

    pub fn new(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Option<Domain> {
        let ok = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite())
            && x_lo < x_hi
            && y_lo < y_hi;
        ok.then_some(Domain {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.x_lo + self.x_hi),
            0.5 * (self.y_lo + self.y_hi),
        )
    }

    /// Diagonal length of the parameter rectangle.
    pub fn size(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }

    /// `i`-th of `n` equispaced nodes along the first axis, endpoints included.
    pub fn node_x(&self, i: usize, n: usize) -> f64 {
        lerp(self.x_lo, self.x_hi, i, n)
    }

    pub fn node_y(&self, j: usize, n: usize) -> f64 {
        lerp(self.y_lo, self.y_hi, j, n)
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.5 * (lo + hi);
    }
    if i + 1 == n {
        return hi;
    }
    lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.x_lo, self.x_hi, self.y_lo, self.y_hi)
    }
}

/// Position and partial derivatives to second order at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub r: Vec3,
    pub ru: Vec3,
    pub rv: Vec3,
    pub ruu: Vec3,
    pub ruv: Vec3,
    pub rvv: Vec3,
}

impl SurfaceJet {
    pub fn from_components(c: [Jet2; 3]) -> SurfaceJet {
        let pick = |f: fn(&Jet2) -> f64| Vec3::new(f(&c[0]), f(&c[1]), f(&c[2]));
        SurfaceJet {
            r: pick(|j| j.v),
            ru: pick(|j| j.dx),
            rv: pick(|j| j.dy),
            ruu: pick(|j| j.dxx),
            ruv: pick(|j| j.dxy),
            rvv: pick(|j| j.dyy),
        }
    }

    /// Applies `p -> rot * p + shift`.
    pub fn moved(&self, rot: &Matrix3<f64>, shift: &Vec3) -> SurfaceJet {
        SurfaceJet {
            r: rot * self.r + shift,
            ru: rot * self.ru,
            rv: rot * self.rv,
            ruu: rot * self.ruu,
            ruv: rot * self.ruv,
            rvv: rot * self.rvv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("component {component} at ({u}, {v}): {source}")]
    Eval {
        component: char,
        u: f64,
        v: f64,
        #[source]
        source: EvalError,
    },
    #[error("no preimage for ({u}, {v}): {message}")]
    Map { u: f64, v: f64, message: String },
}

/// A twice-differentiable map from a parameter rectangle into space.
pub trait Surface: Send + Sync {
    fn jet(&self, u: f64, v: f64) -> Result<SurfaceJet, SurfaceError>;

    fn domain(&self) -> Domain;

    /// Bounding-box diagonal of the image, the length unit for tolerances.
    fn length_scale(&self) -> f64 {
        sampled_diagonal(self)
    }

    fn point(&self, u: f64, v: f64) -> Result<Vec3, SurfaceError> {
        Ok(self.jet(u, v)?.r)
    }
}

/// Bounding-box diagonal of the image sampled on a 21x21 grid; points that
/// fail to evaluate are skipped. Degenerate images report 1.
pub fn sampled_diagonal<S: Surface + ?Sized>(s: &S) -> f64 {
    const N: usize = 21;
    let d = s.domain();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for i in 0..N {
        for j in 0..N {
            if let Ok(p) = s.point(d.node_x(i, N), d.node_y(j, N)) {
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
        }
    }
    let diag = (hi - lo).norm();
    if diag.is_finite() && diag > 0.0 {
        diag
    } else {
        1.0
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DefinitionError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("expression `{key}`: {source}")]
    Parse {
        key: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("domain must satisfy X_lo < X_hi and Y_lo < Y_hi with finite bounds")]
    BadDomain,
}

/// Surface given by three expressions in `X`, `Y`.
#[derive(Debug, Clone)]
pub struct ParametricSurface {
    pub name: String,
    pub x_expr: Expr,
    pub y_expr: Expr,
    pub z_expr: Expr,
    pub domain: Domain,
    scale: OnceLock<f64>,
}

impl ParametricSurface {
    pub fn new(name: impl Into<String>, x: Expr, y: Expr, z: Expr, domain: Domain) -> Self {
        ParametricSurface {
            name: name.into(),
            x_expr: x,
            y_expr: y,
            z_expr: z,
            domain,
            scale: OnceLock::new(),
        }
    }

    pub fn from_strs(
        name: impl Into<String>,
        x: &str,
        y: &str,
        z: &str,
        domain: Domain,
    ) -> Result<Self, DefinitionError> {
        let p = |key: &'static str, src: &str| {
            parse(src).map_err(|source| DefinitionError::Parse { key, source })
        };
        Ok(Self::new(name, p("x", x)?, p("y", y)?, p("z", z)?, domain))
    }

    /// Reads a surface definition:
    ///
    /// ```text
    /// # keys x, y, z are required; name and domain are optional
    /// name   = cone
    /// x      = X*sin(2*pi*Y)
    /// y      = X*cos(2*pi*Y)
    /// z      = X
    /// domain = 0.001 1 0 1       # X_lo X_hi Y_lo Y_hi, default 0 1 0 1
    /// ```
    pub fn from_definition(text: &str) -> Result<Self, DefinitionError> {
        let kv = KvFile::parse(text)?;
        kv.restrict_to(&["name", "x", "y", "z", "domain"])?;
        Self::from_kv(&kv)
    }

    pub(crate) fn from_kv(kv: &KvFile) -> Result<Self, DefinitionError> {
        let domain = match kv.floats("domain", 4)? {
            Some(d) => Domain::new(d[0], d[1], d[2], d[3]).ok_or(DefinitionError::BadDomain)?,
            None => Domain::UNIT,
        };
        let name = kv
            .get("name")
            .map(|e| e.value.clone())
            .unwrap_or_else(|| "custom".to_string());
        Self::from_strs(
            name,
            &kv.require("x")?.value,
            &kv.require("y")?.value,
            &kv.require("z")?.value,
            domain,
        )
    }

    /// Definition text that [`ParametricSurface::from_definition`] reads back.
    pub fn to_definition(&self) -> String {
        format!(
            "name = {}\nx = {}\ny = {}\nz = {}\ndomain = {}\n",
            self.name, self.x_expr, self.y_expr, self.z_expr, self.domain
        )
    }

    pub fn with_domain(&self, domain: Domain) -> Self {
        Self::new(
            self.name.clone(),
            self.x_expr.clone(),
            self.y_expr.clone(),
            self.z_expr.clone(),
            domain,
        )
    }

    /// The same surface composed with `p -> rot * p + shift`, expressed as
    /// new expression trees.
    pub fn rigidly_moved(&self, rot: &Matrix3<f64>, shift: &Vec3) -> Self {
        let comps = [&self.x_expr, &self.y_expr, &self.z_expr];
        let row = |i: usize| {
            let mut acc = Expr::num(shift[i]);
            for (k, c) in comps.iter().enumerate() {
                let term = Expr::binary(BinOp::Mul, Expr::num(rot[(i, k)]), (*c).clone());
                acc = Expr::binary(BinOp::Add, acc, term);
            }
            acc
        };
        Self::new(
            format!("{}-moved", self.name),
            row(0),
            row(1),
            row(2),
            self.domain,
        )
    }
}

impl Surface for ParametricSurface {
    fn jet(&self, u: f64, v: f64) -> Result<SurfaceJet, SurfaceError> {
        let eval = |component: char, e: &Expr| {
            e.eval_jet(u, v).map_err(|source| SurfaceError::Eval {
                component,
                u,
                v,
                source,
            })
        };
        Ok(SurfaceJet::from_components([
            eval('x', &self.x_expr)?,
            eval('y', &self.y_expr)?,
            eval('z', &self.z_expr)?,
        ]))
    }

    fn domain(&self) -> Domain {
        self.domain
    }

    fn length_scale(&self) -> f64 {
        *self.scale.get_or_init(|| sampled_diagonal(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn definition_round_trip() {
        let text = "name = cone\nx = X*sin(2*pi*Y)\ny = X*cos(2*pi*Y)\nz = X\ndomain = 0.001 1 0 1\n";
        let s = ParametricSurface::from_definition(text).unwrap();
        assert_eq!(s.name, "cone");
        assert_eq!(s.domain.x_lo, 0.001);
        let back = ParametricSurface::from_definition(&s.to_definition()).unwrap();
        assert_eq!(back.x_expr, s.x_expr);
        assert_eq!(back.domain, s.domain);
        let j = s.jet(0.5, 0.25).unwrap();
        assert!((j.r - Vec3::new(0.5, 0.0, 0.5)).norm() < 1e-15);
        assert!((j.rv - Vec3::new(0.0, -PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn definition_errors() {
        assert!(matches!(
            ParametricSurface::from_definition("x = X\ny = Y\n"),
            Err(DefinitionError::Kv(KvError::Missing(_)))
        ));
        assert!(matches!(
            ParametricSurface::from_definition("x = X\ny = Y\nz = 0\ndomain = 1 0 0 1"),
            Err(DefinitionError::BadDomain)
        ));
        let err = ParametricSurface::from_definition("x = X\ny = Y +\nz = 0").unwrap_err();
        assert!(matches!(err, DefinitionError::Parse { key: "y", .. }));
        assert!(matches!(
            ParametricSurface::from_definition("x = X\ny = Y\nz = 0\ncolour = red"),
            Err(DefinitionError::Kv(KvError::UnknownKey { .. }))
        ));
    }

    #[test]
    fn plane_length_scale_is_domain_diagonal() {
        let s = ParametricSurface::from_strs("plane", "X", "Y", "0", Domain::UNIT).unwrap();
        assert!((s.length_scale() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rigid_motion_moves_jets() {
        let s = ParametricSurface::from_strs("t", "X*Y", "sin(X)", "Y^2", Domain::UNIT).unwrap();
        let rot = *nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).matrix();
        let shift = Vec3::new(1.0, -2.0, 0.5);
        let moved = s.rigidly_moved(&rot, &shift);
        let a = s.jet(0.3, 0.6).unwrap().moved(&rot, &shift);
        let b = moved.jet(0.3, 0.6).unwrap();
        assert!((a.r - b.r).norm() < 1e-14);
        assert!((a.ruv - b.ruv).norm() < 1e-14);
    }

    #[test]
    fn node_endpoints_are_exact() {
        let d = Domain::new(0.001, 0.999, 0.0, 1.0).unwrap();
        assert_eq!(d.node_x(0, 21), 0.001);
        assert_eq!(d.node_x(20, 21), 0.999);
        assert_eq!(d.node_y(10, 21), 0.5);
    }
}
