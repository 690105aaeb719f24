//! Built-in target surfaces with known growth functions.
//!
//! Rotating surfaces are oriented so that `r_X x r_Y` gives the published
//! signs of the gradient growth; the torus and catenoid are therefore mirror
//! images of their textbook parametrizations.

use crate::dsl::{parse, Domain, EvalError, ParametricSurface};
use crate::registry::Registry;

/// Growth in closed form: expressions for `l1_0, l2_0, l1_1, l2_1` in the
/// closed form's own parameters, written `X` and `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub growth: [&'static str; 4],
    /// The closed form's parameters as expressions in the surface's `X`, `Y`.
    pub params: [&'static str; 2],
}

impl ClosedForm {
    /// `[l1_0, l2_0, l1_1, l2_1]` at closed-form parameters `(p, q)`.
    pub fn eval(&self, p: f64, q: f64) -> Result<[f64; 4], EvalError> {
        let mut out = [0.0; 4];
        for (o, src) in out.iter_mut().zip(self.growth) {
            *o = parse(src).expect("preset expressions parse").eval(p, q)?;
        }
        Ok(out)
    }

    /// Closed-form parameters of the surface point `(x, y)`.
    pub fn params_at(&self, x: f64, y: f64) -> Result<(f64, f64), EvalError> {
        let f = |s: &str| parse(s).expect("preset expressions parse").eval(x, y);
        Ok((f(self.params[0])?, f(self.params[1])?))
    }
}

pub trait Preset: Send + Sync {
    fn description(&self) -> &'static str;

    fn surface(&self, name: &str) -> ParametricSurface;

    fn closed_form(&self) -> Option<ClosedForm>;
}

/// A preset given by three coordinate expressions.
pub struct Table {
    pub description: &'static str,
    pub xyz: [&'static str; 3],
    pub domain: Domain,
    pub closed: Option<ClosedForm>,
}

impl Preset for Table {
    fn description(&self) -> &'static str {
        self.description
    }

    fn surface(&self, name: &str) -> ParametricSurface {
        let [x, y, z] = self.xyz;
        ParametricSurface::from_strs(name, x, y, z, self.domain).expect("preset expressions parse")
    }

    fn closed_form(&self) -> Option<ClosedForm> {
        self.closed
    }
}

const IDENTITY: [&str; 2] = ["X", "Y"];

/// Inward truncation at singular edges.
pub const EDGE_TRIM: f64 = 1e-3;

pub fn registry() -> Registry<dyn Preset> {
    let unit = Domain::UNIT;
    let mut r: Registry<dyn Preset> = Registry::new("gallery surface");
    r.register(
        "ellipsoid",
        Box::new(Table {
            description: "prolate spheroid of revolution, poles trimmed",
            xyz: ["sin(pi*X)*cos(2*pi*Y)", "sin(pi*X)*sin(2*pi*Y)", "2*cos(pi*X)"],
            domain: Domain::new(EDGE_TRIM, 1.0 - EDGE_TRIM, 0.0, 1.0).expect("valid domain"),
            closed: Some(ClosedForm {
                growth: [
                    "pi/sqrt(2)*sqrt(5 - 3*cos(2*pi*X))",
                    "2*pi*sin(pi*X)",
                    "4*pi/(5 - 3*cos(2*pi*X))",
                    "4*sqrt(2)*pi*sin(pi*X)/sqrt(5 - 3*cos(2*pi*X))",
                ],
                params: IDENTITY,
            }),
        }),
    )
    .register(
        "cone",
        Box::new(Table {
            description: "circular cone, apex trimmed",
            xyz: ["X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X"],
            domain: Domain::new(EDGE_TRIM, 1.0, 0.0, 1.0).expect("valid domain"),
            closed: Some(ClosedForm {
                growth: ["sqrt(2)", "2*pi*X", "0", "sqrt(2)*pi"],
                params: IDENTITY,
            }),
        }),
    )
    .register(
        "catenoid",
        Box::new(Table {
            description: "catenoid of neck radius 2",
            xyz: [
                "-2*cosh(pi*X - pi/2)*cos(2*pi*Y)",
                "2*cosh(pi*X - pi/2)*sin(2*pi*Y)",
                "pi*(2*X - 1)",
            ],
            domain: unit,
            closed: Some(ClosedForm {
                growth: [
                    "sqrt(2)*pi*sqrt(cosh(pi - 2*pi*X) + 1)",
                    "2*sqrt(2)*pi*sqrt(cosh(pi - 2*pi*X) + 1)",
                    "-pi*sech(pi/2 - pi*X)",
                    "2*pi*sech(pi/2 - pi*X)",
                ],
                params: IDENTITY,
            }),
        }),
    )
    .register(
        "torus",
        Box::new(Table {
            description: "ring torus with radii 1 and 1/2",
            xyz: [
                "(cos(2*pi*X) + 2)*cos(2*pi*Y)/2",
                "-(cos(2*pi*X) + 2)*sin(2*pi*Y)/2",
                "sin(2*pi*X)/2",
            ],
            domain: unit,
            closed: Some(ClosedForm {
                growth: ["pi", "pi*(2 + cos(2*pi*X))", "2*pi", "2*pi*cos(2*pi*X)"],
                params: IDENTITY,
            }),
        }),
    )
    .register(
        "helicoid",
        Box::new(Table {
            description: "helicoid, two turns; needs curvature-line coordinates",
            xyz: ["X*sin(4*pi*Y)", "X*cos(4*pi*Y)", "2*Y"],
            domain: unit,
            closed: Some(ClosedForm {
                growth: [
                    "sqrt(1 + cosh(4*pi*(X - Y)))",
                    "sqrt(1 + cosh(4*pi*(X - Y)))",
                    "-2*pi*sqrt((1 + cosh(4*pi*(X - Y)))*sech(2*pi*(X - Y))^4)",
                    "2*pi*sqrt((1 + cosh(4*pi*(X - Y)))*sech(2*pi*(X - Y))^4)",
                ],
                params: ["arcsinh(2*pi*X)/(4*pi) + Y", "-arcsinh(2*pi*X)/(4*pi) + Y"],
            }),
        }),
    )
    .register(
        "plane",
        Box::new(Table {
            description: "flat unit square",
            xyz: ["X", "Y", "0"],
            domain: unit,
            closed: Some(ClosedForm {
                growth: ["1", "1", "0", "0"],
                params: IDENTITY,
            }),
        }),
    );
    r
}

/// The preset surface called `name`.
pub fn gallery(name: &str) -> Result<ParametricSurface, crate::registry::UnknownName> {
    Ok(registry().get(name)?.surface(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Surface;
    use crate::forms::forms_at;
    use crate::growth::{growth_at, NetTolerance};

    #[test]
    fn rotating_presets_match_their_closed_forms() {
        for name in ["ellipsoid", "cone", "catenoid", "torus", "plane"] {
            let reg = registry();
            let p = reg.get(name).unwrap();
            let s = p.surface(name);
            let cf = p.closed_form().unwrap();
            let tol = NetTolerance::for_surface(&s);
            for (x, y) in [(0.2, 0.3), (0.55, 0.9), (0.8, 0.1)] {
                let g = growth_at(&s, x, y, tol).unwrap();
                let want = cf.eval(x, y).unwrap();
                let got = [g.l1_0, g.l2_0, g.l1_1, g.l2_1];
                for k in 0..4 {
                    assert!(
                        (got[k] - want[k]).abs() <= 1e-10 * want[k].abs().max(1.0),
                        "{name} component {k} at ({x}, {y}): {} vs {}",
                        got[k],
                        want[k]
                    );
                }
            }
        }
    }

    #[test]
    fn helicoid_needs_reparametrization() {
        let h = gallery("helicoid").unwrap();
        let f = forms_at(&h, 0.3, 0.2).unwrap();
        assert!(f.m.abs() > 1.0);
        assert_eq!(h.domain(), Domain::UNIT);
    }

    #[test]
    fn unknown_names_list_the_presets() {
        let e = gallery("sphere").unwrap_err().to_string();
        assert!(e.contains("sphere") && e.contains("helicoid") && e.contains("torus"), "{e}");
    }
}
