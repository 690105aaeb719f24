#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use plategrow::dsl::{Domain, ParametricSurface, Surface};
use plategrow::gallery;
use proptest::prelude::*;

pub const ROTATING: [&str; 4] = ["ellipsoid", "cone", "catenoid", "torus"];
pub const GALLERY: [&str; 5] = ["ellipsoid", "cone", "catenoid", "torus", "helicoid"];

pub fn preset(name: &str) -> ParametricSurface {
    gallery::gallery(name).unwrap()
}

pub fn helicoid() -> Arc<dyn Surface> {
    Arc::new(preset("helicoid"))
}

/// `arcsinh(2 pi X) / (4 pi)`.
pub fn helicoid_a(x: f64) -> f64 {
    (2.0 * PI * x).asinh() / (4.0 * PI)
}

/// Closed-form curvature-line coordinates of the helicoid, zero at `seed`.
pub fn helicoid_st(x: f64, y: f64, seed: (f64, f64)) -> (f64, f64) {
    let da = helicoid_a(x) - helicoid_a(seed.0);
    let dy = y - seed.1;
    (da + dy, -da + dy)
}

/// Analytic preimage of seed-relative `(S, T)`.
pub fn helicoid_xy(s: f64, t: f64, seed: (f64, f64)) -> (f64, f64) {
    let u = 0.5 * (s - t) + helicoid_a(seed.0);
    ((4.0 * PI * u).sinh() / (2.0 * PI), 0.5 * (s + t) + seed.1)
}

/// Nodes of an `n` by `n` grid strictly inside `d`, one spacing in from the
/// edges.
pub fn interior_nodes(d: Domain, n: usize) -> Vec<(f64, f64)> {
    let m = n + 2;
    let mut out = Vec::with_capacity(n * n);
    for j in 1..=n {
        for i in 1..=n {
            out.push((d.node_x(i, m), d.node_y(j, m)));
        }
    }
    out
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Rotating surface `(f cos 2piY, f sin 2piY, g)` with positive `f` and
/// monotone `g`.
pub fn rotating(a: f64, b: f64, c: f64, d: f64, e: f64) -> ParametricSurface {
    let f = format!("({a} + {b}*X + {c}*sin(pi*X))");
    let g = format!("({d}*X + {e}*cos(pi*X))");
    ParametricSurface::from_strs(
        "rotating",
        &format!("{f}*cos(2*pi*Y)"),
        &format!("{f}*sin(2*pi*Y)"),
        &g,
        Domain::UNIT,
    )
    .unwrap()
}

pub fn rotating_params() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (1.0..2.0f64, -0.5..0.5f64, -0.3..0.3f64, 0.5..2.0f64, -0.1..0.1f64)
}

/// Random smooth expressions; every function is wrapped so its argument
/// stays inside its domain for any real input.
pub fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("X".to_string()),
        Just("Y".to_string()),
        Just("pi".to_string()),
        (1u32..40).prop_map(|k| format!("{}", k as f64 / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}/(2 + sin({b}))")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("tan(tanh({a}))")),
            inner.clone().prop_map(|a| format!("sinh(tanh({a}))")),
            inner.clone().prop_map(|a| format!("cosh(2*tanh({a}))")),
            inner.clone().prop_map(|a| format!("sech({a})")),
            inner.clone().prop_map(|a| format!("exp(tanh({a}))")),
            inner.clone().prop_map(|a| format!("ln(2 + cos({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(3/2 + sin({a}))")),
            inner.clone().prop_map(|a| format!("abs(2 + cos({a}))")),
            inner.clone().prop_map(|a| format!("arcsinh({a})")),
            inner.clone().prop_map(|a| format!("arcsin(tanh({a})/2)")),
            inner.clone().prop_map(|a| format!("arccos(tanh({a})/2)")),
            inner.clone().prop_map(|a| format!("(2 + cos({a}))^1.5")),
            inner.clone().prop_map(|a| format!("tanh({a})^3")),
        ]
    })
}
