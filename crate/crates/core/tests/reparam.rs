mod common;

use std::sync::Arc;

use common::*;
use plategrow::dsl::Surface;
use plategrow::forms::FormsGrid;
use plategrow::reparam::{build_map, registry, ReparamOptions, Reparametrization};

const SEED: (f64, f64) = (0.5, 0.5);

#[test]
fn helicoid_coordinates_match_the_closed_form() {
    let rep = Reparametrization::new(helicoid(), 41, 41, SEED).unwrap();
    let mut err: f64 = 0.0;
    for i in 0..41 {
        for j in 0..41 {
            let (x, y) = (i as f64 / 40.0, j as f64 / 40.0);
            let (s, t, _) = rep.forward(x, y).unwrap();
            let (se, te) = helicoid_st(x, y, SEED);
            err = err.max((s - se).abs()).max((t - te).abs());
        }
    }
    assert!(err <= 1e-6, "forward error {err:e}");
}

#[test]
fn helicoid_inverse_and_its_derivatives() {
    let rep = Reparametrization::new(helicoid(), 41, 41, SEED).unwrap();
    let map = build_map(&rep, 41, 41).unwrap();
    let p = map.patch;
    assert!(p.contains(0.0, 0.0), "{p:?}");
    assert!(map.min_jacobian() > 0.0);
    let (mut e0, mut e2): (f64, f64) = (0.0, 0.0);
    for i in 0..9 {
        for j in 0..9 {
            let (s, t) = (p.node_x(i, 9), p.node_y(j, 9));
            let inv = rep.inverse(s, t).unwrap();
            let (x, y) = helicoid_xy(s, t, SEED);
            e0 = e0.max((inv.xy[0] - x).abs()).max((inv.xy[1] - y).abs());
            // X = sinh(4 pi u) / 2 pi with u = (S - T)/2 + const; Y = (S + T)/2 + const
            let u = 0.5 * (s - t) + helicoid_a(SEED.0);
            let c = (4.0 * std::f64::consts::PI * u).cosh();
            let xss = 2.0 * std::f64::consts::PI * (4.0 * std::f64::consts::PI * u).sinh();
            for (got, want) in [
                (inv.d_s[0], c),
                (inv.d_t[0], -c),
                (inv.d_s[1], 0.5),
                (inv.d_t[1], 0.5),
                (inv.d_ss[0], xss),
                (inv.d_st[0], -xss),
                (inv.d_tt[0], xss),
                (inv.d_ss[1], 0.0),
            ] {
                e2 = e2.max((got - want).abs());
            }
        }
    }
    assert!(e0 <= 1e-9, "inverse error {e0:e}");
    assert!(e2 <= 1e-7, "derivative error {e2:e}");
}

#[test]
fn round_trip_through_the_map() {
    let rep = Reparametrization::new(helicoid(), 41, 41, SEED).unwrap();
    for (x, y) in [(0.45, 0.5), (0.55, 0.52), (0.5, 0.45)] {
        let (s, t, _) = rep.forward(x, y).unwrap();
        let inv = rep.inverse(s, t).unwrap();
        assert!((inv.xy[0] - x).abs() < 1e-9 && (inv.xy[1] - y).abs() < 1e-9, "{x} {y} -> {:?}", inv.xy);
    }
}

#[test]
fn pulled_back_helicoid_is_a_curvature_net() {
    let built = registry()
        .get("curvature-lines")
        .unwrap()
        .build(helicoid(), &ReparamOptions { nx: 41, ny: 41, seed: SEED })
        .unwrap();
    let s = built.surface.as_ref();
    let fg = FormsGrid::sample(s, 21, 21).unwrap();
    let scale = fg.scale;
    assert!(fg.max_abs_f() <= 1e-6 * scale * scale, "F* {:e}", fg.max_abs_f());
    assert!(fg.max_abs_m() <= 1e-6 * scale, "M* {:e}", fg.max_abs_m());
    assert!(!fg.needs_reparam_at(1e-9));
}

#[test]
fn pulled_back_points_lie_on_the_helicoid_at_every_sampling_grid() {
    let mut errs = Vec::new();
    for n in [11, 21, 41] {
        let built = registry()
            .get("curvature-lines")
            .unwrap()
            .build(helicoid(), &ReparamOptions { nx: n, ny: n, seed: SEED })
            .unwrap();
        let s = built.surface.as_ref();
        let d = s.domain();
        let mut e: f64 = 0.0;
        for (u, v) in interior_nodes(d, 5) {
            let (x, y) = helicoid_xy(u, v, SEED);
            let want = preset("helicoid").point(x, y).unwrap();
            e = e.max((s.point(u, v).unwrap() - want).norm());
        }
        errs.push(e);
    }
    assert!(errs.iter().all(|e| *e < 1e-8), "{errs:?}");
}

#[test]
fn rotating_surfaces_need_no_reparametrization() {
    for name in ROTATING {
        let fg = FormsGrid::sample(&preset(name), 41, 41).unwrap();
        assert!(!fg.needs_reparam(), "{name}");
    }
    assert!(FormsGrid::sample(&preset("helicoid"), 11, 11).unwrap().needs_reparam());
}

#[test]
fn identity_strategy_only_shifts() {
    let torus: Arc<dyn Surface> = Arc::new(preset("torus"));
    let r = registry()
        .get("identity")
        .unwrap()
        .build(torus.clone(), &ReparamOptions { nx: 5, ny: 5, seed: (0.25, 0.5) })
        .unwrap();
    let p = r.surface.point(0.1, -0.2).unwrap();
    assert!((p - torus.point(0.35, 0.3).unwrap()).norm() < 1e-15);
    assert!(r.tracing.is_none());
}

#[test]
fn seeds_outside_the_domain_are_rejected() {
    assert!(Reparametrization::new(helicoid(), 11, 11, (1.5, 0.5)).is_err());
}
