mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::{Matrix3, Rotation3, Vector3};
use plategrow::dsl::{Domain, Surface};
use plategrow::forms::{forms_at, gauss_codazzi_residual, FormsGrid};
use plategrow::grid::Grid2;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotating_surfaces_are_orthogonal_curvature_nets(
        (a, b, c, d, e) in rotating_params(),
        (x, y) in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let s = rotating(a, b, c, d, e);
        let f = forms_at(&s, x, y).unwrap();
        prop_assert!(f.f.abs() < 1e-12 * f.e.max(f.g));
        prop_assert!(f.m.abs() < 1e-12 * (f.l.abs() + f.n.abs() + 1.0));
    }

    #[test]
    fn forms_are_triple_products(
        (a, b, c, d, e) in rotating_params(),
        (x, y) in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let s = rotating(a, b, c, d, e);
        let j = s.jet(x, y).unwrap();
        let f = forms_at(&s, x, y).unwrap();
        let triple = |w: Vector3<f64>| w.dot(&j.ru.cross(&j.rv)) / f.delta;
        prop_assert!((f.l - triple(j.ruu)).abs() < 1e-12 * (1.0 + f.l.abs()));
        prop_assert!((f.m - triple(j.ruv)).abs() < 1e-12 * (1.0 + f.m.abs()));
        prop_assert!((f.n - triple(j.rvv)).abs() < 1e-12 * (1.0 + f.n.abs()));
        prop_assert!((f.delta * f.delta - (f.e * f.g - f.f * f.f)).abs() < 1e-10 * f.e * f.g);
    }

    #[test]
    fn forms_are_invariant_under_rigid_motion(
        axis in (-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64),
        angle in -3.0..3.0f64,
        shift in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        (x, y) in (0.05..0.95f64, 0.05..0.95f64),
    ) {
        let rot: Matrix3<f64> =
            Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(axis.0, axis.1, axis.2)), angle).into();
        let s = preset("helicoid");
        let moved = s.rigidly_moved(&rot, &Vector3::new(shift.0, shift.1, shift.2));
        let (f0, f1) = (forms_at(&s, x, y).unwrap(), forms_at(&moved, x, y).unwrap());
        for (p, q) in [(f0.e, f1.e), (f0.f, f1.f), (f0.g, f1.g), (f0.l, f1.l), (f0.m, f1.m), (f0.n, f1.n)] {
            prop_assert!((p - q).abs() < 1e-10 * (1.0 + p.abs()), "{p} vs {q}");
        }
        prop_assert!((rot * f0.normal - f1.normal).norm() < 1e-12);
    }
}

#[test]
fn cone_forms_match_the_rotating_formulas() {
    // f = X, g = X: E = 2, G = 4 pi^2 X^2, L = 0, N = 4 pi^2 X^2 / (X sqrt 2) up to orientation
    let s = preset("cone");
    let f = forms_at(&s, 0.4, 0.3).unwrap();
    assert!((f.e - 2.0).abs() < 1e-14);
    assert!((f.g - 4.0 * PI * PI * 0.16).abs() < 1e-12);
    assert!(f.l.abs() < 1e-14);
    assert!((f.n.abs() - 4.0 * PI * PI * 0.4 / 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn gauss_codazzi_holds_for_sampled_gallery_nets() {
    for name in ROTATING {
        let fg = FormsGrid::sample(&preset(name), 101, 101).unwrap();
        let r = gauss_codazzi_residual(&fg.grid).unwrap();
        assert!(r.max() <= 1e-4, "{name}: {r:?}");
    }
}

#[test]
fn gauss_codazzi_rejects_a_perturbed_torus() {
    let fg = FormsGrid::sample(&preset("torus"), 101, 101).unwrap();
    let mut bad: Grid2<_> = fg.grid.clone();
    for f in bad.data.iter_mut() {
        f.n += 0.1;
    }
    let r = gauss_codazzi_residual(&bad).unwrap();
    assert!(r.max() > 1e-2, "{r:?}");
}

#[test]
fn singular_points_are_reported() {
    let s = preset("cone").with_domain(Domain::UNIT);
    assert!(forms_at(&s, 0.0, 0.5).is_err());
    assert!(FormsGrid::sample(&s, 11, 11).is_err());
}
