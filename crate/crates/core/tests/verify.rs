mod common;

use common::*;
use plategrow::dsl::Surface;
use plategrow::growth::{assemble_field, growth_at, synthesize, GrowthComponent, GrowthField, NetTolerance};
use plategrow::reparam::{registry, ReparamOptions};
use plategrow::verify::{bending_brackets, verify, PlateState, StressTolerance};
use proptest::prelude::*;

fn field_for(s: &dyn Surface, n: usize, params: [&'static str; 2]) -> GrowthField {
    let tol = NetTolerance::relative(1e-6, s.length_scale());
    assemble_field(synthesize(s, n, n, tol).unwrap(), 0.01, params).unwrap()
}

#[test]
fn rotating_gallery_surfaces_are_certified_stress_free() {
    for name in ROTATING {
        let s = preset(name);
        let report = verify(&s, &field_for(&s, 41, ["X", "Y"]), 1.0).unwrap();
        let fails = report.summary.failures(&StressTolerance::default());
        assert!(fails.is_empty(), "{name}: {fails:?}\n{}", report.summary);
    }
}

#[test]
fn helicoid_in_curvature_line_coordinates_is_certified_stress_free() {
    let built = registry()
        .get("curvature-lines")
        .unwrap()
        .build(helicoid(), &ReparamOptions { nx: 31, ny: 31, seed: (0.5, 0.5) })
        .unwrap();
    let s = built.surface.as_ref();
    let report = verify(s, &field_for(s, 31, ["S", "T"]), 1.0).unwrap();
    let fails = report.summary.failures(&StressTolerance::default());
    assert!(fails.is_empty(), "{fails:?}\n{}", report.summary);
}

#[test]
fn one_percent_growth_errors_are_detected() {
    let s = preset("torus");
    let field = field_for(&s, 41, ["X", "Y"]);
    for c in GrowthComponent::ALL {
        let r = verify(&s, &field.perturbed(c, 1.01), 1.0).unwrap().summary;
        let hit = match c {
            GrowthComponent::L1_0 | GrowthComponent::L2_0 => r.s0,
            GrowthComponent::L1_1 | GrowthComponent::L2_1 => r.s1,
        };
        assert!(hit > 1e-4, "{}: {r}", c.name());
        assert!(r.traction > 1e-4, "{}: {r}", c.name());
    }
}

#[test]
fn wrong_bending_growth_is_large() {
    let s = preset("torus");
    let field = field_for(&s, 21, ["X", "Y"]);
    let r = verify(&s, &field.perturbed(GrowthComponent::L1_1, 0.0), 1.0).unwrap().summary;
    assert!(r.s1 >= 0.1, "{r}");
    let r = verify(&s, &field.perturbed(GrowthComponent::L1_0, 1.01), 1.0).unwrap().summary;
    assert!(r.s0 > 1e-3 && r.plate > 1e-4, "{r}");
}

#[test]
fn stresses_scale_with_the_modulus() {
    let s = preset("catenoid");
    let field = field_for(&s, 21, ["X", "Y"]).perturbed(GrowthComponent::L2_1, 1.1);
    let a = verify(&s, &field, 1.0).unwrap().summary;
    let b = verify(&s, &field, 3.0).unwrap().summary;
    for (x, y) in [(a.s0, b.s0), (a.s1, b.s1), (a.traction, b.traction)] {
        assert!((3.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-300), "{x} {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn thickness_identity_holds_on_random_rotating_surfaces(
        (a, b, c, d, e) in rotating_params(),
        (x, y) in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let s = rotating(a, b, c, d, e);
        let g = growth_at(&s, x, y, NetTolerance::for_surface(&s)).unwrap();
        let st = PlateState::new(&s.jet(x, y).unwrap(), &g, 1.0, 0.01, (x, y)).unwrap();
        prop_assert!(st.thickness_identity_residual() <= 1e-8);
        let f = plategrow::forms::forms_at(&s, x, y).unwrap();
        let (b1, b2) = bending_brackets(&f, &g);
        prop_assert!(b1.abs() <= 1e-9 && b2.abs() <= 1e-9, "{b1} {b2}");
        prop_assert!(st.s0().amax() <= 1e-10 && st.s1().amax() <= 1e-8);
    }
}
