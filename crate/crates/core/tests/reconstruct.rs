mod common;

use common::*;
use plategrow::dsl::Surface;
use plategrow::growth::{assemble_field, synthesize, GrowthComponent, GrowthField, NetTolerance};
use plategrow::reconstruct::{observed_orders, reconstruct, reconstruct_gated, Gates, ReconstructError};
use plategrow::reparam::{registry, ReparamOptions};

fn field_for(s: &dyn Surface, n: usize, params: [&'static str; 2]) -> GrowthField {
    let tol = NetTolerance::relative(1e-6, s.length_scale());
    assemble_field(synthesize(s, n, n, tol).unwrap(), 0.01, params).unwrap()
}

const OPEN: Gates = Gates {
    compatibility: f64::INFINITY,
    drift: f64::INFINITY,
};

#[test]
fn gallery_surfaces_are_rebuilt_from_their_growth() {
    for name in ["plane", "cone", "catenoid", "torus", "ellipsoid"] {
        let s = preset(name);
        let r = reconstruct(&field_for(&s, 101, ["X", "Y"]), &s).unwrap();
        assert!(r.max_deviation <= 1e-4, "{name}: {:e}", r.max_deviation);
        assert!(r.motion.rotation.determinant() > 0.0);
    }
}

#[test]
fn reconstruction_error_falls_at_second_order_or_better() {
    for name in ["cone", "catenoid", "torus"] {
        let s = preset(name);
        let errs: Vec<f64> = [26, 51, 101]
            .iter()
            .map(|&n| reconstruct_gated(&field_for(&s, n, ["X", "Y"]), &s, OPEN).unwrap().max_deviation)
            .collect();
        let orders = observed_orders(&errs);
        assert!(orders.iter().all(|p| *p >= 2.0), "{name}: {errs:?} -> {orders:?}");
    }
}

#[test]
fn helicoid_patch_is_rebuilt() {
    let built = registry()
        .get("curvature-lines")
        .unwrap()
        .build(helicoid(), &ReparamOptions { nx: 41, ny: 41, seed: (0.5, 0.5) })
        .unwrap();
    let s = built.surface.as_ref();
    let r = reconstruct(&field_for(s, 41, ["S", "T"]), s).unwrap();
    assert!(r.max_deviation <= 1e-4, "{:e}", r.max_deviation);
}

#[test]
fn incompatible_growth_is_refused() {
    let s = preset("torus");
    let bad = field_for(&s, 101, ["X", "Y"]).perturbed(GrowthComponent::L2_1, 1.1);
    match reconstruct(&bad, &s) {
        Err(ReconstructError::Incompatible { residual, .. }) => assert!(residual > 1e-2),
        other => panic!("{:?}", other.map(|r| r.max_deviation)),
    }
}
