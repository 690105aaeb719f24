//! Jets against finite differences, and the parser against its printer.

mod common;

use common::expr;
use plategrow::dsl::{parse, Expr};
use proptest::prelude::*;

const STEP: f64 = 1e-5;
const REL: f64 = 1e-6;

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.0..1.0f64, -1.0..1.0f64)
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= REL * got.abs().max(want.abs()).max(1.0)
}

fn central(f: impl Fn(f64) -> f64, at: f64) -> f64 {
    (f(at + STEP) - f(at - STEP)) / (2.0 * STEP)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    // First partials are differenced from values; second partials from the
    // (already checked) first partials, which keeps rounding at the 1e-11
    // level instead of the 1e-6 level of a value-based second difference.
    #[test]
    fn jets_match_central_differences(src in expr(), (x, y) in point()) {
        let e = parse(&src).unwrap();
        let j = e.eval_jet(x, y).unwrap();
        let val = |x: f64, y: f64| e.eval(x, y).unwrap();
        let jx = |x: f64, y: f64| e.eval_jet(x, y).unwrap().dx;
        let jy = |x: f64, y: f64| e.eval_jet(x, y).unwrap().dy;
        let checks = [
            ("dx", j.dx, central(|t| val(t, y), x)),
            ("dy", j.dy, central(|t| val(x, t), y)),
            ("dxx", j.dxx, central(|t| jx(t, y), x)),
            ("dxy", j.dxy, central(|t| jx(x, t), y)),
            ("dyx", j.dxy, central(|t| jy(t, y), x)),
            ("dyy", j.dyy, central(|t| jy(x, t), y)),
        ];
        for (name, got, want) in checks {
            prop_assert!(close(got, want), "{name} of {src} at ({x}, {y}): jet {got}, differences {want}");
        }
    }

    #[test]
    fn printing_then_parsing_gives_the_same_tree(src in expr()) {
        let e = parse(&src).unwrap();
        let printed = e.to_string();
        let again: Expr = parse(&printed).unwrap();
        prop_assert_eq!(&again, &e, "printed as {}", printed);
    }
}

#[test]
fn spec_example_cosh() {
    let e = parse("cosh(pi*X - pi/2)").unwrap();
    let j = e.eval_jet(0.25, 0.0).unwrap();
    let fd = central(|t| e.eval(t, 0.0).unwrap(), 0.25);
    assert!(((j.dx - fd) / j.dx).abs() < 1e-8);
    let pi = std::f64::consts::PI;
    assert!((j.dxx - pi * pi * (pi / 4.0 - pi / 2.0).cosh()).abs() < 1e-12);
}
