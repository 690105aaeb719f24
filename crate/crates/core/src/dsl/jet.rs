//! Second-order Taylor jets in two variables.
//!
//! A [`Jet2`] carries a value together with its first and second partial
//! derivatives with respect to the two surface parameters. Arithmetic on jets
//! applies the product, quotient and chain rules exactly, so evaluating an
//! expression tree on jets yields derivatives that are exact up to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value and partial derivatives up to order two w.r.t. `(X, Y)`.
///
/// The mixed partial is stored once; Schwarz symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Jet2 {
            v,
            dx: 0.0,
            dy: 0.0,
            dxx: 0.0,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    /// The first parameter as a jet.
    pub const fn var_x(x: f64) -> Self {
        Jet2 {
            v: x,
            dx: 1.0,
            dy: 0.0,
            dxx: 0.0,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    /// The second parameter as a jet.
    pub const fn var_y(y: f64) -> Self {
        Jet2 {
            v: y,
            dx: 0.0,
            dy: 1.0,
            dxx: 0.0,
            dxy: 0.0,
            dyy: 0.0,
        }
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.v`.
    #[inline]
    pub fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        Jet2 {
            v: f,
            dx: df * self.dx,
            dy: df * self.dy,
            dxx: d2f * self.dx * self.dx + df * self.dxx,
            dxy: d2f * self.dx * self.dy + df * self.dxy,
            dyy: d2f * self.dy * self.dy + df * self.dyy,
        }
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Jet2 {
            v: k * self.v,
            dx: k * self.dx,
            dy: k * self.dy,
            dxx: k * self.dxx,
            dxy: k * self.dxy,
            dyy: k * self.dyy,
        }
    }

    /// `1 / self`. The caller guarantees `self.v != 0`.
    #[inline]
    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    /// Requires `cos(self.v) != 0`.
    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.chain(t, sech2, -2.0 * t * sech2)
    }

    pub fn sech(self) -> Self {
        let s = 1.0 / self.v.cosh();
        let t = self.v.tanh();
        // d/du sech = -sech tanh, d2/du2 sech = sech (tanh^2 - sech^2)
        self.chain(s, -s * t, s * (t * t - s * s))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Requires `self.v > 0`.
    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    /// Requires `self.v > 0`.
    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    /// Requires `self.v != 0`; the sign is locally constant away from zero.
    pub fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn asinh(self) -> Self {
        let q = 1.0 + self.v * self.v;
        let d = 1.0 / q.sqrt();
        self.chain(self.v.asinh(), d, -self.v * d / q)
    }

    /// Requires `|self.v| < 1`.
    pub fn asin(self) -> Self {
        let q = 1.0 - self.v * self.v;
        let d = 1.0 / q.sqrt();
        self.chain(self.v.asin(), d, self.v * d / q)
    }

    /// Requires `|self.v| < 1`.
    pub fn acos(self) -> Self {
        let q = 1.0 - self.v * self.v;
        let d = 1.0 / q.sqrt();
        self.chain(self.v.acos(), -d, -self.v * d / q)
    }

    /// `self^p` for a constant exponent. For non-integer `p` the caller
    /// guarantees `self.v > 0`.
    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Jet2::constant(1.0);
        }
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            let n = p as i32;
            let f = self.v.powi(n);
            let df = p * self.v.powi(n - 1);
            let d2f = p * (p - 1.0) * self.v.powi(n - 2);
            // powi(n - 2) at zero is infinite for n = 1 even though the
            // coefficient p(p-1) vanishes.
            let d2f = if n == 1 { 0.0 } else { d2f };
            self.chain(f, df, d2f)
        } else {
            let f = self.v.powf(p);
            self.chain(f, p * f / self.v, p * (p - 1.0) * f / (self.v * self.v))
        }
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    #[inline]
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v - o.v,
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            dxx: self.dxx - o.dxx,
            dxy: self.dxy - o.dxy,
            dyy: self.dyy - o.dyy,
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(self, k: f64) -> Jet2 {
        Jet2 { v: self.v + k, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bilinear_product() {
        let j = Jet2::var_x(2.0) * Jet2::var_y(3.0);
        assert_eq!(j.v, 6.0);
        assert_eq!(j.dx, 3.0);
        assert_eq!(j.dy, 2.0);
        assert_eq!(j.dxy, 1.0);
        assert_eq!(j.dxx, 0.0);
        assert_eq!(j.dyy, 0.0);
    }

    #[test]
    fn quotient_rule() {
        // x / y at (1, 2): d/dx = 1/y, d/dy = -x/y^2, d2/dy2 = 2x/y^3, d2/dxdy = -1/y^2
        let j = Jet2::var_x(1.0) / Jet2::var_y(2.0);
        assert_relative_eq!(j.dx, 0.5);
        assert_relative_eq!(j.dy, -0.25);
        assert_relative_eq!(j.dyy, 0.25);
        assert_relative_eq!(j.dxy, -0.25);
    }

    #[test]
    fn integer_power_at_zero() {
        let j = Jet2::var_x(0.0).powf(2.0);
        assert_eq!(j.v, 0.0);
        assert_eq!(j.dx, 0.0);
        assert_eq!(j.dxx, 2.0);
        let j = Jet2::var_x(0.0).powf(1.0);
        assert_eq!(j.dx, 1.0);
        assert_eq!(j.dxx, 0.0);
    }

    #[test]
    fn sech_matches_reciprocal_cosh() {
        let u = Jet2::var_x(0.3) * Jet2::var_y(1.7);
        let a = u.sech();
        let b = u.cosh().recip();
        for (p, q) in [
            (a.v, b.v),
            (a.dx, b.dx),
            (a.dy, b.dy),
            (a.dxx, b.dxx),
            (a.dxy, b.dxy),
            (a.dyy, b.dyy),
        ] {
            assert_relative_eq!(p, q, max_relative = 1e-14);
        }
    }
}
