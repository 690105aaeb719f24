//! First-order forward differentiation in two parameters, for scalars and
//! 3-vectors.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::dsl::Vec3;

/// A scalar with its `X` and `Y` partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D {
    pub v: f64,
    pub x: f64,
    pub y: f64,
}

/// A vector with its `X` and `Y` partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DV {
    pub v: Vec3,
    pub x: Vec3,
    pub y: Vec3,
}

impl D {
    pub fn new(v: f64, x: f64, y: f64) -> D {
        D { v, x, y }
    }

    pub fn constant(v: f64) -> D {
        D { v, x: 0.0, y: 0.0 }
    }

    fn chain(self, f: f64, df: f64) -> D {
        D {
            v: f,
            x: df * self.x,
            y: df * self.y,
        }
    }

    pub fn sqrt(self) -> D {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }

    pub fn powi(self, n: i32) -> D {
        self.chain(self.v.powi(n), n as f64 * self.v.powi(n - 1))
    }

    pub fn recip(self) -> D {
        self.chain(1.0 / self.v, -1.0 / (self.v * self.v))
    }
}

impl Add for D {
    type Output = D;
    fn add(self, o: D) -> D {
        D::new(self.v + o.v, self.x + o.x, self.y + o.y)
    }
}

impl Sub for D {
    type Output = D;
    fn sub(self, o: D) -> D {
        D::new(self.v - o.v, self.x - o.x, self.y - o.y)
    }
}

impl Mul for D {
    type Output = D;
    fn mul(self, o: D) -> D {
        D::new(self.v * o.v, self.x * o.v + self.v * o.x, self.y * o.v + self.v * o.y)
    }
}

impl Div for D {
    type Output = D;
    fn div(self, o: D) -> D {
        self * o.recip()
    }
}

impl Mul<DV> for D {
    type Output = DV;
    fn mul(self, o: DV) -> DV {
        DV {
            v: o.v * self.v,
            x: o.x * self.v + o.v * self.x,
            y: o.y * self.v + o.v * self.y,
        }
    }
}

impl DV {
    pub fn new(v: Vec3, x: Vec3, y: Vec3) -> DV {
        DV { v, x, y }
    }

    pub fn cross(&self, o: &DV) -> DV {
        DV {
            v: self.v.cross(&o.v),
            x: self.x.cross(&o.v) + self.v.cross(&o.x),
            y: self.y.cross(&o.v) + self.v.cross(&o.y),
        }
    }

    pub fn dot(&self, o: &DV) -> D {
        D::new(
            self.v.dot(&o.v),
            self.x.dot(&o.v) + self.v.dot(&o.x),
            self.y.dot(&o.v) + self.v.dot(&o.y),
        )
    }
}

impl Add for DV {
    type Output = DV;
    fn add(self, o: DV) -> DV {
        DV::new(self.v + o.v, self.x + o.x, self.y + o.y)
    }
}

impl Sub for DV {
    type Output = DV;
    fn sub(self, o: DV) -> DV {
        DV::new(self.v - o.v, self.x - o.x, self.y - o.y)
    }
}

impl Neg for DV {
    type Output = DV;
    fn neg(self) -> DV {
        DV::new(-self.v, -self.x, -self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        // a = X^2 Y, b = X + Y at (2, 3)
        let a = D::new(12.0, 12.0, 4.0);
        let b = D::new(5.0, 1.0, 1.0);
        let q = a / b;
        assert!((q.v - 2.4).abs() < 1e-15);
        assert!((q.x - (12.0 * 5.0 - 12.0) / 25.0).abs() < 1e-14);
        assert!((q.y - (4.0 * 5.0 - 12.0) / 25.0).abs() < 1e-14);
        let r = b.sqrt();
        assert!((r.x - 0.5 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cross_rule() {
        // u = (X, 1, 0), w = (0, Y, 1): u x w = (1, -X, X Y)
        let u = DV::new(Vec3::new(2.0, 1.0, 0.0), Vec3::x(), Vec3::zeros());
        let w = DV::new(Vec3::new(0.0, 3.0, 1.0), Vec3::zeros(), Vec3::y());
        let c = u.cross(&w);
        assert_eq!(c.v, Vec3::new(1.0, -2.0, 6.0));
        assert_eq!(c.x, Vec3::new(0.0, -1.0, 3.0));
        assert_eq!(c.y, Vec3::new(0.0, 0.0, 2.0));
    }
}
