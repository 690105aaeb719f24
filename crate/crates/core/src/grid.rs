//! Uniform parameter grids and finite-difference stencils on them.

use crate::dsl::Domain;

/// Values on an `nx x ny` node grid. Index `(i, j)` is node
/// `(domain.node_x(i, nx), domain.node_y(j, ny))`; storage is row-major in `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
    pub data: Vec<T>,
}

impl<T> Grid2<T> {
    pub fn from_fn(nx: usize, ny: usize, domain: Domain, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f(i, j));
            }
        }
        Grid2 { nx, ny, domain, data }
    }

    pub fn try_from_fn<E>(
        nx: usize,
        ny: usize,
        domain: Domain,
        mut f: impl FnMut(usize, usize) -> Result<T, E>,
    ) -> Result<Self, E> {
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f(i, j)?);
            }
        }
        Ok(Grid2 { nx, ny, domain, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[j * self.nx + i]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[j * self.nx + i]
    }

    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (self.domain.node_x(i, self.nx), self.domain.node_y(j, self.ny))
    }

    pub fn hx(&self) -> f64 {
        self.domain.width() / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.domain.height() / (self.ny - 1) as f64
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid2<U> {
        Grid2 {
            nx: self.nx,
            ny: self.ny,
            domain: self.domain,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Iterates `(i, j, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let nx = self.nx;
        self.data.iter().enumerate().map(move |(k, v)| (k % nx, k / nx, v))
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` from samples at
/// `x`, by Fornberg's recursion. `w[d][k]` multiplies `f(x[k])`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Precomputed stencils for first and second derivatives on `n` equispaced
/// samples. Interior nodes use centred stencils of `2w + 1` points; nodes
/// closer than `w` to an end use one-sided stencils of the same width.
#[derive(Debug, Clone)]
pub struct Differ {
    n: usize,
    half: usize,
    /// Per node: first sample index, then weights for d/ds and d2/ds2.
    rows: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

/// Default stencil half-width (nine-point, eighth order in the interior).
pub const HALF_WIDTH: usize = 4;

impl Differ {
    /// Returns `None` if `n < 3`.
    pub fn new(n: usize, h: f64) -> Option<Differ> {
        Self::with_half_width(n, h, HALF_WIDTH)
    }

    pub fn with_half_width(n: usize, h: f64, half: usize) -> Option<Differ> {
        if n < 3 {
            return None;
        }
        let half = half.min((n - 1) / 2).max(1);
        let width = (2 * half + 1).min(n);
        let rows = (0..n)
            .map(|k| {
                let start = k.saturating_sub(half).min(n - width);
                let xs: Vec<f64> = (start..start + width).map(|p| p as f64).collect();
                let w = fornberg_weights(k as f64, &xs, 2);
                let d1 = w[1].iter().map(|c| c / h).collect();
                let d2 = w[2].iter().map(|c| c / (h * h)).collect();
                (start, d1, d2)
            })
            .collect();
        Some(Differ { n, half, rows })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Nodes closer than this to an end have no centred stencil.
    pub fn half_width(&self) -> usize {
        self.half
    }

    pub fn is_interior(&self, k: usize) -> bool {
        k >= self.half && k + self.half < self.n
    }

    /// First derivative at node `k` of the samples `f(0..n)`. Samples are
    /// taken relative to `f(k)` so constants differentiate to exactly zero.
    pub fn d1(&self, k: usize, f: impl Fn(usize) -> f64) -> f64 {
        let (s, w, _) = &self.rows[k];
        let fk = f(k);
        w.iter().enumerate().map(|(p, c)| c * (f(s + p) - fk)).sum()
    }

    pub fn d2(&self, k: usize, f: impl Fn(usize) -> f64) -> f64 {
        let (s, _, w) = &self.rows[k];
        let fk = f(k);
        w.iter().enumerate().map(|(p, c)| c * (f(s + p) - fk)).sum()
    }
}

/// Partial derivatives of a scalar grid along each axis.
#[derive(Debug, Clone)]
pub struct GridDiffer {
    pub x: Differ,
    pub y: Differ,
}

impl GridDiffer {
    pub fn new<T>(grid: &Grid2<T>) -> Option<GridDiffer> {
        Some(GridDiffer {
            x: Differ::new(grid.nx, grid.hx())?,
            y: Differ::new(grid.ny, grid.hy())?,
        })
    }

    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        self.x.is_interior(i) && self.y.is_interior(j)
    }

    pub fn dx(&self, g: &Grid2<f64>, i: usize, j: usize) -> f64 {
        self.x.d1(i, |p| *g.get(p, j))
    }

    pub fn dy(&self, g: &Grid2<f64>, i: usize, j: usize) -> f64 {
        self.y.d1(j, |q| *g.get(i, q))
    }

    pub fn dxx(&self, g: &Grid2<f64>, i: usize, j: usize) -> f64 {
        self.x.d2(i, |p| *g.get(p, j))
    }

    pub fn dyy(&self, g: &Grid2<f64>, i: usize, j: usize) -> f64 {
        self.y.d2(j, |q| *g.get(i, q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_centred_weights() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for k in 0..5 {
            assert!((w[1][k] - d1[k]).abs() < 1e-14);
            assert!((w[2][k] - d2[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomials_are_differentiated_exactly() {
        let n = 11;
        let h = 0.1;
        let d = Differ::new(n, h).unwrap();
        let f = |p: usize| {
            let x = p as f64 * h;
            x.powi(5) - 2.0 * x * x
        };
        for k in 0..n {
            let x = k as f64 * h;
            assert!((d.d1(k, f) - (5.0 * x.powi(4) - 4.0 * x)).abs() < 1e-9, "k={k}");
            assert!((d.d2(k, f) - (20.0 * x.powi(3) - 4.0)).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn small_grids_shrink_the_stencil() {
        assert!(Differ::new(2, 1.0).is_none());
        let d = Differ::new(3, 0.5).unwrap();
        assert_eq!(d.half_width(), 1);
        assert!(d.is_interior(1));
        assert!(!d.is_interior(0));
        let f = |p: usize| (p as f64 * 0.5).powi(2);
        assert!((d.d1(0, f) - 0.0).abs() < 1e-14);
        assert!((d.d2(2, f) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_layout() {
        let g = Grid2::from_fn(3, 2, Domain::UNIT, |i, j| 10 * j + i);
        assert_eq!(*g.get(2, 1), 12);
        assert_eq!(g.coords(2, 1), (1.0, 1.0));
        let order: Vec<_> = g.iter().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(order[..4], [(0, 0), (1, 0), (2, 0), (0, 1)]);
    }
}
