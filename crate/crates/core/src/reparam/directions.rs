//! Principal directions in the parameter plane.
//!
//! A direction `(c, s)` is principal when
//! `(LF - ME) c^2 + (LG - NE) c s + (MG - NF) s^2 = 0`. The quadratic is solved
//! in homogeneous form so vertical directions need no special case.

use std::collections::VecDeque;

use crate::dsl::{Domain, Surface};
use crate::forms::{forms_at, FormsError, FundamentalForms};
use crate::grid::Grid2;

/// Relative size of the quadratic below which a point counts as umbilic.
pub const UMBILIC_TOL: f64 = 1e-9;

pub type Dir = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalDirections {
    pub d1: Dir,
    pub d2: Dir,
    pub umbilic: bool,
}

fn coefficients(f: &FundamentalForms) -> (f64, f64, f64, f64) {
    let a = f.l * f.f - f.m * f.e;
    let b = f.l * f.g - f.n * f.e;
    let d = f.m * f.g - f.n * f.f;
    let mag = (f.l.abs() + f.m.abs() + f.n.abs()) * (f.e.abs() + f.f.abs() + f.g.abs());
    (a, b, d, mag)
}

/// Residual of the direction equation at `dir`, relative to the size of its
/// coefficients (zero for a vanishing second form).
pub fn eq30_residual(f: &FundamentalForms, dir: Dir) -> f64 {
    let (a, b, d, mag) = coefficients(f);
    if mag == 0.0 {
        return 0.0;
    }
    let [c, s] = dir;
    (a * c * c + b * c * s + d * s * s).abs() / mag
}

/// `E c1 c2 + F (c1 s2 + s1 c2) + G s1 s2`, zero for principal pairs.
pub fn metric_product(f: &FundamentalForms, d1: Dir, d2: Dir) -> f64 {
    f.e * d1[0] * d2[0] + f.f * (d1[0] * d2[1] + d1[1] * d2[0]) + f.g * d1[1] * d2[1]
}

fn unit(v: Dir) -> Dir {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

pub fn det(p: Dir, q: Dir) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

pub fn dot(p: Dir, q: Dir) -> f64 {
    p[0] * q[0] + p[1] * q[1]
}

/// The two unordered unit roots, or `None` at an umbilic.
pub fn roots(f: &FundamentalForms) -> Option<(Dir, Dir)> {
    let (a, b, d, mag) = coefficients(f);
    if a.abs().max(b.abs()).max(d.abs()) <= UMBILIC_TOL * mag || mag == 0.0 {
        return None;
    }
    let disc = (b * b - 4.0 * a * d).max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * disc);
    if q == 0.0 {
        // b = 0 and ad = 0: one coefficient pair vanishes
        return Some(if d == 0.0 {
            ([0.0, 1.0], [1.0, 0.0])
        } else {
            ([1.0, 0.0], [0.0, 1.0])
        });
    }
    // t = s/c solves d t^2 + b t + a = 0 with roots q/d and a/q
    Some((unit([d, q]), unit([q, a])))
}

fn orient_pair(d1: Dir, other: Dir) -> (Dir, Dir) {
    let d2 = if det(d1, other) < 0.0 {
        [-other[0], -other[1]]
    } else {
        other
    };
    (d1, d2)
}

fn flip_to(d: Dir, reference: Dir) -> Dir {
    if dot(d, reference) < 0.0 {
        [-d[0], -d[1]]
    } else {
        d
    }
}

/// Principal directions with `d1` the root best aligned with `+X` (ties go to
/// the root with positive `Y` component) and `d2` oriented so that
/// `det[d1, d2] > 0`. Umbilics fall back to the coordinate axes.
pub fn principal_directions(f: &FundamentalForms) -> PrincipalDirections {
    let Some((p, q)) = roots(f) else {
        return PrincipalDirections {
            d1: [1.0, 0.0],
            d2: [0.0, 1.0],
            umbilic: true,
        };
    };
    let norm = |d: Dir| if d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0) { [-d[0], -d[1]] } else { d };
    let (p, q) = (norm(p), norm(q));
    let first_is_p = if (p[0] - q[0]).abs() < 1e-9 {
        p[1] >= q[1]
    } else {
        p[0] > q[0]
    };
    let (d1, other) = if first_is_p { (p, q) } else { (q, p) };
    let (d1, d2) = orient_pair(d1, other);
    PrincipalDirections {
        d1,
        d2,
        umbilic: false,
    }
}

/// The roots at `f` matched to a reference pair by nearest angle.
pub fn match_to(f: &FundamentalForms, reference: &PrincipalDirections) -> PrincipalDirections {
    let Some((p, q)) = roots(f) else {
        return PrincipalDirections {
            umbilic: true,
            ..*reference
        };
    };
    let (d1, other) = if dot(p, reference.d1).abs() >= dot(q, reference.d1).abs() {
        (p, q)
    } else {
        (q, p)
    };
    let d1 = flip_to(d1, reference.d1);
    let (d1, d2) = orient_pair(d1, other);
    PrincipalDirections {
        d1,
        d2,
        umbilic: false,
    }
}

/// The root closest to `reference`, signed to agree with it.
pub fn nearest_root(f: &FundamentalForms, reference: Dir) -> Option<Dir> {
    let (p, q) = roots(f)?;
    let pick = if dot(p, reference).abs() >= dot(q, reference).abs() {
        p
    } else {
        q
    };
    Some(flip_to(pick, reference))
}

/// Principal directions on a grid, with branches assigned at the seed node and
/// carried to the rest of the grid by nearest-angle continuity.
#[derive(Debug, Clone)]
pub struct DirectionField {
    pub dirs: Grid2<PrincipalDirections>,
    pub forms: Grid2<FundamentalForms>,
    pub seed: (usize, usize),
}

impl DirectionField {
    pub fn compute<S: Surface + ?Sized>(
        surface: &S,
        domain: Domain,
        nx: usize,
        ny: usize,
        seed: (f64, f64),
    ) -> Result<DirectionField, FormsError> {
        let forms = Grid2::try_from_fn(nx, ny, domain, |i, j| {
            forms_at(surface, domain.node_x(i, nx), domain.node_y(j, ny))
        })?;
        Ok(Self::from_forms(forms, seed))
    }

    pub fn from_forms(forms: Grid2<FundamentalForms>, seed: (f64, f64)) -> DirectionField {
        let (nx, ny, d) = (forms.nx, forms.ny, forms.domain);
        let nearest = |t: f64, lo: f64, hi: f64, n: usize| {
            (((t - lo) / (hi - lo)) * (n - 1) as f64).round().clamp(0.0, (n - 1) as f64) as usize
        };
        let si = nearest(seed.0, d.x_lo, d.x_hi, nx);
        let sj = nearest(seed.1, d.y_lo, d.y_hi, ny);
        let mut dirs: Grid2<Option<PrincipalDirections>> = Grid2::from_fn(nx, ny, d, |_, _| None);
        *dirs.get_mut(si, sj) = Some(principal_directions(forms.get(si, sj)));
        let mut queue = VecDeque::from([(si, sj)]);
        while let Some((i, j)) = queue.pop_front() {
            let here = dirs.get(i, j).expect("queued nodes are assigned");
            let neighbours = [
                (i.wrapping_sub(1), j),
                (i + 1, j),
                (i, j.wrapping_sub(1)),
                (i, j + 1),
            ];
            for (p, q) in neighbours {
                if p >= nx || q >= ny || dirs.get(p, q).is_some() {
                    continue;
                }
                *dirs.get_mut(p, q) = Some(match_to(forms.get(p, q), &here));
                queue.push_back((p, q));
            }
        }
        DirectionField {
            dirs: dirs.map(|o| o.expect("grid is connected")),
            forms,
            seed: (si, sj),
        }
    }

    pub fn has_umbilics(&self) -> bool {
        self.dirs.data.iter().any(|d| d.umbilic)
    }

    /// Largest direction-equation residual over the grid.
    pub fn max_residual(&self) -> f64 {
        self.dirs
            .data
            .iter()
            .zip(&self.forms.data)
            .filter(|(d, _)| !d.umbilic)
            .map(|(d, f)| eq30_residual(f, d.d1).max(eq30_residual(f, d.d2)))
            .fold(0.0, f64::max)
    }

    /// Largest angle jump of either direction between neighbouring nodes.
    pub fn max_neighbour_turn(&self) -> f64 {
        let g = &self.dirs;
        let angle = |a: Dir, b: Dir| dot(a, b).clamp(-1.0, 1.0).acos();
        let mut worst: f64 = 0.0;
        for (i, j, d) in g.iter() {
            for (p, q) in [(i + 1, j), (i, j + 1)] {
                if p < g.nx && q < g.ny {
                    let e = g.get(p, q);
                    worst = worst.max(angle(d.d1, e.d1)).max(angle(d.d2, e.d2));
                }
            }
        }
        worst
    }

    /// Reference pair at the node nearest `(x, y)`, clamped into the grid.
    pub fn nearest(&self, x: f64, y: f64) -> &PrincipalDirections {
        let d = self.dirs.domain;
        let idx = |t: f64, lo: f64, hi: f64, n: usize| {
            (((t - lo) / (hi - lo)) * (n - 1) as f64).round().clamp(0.0, (n - 1) as f64) as usize
        };
        self.dirs.get(
            idx(x, d.x_lo, d.x_hi, self.dirs.nx),
            idx(y, d.y_lo, d.y_hi, self.dirs.ny),
        )
    }
}
