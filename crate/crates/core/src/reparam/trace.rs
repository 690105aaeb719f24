//! Curvature-line tracing and the curve-intersection inverse.
//!
//! Each coordinate family consists of curvature lines of one principal
//! direction, written as graphs `b = beta(a)` over one parameter axis `a`.
//! A curve is labelled by where it crosses the transversal line `a = a0`
//! through the seed: label `sigma * (b - b0)`. Alongside `beta` the tracer
//! integrates the variational equations
//!
//! ```text
//! u' = m_b u,   w' = m_bb u^2 + m_b w
//! ```
//!
//! so that `u = d beta / d b_start` and `w = d^2 beta / d b_start^2`, which
//! give the map's derivatives with respect to the labels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::directions::{nearest_root, Dir, DirectionField};
use super::ode::{integrate, OdeError, System, Tolerance};
use crate::dsl::{Domain, Surface};
use crate::forms::{forms_at, FormsError};

/// Curves may not turn closer than this (as |cos|) to their transversal.
const PARALLEL_TOL: f64 = 0.05;
/// Finite-difference step for slope derivatives, relative to the domain side.
const FD_REL_STEP: f64 = 2e-3;
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 4] = [8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

/// First and second derivative of `f` at 0 from samples at `k = ±1..±4`,
/// given `f0 = f(0)` and the spacing `h`.
fn central(f0: f64, h: f64, f: impl Fn(f64) -> Result<f64, TraceError>) -> Result<(f64, f64), TraceError> {
    let (mut d1, mut d2) = (0.0, 0.0);
    for k in 0..4 {
        let kk = (k + 1) as f64;
        let (p, q) = (f(kk)?, f(-kk)?);
        d1 += D1[k] * (p - q);
        d2 += D2[k] * ((p - f0) + (q - f0));
    }
    Ok((d1 / h, d2 / (h * h)))
}

/// Curves are traced this far past the domain, relative to its side.
const CURVE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("umbilic point at ({x}, {y}): principal directions undefined")]
    Umbilic { x: f64, y: f64 },
    #[error("curvature line turns parallel to its transversal at ({x}, {y})")]
    Parallel { x: f64, y: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("curves for labels ({s}, {t}) do not intersect")]
    NoIntersection { s: f64, t: f64 },
}

impl From<OdeError<TraceError>> for TraceError {
    fn from(e: OdeError<TraceError>) -> Self {
        match e {
            OdeError::System(inner) => inner,
            other => TraceError::Integration(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    X,
    Y,
}

/// Which principal direction a family follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Family {
    pub branch: Branch,
    /// Parameter axis the curves are graphs over.
    pub axis: Axis,
    /// Transversal line `a = a0`.
    pub a0: f64,
    /// Seed coordinate along the transversal.
    pub b0: f64,
    /// `+1` or `-1`.
    pub sigma: f64,
}

impl Family {
    /// Family of curves along `dir` through `seed`, labelled on the axis line
    /// most transverse to `dir`. The label orientation is the sign of
    /// `sigma_of(e)` for the unit vector `e` along that line.
    pub fn through(branch: Branch, dir: Dir, seed: (f64, f64), sigma_of: impl Fn(Dir) -> f64) -> Family {
        // |det[dir, e]| is |dir.x| for the vertical line, |dir.y| for the horizontal
        let axis = if dir[0].abs() >= dir[1].abs() { Axis::X } else { Axis::Y };
        let (a0, b0) = match axis {
            Axis::X => seed,
            Axis::Y => (seed.1, seed.0),
        };
        let e = match axis {
            Axis::X => [0.0, 1.0],
            Axis::Y => [1.0, 0.0],
        };
        Family {
            branch,
            axis,
            a0,
            b0,
            sigma: sigma_of(e).signum(),
        }
    }

    #[inline]
    pub fn to_xy(&self, a: f64, b: f64) -> (f64, f64) {
        match self.axis {
            Axis::X => (a, b),
            Axis::Y => (b, a),
        }
    }

    #[inline]
    pub fn to_ab(&self, x: f64, y: f64) -> (f64, f64) {
        match self.axis {
            Axis::X => (x, y),
            Axis::Y => (y, x),
        }
    }

    pub fn label_of(&self, b_star: f64) -> f64 {
        self.sigma * (b_star - self.b0)
    }

    pub fn start_of(&self, label: f64) -> f64 {
        self.b0 + self.sigma * label
    }

    fn a_range(&self, d: &Domain) -> (f64, f64, f64) {
        match self.axis {
            Axis::X => (d.x_lo, d.x_hi, d.width()),
            Axis::Y => (d.y_lo, d.y_hi, d.height()),
        }
    }

    fn b_extent(&self, d: &Domain) -> f64 {
        match self.axis {
            Axis::X => d.height(),
            Axis::Y => d.width(),
        }
    }
}

/// Shared state for tracing on one surface.
pub struct Tracer {
    pub surface: Arc<dyn Surface>,
    pub field: Arc<DirectionField>,
    pub domain: Domain,
    pub tol: Tolerance,
    curves: Mutex<HashMap<(Branch, u64), Arc<Curve>>>,
}

const CURVE_CACHE_LIMIT: usize = 4096;

/// Stored node of a traced curve: parameter, state `(beta, u, w)` and the
/// branch reference there.
#[derive(Debug, Clone, Copy)]
pub struct CurveNode {
    pub a: f64,
    pub state: [f64; 3],
    pub dir: Dir,
}

/// A curvature line traced across the domain from its transversal crossing,
/// nodes sorted by `a`.
#[derive(Debug, Clone)]
pub struct Curve {
    pub family: Family,
    pub label: f64,
    pub nodes: Vec<CurveNode>,
}

/// Slope of the curve and its partials in the family's `(a, b)` frame.
#[derive(Debug, Clone, Copy)]
pub struct SlopeJet {
    pub m: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub m_bb: f64,
    pub dir: Dir,
}

/// Preimage of `(S, T)` with first and second derivatives of `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseJet {
    pub xy: [f64; 2],
    pub d_s: [f64; 2],
    pub d_t: [f64; 2],
    pub d_ss: [f64; 2],
    pub d_st: [f64; 2],
    pub d_tt: [f64; 2],
}

impl InverseJet {
    /// `det d(X, Y) / d(S, T)`.
    pub fn jacobian(&self) -> f64 {
        self.d_s[0] * self.d_t[1] - self.d_s[1] * self.d_t[0]
    }
}

/// Outcome of tracing a node back to the transversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traced {
    pub label: f64,
    /// The curve left the parameter domain before reaching the transversal.
    pub left_domain: bool,
}

impl Tracer {
    pub fn new(surface: Arc<dyn Surface>, field: Arc<DirectionField>, max_step: f64) -> Tracer {
        let domain = surface.domain();
        Tracer {
            surface,
            field,
            domain,
            tol: Tolerance {
                max_step,
                ..Tolerance::default()
            },
            curves: Mutex::new(HashMap::new()),
        }
    }

    /// Reference direction of `branch` at the grid node nearest `(x, y)`.
    pub fn reference(&self, branch: Branch, x: f64, y: f64) -> Dir {
        let pd = self.field.nearest(x, y);
        match branch {
            Branch::First => pd.d1,
            Branch::Second => pd.d2,
        }
    }

    fn direction(&self, x: f64, y: f64, reference: Dir) -> Result<Dir, TraceError> {
        let f = forms_at(self.surface.as_ref(), x, y)?;
        nearest_root(&f, reference).ok_or(TraceError::Umbilic { x, y })
    }

    fn slope(&self, fam: &Family, a: f64, b: f64, reference: Dir) -> Result<(f64, Dir), TraceError> {
        let (x, y) = fam.to_xy(a, b);
        let d = self.direction(x, y, reference)?;
        let (ca, cb) = match fam.axis {
            Axis::X => (d[0], d[1]),
            Axis::Y => (d[1], d[0]),
        };
        if ca.abs() < PARALLEL_TOL {
            return Err(TraceError::Parallel { x, y });
        }
        Ok((cb / ca, d))
    }

    fn fd_steps(&self, fam: &Family) -> (f64, f64) {
        let (_, _, wa) = fam.a_range(&self.domain);
        (FD_REL_STEP * wa, FD_REL_STEP * fam.b_extent(&self.domain))
    }

    /// Slope and its `b` derivatives by nine-point differences; `m_a` is
    /// filled only when `with_a` is set.
    pub fn slope_jet(
        &self,
        fam: &Family,
        a: f64,
        b: f64,
        reference: Dir,
        with_a: bool,
    ) -> Result<SlopeJet, TraceError> {
        let (m, dir) = self.slope(fam, a, b, reference)?;
        let (ha, hb) = self.fd_steps(fam);
        let (m_b, m_bb) = central(m, hb, |k| self.slope(fam, a, b + k * hb, dir).map(|p| p.0))?;
        let m_a = if with_a {
            central(m, ha, |k| self.slope(fam, a + k * ha, b, dir).map(|p| p.0))?.0
        } else {
            0.0
        };
        Ok(SlopeJet {
            m,
            m_a,
            m_b,
            m_bb,
            dir,
        })
    }

    /// Label of the curve of `fam` through `(x, y)`.
    pub fn label_at(&self, fam: &Family, x: f64, y: f64) -> Result<Traced, TraceError> {
        let (a, b) = fam.to_ab(x, y);
        let mut sys = ValueSys {
            tracer: self,
            fam,
            reference: self.reference(fam.branch, x, y),
            last_dir: None,
            domain: self.domain,
            left: false,
        };
        let [b_star] = integrate(&mut sys, a, [b], fam.a0, &self.tol)?;
        Ok(Traced {
            label: fam.label_of(b_star),
            left_domain: sys.left,
        })
    }

    /// The traced curve with `label`, cached.
    pub fn curve(&self, fam: &Family, label: f64) -> Result<Arc<Curve>, TraceError> {
        let key = (fam.branch, label.to_bits());
        if let Some(c) = self.curves.lock().expect("curve cache").get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(self.trace_curve(fam, label)?);
        let mut cache = self.curves.lock().expect("curve cache");
        if cache.len() >= CURVE_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, c.clone());
        Ok(c)
    }

    fn trace_curve(&self, fam: &Family, label: f64) -> Result<Curve, TraceError> {
        let b_start = fam.start_of(label);
        let (x, y) = fam.to_xy(fam.a0, b_start);
        let reference = self.reference(fam.branch, x, y);
        let (_, dir) = self.slope(fam, fam.a0, b_start, reference)?;
        let start = CurveNode {
            a: fam.a0,
            state: [b_start, 1.0, 0.0],
            dir,
        };
        let (lo, hi, w) = fam.a_range(&self.domain);
        let mut halves = Vec::with_capacity(2);
        for end in [lo - CURVE_MARGIN * w, hi + CURVE_MARGIN * w] {
            let mut sys = VarSys {
                tracer: self,
                fam,
                reference: dir,
                last_dir: None,
                nodes: Vec::new(),
            };
            // a failure part-way leaves the nodes reached so far
            let _ = integrate(&mut sys, fam.a0, start.state, end, &self.tol);
            halves.push(sys.nodes);
        }
        let mut nodes: Vec<CurveNode> = halves[0].iter().rev().copied().collect();
        nodes.push(start);
        nodes.extend_from_slice(&halves[1]);
        Ok(Curve {
            family: *fam,
            label,
            nodes,
        })
    }

    /// Curve state `(beta, u, w)` at `a`, integrated from the nearest node.
    fn state_at(&self, curve: &Curve, a: f64, full: bool) -> Result<([f64; 3], Dir), TraceError> {
        let k = nearest_node(&curve.nodes, a);
        let node = curve.nodes[k];
        if full {
            let mut sys = VarSys {
                tracer: self,
                fam: &curve.family,
                reference: node.dir,
                last_dir: None,
                nodes: Vec::new(),
            };
            let s = integrate(&mut sys, node.a, node.state, a, &self.tol)?;
            Ok((s, sys.last_dir.unwrap_or(node.dir)))
        } else {
            let mut sys = ValueSys {
                tracer: self,
                fam: &curve.family,
                reference: node.dir,
                last_dir: None,
                domain: self.domain,
                left: false,
            };
            let [b] = integrate(&mut sys, node.a, [node.state[0]], a, &self.tol)?;
            Ok(([b, 1.0, 0.0], sys.last_dir.unwrap_or(node.dir)))
        }
    }

    /// Preimage of `(s, t)` as the crossing of the curves labelled `s` and
    /// `t`, with derivatives by implicit differentiation.
    pub fn inverse(&self, fs: &Family, ft: &Family, s: f64, t: f64) -> Result<InverseJet, TraceError> {
        let cs = self.curve(fs, s)?;
        let ct = self.curve(ft, t)?;
        let none = || TraceError::NoIntersection { s, t };
        let (mut z0, mut z1) = crossing_guess(&cs, &ct).ok_or_else(none)?;
        let in_range = |c: &Curve, a: f64| {
            let (lo, hi) = (c.nodes[0].a, c.nodes[c.nodes.len() - 1].a);
            a >= lo.min(hi) && a <= hi.max(lo)
        };
        let scale = self.domain.size();
        let mut converged = false;
        for _ in 0..12 {
            if !in_range(&cs, z0) || !in_range(&ct, z1) {
                return Err(none());
            }
            let (ps, dirs) = self.state_at(&cs, z0, false)?;
            let (qs, dirt) = self.state_at(&ct, z1, false)?;
            let (ms, _) = self.slope(fs, z0, ps[0], dirs)?;
            let (mt, _) = self.slope(ft, z1, qs[0], dirt)?;
            let p = fs.to_xy(z0, ps[0]);
            let q = ft.to_xy(z1, qs[0]);
            let pa = fs.to_xy(1.0, ms);
            let qa = ft.to_xy(1.0, mt);
            let r = [p.0 - q.0, p.1 - q.1];
            // [pa, -qa] dz = -r
            let det = -pa.0 * qa.1 + qa.0 * pa.1;
            if det == 0.0 {
                return Err(none());
            }
            let dz0 = (-r[0] * -qa.1 - (-qa.0) * -r[1]) / det;
            let dz1 = (pa.0 * -r[1] - pa.1 * -r[0]) / det;
            z0 += dz0;
            z1 += dz1;
            if dz0.abs().max(dz1.abs()) <= 1e-14 * scale {
                converged = true;
                break;
            }
        }
        if !converged || !in_range(&cs, z0) || !in_range(&ct, z1) {
            return Err(none());
        }
        let (ps, dirs) = self.state_at(&cs, z0, true)?;
        let (qs, dirt) = self.state_at(&ct, z1, true)?;
        let js = self.slope_jet(fs, z0, ps[0], dirs, true)?;
        let jt = self.slope_jet(ft, z1, qs[0], dirt, true)?;
        Ok(implicit_inverse(fs, ft, z0, ps, &js, qs, &jt))
    }
}

fn nearest_node(nodes: &[CurveNode], a: f64) -> usize {
    let k = nodes.partition_point(|n| n.a < a);
    if k == 0 {
        0
    } else if k == nodes.len() {
        nodes.len() - 1
    } else if (nodes[k].a - a).abs() < (a - nodes[k - 1].a).abs() {
        k
    } else {
        k - 1
    }
}

/// Linear interpolation of `beta` between stored nodes.
fn beta_linear(c: &Curve, a: f64) -> Option<f64> {
    let n = &c.nodes;
    if n.len() < 2 || a < n[0].a || a > n[n.len() - 1].a {
        return None;
    }
    let k = n.partition_point(|p| p.a < a).clamp(1, n.len() - 1);
    let (p, q) = (n[k - 1], n[k]);
    let t = if q.a == p.a { 0.0 } else { (a - p.a) / (q.a - p.a) };
    Some(p.state[0] + t * (q.state[0] - p.state[0]))
}

/// Starting point for the crossing search: first sign change of the offset
/// of `cs`'s polyline from `ct`.
fn crossing_guess(cs: &Curve, ct: &Curve) -> Option<(f64, f64)> {
    let side = |node: &CurveNode| {
        let (x, y) = cs.family.to_xy(node.a, node.state[0]);
        let (a, b) = ct.family.to_ab(x, y);
        beta_linear(ct, a).map(|g| (b - g, a))
    };
    let mut prev: Option<(f64, f64, f64)> = None;
    for node in &cs.nodes {
        let Some((off, at)) = side(node) else {
            prev = None;
            continue;
        };
        if off == 0.0 {
            return Some((node.a, at));
        }
        if let Some((po, pa, pat)) = prev {
            if po.signum() != off.signum() {
                let t = po / (po - off);
                return Some((pa + t * (node.a - pa), pat + t * (at - pat)));
            }
        }
        prev = Some((off, node.a, at));
    }
    None
}

/// Derivatives of the crossing point. Each family contributes its curve
/// `P(a, l) = E(a, beta(a, l))` with
/// `beta_a = m`, `beta_aa = m_a + m_b m`, `beta_l = sigma u`,
/// `beta_al = m_b beta_l`, `beta_ll = w`.
fn implicit_inverse(
    fs: &Family,
    ft: &Family,
    z0: f64,
    ps: [f64; 3],
    js: &SlopeJet,
    qs: [f64; 3],
    jt: &SlopeJet,
) -> InverseJet {
    struct Parts {
        p: [f64; 2],
        pa: [f64; 2],
        pl: [f64; 2],
        paa: [f64; 2],
        pal: [f64; 2],
        pll: [f64; 2],
    }
    let parts = |f: &Family, a: f64, st: [f64; 3], j: &SlopeJet| {
        let v = |a_part: f64, b_part: f64| {
            let (x, y) = f.to_xy(a_part, b_part);
            [x, y]
        };
        let bl = f.sigma * st[1];
        Parts {
            p: v(a, st[0]),
            pa: v(1.0, j.m),
            pl: v(0.0, bl),
            paa: v(0.0, j.m_a + j.m_b * j.m),
            pal: v(0.0, j.m_b * bl),
            pll: v(0.0, st[2]),
        }
    };
    // the T curve's own parameter value only enters through its slope data
    let p = parts(fs, z0, ps, js);
    let q = parts(ft, 0.0, qs, jt);
    let det = p.pa[0] * -q.pa[1] - -q.pa[0] * p.pa[1];
    // solves [pa, -qa] z = -rhs
    let solve = |r: [f64; 2]| {
        let (r0, r1) = (-r[0], -r[1]);
        [
            (r0 * -q.pa[1] - -q.pa[0] * r1) / det,
            (p.pa[0] * r1 - p.pa[1] * r0) / det,
        ]
    };
    let add = |terms: &[([f64; 2], f64)]| {
        let mut out = [0.0; 2];
        for (v, k) in terms {
            out[0] += v[0] * k;
            out[1] += v[1] * k;
        }
        out
    };
    let z_s = solve(p.pl);
    let z_t = solve([-q.pl[0], -q.pl[1]]);
    let r_ss = add(&[
        (p.pll, 1.0),
        (p.pal, 2.0 * z_s[0]),
        (p.paa, z_s[0] * z_s[0]),
        (q.paa, -z_s[1] * z_s[1]),
    ]);
    let r_st = add(&[
        (p.pal, z_t[0]),
        (q.pal, -z_s[1]),
        (p.paa, z_s[0] * z_t[0]),
        (q.paa, -z_s[1] * z_t[1]),
    ]);
    let r_tt = add(&[
        (q.pll, -1.0),
        (q.pal, -2.0 * z_t[1]),
        (p.paa, z_t[0] * z_t[0]),
        (q.paa, -z_t[1] * z_t[1]),
    ]);
    let (z_ss, z_st, z_tt) = (solve(r_ss), solve(r_st), solve(r_tt));
    InverseJet {
        xy: p.p,
        d_s: add(&[(p.pa, z_s[0]), (p.pl, 1.0)]),
        d_t: add(&[(p.pa, z_t[0])]),
        d_ss: add(&[
            (p.paa, z_s[0] * z_s[0]),
            (p.pal, 2.0 * z_s[0]),
            (p.pll, 1.0),
            (p.pa, z_ss[0]),
        ]),
        d_st: add(&[
            (p.paa, z_s[0] * z_t[0]),
            (p.pal, z_t[0]),
            (p.pa, z_st[0]),
        ]),
        d_tt: add(&[(p.paa, z_t[0] * z_t[0]), (p.pa, z_tt[0])]),
    }
}

struct ValueSys<'a> {
    tracer: &'a Tracer,
    fam: &'a Family,
    reference: Dir,
    last_dir: Option<Dir>,
    domain: Domain,
    left: bool,
}

impl System<1> for ValueSys<'_> {
    type Error = TraceError;

    fn rhs(&mut self, a: f64, y: &[f64; 1]) -> Result<[f64; 1], TraceError> {
        let (m, dir) = self.tracer.slope(self.fam, a, y[0], self.reference)?;
        self.last_dir = Some(dir);
        Ok([m])
    }

    fn accepted(&mut self, a: f64, y: &[f64; 1], _dy: &[f64; 1]) -> Result<(), TraceError> {
        if let Some(d) = self.last_dir {
            self.reference = d;
        }
        let (x, yy) = self.fam.to_xy(a, y[0]);
        let eps = 1e-12 * self.domain.size();
        if x < self.domain.x_lo - eps
            || x > self.domain.x_hi + eps
            || yy < self.domain.y_lo - eps
            || yy > self.domain.y_hi + eps
        {
            self.left = true;
        }
        Ok(())
    }
}

struct VarSys<'a> {
    tracer: &'a Tracer,
    fam: &'a Family,
    reference: Dir,
    last_dir: Option<Dir>,
    nodes: Vec<CurveNode>,
}

impl System<3> for VarSys<'_> {
    type Error = TraceError;

    fn rhs(&mut self, a: f64, y: &[f64; 3]) -> Result<[f64; 3], TraceError> {
        let j = self.tracer.slope_jet(self.fam, a, y[0], self.reference, false)?;
        self.last_dir = Some(j.dir);
        let [_, u, w] = *y;
        Ok([j.m, j.m_b * u, j.m_bb * u * u + j.m_b * w])
    }

    fn accepted(&mut self, a: f64, y: &[f64; 3], _dy: &[f64; 3]) -> Result<(), TraceError> {
        if let Some(d) = self.last_dir {
            self.reference = d;
        }
        self.nodes.push(CurveNode {
            a,
            state: *y,
            dir: self.reference,
        });
        Ok(())
    }
}
