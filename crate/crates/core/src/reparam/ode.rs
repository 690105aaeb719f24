//! Adaptive Dormand–Prince 5(4) integration of small fixed-size systems.

pub trait System<const N: usize> {
    type Error;

    fn rhs(&mut self, t: f64, y: &[f64; N]) -> Result<[f64; N], Self::Error>;

    /// Called after every accepted step with the new state and its slope.
    fn accepted(&mut self, _t: f64, _y: &[f64; N], _dy: &[f64; N]) -> Result<(), Self::Error> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError<E> {
    #[error("step size underflow at t = {t}")]
    StepTooSmall { t: f64 },
    #[error("more than {0} steps")]
    TooManySteps(usize),
    #[error(transparent)]
    System(E),
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `t0` to `t1` (either direction) and returns the state at
/// `t1`.
pub fn integrate<const N: usize, S: System<N>>(
    sys: &mut S,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: &Tolerance,
) -> Result<[f64; N], OdeError<S::Error>> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y).map_err(OdeError::System)?;
    let mut h = initial_step(&y, &k1, tol).min(span.abs()).min(tol.max_step);
    let mut steps = 0;
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            return Ok(y);
        }
        let tiny = 1e-14 * t.abs().max(1.0);
        if remaining <= tiny {
            let mut y_end = y;
            for (v, d) in y_end.iter_mut().zip(k1.iter()) {
                *v += remaining * dir * d;
            }
            return Ok(y_end);
        }
        let last = h >= remaining;
        let hs = if last { remaining } else { h } * dir;
        if hs.abs() <= tiny {
            return Err(OdeError::StepTooSmall { t });
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (n, v) in ys.iter_mut().enumerate() {
                *v += hs * (0..s).map(|r| A[s][r] * k[r][n]).sum::<f64>();
            }
            k[s] = sys.rhs(t + C[s] * hs, &ys).map_err(OdeError::System)?;
        }
        let mut y_new = y;
        let mut err = 0.0;
        for n in 0..N {
            y_new[n] += hs * (0..6).map(|r| A[6][r] * k[r][n]).sum::<f64>();
            let e = hs * (0..7).map(|r| E[r] * k[r][n]).sum::<f64>();
            let sc = tol.atol + tol.rtol * y[n].abs().max(y_new[n].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        steps += 1;
        if steps > tol.max_steps {
            return Err(OdeError::TooManySteps(tol.max_steps));
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k1 = k[6];
            sys.accepted(t, &y, &k1).map_err(OdeError::System)?;
            if last {
                return Ok(y);
            }
            h = (hs.abs() * factor).min(tol.max_step);
        } else {
            h = hs.abs() * factor.min(1.0);
        }
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], tol: &Tolerance) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for n in 0..N {
        let sc = tol.atol + tol.rtol * y[n].abs();
        d0 = d0.max((y[n] / sc).abs());
        d1 = d1.max((dy[n] / sc).abs());
    }
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
}
