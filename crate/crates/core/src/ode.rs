//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-11),
            rel_tol: T::lit(1e-11),
            max_steps: 200_000,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and
/// returns `y(t1)`. The step always lands exactly on `t1`.
pub fn integrate<T: Real, const N: usize>(
    mut f: impl FnMut(T, &[T; N]) -> [T; N],
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<[T; N]> {
    let span = t1 - t0;
    if span == T::zero() {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = span.abs() * T::lit(0.1);
    let c: [T; 7] = C.map(T::lit);
    let b5: [T; 7] = B5.map(T::lit);
    let b4: [T; 7] = B4.map(T::lit);
    let a: [[T; 6]; 7] = A.map(|row| row.map(T::lit));
    let min_step = span.abs() * T::epsilon() * T::lit(16.0);

    for _ in 0..opts.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= T::zero() {
            return Ok(y);
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = step * dir;

        let mut k = [[T::zero(); N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let aij = a[s][j];
                if aij != T::zero() {
                    for n in 0..N {
                        ys[n] += hs * aij * kj[n];
                    }
                }
            }
            k[s] = f(t + c[s] * hs, &ys);
        }
        let mut y5 = y;
        let mut err = T::zero();
        for n in 0..N {
            let mut d5 = T::zero();
            let mut d4 = T::zero();
            for s in 0..7 {
                d5 += b5[s] * k[s][n];
                d4 += b4[s] * k[s][n];
            }
            y5[n] += hs * d5;
            let sc = opts.abs_tol + opts.rel_tol * y[n].abs().max(y5[n].abs());
            err = err.max((hs * (d5 - d4)).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration {
                at: t.as_f64(),
                reason: "non-finite error estimate".into(),
            });
        }
        if err <= T::one() {
            t = if last { t1 } else { t + hs };
            y = y5;
            if last {
                return Ok(y);
            }
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h = step * factor;
        if h < min_step {
            return Err(Error::Integration {
                at: t.as_f64(),
                reason: "step size underflow".into(),
            });
        }
    }
    Err(Error::Integration {
        at: t.as_f64(),
        reason: "maximum number of steps exceeded".into(),
    })
}
