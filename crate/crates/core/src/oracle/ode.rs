//! Adaptive Dormand-Prince 5(4) integration for small ODE systems.

use crate::error::{Error, Result};
use crate::siv::{ode_rhs, SivParams};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the solution at each
/// entry of `times`, which must be non-decreasing and not before `t0`.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<[f64; N]>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::invalid("times", "output times must be sorted and after t0"));
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut y) = (t0, y0);
    let mut h: f64 = 1e-3;
    for &target in times {
        while t < target {
            let h_try = h.min(target - t);
            let (y_new, err) = dopri_step(&f, t, &y, h_try, rtol, atol);
            if err <= 1.0 {
                t = if h_try == target - t { target } else { t + h_try };
                y = y_new;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = h_try * factor;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Unstable {
                    time: t,
                    magnitude: y.iter().fold(0.0, |m, v| m.max(v.abs())),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dopri_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> ([f64; N], f64) {
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut stage = *y;
        for (prev, &a) in A[s].iter().enumerate().take(s) {
            for n in 0..N {
                stage[n] += h * a * k[prev][n];
            }
        }
        k[s] = f(t + C[s] * h, &stage);
    }
    let mut y5 = *y;
    let mut err_sq = 0.0;
    for n in 0..N {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for s in 0..7 {
            hi += B5[s] * k[s][n];
            lo += B4[s] * k[s][n];
        }
        y5[n] += h * hi;
        let scale = atol + rtol * y[n].abs().max(y5[n].abs());
        err_sq += (h * (hi - lo) / scale).powi(2);
    }
    (y5, (err_sq / N as f64).sqrt())
}

/// Spatially homogeneous SIV trajectory sampled at `times`, starting at `t = 0`.
pub fn siv_trajectory(p: &SivParams, y0: [f64; 3], times: &[f64], tol: f64) -> Result<Vec<[f64; 3]>> {
    integrate(|_, y| ode_rhs(p, *y), 0.0, y0, times, tol, tol)
}
