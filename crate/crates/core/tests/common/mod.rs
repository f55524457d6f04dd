#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fracsiv::{Field2D, SivState};

/// Solves the constant tridiagonal system `sub*x[k-1] + diag*x[k] + sup*x[k+1] = rhs[k]`.
pub fn thomas(sub: f64, diag: f64, sup: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup / diag;
    d[0] = rhs[0] / diag;
    for k in 1..n {
        let m = diag - sub * c[k - 1];
        c[k] = sup / m;
        d[k] = (rhs[k] - sub * d[k - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for k in (0..n - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

#[derive(Debug, Clone, Copy)]
pub struct Rates {
    pub mu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub nu: f64,
}

pub fn siv_rhs(r: &Rates, s: f64, i: f64, v: f64) -> [f64; 3] {
    [
        r.mu * (1.0 - s) - r.beta * s * v,
        r.beta * s * v - (r.mu + r.gamma) * i,
        r.theta * (1.0 - v) * i - r.nu * v,
    ]
}

/// Grid values with index `j * (nx + 1) + i`.
pub type Grid = Vec<f64>;

/// Classical Peaceman-Rachford step on the unit square with zero Dirichlet
/// data, second differences, and the reaction taken at the explicit half-step
/// predictor.
pub fn classical_pr_step(
    nx: usize,
    ny: usize,
    dt: f64,
    diffusion: [(f64, f64); 3],
    rates: &Rates,
    u: &[Grid; 3],
) -> [Grid; 3] {
    let (dx, dy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let at = |i: usize, j: usize| j * (nx + 1) + i;
    let mut g: [Grid; 3] = std::array::from_fn(|_| vec![0.0; (nx + 1) * (ny + 1)]);
    for j in 1..ny {
        for i in 1..nx {
            let k = at(i, j);
            let f = siv_rhs(rates, u[0][k], u[1][k], u[2][k]);
            let p = siv_rhs(
                rates,
                u[0][k] + dt / 2.0 * f[0],
                u[1][k] + dt / 2.0 * f[1],
                u[2][k] + dt / 2.0 * f[2],
            );
            for c in 0..3 {
                g[c][k] = p[c];
            }
        }
    }
    std::array::from_fn(|c| {
        let (a, b) = diffusion[c];
        let kx = dt / 2.0 * a / (dx * dx);
        let ky = dt / 2.0 * b / (dy * dy);
        let src = &u[c];
        let mut star = vec![0.0; src.len()];
        for j in 1..ny {
            let rhs: Vec<f64> = (1..nx)
                .map(|i| {
                    src[at(i, j)]
                        + ky * (src[at(i, j - 1)] - 2.0 * src[at(i, j)] + src[at(i, j + 1)])
                        + dt / 2.0 * g[c][at(i, j)]
                })
                .collect();
            for (n, val) in thomas(-kx, 1.0 + 2.0 * kx, -kx, &rhs).into_iter().enumerate() {
                star[at(n + 1, j)] = val;
            }
        }
        let mut next = vec![0.0; src.len()];
        for i in 1..nx {
            let rhs: Vec<f64> = (1..ny)
                .map(|j| {
                    star[at(i, j)]
                        + kx * (star[at(i - 1, j)] - 2.0 * star[at(i, j)] + star[at(i + 1, j)])
                        + dt / 2.0 * g[c][at(i, j)]
                })
                .collect();
            for (n, val) in thomas(-ky, 1.0 + 2.0 * ky, -ky, &rhs).into_iter().enumerate() {
                next[at(i, n + 1)] = val;
            }
        }
        next
    })
}

/// Random sum of low sine modes, zero on the boundary of the unit square.
pub fn smooth_field(nx: usize, ny: usize, offset: f64, rng: &mut StdRng) -> Field2D {
    let coeffs: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field2D::from_fn(nx, ny, |i, j| {
        if i == 0 || j == 0 || i == nx || j == ny {
            return 0.0;
        }
        let (x, y) = (i as f64 / nx as f64, j as f64 / ny as f64);
        let mut v = offset;
        for m in 0..3 {
            for n in 0..3 {
                let (fm, fn_) = ((m + 1) as f64, (n + 1) as f64);
                v += 0.2
                    * coeffs[3 * m + n]
                    * (fm * std::f64::consts::PI * x).sin()
                    * (fn_ * std::f64::consts::PI * y).sin();
            }
        }
        v
    })
}

pub fn smooth_state(nx: usize, ny: usize, seed: u64) -> SivState {
    let mut rng = StdRng::seed_from_u64(seed);
    let s = smooth_field(nx, ny, 0.8, &mut rng);
    let i = smooth_field(nx, ny, 0.1, &mut rng);
    let v = smooth_field(nx, ny, 0.05, &mut rng);
    SivState::new(s, i, v).unwrap()
}

pub fn random_field(nx: usize, ny: usize, rng: &mut StdRng) -> Field2D {
    Field2D::from_fn(nx, ny, |_, _| rng.random_range(-1.0..1.0))
}

pub fn to_grid(f: &Field2D) -> Grid {
    f.as_slice().to_vec()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(id: u32, name: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    println!(
        "ACCEPTANCE {id} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}
