//! Reference solvers used to check the ADI stepper.
//!
//! - [`unsplit_cn_step`] solves the full two-dimensional Crank-Nicolson
//!   system without splitting, by dense LU.
//! - [`explicit_reference`] integrates with forward Euler on a fine step.
//! - [`ode`] holds an adaptive Runge-Kutta integrator for the reaction-only limit.
//! - [`classical_eigenvalue`] and friends give the exact discrete decay of a
//!   sine mode under classical diffusion.

pub mod ode;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::adi::{half_step_reaction, Dirichlet, SchemeConfig};
use crate::error::{Error, Result};
use crate::grid::{Axis, Compartment, Field2D, Shape};
use crate::grunwald::{grunwald_weights, TwoSidedOperator};
use crate::siv::{reaction_field, SivParams, SivState};

/// Largest interior unknown count the dense oracle accepts.
pub const MAX_UNKNOWNS: usize = 4096;

#[derive(Debug, Clone)]
struct CompartmentSystem {
    x: TwoSidedOperator,
    y: TwoSidedOperator,
    operator: DMatrix<f64>,
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

/// Dense `I - dt/2 (Ax + Ay)` per compartment over interior points in
/// row-major order, index `(j - 1) * (nx - 1) + (i - 1)`.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    cfg: SchemeConfig,
    systems: [CompartmentSystem; 3],
}

impl GlobalSystem {
    pub fn assemble(cfg: &SchemeConfig, params: &SivParams) -> Result<Self> {
        cfg.validate()?;
        params.validate(cfg.shape())?;
        let unknowns = cfg.shape().interior_len();
        if unknowns > MAX_UNKNOWNS {
            return Err(Error::SizeGuard {
                unknowns,
                limit: MAX_UNKNOWNS,
            });
        }
        let count = cfg.nx.max(cfg.ny) + 2;
        let wx = std::sync::Arc::new(grunwald_weights(cfg.alpha1, count)?);
        let wy = std::sync::Arc::new(grunwald_weights(cfg.alpha2, count)?);
        let build = |c: Compartment| -> Result<CompartmentSystem> {
            let d = params.diffusion(c);
            let x = TwoSidedOperator::new(
                Axis::X,
                cfg.alpha1,
                cfg.r1,
                cfg.dx(),
                d.a.clone(),
                cfg.shape(),
                wx.clone(),
            )?;
            let y = TwoSidedOperator::new(
                Axis::Y,
                cfg.alpha2,
                cfg.r2,
                cfg.dy(),
                d.b.clone(),
                cfg.shape(),
                wy.clone(),
            )?;
            let operator = global_operator(cfg.shape(), &x, &y)?;
            let matrix = DMatrix::identity(unknowns, unknowns) - &operator * (cfg.dt / 2.0);
            let lu = matrix.clone().lu();
            if !lu.is_invertible() {
                return Err(Error::SingularSystem {
                    axis: Axis::X,
                    slice: 0,
                });
            }
            Ok(CompartmentSystem {
                x,
                y,
                operator,
                matrix,
                lu,
            })
        };
        let systems = [
            build(Compartment::S).map_err(|e| e.in_compartment(Compartment::S))?,
            build(Compartment::I).map_err(|e| e.in_compartment(Compartment::I))?,
            build(Compartment::V).map_err(|e| e.in_compartment(Compartment::V))?,
        ];
        Ok(GlobalSystem {
            cfg: cfg.clone(),
            systems,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Spatial operator `Ax + Ay` over the interior.
    pub fn operator(&self, c: Compartment) -> &DMatrix<f64> {
        &self.systems[c.index()].operator
    }

    /// `I - dt/2 (Ax + Ay)`.
    pub fn matrix(&self, c: Compartment) -> &DMatrix<f64> {
        &self.systems[c.index()].matrix
    }

    /// `(Ax + Ay) u` over the interior, evaluated line by line from the full
    /// field (boundary values included).
    pub fn apply_lines(&self, c: Compartment, field: &Field2D) -> Result<Field2D> {
        let sys = &self.systems[c.index()];
        apply_two_axes(self.cfg.shape(), &sys.x, &sys.y, field)
    }

    /// One unsplit step; `state_n` carries the boundary data at `t`.
    pub fn step(&self, p: &SivParams, state_n: &SivState, t: f64, boundary: &Dirichlet) -> Result<SivState> {
        let cfg = &self.cfg;
        state_n.s().ensure_shape(cfg.shape())?;
        let half = cfg.dt / 2.0;
        let reaction = half_step_reaction(p, state_n, cfg.dt);
        let next_boundary = boundary.boundary_state(cfg, t + cfg.dt);
        let mut out = Vec::with_capacity(3);
        for c in Compartment::ALL {
            let sys = &self.systems[c.index()];
            let explicit = self.apply_lines(c, &state_n[c])?;
            let load = self.apply_lines(c, &next_boundary[c])?;
            let u = state_n[c].interior();
            let lu_rhs: Vec<f64> = u
                .iter()
                .zip(explicit.interior())
                .zip(load.interior())
                .zip(reaction[c].interior())
                .map(|(((u, e), l), g)| u + half * e + half * l + cfg.dt * g)
                .collect();
            let sol = sys
                .lu
                .solve(&DVector::from_vec(lu_rhs))
                .ok_or(Error::SingularSystem {
                    axis: Axis::X,
                    slice: 0,
                })
                .map_err(|e| e.in_compartment(c))?;
            let mut next = next_boundary[c].clone();
            next.set_interior(sol.as_slice())?;
            out.push(next);
        }
        let [s, i, v]: [Field2D; 3] = out.try_into().expect("three compartments");
        SivState::new(s, i, v)
    }
}

fn interior_index(shape: Shape, i: usize, j: usize) -> usize {
    (j - 1) * (shape.nx - 1) + (i - 1)
}

fn global_operator(shape: Shape, x: &TwoSidedOperator, y: &TwoSidedOperator) -> Result<DMatrix<f64>> {
    let n = shape.interior_len();
    let mut l = DMatrix::zeros(n, n);
    for j in 1..shape.ny {
        let a = x.matrix(j)?.matrix;
        for i in 1..shape.nx {
            for k in 1..shape.nx {
                l[(interior_index(shape, i, j), interior_index(shape, k, j))] += a[(i - 1, k - 1)];
            }
        }
    }
    for i in 1..shape.nx {
        let a = y.matrix(i)?.matrix;
        for j in 1..shape.ny {
            for k in 1..shape.ny {
                l[(interior_index(shape, i, j), interior_index(shape, i, k))] += a[(j - 1, k - 1)];
            }
        }
    }
    Ok(l)
}

fn apply_two_axes(shape: Shape, x: &TwoSidedOperator, y: &TwoSidedOperator, field: &Field2D) -> Result<Field2D> {
    let mut out = Field2D::zeros(shape.nx, shape.ny);
    for j in 1..shape.ny {
        for (i, v) in (1..shape.nx).zip(x.apply(field, j)?) {
            out.set(i, j, v);
        }
    }
    for i in 1..shape.nx {
        for (j, v) in (1..shape.ny).zip(y.apply(field, i)?) {
            out.set(i, j, out.get(i, j) + v);
        }
    }
    Ok(out)
}

/// One unsplit Crank-Nicolson step under homogeneous Dirichlet conditions.
pub fn unsplit_cn_step(p: &SivParams, cfg: &SchemeConfig, state_n: &SivState) -> Result<SivState> {
    GlobalSystem::assemble(cfg, p)?.step(p, state_n, 0.0, &Dirichlet::Homogeneous)
}

/// Step-size heuristic for forward Euler: `min(h^alpha) / (4 max coeff)`.
pub fn explicit_stable_dt(cfg: &SchemeConfig, p: &SivParams) -> f64 {
    let max_coeff = p
        .diffusion
        .iter()
        .flat_map(|d| [d.a.max_value(), d.b.max_value()])
        .fold(0.0, f64::max);
    if max_coeff == 0.0 {
        return f64::INFINITY;
    }
    let h = cfg.dx().powf(cfg.alpha1).min(cfg.dy().powf(cfg.alpha2));
    h / (4.0 * max_coeff)
}

/// Forward Euler from `0` to `t_end` with step at most `dt_fine`, using the
/// same spatial operators as the implicit schemes. `cfg.dt` is ignored.
pub fn explicit_reference(
    p: &SivParams,
    cfg: &SchemeConfig,
    state_0: &SivState,
    t_end: f64,
    dt_fine: f64,
) -> Result<SivState> {
    explicit_reference_with_boundary(p, cfg, state_0, t_end, dt_fine, &Dirichlet::Homogeneous)
}

pub fn explicit_reference_with_boundary(
    p: &SivParams,
    cfg: &SchemeConfig,
    state_0: &SivState,
    t_end: f64,
    dt_fine: f64,
    boundary: &Dirichlet,
) -> Result<SivState> {
    if !(dt_fine.is_finite() && dt_fine > 0.0) {
        return Err(Error::invalid("dt_fine", "must be positive"));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be non-negative"));
    }
    cfg.validate()?;
    p.validate(cfg.shape())?;
    state_0.s().ensure_shape(cfg.shape())?;
    let count = cfg.nx.max(cfg.ny) + 2;
    let wx = std::sync::Arc::new(grunwald_weights(cfg.alpha1, count)?);
    let wy = std::sync::Arc::new(grunwald_weights(cfg.alpha2, count)?);
    let ops: Vec<(TwoSidedOperator, TwoSidedOperator)> = Compartment::ALL
        .iter()
        .map(|&c| {
            let d = p.diffusion(c);
            Ok((
                TwoSidedOperator::new(
                    Axis::X,
                    cfg.alpha1,
                    cfg.r1,
                    cfg.dx(),
                    d.a.clone(),
                    cfg.shape(),
                    wx.clone(),
                )?,
                TwoSidedOperator::new(
                    Axis::Y,
                    cfg.alpha2,
                    cfg.r2,
                    cfg.dy(),
                    d.b.clone(),
                    cfg.shape(),
                    wy.clone(),
                )?,
            ))
        })
        .collect::<Result<_>>()?;

    let steps = (t_end / dt_fine).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut state = state_0.clone();
    for k in 0..steps {
        let g = reaction_field(p, &state);
        let mut next = Vec::with_capacity(3);
        for c in Compartment::ALL {
            let (x, y) = &ops[c.index()];
            let l = apply_two_axes(cfg.shape(), x, y, &state[c])?;
            let mut f = state[c].clone();
            for j in 1..cfg.ny {
                for i in 1..cfg.nx {
                    f.set(i, j, f.get(i, j) + dt * (l.get(i, j) + g[c].get(i, j)));
                }
            }
            boundary.impose(cfg, c, &mut f, (k + 1) as f64 * dt);
            next.push(f);
        }
        let [s, i, v]: [Field2D; 3] = next.try_into().expect("three compartments");
        state = SivState::new(s, i, v)?;
        let magnitude = state.max_abs();
        if magnitude.is_nan() || magnitude > 1e6 {
            return Err(Error::Unstable {
                time: (k + 1) as f64 * dt,
                magnitude,
            });
        }
    }
    Ok(state)
}

/// Eigenvalue of the classical second difference `coeff * tridiag(1, -2, 1) / h^2`
/// with `n` intervals of width `h`, for the sine mode `mode`.
pub fn classical_eigenvalue(n: usize, h: f64, coeff: f64, mode: usize) -> f64 {
    let s = (mode as f64 * PI / (2.0 * n as f64)).sin();
    -4.0 * coeff / (h * h) * s * s
}

/// Crank-Nicolson amplification of an eigenvalue `lambda` over one step.
pub fn crank_nicolson_factor(lambda: f64, dt: f64) -> f64 {
    (1.0 + 0.5 * dt * lambda) / (1.0 - 0.5 * dt * lambda)
}

/// Peaceman-Rachford amplification of a separable mode with eigenvalues
/// `lambda_x`, `lambda_y`.
pub fn peaceman_rachford_factor(lambda_x: f64, lambda_y: f64, dt: f64) -> f64 {
    crank_nicolson_factor(lambda_x, dt) * crank_nicolson_factor(lambda_y, dt)
}
