//! SIV host-vector reaction terms.
//!
//! ```text
//! g_S = mu (1 - S) - beta S V
//! g_I = beta S V - (mu + gamma) I
//! g_V = theta (1 - V) I - nu V
//! ```

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::grid::{Compartment, Field2D, Shape};
use crate::grunwald::Coefficient;

/// Diffusion coefficients of one compartment: `a` along x, `b` along y.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffusion {
    pub a: Coefficient,
    pub b: Coefficient,
}

impl Diffusion {
    pub fn constant(a: f64, b: f64) -> Self {
        Diffusion {
            a: Coefficient::Constant(a),
            b: Coefficient::Constant(b),
        }
    }

    pub fn none() -> Self {
        Self::constant(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SivParams {
    /// Host birth and death rate.
    pub mu: f64,
    /// Vector to host infection rate.
    pub beta: f64,
    /// Host recovery rate.
    pub gamma: f64,
    /// Host to vector infection rate.
    pub theta: f64,
    /// Vector birth and death rate.
    pub nu: f64,
    /// Indexed by [`Compartment::index`].
    pub diffusion: [Diffusion; 3],
}

impl SivParams {
    pub fn new(mu: f64, beta: f64, gamma: f64, theta: f64, nu: f64) -> Self {
        SivParams {
            mu,
            beta,
            gamma,
            theta,
            nu,
            diffusion: [Diffusion::none(), Diffusion::none(), Diffusion::none()],
        }
    }

    /// Same `a` and `b` for all three compartments.
    pub fn with_uniform_diffusion(mut self, a: f64, b: f64) -> Self {
        self.diffusion = [
            Diffusion::constant(a, b),
            Diffusion::constant(a, b),
            Diffusion::constant(a, b),
        ];
        self
    }

    pub fn with_diffusion(mut self, compartment: Compartment, diffusion: Diffusion) -> Self {
        self.diffusion[compartment.index()] = diffusion;
        self
    }

    pub fn diffusion(&self, compartment: Compartment) -> &Diffusion {
        &self.diffusion[compartment.index()]
    }

    /// Parameters with all rates zero: pure diffusion.
    pub fn without_reaction(&self) -> Self {
        SivParams {
            mu: 0.0,
            beta: 0.0,
            gamma: 0.0,
            theta: 0.0,
            nu: 0.0,
            diffusion: self.diffusion.clone(),
        }
    }

    pub fn validate(&self, shape: Shape) -> Result<()> {
        let rates = [
            ("mu", self.mu),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("theta", self.theta),
            ("nu", self.nu),
        ];
        for (name, value) in rates {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(name, format!("rate must be non-negative, got {value}")));
            }
        }
        for d in &self.diffusion {
            d.a.validate(shape)?;
            d.b.validate(shape)?;
        }
        Ok(())
    }
}

/// Reaction rates `(g_S, g_I, g_V)` at one point.
#[inline]
pub fn reaction_terms(p: &SivParams, s: f64, i: f64, v: f64) -> (f64, f64, f64) {
    let infection = p.beta * s * v;
    (
        p.mu * (1.0 - s) - infection,
        infection - (p.mu + p.gamma) * i,
        p.theta * (1.0 - v) * i - p.nu * v,
    )
}

/// Three compartment fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SivState {
    fields: [Field2D; 3],
}

impl SivState {
    pub fn new(s: Field2D, i: Field2D, v: Field2D) -> Result<Self> {
        i.ensure_shape(s.shape())?;
        v.ensure_shape(s.shape())?;
        Ok(SivState { fields: [s, i, v] })
    }

    pub fn zeros(nx: usize, ny: usize) -> Self {
        SivState {
            fields: [Field2D::zeros(nx, ny), Field2D::zeros(nx, ny), Field2D::zeros(nx, ny)],
        }
    }

    /// Spatially uniform interior values with homogeneous boundaries.
    pub fn uniform_interior(nx: usize, ny: usize, s: f64, i: f64, v: f64) -> Self {
        let make = |value: f64| {
            let mut f = Field2D::constant(nx, ny, value);
            f.fill_boundary(0.0);
            f
        };
        SivState {
            fields: [make(s), make(i), make(v)],
        }
    }

    pub fn shape(&self) -> Shape {
        self.fields[0].shape()
    }

    pub fn s(&self) -> &Field2D {
        &self.fields[0]
    }

    pub fn i(&self) -> &Field2D {
        &self.fields[1]
    }

    pub fn v(&self) -> &Field2D {
        &self.fields[2]
    }

    pub fn fields(&self) -> &[Field2D; 3] {
        &self.fields
    }

    pub fn into_fields(self) -> [Field2D; 3] {
        self.fields
    }

    pub fn max_abs_diff(&self, other: &SivState) -> f64 {
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, crate::grid::nan_max)
    }

    pub fn max_abs(&self) -> f64 {
        self.fields.iter().map(Field2D::max_abs).fold(0.0, crate::grid::nan_max)
    }
}

impl From<[Field2D; 3]> for SivState {
    /// Panics if the shapes differ; use [`SivState::new`] for checked construction.
    fn from(fields: [Field2D; 3]) -> Self {
        let [s, i, v] = fields;
        SivState::new(s, i, v).expect("compartment fields must share one grid")
    }
}

impl Index<Compartment> for SivState {
    type Output = Field2D;

    fn index(&self, c: Compartment) -> &Field2D {
        &self.fields[c.index()]
    }
}

impl IndexMut<Compartment> for SivState {
    fn index_mut(&mut self, c: Compartment) -> &mut Field2D {
        &mut self.fields[c.index()]
    }
}

/// Pointwise reaction over the interior; boundary points carry zero.
pub fn reaction_field(p: &SivParams, state: &SivState) -> SivState {
    let Shape { nx, ny } = state.shape();
    let mut out = SivState::zeros(nx, ny);
    for j in 1..ny {
        for i in 1..nx {
            let (gs, gi, gv) = reaction_terms(p, state.s().get(i, j), state.i().get(i, j), state.v().get(i, j));
            out[Compartment::S].set(i, j, gs);
            out[Compartment::I].set(i, j, gi);
            out[Compartment::V].set(i, j, gv);
        }
    }
    out
}

/// Right-hand side of the spatially homogeneous ODE system.
pub fn ode_rhs(p: &SivParams, y: [f64; 3]) -> [f64; 3] {
    let (s, i, v) = reaction_terms(p, y[0], y[1], y[2]);
    [s, i, v]
}
