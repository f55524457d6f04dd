//! Peaceman-Rachford ADI stepping of the two-sided fractional SIV system.
//!
//! One step of size `dt` with `Ax`, `Ay` the two-sided operators of a
//! compartment and `g` its reaction evaluated at the half step:
//!
//! ```text
//! (I - dt/2 Ax) X*      = (I + dt/2 Ay) X^n + dt/2 g      rows,    x implicit
//! (I - dt/2 Ay) X^{n+1} = (I + dt/2 Ax) X*  + dt/2 g      columns, y implicit
//! ```
//!
//! Multiplying the two sweeps together gives the factorized Crank-Nicolson
//! system `(I - dt/2 Ax)(I - dt/2 Ay) X^{n+1} = (I + dt/2 Ax)(I + dt/2 Ay) X^n + dt g`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, Compartment, Domain, Field2D, Shape};
use crate::grunwald::{grunwald_weights, validate_order, GrunwaldWeights, TwoSidedOperator};
use crate::siv::{reaction_field, reaction_terms, SivParams, SivState};
use crate::solver::SliceFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    /// Fractional order along x, in `(1, 2]`.
    pub alpha1: f64,
    /// Fractional order along y, in `(1, 2]`.
    pub alpha2: f64,
    /// Weight of the plus operator along x.
    pub r1: f64,
    /// Weight of the plus operator along y.
    pub r2: f64,
    pub dt: f64,
    /// Grid intervals along x; interior points are `1..nx`.
    pub nx: usize,
    /// Grid intervals along y; interior points are `1..ny`.
    pub ny: usize,
    pub domain: Domain,
    /// Extra passes that re-evaluate the reaction at the average of the old
    /// and new states. Zero keeps the plain predictor.
    pub corrector_iterations: usize,
}

impl SchemeConfig {
    pub fn new(alpha1: f64, alpha2: f64, dt: f64, nx: usize, ny: usize) -> Self {
        SchemeConfig {
            alpha1,
            alpha2,
            r1: 0.5,
            r2: 0.5,
            dt,
            nx,
            ny,
            domain: Domain::UNIT_SQUARE,
            corrector_iterations: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_order(self.alpha1)?;
        validate_order(self.alpha2)?;
        for (name, r) in [("r1", self.r1), ("r2", self.r2)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(name, format!("weight must lie in [0, 1], got {r}")));
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid("nx/ny", "need at least two intervals per axis"));
        }
        self.domain.validate()
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.nx, self.ny)
    }

    pub fn dx(&self) -> f64 {
        self.domain.dx(self.nx)
    }

    pub fn dy(&self) -> f64 {
        self.domain.dy(self.ny)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.domain.x_lo + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.domain.y_lo + j as f64 * self.dy()
    }

    /// Same configuration with both orders set to 2.
    pub fn classical(&self) -> Self {
        SchemeConfig {
            alpha1: 2.0,
            alpha2: 2.0,
            ..self.clone()
        }
    }
}

/// Prescribed Dirichlet data `value(compartment, x, y, t)`.
#[derive(Clone, Default)]
pub enum Dirichlet {
    #[default]
    Homogeneous,
    Prescribed(Arc<dyn Fn(Compartment, f64, f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Dirichlet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dirichlet::Homogeneous => f.write_str("Homogeneous"),
            Dirichlet::Prescribed(_) => f.write_str("Prescribed(..)"),
        }
    }
}

impl Dirichlet {
    pub fn prescribed(f: impl Fn(Compartment, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Dirichlet::Prescribed(Arc::new(f))
    }

    /// Overwrites the boundary of `field` with the data at time `t`.
    pub fn impose(&self, cfg: &SchemeConfig, c: Compartment, field: &mut Field2D, t: f64) {
        match self {
            Dirichlet::Homogeneous => field.fill_boundary(0.0),
            Dirichlet::Prescribed(f) => field.fill_boundary_with(|i, j| f(c, cfg.x(i), cfg.y(j), t)),
        }
    }

    pub fn impose_all(&self, cfg: &SchemeConfig, state: &mut SivState, t: f64) {
        for c in Compartment::ALL {
            self.impose(cfg, c, &mut state[c], t);
        }
    }

    /// Field that is zero inside and carries the data at time `t` on the boundary.
    pub fn boundary_state(&self, cfg: &SchemeConfig, t: f64) -> SivState {
        let mut state = SivState::zeros(cfg.nx, cfg.ny);
        self.impose_all(cfg, &mut state, t);
        state
    }
}

#[derive(Debug, Clone)]
struct CompartmentOperators {
    x: TwoSidedOperator,
    y: TwoSidedOperator,
    x_systems: SliceFamily,
    y_systems: SliceFamily,
}

/// Cached operators and factorized line systems for one `(config, params)` pair.
///
/// The workspace does not track changes to its inputs; build a new one (or
/// call [`AdiStepper::rebuild`]) after changing `dt`, orders, weights or
/// diffusion coefficients.
#[derive(Debug, Clone)]
pub struct AdiWorkspace {
    cfg: SchemeConfig,
    weights_x: Arc<GrunwaldWeights>,
    weights_y: Arc<GrunwaldWeights>,
    ops: [CompartmentOperators; 3],
}

impl AdiWorkspace {
    pub fn new(cfg: &SchemeConfig, params: &SivParams) -> Result<Self> {
        cfg.validate()?;
        params.validate(cfg.shape())?;
        let count = cfg.nx.max(cfg.ny) + 2;
        let weights_x = Arc::new(grunwald_weights(cfg.alpha1, count)?);
        let weights_y = if cfg.alpha2 == cfg.alpha1 {
            Arc::clone(&weights_x)
        } else {
            Arc::new(grunwald_weights(cfg.alpha2, count)?)
        };
        let build = |c: Compartment| -> Result<CompartmentOperators> {
            let d = params.diffusion(c);
            let x = TwoSidedOperator::new(
                Axis::X,
                cfg.alpha1,
                cfg.r1,
                cfg.dx(),
                d.a.clone(),
                cfg.shape(),
                Arc::clone(&weights_x),
            )?;
            let y = TwoSidedOperator::new(
                Axis::Y,
                cfg.alpha2,
                cfg.r2,
                cfg.dy(),
                d.b.clone(),
                cfg.shape(),
                Arc::clone(&weights_y),
            )?;
            let x_systems = SliceFamily::build(&x, cfg.dt)?;
            let y_systems = SliceFamily::build(&y, cfg.dt)?;
            Ok(CompartmentOperators {
                x,
                y,
                x_systems,
                y_systems,
            })
        };
        let ops = [
            build(Compartment::S).map_err(|e| e.in_compartment(Compartment::S))?,
            build(Compartment::I).map_err(|e| e.in_compartment(Compartment::I))?,
            build(Compartment::V).map_err(|e| e.in_compartment(Compartment::V))?,
        ];
        Ok(AdiWorkspace {
            cfg: cfg.clone(),
            weights_x,
            weights_y,
            ops,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn weights(&self, axis: Axis) -> &GrunwaldWeights {
        match axis {
            Axis::X => &self.weights_x,
            Axis::Y => &self.weights_y,
        }
    }

    pub fn operator(&self, c: Compartment, axis: Axis) -> &TwoSidedOperator {
        let ops = &self.ops[c.index()];
        match axis {
            Axis::X => &ops.x,
            Axis::Y => &ops.y,
        }
    }

    pub fn systems(&self, c: Compartment, axis: Axis) -> &SliceFamily {
        let ops = &self.ops[c.index()];
        match axis {
            Axis::X => &ops.x_systems,
            Axis::Y => &ops.y_systems,
        }
    }

    fn ensure_matches(&self, cfg: &SchemeConfig) -> Result<()> {
        if &self.cfg != cfg {
            return Err(Error::invalid(
                "workspace",
                "built for a different scheme configuration",
            ));
        }
        Ok(())
    }
}

/// Reaction evaluated at the explicit Euler predictor `X + dt/2 g(X)`.
pub fn half_step_reaction(p: &SivParams, state_n: &SivState, dt: f64) -> SivState {
    let Shape { nx, ny } = state_n.shape();
    let mut out = SivState::zeros(nx, ny);
    let half = dt / 2.0;
    for j in 1..ny {
        for i in 1..nx {
            let (s, inf, v) = (state_n.s().get(i, j), state_n.i().get(i, j), state_n.v().get(i, j));
            let (gs, gi, gv) = reaction_terms(p, s, inf, v);
            let (hs, hi, hv) = reaction_terms(p, s + half * gs, inf + half * gi, v + half * gv);
            out[Compartment::S].set(i, j, hs);
            out[Compartment::I].set(i, j, hi);
            out[Compartment::V].set(i, j, hv);
        }
    }
    out
}

/// Boundary columns `i = 0` and `i = nx` of an intermediate field, rows `1..ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateBoundary {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl IntermediateBoundary {
    pub fn zeros(ny: usize) -> Self {
        IntermediateBoundary {
            left: vec![0.0; ny - 1],
            right: vec![0.0; ny - 1],
        }
    }
}

/// `2 X* = (I - dt/2 Ay) X^{n+1} + (I + dt/2 Ay) X^n` on the two x-boundary
/// columns. Only boundary values of `x_np1` are read.
pub fn intermediate_boundary(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    c: Compartment,
    x_n: &Field2D,
    x_np1: &Field2D,
) -> Result<IntermediateBoundary> {
    ws.ensure_matches(cfg)?;
    x_n.ensure_shape(cfg.shape())?;
    x_np1.ensure_shape(cfg.shape())?;
    let ay = ws.operator(c, Axis::Y);
    let half = cfg.dt / 2.0;
    let column = |i: usize| -> Result<Vec<f64>> {
        let new = ay.apply(x_np1, i)?;
        let old = ay.apply(x_n, i)?;
        Ok((1..cfg.ny)
            .map(|j| {
                let k = j - 1;
                0.5 * ((x_np1.get(i, j) - half * new[k]) + (x_n.get(i, j) + half * old[k]))
            })
            .collect())
    };
    Ok(IntermediateBoundary {
        left: column(0)?,
        right: column(cfg.nx)?,
    })
}

fn sweep_x_one(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    c: Compartment,
    x_n: &Field2D,
    reaction: &Field2D,
    boundary: &IntermediateBoundary,
    x_np1: &Field2D,
) -> Result<Field2D> {
    let Shape { nx, ny } = cfg.shape();
    let half = cfg.dt / 2.0;
    let y_sys = ws.systems(c, Axis::Y);
    let x_sys = ws.systems(c, Axis::X);

    // explicit y part, one interior column at a time: explicit_y[i - 1][j - 1]
    let explicit_y: Vec<Vec<f64>> = (1..nx)
        .into_par_iter()
        .map(|i| y_sys.get(i).operator().apply(&x_n.column(i)).as_slice().to_vec())
        .collect();

    let rows: Vec<Vec<f64>> = (1..ny)
        .into_par_iter()
        .map(|j| {
            let sys = x_sys.get(j);
            let op = sys.operator();
            let (left, right) = (boundary.left[j - 1], boundary.right[j - 1]);
            let rhs: Vec<f64> = (1..nx)
                .map(|i| {
                    x_n.get(i, j)
                        + half * explicit_y[i - 1][j - 1]
                        + half * reaction.get(i, j)
                        + half * (op.first[i - 1] * left + op.last[i - 1] * right)
                })
                .collect();
            sys.solve(&rhs)
        })
        .collect::<Result<_>>()?;

    let mut star = Field2D::zeros(nx, ny);
    for (j, row) in (1..ny).zip(&rows) {
        for (i, &v) in (1..nx).zip(row) {
            star.set(i, j, v);
        }
        star.set(0, j, boundary.left[j - 1]);
        star.set(nx, j, boundary.right[j - 1]);
    }
    // rows 0 and ny of X* never enter the second sweep
    for i in 0..=nx {
        star.set(i, 0, 0.5 * (x_n.get(i, 0) + x_np1.get(i, 0)));
        star.set(i, ny, 0.5 * (x_n.get(i, ny) + x_np1.get(i, ny)));
    }
    Ok(star)
}

fn sweep_y_one(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    c: Compartment,
    star: &Field2D,
    reaction: &Field2D,
    x_np1_boundary: &Field2D,
) -> Result<Field2D> {
    let Shape { nx, ny } = cfg.shape();
    let half = cfg.dt / 2.0;
    let y_sys = ws.systems(c, Axis::Y);
    let x_sys = ws.systems(c, Axis::X);

    // explicit x part, one interior row at a time: explicit_x[j - 1][i - 1]
    let explicit_x: Vec<Vec<f64>> = (1..ny)
        .into_par_iter()
        .map(|j| x_sys.get(j).operator().apply(star.row(j)).as_slice().to_vec())
        .collect();

    let columns: Vec<Vec<f64>> = (1..nx)
        .into_par_iter()
        .map(|i| {
            let sys = y_sys.get(i);
            let op = sys.operator();
            let (bottom, top) = (x_np1_boundary.get(i, 0), x_np1_boundary.get(i, ny));
            let rhs: Vec<f64> = (1..ny)
                .map(|j| {
                    star.get(i, j)
                        + half * explicit_x[j - 1][i - 1]
                        + half * reaction.get(i, j)
                        + half * (op.first[j - 1] * bottom + op.last[j - 1] * top)
                })
                .collect();
            sys.solve(&rhs)
        })
        .collect::<Result<_>>()?;

    let mut out = x_np1_boundary.clone();
    for (i, col) in (1..nx).zip(&columns) {
        for (j, &v) in (1..ny).zip(col) {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// First sweep: implicit in x along every interior row, for all compartments.
///
/// `boundary` holds the intermediate values on the x-boundary columns, see
/// [`intermediate_boundary`]; `next_boundary` carries the Dirichlet data at
/// the new time level.
pub fn sweep_x(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    state_n: &SivState,
    reaction_half: &SivState,
    boundary: &[IntermediateBoundary; 3],
    next_boundary: &SivState,
) -> Result<SivState> {
    ws.ensure_matches(cfg)?;
    state_n.s().ensure_shape(cfg.shape())?;
    reaction_half.s().ensure_shape(cfg.shape())?;
    let mut out = Vec::with_capacity(3);
    for c in Compartment::ALL {
        let star = sweep_x_one(
            ws,
            cfg,
            c,
            &state_n[c],
            &reaction_half[c],
            &boundary[c.index()],
            &next_boundary[c],
        )
        .map_err(|e| e.in_compartment(c))?;
        out.push(star);
    }
    let [s, i, v]: [Field2D; 3] = out.try_into().expect("three compartments");
    SivState::new(s, i, v)
}

/// Second sweep: implicit in y along every interior column. The returned
/// state carries the boundary values of `next_boundary`.
pub fn sweep_y(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    intermediates: &SivState,
    reaction_half: &SivState,
    next_boundary: &SivState,
) -> Result<SivState> {
    ws.ensure_matches(cfg)?;
    intermediates.s().ensure_shape(cfg.shape())?;
    reaction_half.s().ensure_shape(cfg.shape())?;
    next_boundary.s().ensure_shape(cfg.shape())?;
    let mut out = Vec::with_capacity(3);
    for c in Compartment::ALL {
        let next = sweep_y_one(ws, cfg, c, &intermediates[c], &reaction_half[c], &next_boundary[c])
            .map_err(|e| e.in_compartment(c))?;
        out.push(next);
    }
    let [s, i, v]: [Field2D; 3] = out.try_into().expect("three compartments");
    SivState::new(s, i, v)
}

fn advance(
    ws: &AdiWorkspace,
    cfg: &SchemeConfig,
    p: &SivParams,
    state_n: &SivState,
    next_boundary: &SivState,
) -> Result<SivState> {
    let boundary = [
        intermediate_boundary(ws, cfg, Compartment::S, state_n.s(), next_boundary.s())?,
        intermediate_boundary(ws, cfg, Compartment::I, state_n.i(), next_boundary.i())?,
        intermediate_boundary(ws, cfg, Compartment::V, state_n.v(), next_boundary.v())?,
    ];
    let mut reaction = half_step_reaction(p, state_n, cfg.dt);
    let mut next = {
        let star = sweep_x(ws, cfg, state_n, &reaction, &boundary, next_boundary)?;
        sweep_y(ws, cfg, &star, &reaction, next_boundary)?
    };
    for _ in 0..cfg.corrector_iterations {
        let mid = average(state_n, &next);
        reaction = reaction_field(p, &mid);
        let star = sweep_x(ws, cfg, state_n, &reaction, &boundary, next_boundary)?;
        next = sweep_y(ws, cfg, &star, &reaction, next_boundary)?;
    }
    Ok(next)
}

fn average(a: &SivState, b: &SivState) -> SivState {
    let fields: Vec<Field2D> = a
        .fields()
        .iter()
        .zip(b.fields())
        .map(|(fa, fb)| {
            let data = fa
                .as_slice()
                .iter()
                .zip(fb.as_slice())
                .map(|(x, y)| 0.5 * (x + y))
                .collect();
            Field2D::from_vec(fa.nx(), fa.ny(), data).expect("same shape")
        })
        .collect();
    let [s, i, v]: [Field2D; 3] = fields.try_into().expect("three compartments");
    SivState::from([s, i, v])
}

/// One ADI step under homogeneous Dirichlet conditions.
pub fn step(ws: &AdiWorkspace, cfg: &SchemeConfig, p: &SivParams, state_n: &SivState) -> Result<SivState> {
    ws.ensure_matches(cfg)?;
    state_n.s().ensure_shape(cfg.shape())?;
    advance(ws, cfg, p, state_n, &SivState::zeros(cfg.nx, cfg.ny))
}

/// Owns a configuration, parameters, boundary data and the matching workspace.
#[derive(Debug, Clone)]
pub struct AdiStepper {
    params: SivParams,
    boundary: Dirichlet,
    ws: AdiWorkspace,
}

impl AdiStepper {
    pub fn new(cfg: SchemeConfig, params: SivParams) -> Result<Self> {
        let ws = AdiWorkspace::new(&cfg, &params)?;
        Ok(AdiStepper {
            params,
            boundary: Dirichlet::Homogeneous,
            ws,
        })
    }

    pub fn with_boundary(mut self, boundary: Dirichlet) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.ws.cfg
    }

    pub fn params(&self) -> &SivParams {
        &self.params
    }

    pub fn boundary(&self) -> &Dirichlet {
        &self.boundary
    }

    pub fn workspace(&self) -> &AdiWorkspace {
        &self.ws
    }

    /// Replaces configuration and parameters, refactorizing every line system.
    pub fn rebuild(&mut self, cfg: SchemeConfig, params: SivParams) -> Result<()> {
        self.ws = AdiWorkspace::new(&cfg, &params)?;
        self.params = params;
        Ok(())
    }

    /// Advances `state`, whose boundary holds the data at time `t`, to `t + dt`.
    pub fn step(&self, state: &SivState, t: f64) -> Result<SivState> {
        let cfg = &self.ws.cfg;
        state.s().ensure_shape(cfg.shape())?;
        let next_boundary = self.boundary.boundary_state(cfg, t + cfg.dt);
        advance(&self.ws, cfg, &self.params, state, &next_boundary)
    }
}
