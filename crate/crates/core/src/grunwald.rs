//! Grünwald-Letnikov weights and the shifted one-sided fractional difference
//! operators built from them.
//!
//! For a grid line with points `0..=n` and spacing `h`, the two shifted
//! operators at an interior point `p` are
//!
//! ```text
//! minus: c_p / h^a * sum_{k=0}^{n-p+1} g_k * u[p + k - 1]
//! plus:  c_p / h^a * sum_{k=0}^{p+1}   g_k * u[p - k + 1]
//! ```
//!
//! The minus operator reaches toward increasing index and the plus operator
//! toward decreasing index. Both stencils end exactly on the boundary point.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D, Shape};

/// Rejects orders outside `(1, 2]`.
pub fn validate_order(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            format!("fractional order must lie in (1, 2], got {alpha}"),
        ))
    }
}

/// Coefficients `g_k = (-1)^k binom(alpha, k)` for `k = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrunwaldWeights {
    alpha: f64,
    coeffs: Vec<f64>,
}

impl GrunwaldWeights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn ensure_covers(&self, intervals: usize) -> Result<()> {
        if self.coeffs.len() < intervals + 1 {
            return Err(Error::mismatch(
                format!("at least {} weights", intervals + 1),
                format!("{}", self.coeffs.len()),
            ));
        }
        Ok(())
    }
}

/// Computes `count` Grünwald weights by the recurrence
/// `g_0 = 1`, `g_k = g_{k-1} (k - 1 - alpha) / k`.
pub fn grunwald_weights(alpha: f64, count: usize) -> Result<GrunwaldWeights> {
    validate_order(alpha)?;
    if count < 2 {
        return Err(Error::invalid("count", "need at least two weights"));
    }
    let mut coeffs = Vec::with_capacity(count);
    coeffs.push(1.0);
    for k in 1..count {
        let kf = k as f64;
        coeffs.push(coeffs[k - 1] * ((kf - 1.0 - alpha) / kf));
    }
    Ok(GrunwaldWeights { alpha, coeffs })
}

/// Which shifted sum an operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Sums over `u[p-1], u[p], u[p+1], ...` up to the far boundary.
    Minus,
    /// Sums over `u[p+1], u[p], u[p-1], ...` down to the near boundary.
    Plus,
}

/// Diffusion coefficient, either uniform or given per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Field(Arc<Field2D>),
}

impl Coefficient {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f.get(i, j),
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f.as_slice().iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn validate(&self, shape: Shape) -> Result<()> {
        match self {
            Coefficient::Constant(c) if !(c.is_finite() && *c >= 0.0) => Err(Error::invalid(
                "diffusion coefficient",
                format!("must be finite and non-negative, got {c}"),
            )),
            Coefficient::Field(f) => {
                f.ensure_shape(shape)?;
                if f.as_slice().iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return Err(Error::invalid(
                        "diffusion coefficient",
                        "field entries must be finite and non-negative",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(c: f64) -> Self {
        Coefficient::Constant(c)
    }
}

/// One shifted Grünwald operator acting along `axis` of fields of `shape`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalOperator {
    alpha: f64,
    side: Side,
    axis: Axis,
    spacing: f64,
    coeff: Coefficient,
    shape: Shape,
}

impl FractionalOperator {
    pub fn new(alpha: f64, side: Side, axis: Axis, spacing: f64, coeff: Coefficient, shape: Shape) -> Result<Self> {
        validate_order(alpha)?;
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
        }
        if shape.nx < 2 || shape.ny < 2 {
            return Err(Error::invalid("shape", "need at least two intervals per axis"));
        }
        coeff.validate(shape)?;
        Ok(FractionalOperator {
            alpha,
            side,
            axis,
            spacing,
            coeff,
            shape,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn coefficient(&self) -> &Coefficient {
        &self.coeff
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Intervals along the operator's axis.
    pub fn intervals(&self) -> usize {
        self.shape.intervals(self.axis)
    }

    fn slice_count(&self) -> usize {
        match self.axis {
            Axis::X => self.shape.ny,
            Axis::Y => self.shape.nx,
        }
    }

    /// `h^alpha`; the square is taken by multiplication so the classical
    /// limit reproduces `h * h` bit for bit.
    fn spacing_power(&self) -> f64 {
        let h = self.spacing;
        if self.alpha == 2.0 {
            h * h
        } else {
            h.powf(self.alpha)
        }
    }

    /// Scaled coefficient `c / h^alpha` at position `p` of line `slice`.
    fn scale_at(&self, slice: usize, p: usize) -> f64 {
        let c = match self.axis {
            Axis::X => self.coeff.at(p, slice),
            Axis::Y => self.coeff.at(slice, p),
        };
        c / self.spacing_power()
    }

    fn check(&self, weights: &GrunwaldWeights, slice: usize) -> Result<()> {
        if weights.alpha != self.alpha {
            return Err(Error::mismatch(
                format!("weights for alpha = {}", self.alpha),
                format!("alpha = {}", weights.alpha),
            ));
        }
        weights.ensure_covers(self.intervals())?;
        if slice > self.slice_count() {
            return Err(Error::mismatch(
                format!("slice index <= {}", self.slice_count()),
                format!("{slice}"),
            ));
        }
        Ok(())
    }

    /// Grid-space weight linking interior point `p` to point `m` of the same line.
    #[inline]
    fn stencil(&self, g: &[f64], p: usize, m: usize) -> f64 {
        // minus uses g_{m - p + 1}, plus uses g_{p - m + 1}
        let k = match self.side {
            Side::Minus => (m + 1).checked_sub(p),
            Side::Plus => (p + 1).checked_sub(m),
        };
        k.and_then(|k| g.get(k).copied()).unwrap_or(0.0)
    }

    /// Applies the operator to one line of `field`, returning values at the
    /// interior points `1..n` of that line.
    pub fn apply(&self, weights: &GrunwaldWeights, field: &Field2D, slice: usize) -> Result<Vec<f64>> {
        field.ensure_shape(self.shape)?;
        self.check(weights, slice)?;
        let line = field.line(self.axis, slice);
        Ok(self.apply_line(weights.coeffs(), &line, slice))
    }

    pub(crate) fn apply_line(&self, g: &[f64], line: &[f64], slice: usize) -> Vec<f64> {
        let n = line.len() - 1;
        (1..n)
            .map(|p| {
                let acc: f64 = match self.side {
                    Side::Minus => (0..=n + 1 - p).map(|k| g[k] * line[p + k - 1]).sum(),
                    Side::Plus => (0..=p + 1).map(|k| g[k] * line[p + 1 - k]).sum(),
                };
                self.scale_at(slice, p) * acc
            })
            .collect()
    }

    /// Dense form of [`FractionalOperator::apply`] over the interior of one line.
    pub fn matrix(&self, weights: &GrunwaldWeights, slice: usize) -> Result<AssembledOperator> {
        self.check(weights, slice)?;
        let n = self.intervals();
        let g = weights.coeffs();
        let m = n - 1;
        let mut matrix = DMatrix::zeros(m, m);
        let mut first = DVector::zeros(m);
        let mut last = DVector::zeros(m);
        for p in 1..n {
            let s = self.scale_at(slice, p);
            for q in 1..n {
                matrix[(p - 1, q - 1)] = s * self.stencil(g, p, q);
            }
            first[p - 1] = s * self.stencil(g, p, 0);
            last[p - 1] = s * self.stencil(g, p, n);
        }
        Ok(AssembledOperator { matrix, first, last })
    }
}

/// Matrix over the interior points of a line plus the two columns that
/// multiply its boundary values.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperator {
    pub matrix: DMatrix<f64>,
    pub first: DVector<f64>,
    pub last: DVector<f64>,
}

impl AssembledOperator {
    /// Contribution of the boundary values; zero under homogeneous Dirichlet data.
    pub fn boundary_load(&self, u_first: f64, u_last: f64) -> DVector<f64> {
        &self.first * u_first + &self.last * u_last
    }

    /// Applies the operator to a full line (boundary points included).
    pub fn apply(&self, line: &[f64]) -> DVector<f64> {
        let n = line.len() - 1;
        let interior = DVector::from_column_slice(&line[1..n]);
        &self.matrix * interior + self.boundary_load(line[0], line[n])
    }

    fn scaled_sum(a: &Self, wa: f64, b: &Self, wb: f64) -> Self {
        AssembledOperator {
            matrix: &a.matrix * wa + &b.matrix * wb,
            first: &a.first * wa + &b.first * wb,
            last: &a.last * wa + &b.last * wb,
        }
    }
}

/// Applies `op` to line `slice_index` of `field`.
pub fn apply_shifted(
    op: &FractionalOperator,
    weights: &GrunwaldWeights,
    field: &Field2D,
    slice_index: usize,
) -> Result<Vec<f64>> {
    op.apply(weights, field, slice_index)
}

/// Assembles `op` on line `slice_index`.
pub fn operator_matrix(
    op: &FractionalOperator,
    weights: &GrunwaldWeights,
    slice_index: usize,
) -> Result<AssembledOperator> {
    op.matrix(weights, slice_index)
}

/// Two-sided combination `(1 - r) * minus + r * plus` along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedOperator {
    pub minus: FractionalOperator,
    pub plus: FractionalOperator,
    pub r: f64,
    pub weights: Arc<GrunwaldWeights>,
}

impl TwoSidedOperator {
    pub fn new(
        axis: Axis,
        alpha: f64,
        r: f64,
        spacing: f64,
        coeff: Coefficient,
        shape: Shape,
        weights: Arc<GrunwaldWeights>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid("r", format!("weight must lie in [0, 1], got {r}")));
        }
        let minus = FractionalOperator::new(alpha, Side::Minus, axis, spacing, coeff.clone(), shape)?;
        let plus = FractionalOperator::new(alpha, Side::Plus, axis, spacing, coeff, shape)?;
        minus.check(&weights, 0)?;
        Ok(TwoSidedOperator {
            minus,
            plus,
            r,
            weights,
        })
    }

    pub fn axis(&self) -> Axis {
        self.minus.axis
    }

    pub fn shape(&self) -> Shape {
        self.minus.shape
    }

    pub fn apply(&self, field: &Field2D, slice: usize) -> Result<Vec<f64>> {
        let m = self.minus.apply(&self.weights, field, slice)?;
        let p = self.plus.apply(&self.weights, field, slice)?;
        Ok(m.into_iter()
            .zip(p)
            .map(|(m, p)| (1.0 - self.r) * m + self.r * p)
            .collect())
    }

    pub fn matrix(&self, slice: usize) -> Result<AssembledOperator> {
        let m = self.minus.matrix(&self.weights, slice)?;
        let p = self.plus.matrix(&self.weights, slice)?;
        Ok(AssembledOperator::scaled_sum(&m, 1.0 - self.r, &p, self.r))
    }

    /// Coefficient values along line `slice`, used to detect slices that can
    /// share one factorization.
    pub(crate) fn coefficient_signature(&self, slice: usize) -> Vec<u64> {
        let n = self.minus.intervals();
        match &self.minus.coeff {
            Coefficient::Constant(c) => vec![c.to_bits()],
            Coefficient::Field(_) => (1..n).map(|p| self.minus.scale_at(slice, p).to_bits()).collect(),
        }
    }
}
