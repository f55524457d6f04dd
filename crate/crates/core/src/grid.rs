//! Rectangular grids and scalar fields.
//!
//! A grid with `nx` by `ny` intervals has points `0..=nx` in x and `0..=ny`
//! in y. Points with index `0` or `n` lie on the Dirichlet boundary, the
//! remaining `(nx - 1) * (ny - 1)` points are unknowns.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// Host susceptible, host infected and infected vector compartments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Compartment {
    S,
    I,
    V,
}

impl Compartment {
    pub const ALL: [Compartment; 3] = [Compartment::S, Compartment::I, Compartment::V];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Compartment::S => "S",
            Compartment::I => "I",
            Compartment::V => "V",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "S" | "s" => Some(Compartment::S),
            "I" | "i" => Some(Compartment::I),
            "V" | "v" => Some(Compartment::V),
            _ => None,
        }
    }
}

impl fmt::Display for Compartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Physical extent `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub const UNIT_SQUARE: Domain = Domain {
        x_lo: 0.0,
        x_hi: 1.0,
        y_lo: 0.0,
        y_hi: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.x_lo.is_finite() && self.x_hi.is_finite()) || self.x_hi <= self.x_lo {
            return Err(Error::invalid("domain", "x_hi must exceed x_lo"));
        }
        if !(self.y_lo.is_finite() && self.y_hi.is_finite()) || self.y_hi <= self.y_lo {
            return Err(Error::invalid("domain", "y_hi must exceed y_lo"));
        }
        Ok(())
    }

    pub fn dx(&self, nx: usize) -> f64 {
        (self.x_hi - self.x_lo) / nx as f64
    }

    pub fn dy(&self, ny: usize) -> f64 {
        (self.y_hi - self.y_lo) / ny as f64
    }
}

/// Interval counts of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub nx: usize,
    pub ny: usize,
}

impl Shape {
    pub fn new(nx: usize, ny: usize) -> Self {
        Shape { nx, ny }
    }

    pub fn intervals(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    pub fn interior_len(&self) -> usize {
        self.nx.saturating_sub(1) * self.ny.saturating_sub(1)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} intervals", self.nx, self.ny)
    }
}

/// One scalar field over all grid points, boundary included.
///
/// Storage is row-major in y: the value at `(i, j)` lives at `j * (nx + 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    shape: Shape,
    data: Vec<f64>,
}

impl Field2D {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self::constant(nx, ny, 0.0)
    }

    pub fn constant(nx: usize, ny: usize, value: f64) -> Self {
        Field2D {
            shape: Shape::new(nx, ny),
            data: vec![value; (nx + 1) * (ny + 1)],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                data.push(f(i, j));
            }
        }
        Field2D {
            shape: Shape::new(nx, ny),
            data,
        }
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        let expected = (nx + 1) * (ny + 1);
        if data.len() != expected {
            return Err(Error::mismatch(
                format!("{expected} values"),
                format!("{} values", data.len()),
            ));
        }
        Ok(Field2D {
            shape: Shape::new(nx, ny),
            data,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn nx(&self) -> usize {
        self.shape.nx
    }

    pub fn ny(&self) -> usize {
        self.shape.ny
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.shape.nx && j <= self.shape.ny);
        j * (self.shape.nx + 1) + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.data[k] = value;
    }

    /// All points of row `j`, boundary included.
    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.shape.nx + 1;
        &self.data[j * w..(j + 1) * w]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..=self.shape.ny).map(|j| self.get(i, j)).collect()
    }

    /// Values along one grid line: row `index` for [`Axis::X`], column `index` for [`Axis::Y`].
    pub fn line(&self, axis: Axis, index: usize) -> Vec<f64> {
        match axis {
            Axis::X => self.row(index).to_vec(),
            Axis::Y => self.column(index),
        }
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.shape.nx || j == self.shape.ny
    }

    pub fn fill_boundary(&mut self, value: f64) {
        self.fill_boundary_with(|_, _| value);
    }

    pub fn fill_boundary_with(&mut self, mut f: impl FnMut(usize, usize) -> f64) {
        let Shape { nx, ny } = self.shape;
        for i in 0..=nx {
            self.set(i, 0, f(i, 0));
            self.set(i, ny, f(i, ny));
        }
        for j in 1..ny {
            self.set(0, j, f(0, j));
            self.set(nx, j, f(nx, j));
        }
    }

    /// Interior values flattened row-major (`i` fastest).
    pub fn interior(&self) -> Vec<f64> {
        let Shape { nx, ny } = self.shape;
        let mut out = Vec::with_capacity(self.shape.interior_len());
        for j in 1..ny {
            out.extend_from_slice(&self.row(j)[1..nx]);
        }
        out
    }

    pub fn set_interior(&mut self, values: &[f64]) -> Result<()> {
        let Shape { nx, ny } = self.shape;
        if values.len() != self.shape.interior_len() {
            return Err(Error::mismatch(
                format!("{} interior values", self.shape.interior_len()),
                format!("{}", values.len()),
            ));
        }
        for (j, chunk) in (1..ny).zip(values.chunks(nx - 1)) {
            let start = self.offset(1, j);
            self.data[start..start + nx - 1].copy_from_slice(chunk);
        }
        Ok(())
    }

    /// Largest magnitude; NaN if any value is NaN.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, nan_max)
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, nan_max)
    }

    pub fn ensure_shape(&self, shape: Shape) -> Result<()> {
        if self.shape != shape {
            return Err(Error::mismatch(shape.to_string(), self.shape.to_string()));
        }
        Ok(())
    }
}

/// `max` that keeps NaN instead of discarding it.
pub(crate) fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_propagate_nan() {
        let mut f = Field2D::constant(3, 3, 1.0);
        f.set(1, 2, f64::NAN);
        assert!(f.max_abs().is_nan());
        assert!(f.max_abs_diff(&Field2D::zeros(3, 3)).is_nan());
    }

    #[test]
    fn interior_round_trip() {
        let f = Field2D::from_fn(4, 3, |i, j| (10 * j + i) as f64);
        let inner = f.interior();
        assert_eq!(inner, vec![11.0, 12.0, 13.0, 21.0, 22.0, 23.0]);
        let mut g = Field2D::zeros(4, 3);
        g.set_interior(&inner).unwrap();
        for j in 1..3 {
            for i in 1..4 {
                assert_eq!(g.get(i, j), f.get(i, j));
            }
        }
        assert_eq!(g.get(0, 1), 0.0);
    }

    #[test]
    fn boundary_fill_touches_only_edges() {
        let mut f = Field2D::zeros(3, 3);
        f.fill_boundary(1.0);
        let edge_count = f.as_slice().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(edge_count, 12);
        assert_eq!(f.get(1, 1), 0.0);
        assert_eq!(f.get(2, 2), 0.0);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(Field2D::from_vec(2, 2, vec![0.0; 8]).is_err());
        assert!(Field2D::from_vec(2, 2, vec![0.0; 9]).is_ok());
    }
}
