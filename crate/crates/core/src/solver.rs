//! Per-line implicit systems `(I - dt/2 * C) u = rhs` for the two-sided
//! operator `C = (1 - r) * minus + r * plus`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::grunwald::{AssembledOperator, FractionalOperator, GrunwaldWeights, TwoSidedOperator};

/// Factorized implicit system for one grid line.
#[derive(Debug, Clone)]
pub struct SliceSystem {
    axis: Axis,
    slice_index: usize,
    dt: f64,
    operator: AssembledOperator,
    matrix: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl SliceSystem {
    /// Builds `I - dt/2 * operator` and factorizes it with partial pivoting.
    pub fn from_operator(axis: Axis, slice_index: usize, dt: f64, operator: AssembledOperator) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::invalid("dt", format!("must be non-negative, got {dt}")));
        }
        let n = operator.matrix.nrows();
        let matrix = DMatrix::identity(n, n) - &operator.matrix * (dt / 2.0);
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem {
                axis,
                slice: slice_index,
            });
        }
        Ok(SliceSystem {
            axis,
            slice_index,
            dt,
            operator,
            matrix,
            lu,
        })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Line the system was first built for; shared systems keep that index.
    pub fn slice_index(&self) -> usize {
        self.slice_index
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn operator(&self) -> &AssembledOperator {
        &self.operator
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::mismatch(
                format!("rhs of length {}", self.dim()),
                format!("{}", rhs.len()),
            ));
        }
        let b = DVector::from_column_slice(rhs);
        let x = self.lu.solve(&b).ok_or(Error::SingularSystem {
            axis: self.axis,
            slice: self.slice_index,
        })?;
        Ok(x.as_slice().to_vec())
    }

    /// `max |P L U - A| / max |A|`.
    pub fn factorization_residual(&self) -> f64 {
        let mut plu = self.lu.l() * self.lu.u();
        self.lu.p().inv_permute_rows(&mut plu);
        let scale = self.matrix.amax();
        (plu - &self.matrix).amax() / scale
    }
}

pub fn build_slice_system(
    axis: Axis,
    slice_index: usize,
    dt: f64,
    r: f64,
    op_minus: &FractionalOperator,
    op_plus: &FractionalOperator,
    weights: &GrunwaldWeights,
) -> Result<SliceSystem> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid("r", format!("weight must lie in [0, 1], got {r}")));
    }
    if op_minus.axis() != axis || op_plus.axis() != axis {
        return Err(Error::mismatch(format!("operators along {axis}"), "other axis"));
    }
    let m = op_minus.matrix(weights, slice_index)?;
    let p = op_plus.matrix(weights, slice_index)?;
    let combined = AssembledOperator {
        matrix: &m.matrix * (1.0 - r) + &p.matrix * r,
        first: &m.first * (1.0 - r) + &p.first * r,
        last: &m.last * (1.0 - r) + &p.last * r,
    };
    SliceSystem::from_operator(axis, slice_index, dt, combined)
}

pub fn solve_slice(sys: &SliceSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    sys.solve(rhs)
}

/// Systems for every interior line of one axis. Lines whose coefficients are
/// identical share a single factorization.
#[derive(Debug, Clone)]
pub struct SliceFamily {
    systems: Vec<Arc<SliceSystem>>,
}

impl SliceFamily {
    pub fn build(op: &TwoSidedOperator, dt: f64) -> Result<Self> {
        let lines = match op.axis() {
            Axis::X => op.shape().ny,
            Axis::Y => op.shape().nx,
        };
        let mut seen: HashMap<Vec<u64>, Arc<SliceSystem>> = HashMap::new();
        let mut systems = Vec::with_capacity(lines.saturating_sub(1));
        for slice in 1..lines {
            let key = op.coefficient_signature(slice);
            let sys = match seen.get(&key) {
                Some(sys) => Arc::clone(sys),
                None => {
                    let sys = Arc::new(SliceSystem::from_operator(op.axis(), slice, dt, op.matrix(slice)?)?);
                    seen.insert(key, Arc::clone(&sys));
                    sys
                }
            };
            systems.push(sys);
        }
        Ok(SliceFamily { systems })
    }

    /// System for interior line `slice` (1-based, as on the grid).
    pub fn get(&self, slice: usize) -> &SliceSystem {
        &self.systems[slice - 1]
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    /// Number of distinct factorizations held.
    pub fn distinct(&self) -> usize {
        let mut ptrs: Vec<*const SliceSystem> = self.systems.iter().map(Arc::as_ptr).collect();
        ptrs.sort();
        ptrs.dedup();
        ptrs.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field2D, Shape};
    use crate::grunwald::{grunwald_weights, Coefficient, Side};

    fn ops(alpha: f64, n: usize, h: f64, a: f64) -> (FractionalOperator, FractionalOperator, GrunwaldWeights) {
        let shape = Shape::new(n, 3);
        let w = grunwald_weights(alpha, n + 2).unwrap();
        let m = FractionalOperator::new(alpha, Side::Minus, Axis::X, h, a.into(), shape).unwrap();
        let p = FractionalOperator::new(alpha, Side::Plus, Axis::X, h, a.into(), shape).unwrap();
        (m, p, w)
    }

    /// Deterministic pseudo-random values in [-1, 1).
    fn noise(len: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn zero_dt_gives_identity() {
        let (m, p, w) = ops(1.5, 8, 0.1, 1.0);
        let sys = build_slice_system(Axis::X, 1, 0.0, 0.3, &m, &p, &w).unwrap();
        assert_eq!(sys.matrix(), &DMatrix::identity(7, 7));
        let rhs = noise(7, 3);
        assert_eq!(sys.solve(&rhs).unwrap(), rhs);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (m, p, w) = ops(1.2, 10, 0.1, 0.5);
        let sys = build_slice_system(Axis::X, 2, 0.01, 0.5, &m, &p, &w).unwrap();
        assert!(sys.solve(&[0.0; 9]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn classical_half_step_matrix() {
        let (h, a, dt) = (0.125, 0.7, 0.01);
        let (m, p, w) = ops(2.0, 8, h, a);
        let sys = build_slice_system(Axis::X, 1, dt, 0.5, &m, &p, &w).unwrap();
        let c = a / (h * h);
        let mut expected = DMatrix::identity(7, 7);
        for i in 0..7 {
            expected[(i, i)] -= (dt / 2.0) * (c * -2.0);
            if i > 0 {
                expected[(i, i - 1)] -= (dt / 2.0) * (c * 1.0);
                expected[(i - 1, i)] -= (dt / 2.0) * (c * 1.0);
            }
        }
        assert_eq!(sys.matrix(), &expected);
    }

    #[test]
    fn round_trip_and_residual() {
        for (seed, &alpha) in [1.2, 1.5, 2.0].iter().enumerate() {
            let (m, p, w) = ops(alpha, 24, 1.0 / 24.0, 0.8);
            let sys = build_slice_system(Axis::X, 1, 0.05, 0.3, &m, &p, &w).unwrap();
            assert!(sys.factorization_residual() <= 1e-12);
            let u_true = noise(23, seed as u64);
            let rhs = (sys.matrix() * DVector::from_column_slice(&u_true)).as_slice().to_vec();
            let u = sys.solve(&rhs).unwrap();
            let scale = u_true.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let err = u.iter().zip(&u_true).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(err <= 1e-10 * scale, "alpha={alpha} err={err}");

            let residual = (sys.matrix() * DVector::from_column_slice(&u) - DVector::from_column_slice(&rhs)).amax();
            let rhs_norm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(residual <= 1e-10 * rhs_norm);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let (m, p, w) = ops(1.5, 6, 0.1, 1.0);
        assert!(build_slice_system(Axis::X, 1, 0.01, 1.5, &m, &p, &w).is_err());
        assert!(build_slice_system(Axis::Y, 1, 0.01, 0.5, &m, &p, &w).is_err());
        assert!(build_slice_system(Axis::X, 1, -1.0, 0.5, &m, &p, &w).is_err());
        let sys = build_slice_system(Axis::X, 1, 0.01, 0.5, &m, &p, &w).unwrap();
        assert!(sys.solve(&[1.0; 3]).is_err());
    }

    #[test]
    fn singular_system_is_reported() {
        // dt/2 * C = I on a single unknown
        let op = AssembledOperator {
            matrix: DMatrix::from_element(1, 1, 2.0),
            first: DVector::zeros(1),
            last: DVector::zeros(1),
        };
        assert!(matches!(
            SliceSystem::from_operator(Axis::X, 1, 1.0, op),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn shared_factorization_matches_per_slice() {
        let shape = Shape::new(10, 6);
        let w = Arc::new(grunwald_weights(1.4, 12).unwrap());
        // rows 1..=3 share coefficients, rows 4, 5 differ
        let coeff = Field2D::from_fn(
            10,
            6,
            |i, j| if j <= 3 { 0.5 + 0.01 * i as f64 } else { 0.2 * j as f64 },
        );
        let op = TwoSidedOperator::new(
            Axis::X,
            1.4,
            0.4,
            0.1,
            Coefficient::Field(Arc::new(coeff)),
            shape,
            Arc::clone(&w),
        )
        .unwrap();
        let family = SliceFamily::build(&op, 0.02).unwrap();
        assert_eq!(family.len(), 5);
        assert_eq!(family.distinct(), 3);
        let rhs = noise(9, 11);
        for slice in 1..6 {
            let own = SliceSystem::from_operator(Axis::X, slice, 0.02, op.matrix(slice).unwrap()).unwrap();
            assert_eq!(family.get(slice).solve(&rhs).unwrap(), own.solve(&rhs).unwrap());
        }

        let constant = TwoSidedOperator::new(Axis::Y, 1.4, 0.4, 0.1, 0.3.into(), shape, w).unwrap();
        assert_eq!(SliceFamily::build(&constant, 0.02).unwrap().distinct(), 1);
    }
}
