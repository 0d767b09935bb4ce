//! Cubic Bezier curves in matrix form `f(s) = P M z`, with `z = (1, s, s^2, s^3)`.
//!
//! `P` is stored attribute-major: row `j` holds the `j`-th coordinate of the
//! four points `p0..p3`, so a curve coordinate is the dot product of that row
//! with the Bernstein vector `M z`.

use serde::{Deserialize, Serialize};

use crate::dataset::OrientationVector;
use crate::error::{RankError, Result};
use crate::scalar::Scalar;

/// Cubic Bernstein coefficient matrix; row `r` holds the power-basis
/// coefficients of `B_r^3`.
pub const BEZIER_BASIS: [[f64; 4]; 4] = [
    [1.0, -3.0, 3.0, -1.0],
    [0.0, 3.0, -6.0, 3.0],
    [0.0, 0.0, 3.0, -3.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Endpoint corner tolerance for [`check_monotone_admissible`].
pub const ADMISSIBLE_CORNER_TOL: f64 = 1e-9;

/// Default sample count for [`sample_curve_monotonicity`].
pub const DEFAULT_MONOTONICITY_GRID: usize = 1000;

/// `d x 4` control-point matrix. Columns are `p0` (start), `p1`, `p2`
/// (shape controls) and `p3` (end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ControlPointMatrix<T> {
    rows: Vec<[T; 4]>,
}

impl<T: Scalar> ControlPointMatrix<T> {
    pub fn from_rows(rows: Vec<[T; 4]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(RankError::NoAttributes);
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RankError::NonFinite("control points"));
        }
        Ok(Self { rows })
    }

    /// Builds `P` from its four columns, each a `d`-vector.
    pub fn from_columns(p0: &[T], p1: &[T], p2: &[T], p3: &[T]) -> Result<Self> {
        let d = p0.len();
        for col in [p1, p2, p3] {
            if col.len() != d {
                return Err(RankError::DimensionMismatch {
                    expected: d,
                    actual: col.len(),
                });
            }
        }
        Self::from_rows((0..d).map(|j| [p0[j], p1[j], p2[j], p3[j]]).collect())
    }

    /// Straight segment from `start` to `end` with equally spaced controls,
    /// which parameterizes the segment at unit speed in `s`.
    pub fn linear(start: &[T], end: &[T]) -> Result<Self> {
        let third = T::lit(1.0 / 3.0);
        let two_thirds = T::lit(2.0 / 3.0);
        let p1: Vec<T> = start
            .iter()
            .zip(end)
            .map(|(&a, &b)| a + (b - a) * third)
            .collect();
        let p2: Vec<T> = start
            .iter()
            .zip(end)
            .map(|(&a, &b)| a + (b - a) * two_thirds)
            .collect();
        Self::from_columns(start, &p1, &p2, end)
    }

    /// The unit diagonal from `(1 - alpha) / 2` to `(1 + alpha) / 2`.
    pub fn diagonal(alpha: &OrientationVector) -> Self {
        Self::linear(&alpha.start_corner(), &alpha.end_corner()).expect("corner points are finite")
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[T; 4]] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [[T; 4]] {
        &mut self.rows
    }

    pub fn column(&self, r: usize) -> Vec<T> {
        self.rows.iter().map(|row| row[r]).collect()
    }

    pub fn set_column(&mut self, r: usize, values: &[T]) {
        for (row, &v) in self.rows.iter_mut().zip(values) {
            row[r] = v;
        }
    }

    /// Number of free parameters, `4 d`.
    pub fn parameter_count(&self) -> usize {
        4 * self.dim()
    }

    /// Curve point at `s`.
    pub fn evaluate(&self, s: T) -> Result<Vec<T>> {
        evaluate_curve(self, s)
    }

    pub fn derivative(&self, s: T) -> Result<Vec<T>> {
        curve_derivative(self, s)
    }

    /// Curve point for a precomputed Bernstein vector, no range checks.
    #[inline]
    pub(crate) fn combine(&self, basis: &[T; 4]) -> impl Iterator<Item = T> + '_ {
        let basis = *basis;
        self.rows.iter().map(move |row| {
            row[0] * basis[0] + row[1] * basis[1] + row[2] * basis[2] + row[3] * basis[3]
        })
    }
}

fn check_parameter<T: Scalar>(s: T) -> Result<()> {
    if s >= T::zero() && s <= T::one() {
        Ok(())
    } else {
        Err(RankError::ParameterOutOfRange(s.to_f64_lossy()))
    }
}

/// `M z` for `z = (1, s, s^2, s^3)`; equals the four cubic Bernstein values.
#[inline]
pub(crate) fn basis_unchecked<T: Scalar>(s: T) -> [T; 4] {
    let z = [T::one(), s, s * s, s * s * s];
    let mut out = [T::zero(); 4];
    for (r, coeffs) in BEZIER_BASIS.iter().enumerate() {
        out[r] = coeffs.iter().zip(&z).map(|(&c, &zk)| T::lit(c) * zk).sum();
    }
    out
}

/// `(B_0^3(s), B_1^3(s), B_2^3(s), B_3^3(s))`.
pub fn bernstein_basis<T: Scalar>(s: T) -> Result<[T; 4]> {
    check_parameter(s)?;
    Ok(basis_unchecked(s))
}

pub fn evaluate_curve<T: Scalar>(p: &ControlPointMatrix<T>, s: T) -> Result<Vec<T>> {
    check_parameter(s)?;
    Ok(p.combine(&basis_unchecked(s)).collect())
}

#[inline]
pub(crate) fn derivative_unchecked<T: Scalar>(p: &ControlPointMatrix<T>, s: T) -> Vec<T> {
    let t = T::one() - s;
    let three = T::lit(3.0);
    let b0 = t * t;
    let b1 = T::lit(2.0) * s * t;
    let b2 = s * s;
    p.rows
        .iter()
        .map(|row| {
            three * (b0 * (row[1] - row[0]) + b1 * (row[2] - row[1]) + b2 * (row[3] - row[2]))
        })
        .collect()
}

/// `f'(s)`, a quadratic Bezier curve on the control-point differences.
pub fn curve_derivative<T: Scalar>(p: &ControlPointMatrix<T>, s: T) -> Result<Vec<T>> {
    check_parameter(s)?;
    Ok(derivative_unchecked(p, s))
}

/// Returns `P'` with `p'_r = scale * p_r + offset` for every point, so that
/// `f'(s) = scale * f(s) + offset` pointwise.
pub fn affine_transform_curve<T: Scalar>(
    p: &ControlPointMatrix<T>,
    scale: &[T],
    offset: &[T],
) -> Result<ControlPointMatrix<T>> {
    for len in [scale.len(), offset.len()] {
        if len != p.dim() {
            return Err(RankError::DimensionMismatch {
                expected: p.dim(),
                actual: len,
            });
        }
    }
    let rows = p
        .rows
        .iter()
        .enumerate()
        .map(|(j, row)| row.map(|v| scale[j] * v + offset[j]))
        .collect();
    ControlPointMatrix::from_rows(rows)
}

/// Sufficient monotonicity test: endpoints at the orientation corners and
/// both shape controls strictly inside the unit hypercube.
pub fn check_monotone_admissible<T: Scalar>(
    p: &ControlPointMatrix<T>,
    alpha: &OrientationVector,
) -> bool {
    if alpha.len() != p.dim() {
        return false;
    }
    let tol = T::lit(ADMISSIBLE_CORNER_TOL);
    let start = alpha.start_corner::<T>();
    let end = alpha.end_corner::<T>();
    p.rows.iter().enumerate().all(|(j, row)| {
        (row[0] - start[j]).abs() <= tol
            && (row[3] - end[j]).abs() <= tol
            && row[1] > T::zero()
            && row[1] < T::one()
            && row[2] > T::zero()
            && row[2] < T::one()
    })
}

/// Result of a sampled monotonicity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MonotonicityVerdict {
    Pass,
    /// `delta_j * f'_j(s) <= 0` at parameter `s` for attribute `attribute`.
    Fail {
        s: f64,
        attribute: usize,
    },
}

impl MonotonicityVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass)
    }
}

/// Checks `delta_j * f'_j(s) > 0` on `grid_size` equispaced samples of `[0, 1]`
/// and reports the first offending sample.
pub fn sample_curve_monotonicity<T: Scalar>(
    p: &ControlPointMatrix<T>,
    alpha: &OrientationVector,
    grid_size: usize,
) -> MonotonicityVerdict {
    let grid_size = grid_size.max(2);
    let last = T::from_usize_lossy(grid_size - 1);
    for k in 0..grid_size {
        let s = T::from_usize_lossy(k) / last;
        let deriv = derivative_unchecked(p, s);
        for (j, &v) in deriv.iter().enumerate() {
            let signed = if j < alpha.len() {
                alpha.delta::<T>(j) * v
            } else {
                v
            };
            if !(signed > T::zero()) {
                return MonotonicityVerdict::Fail {
                    s: s.to_f64_lossy(),
                    attribute: j,
                };
            }
        }
    }
    MonotonicityVerdict::Pass
}
