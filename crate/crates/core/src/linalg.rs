//! Dense helpers for the tiny matrices the fitter works with.

use crate::scalar::Scalar;

pub type Mat4<T> = [[T; 4]; 4];

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: Vec<Vec<T>>,
}

fn off_diagonal_norm<T: Scalar>(a: &[Vec<T>]) -> T {
    let mut acc = T::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j {
                acc += v * v;
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi rotations on a symmetric matrix. Sweeps stop once the
/// off-diagonal Frobenius norm drops below `1e-12`, or below the rounding floor
/// `n * eps * |A|_F` for matrices too large in magnitude to reach it.
pub fn jacobi_eigen<T: Scalar>(matrix: &[Vec<T>]) -> SymmetricEigen<T> {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let frob = a.iter().flatten().map(|&x| x * x).sum::<T>().sqrt();
    let floor = T::from_usize_lossy(n.max(1)) * T::epsilon() * frob;
    let tol = T::lit(JACOBI_OFFDIAG_TOL).max(floor);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i][i]
            .partial_cmp(&a[j][j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    SymmetricEigen {
        values: order.iter().map(|&k| a[k][k]).collect(),
        vectors: order
            .iter()
            .map(|&k| v.iter().map(|row| row[k]).collect())
            .collect(),
    }
}

pub(crate) fn mat4_to_rows<T: Scalar>(m: &Mat4<T>) -> Vec<Vec<T>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD 4x4 matrix via its
/// eigen-decomposition; eigenvalues below `rcond * lambda_max` are dropped.
pub fn pinv_symmetric4<T: Scalar>(m: &Mat4<T>, rcond: T) -> Mat4<T> {
    let eig = jacobi_eigen(&mat4_to_rows(m));
    let lmax = eig
        .values
        .iter()
        .fold(T::zero(), |acc, &l| acc.max(l.abs()));
    let cutoff = rcond * lmax;
    let mut out = [[T::zero(); 4]; 4];
    for (lambda, vec) in eig.values.iter().zip(&eig.vectors) {
        if lambda.abs() <= cutoff || *lambda == T::zero() {
            continue;
        }
        let inv = T::one() / *lambda;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += inv * vec[i] * vec[j];
            }
        }
    }
    out
}
