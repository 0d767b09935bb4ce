//! Reference rankers: first principal component scores and median rank aggregation.

use serde::{Deserialize, Serialize};

use crate::dataset::{NormalizedDataset, OrientationVector};
use crate::error::{RankError, Result};
use crate::scalar::{dot, Scalar};

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;

/// Leading principal direction and the mean it is anchored at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel<T> {
    /// Unit loading vector.
    pub w: Vec<T>,
    /// Column means.
    pub mu: Vec<T>,
}

/// Sample covariance (divisor `n - 1`) and column means.
pub fn covariance<T: Scalar>(x: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<T>) {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let nf = T::from_usize_lossy(n);
    let mu: Vec<T> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<T>() / nf)
        .collect();
    let denom = T::from_usize_lossy(n.saturating_sub(1).max(1));
    let mut cov = vec![vec![T::zero(); d]; d];
    for row in x {
        for a in 0..d {
            let da = row[a] - mu[a];
            for b in a..d {
                cov[a][b] += da * (row[b] - mu[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    }
    (cov, mu)
}

fn mat_vec<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn normalized<T: Scalar>(v: &[T]) -> Option<Vec<T>> {
    let norm = dot(v, v).sqrt();
    (norm > T::zero() && norm.is_finite()).then(|| v.iter().map(|&x| x / norm).collect())
}

/// Power iteration from `start`; returns the unit vector and its Rayleigh quotient.
fn power_iterate<T: Scalar>(cov: &[Vec<T>], start: &[T]) -> Option<(Vec<T>, T)> {
    let mut v = normalized(start)?;
    let tol = T::lit(POWER_TOL);
    for _ in 0..POWER_MAX_ITER {
        let next = normalized(&mat_vec(cov, &v))?;
        let change = next
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        v = next;
        if change < tol {
            break;
        }
    }
    let rayleigh = dot(&v, &mat_vec(cov, &v));
    Some((v, rayleigh))
}

/// Dominant covariance eigenvector by power iteration, signed so that
/// `sum_j delta_j w_j >= 0`.
///
/// The iteration starts from the normalized ones vector. A second run starts
/// from the covariance column of largest norm, which cannot be orthogonal to
/// the dominant direction whenever the ones vector is; the run with the larger
/// Rayleigh quotient wins.
pub fn pca_first_component<T: Scalar>(
    nds: &NormalizedDataset<T>,
    alpha: &OrientationVector,
) -> Result<PcaModel<T>> {
    let n = nds.n_objects();
    if n < 2 {
        return Err(RankError::TooFewRows {
            needed: 2,
            actual: n,
        });
    }
    let d = nds.n_attributes();
    alpha.check_dim(d)?;
    let (cov, mu) = covariance(&nds.values);
    if cov.iter().flatten().all(|&c| c == T::zero()) {
        return Err(RankError::ZeroCovariance);
    }

    let ones = vec![T::one(); d];
    let widest = cov
        .iter()
        .max_by(|a, b| {
            dot(a, a)
                .partial_cmp(&dot(b, b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .cloned()
        .unwrap_or_else(|| ones.clone());
    let candidates = [power_iterate(&cov, &ones), power_iterate(&cov, &widest)];
    let (mut w, _) = candidates
        .into_iter()
        .flatten()
        .fold(None::<(Vec<T>, T)>, |best, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .ok_or(RankError::ZeroCovariance)?;

    let oriented: T = w
        .iter()
        .enumerate()
        .map(|(j, &v)| alpha.delta::<T>(j) * v)
        .sum();
    let flip = if oriented == T::zero() {
        w.iter()
            .find(|&&v| v != T::zero())
            .is_some_and(|&v| v < T::zero())
    } else {
        oriented < T::zero()
    };
    if flip {
        w.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(PcaModel { w, mu })
}

/// `w^T (x_i - mu)` for every row.
pub fn pca_scores<T: Scalar>(model: &PcaModel<T>, x: &[Vec<T>]) -> Result<Vec<T>> {
    x.iter()
        .map(|row| {
            if row.len() != model.w.len() {
                return Err(RankError::DimensionMismatch {
                    expected: model.w.len(),
                    actual: row.len(),
                });
            }
            Ok(row
                .iter()
                .zip(&model.mu)
                .zip(&model.w)
                .map(|((&v, &m), &w)| w * (v - m))
                .sum())
        })
        .collect()
}

/// Mean position of each object across `m` rank lists.
pub fn median_rank_aggregation<T: Scalar>(lists: &[Vec<T>]) -> Result<Vec<T>> {
    let first = lists.first().ok_or_else(|| {
        RankError::InvalidConfig("rank aggregation needs at least one list".into())
    })?;
    let n = first.len();
    if let Some(bad) = lists.iter().find(|l| l.len() != n) {
        return Err(RankError::DimensionMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let m = T::from_usize_lossy(lists.len());
    Ok((0..n)
        .map(|i| lists.iter().map(|l| l[i]).sum::<T>() / m)
        .collect())
}
