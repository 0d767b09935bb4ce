//! Latent score of an observation: the curve parameter of its nearest curve point.
//!
//! `g(s) = |x - f(s)|^2` is a degree-6 polynomial and can have two separated
//! basins, so golden-section search alone may settle in the wrong one. The
//! search scans a uniform grid first, then refines every grid-local minimum
//! with golden-section search inside its neighbouring grid cells and keeps the
//! best. Equal minima resolve to the larger parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bezier::{basis_unchecked, ControlPointMatrix};
use crate::error::{RankError, Result};
use crate::scalar::{squared_distance, Scalar};

/// Below this many points `project_all` stays on the calling thread.
const PARALLEL_THRESHOLD: usize = 512;

/// Two objective values closer than this (relative to `max(1, g)`) count as a tie.
const TIE_TOL: f64 = 1e-12;

/// Which of several equally good parameters to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    LargestS,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub grid_size: usize,
    pub gss_interval_tol: f64,
    pub tie_rule: TieRule,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            grid_size: 64,
            gss_interval_tol: 1e-6,
            tie_rule: TieRule::LargestS,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 3 {
            return Err(RankError::InvalidConfig(format!(
                "projection grid size must be >= 3, got {}",
                self.grid_size
            )));
        }
        if !(self.gss_interval_tol > 0.0 && self.gss_interval_tol < 1.0) {
            return Err(RankError::InvalidConfig(format!(
                "golden-section tolerance must lie in (0, 1), got {}",
                self.gss_interval_tol
            )));
        }
        Ok(())
    }
}

/// 1/phi, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `g` on `[lo, hi]`; stops once the bracket is
/// shorter than `tol`. Returns the better interior probe and its value.
pub fn golden_section_minimize<T, F>(g: F, mut lo: T, mut hi: T, tol: T) -> (T, T)
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let r = T::lit(INV_PHI);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let mut ga = g(a);
    let mut gb = g(b);
    // The bracket shrinks by 1/phi per step; 200 steps reach any f64 tolerance.
    for _ in 0..200 {
        if hi - lo < tol {
            break;
        }
        if ga < gb {
            hi = b;
            b = a;
            gb = ga;
            a = hi - r * (hi - lo);
            ga = g(a);
        } else {
            lo = a;
            a = b;
            ga = gb;
            b = lo + r * (hi - lo);
            gb = g(b);
        }
    }
    if ga < gb {
        (a, ga)
    } else {
        (b, gb)
    }
}

#[inline]
fn residual<T: Scalar>(p: &ControlPointMatrix<T>, x: &[T], s: T) -> T {
    let basis = basis_unchecked(s);
    p.combine(&basis)
        .zip(x)
        .map(|(f, &xi)| {
            let d = xi - f;
            d * d
        })
        .sum()
}

/// Keeps `(s, g)` candidates ordered so that the smallest `g` wins and near-equal
/// values go to the larger `s`.
fn better<T: Scalar>(cand: (T, T), best: (T, T)) -> bool {
    let scale = T::one().max(cand.1.abs()).max(best.1.abs());
    let tie = T::lit(TIE_TOL) * scale;
    if (cand.1 - best.1).abs() <= tie {
        cand.0 > best.0
    } else {
        cand.1 < best.1
    }
}

/// Parameter in `[0, 1]` minimizing `|x - f(s)|^2`.
pub fn project_point<T: Scalar>(p: &ControlPointMatrix<T>, x: &[T], cfg: &ProjectionConfig) -> T {
    debug_assert_eq!(p.dim(), x.len());
    let grid = cfg.grid_size.max(3);
    let last = T::from_usize_lossy(grid - 1);
    let knots: Vec<T> = (0..grid).map(|k| T::from_usize_lossy(k) / last).collect();
    let values: Vec<T> = knots.iter().map(|&s| residual(p, x, s)).collect();
    let tol = T::lit(cfg.gss_interval_tol);

    let mut best: Option<(T, T)> = None;
    for k in 0..grid {
        // grid-local minima; on a plateau only the rightmost knot qualifies
        let left_ok = k == 0 || values[k] <= values[k - 1];
        let right_ok = k + 1 == grid || values[k] < values[k + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = knots[k.saturating_sub(1)];
        let hi = knots[(k + 1).min(grid - 1)];
        let refined = golden_section_minimize(|s| residual(p, x, s), lo, hi, tol);
        let local = if refined.1 <= values[k] {
            refined
        } else {
            (knots[k], values[k])
        };
        best = Some(match best {
            Some(b) if !better(local, b) => b,
            _ => local,
        });
    }
    best.map_or(T::one(), |(s, _)| s.max(T::zero()).min(T::one()))
}

/// Squared reconstruction distance `|x - f(s)|^2`.
pub fn reconstruction_error<T: Scalar>(p: &ControlPointMatrix<T>, x: &[T], s: T) -> T {
    let f: Vec<T> = p.combine(&basis_unchecked(s)).collect();
    squared_distance(x, &f)
}

/// Projects every row of `x`; output order matches row order. Large batches
/// run on the rayon pool.
pub fn project_all<T: Scalar>(
    p: &ControlPointMatrix<T>,
    x: &[Vec<T>],
    cfg: &ProjectionConfig,
) -> Vec<T> {
    if x.len() < PARALLEL_THRESHOLD {
        project_all_sequential(p, x, cfg)
    } else {
        x.par_iter().map(|row| project_point(p, row, cfg)).collect()
    }
}

pub fn project_all_sequential<T: Scalar>(
    p: &ControlPointMatrix<T>,
    x: &[Vec<T>],
    cfg: &ProjectionConfig,
) -> Vec<T> {
    x.iter().map(|row| project_point(p, row, cfg)).collect()
}
