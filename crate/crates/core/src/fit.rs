//! Alternating minimization of `J(P, s) = sum_i |x_i - P M z_i|^2`.
//!
//! Each iteration takes one preconditioned Richardson step on `P` for the
//! current scores, then re-projects every observation onto the new curve.
//! `B = M Z` (column `i` is the Bernstein vector of `s_i`) appears throughout;
//! `A = B B^T` is the 4x4 Gram matrix and `X B^T` the `d x 4` data moment.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bezier::{
    affine_transform_curve, basis_unchecked, sample_curve_monotonicity, ControlPointMatrix,
    MonotonicityVerdict, DEFAULT_MONOTONICITY_GRID,
};
use crate::dataset::{NormalizedDataset, OrientationVector};
use crate::error::{RankError, Result};
use crate::linalg::{jacobi_eigen, mat4_to_rows, pinv_symmetric4, Mat4};
use crate::projection::{project_all, project_point, ProjectionConfig};
use crate::scalar::{squared_distance, Scalar};

/// Symmetry tolerance accepted by [`step_size_gamma`].
const SYMMETRY_TOL: f64 = 1e-10;
/// Relative cutoff for discarding eigenvalues in the pseudo-inverse.
const PINV_RCOND: f64 = 1e-12;
/// Floor for the relative decrease denominator.
const RELATIVE_FLOOR: f64 = 1e-12;

/// How the curve endpoints `p0` and `p3` are treated during learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointMode {
    /// All four columns follow the Richardson update.
    #[default]
    Free,
    /// `p0` and `p3` stay pinned to the orientation corners.
    Fixed,
}

impl std::str::FromStr for EndpointMode {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Self::Free),
            "fixed" => Ok(Self::Fixed),
            other => Err(RankError::InvalidConfig(format!(
                "endpoint mode must be `free` or `fixed`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Stop once `|dJ| / max(J, 1e-12)` falls below this.
    pub xi: f64,
    pub max_iter: usize,
    pub endpoints: EndpointMode,
    /// Clamp control points into `[clamp_margin, 1 - clamp_margin]` after each step.
    pub clamp: bool,
    pub clamp_margin: f64,
    pub seed: u64,
    pub step_rule: StepRule,
    pub projection: ProjectionConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            xi: 1e-6,
            max_iter: 500,
            endpoints: EndpointMode::Free,
            clamp: false,
            clamp_margin: 1e-6,
            seed: 0,
            step_rule: StepRule::default(),
            projection: ProjectionConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) {
            return Err(RankError::InvalidConfig(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if self.max_iter == 0 {
            return Err(RankError::InvalidConfig(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.clamp_margin > 0.0 && self.clamp_margin < 0.5) {
            return Err(RankError::InvalidConfig(format!(
                "clamp margin must lie in (0, 0.5), got {}",
                self.clamp_margin
            )));
        }
        self.projection.validate()
    }
}

/// Latent scores `s_i` in `[0, 1]`, one per object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector<T>(Vec<T>);

impl<T: Scalar> ScoreVector<T> {
    pub fn new(scores: Vec<T>) -> Result<Self> {
        if scores.iter().any(|&s| !(s >= T::zero() && s <= T::one())) {
            return Err(RankError::InvalidConfig("scores must lie in [0, 1]".into()));
        }
        Ok(Self(scores))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    /// `B = M Z` as its `n` columns.
    pub fn bernstein_columns(&self) -> Vec<[T; 4]> {
        self.0.iter().map(|&s| basis_unchecked(s)).collect()
    }

    fn is_degenerate(&self) -> bool {
        self.0.len() >= 2 && self.0.iter().all(|&s| s == self.0[0])
    }
}

/// Everything a fit run records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport<T> {
    /// Objective after initialization and after every accepted update.
    pub j_trajectory: Vec<T>,
    /// Richardson updates attempted, including a rejected final one.
    pub iterations: usize,
    /// A stopping rule fired before `max_iter` ran out.
    pub converged: bool,
    /// The last update raised `J` and was rolled back.
    pub stopped_on_increase: bool,
    pub explained_variance: T,
    pub monotone: MonotonicityVerdict,
    pub residual_norms: Vec<T>,
    #[serde(rename = "P_normalized")]
    pub p_normalized: ControlPointMatrix<T>,
    #[serde(rename = "P_original")]
    pub p_original: ControlPointMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome<T> {
    pub control_points: ControlPointMatrix<T>,
    pub scores: ScoreVector<T>,
    pub report: FitReport<T>,
}

impl<T: Scalar> FitOutcome<T> {
    /// Objective of the returned curve and scores.
    pub fn final_objective(&self) -> T {
        *self
            .report
            .j_trajectory
            .last()
            .expect("trajectory holds the initial objective")
    }
}

fn check_rows<T: Scalar>(p: &ControlPointMatrix<T>, x: &[Vec<T>], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(RankError::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    if let Some(row) = x.iter().find(|row| row.len() != p.dim()) {
        return Err(RankError::DimensionMismatch {
            expected: p.dim(),
            actual: row.len(),
        });
    }
    Ok(())
}

/// `sum_i |x_i - P M z_i|^2`.
pub fn objective_j<T: Scalar>(
    p: &ControlPointMatrix<T>,
    x: &[Vec<T>],
    s: &ScoreVector<T>,
) -> Result<T> {
    check_rows(p, x, s.len())?;
    Ok(x.iter()
        .zip(s.as_slice())
        .map(|(row, &si)| {
            let f: Vec<T> = p.combine(&basis_unchecked(si)).collect();
            squared_distance(row, &f)
        })
        .sum())
}

/// `A = (M Z)(M Z)^T` and `X (M Z)^T` for the given scores.
pub fn normal_matrices<T: Scalar>(x: &[Vec<T>], s: &ScoreVector<T>) -> (Mat4<T>, Vec<[T; 4]>) {
    let d = x.first().map_or(0, Vec::len);
    let mut a = [[T::zero(); 4]; 4];
    let mut xb = vec![[T::zero(); 4]; d];
    for (row, b) in x.iter().zip(s.bernstein_columns()) {
        for r in 0..4 {
            for c in 0..4 {
                a[r][c] += b[r] * b[c];
            }
        }
        for (j, &v) in row.iter().enumerate() {
            for r in 0..4 {
                xb[j][r] += v * b[r];
            }
        }
    }
    (a, xb)
}

/// Diagonal of the preconditioner: the Euclidean norm of each column of `a`.
pub fn preconditioner<T: Scalar>(a: &Mat4<T>) -> Result<[T; 4]> {
    let mut diag = [T::zero(); 4];
    for (c, out) in diag.iter_mut().enumerate() {
        let norm = (0..4).map(|r| a[r][c] * a[r][c]).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(RankError::SingularPreconditioner(c));
        }
        *out = norm;
    }
    Ok(diag)
}

/// `2 / (lambda_min + lambda_max)` of a symmetric PSD matrix.
pub fn step_size_gamma<T: Scalar>(a: &Mat4<T>) -> Result<T> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(RankError::NonFinite("Gram matrix"));
    }
    let tol = T::lit(SYMMETRY_TOL);
    for r in 0..4 {
        for c in (r + 1)..4 {
            if (a[r][c] - a[c][r]).abs() > tol * T::one().max(a[r][c].abs()) {
                return Err(RankError::InvalidConfig(
                    "Gram matrix is not symmetric".into(),
                ));
            }
        }
    }
    let eig = jacobi_eigen(&mat4_to_rows(a));
    let sum = eig.values[0] + eig.values[3];
    if !(sum > T::zero()) {
        return Err(RankError::DegenerateStepSize(sum.to_f64_lossy()));
    }
    Ok(T::lit(2.0) / sum)
}

/// Which spectrum the Richardson step size is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `2 / (lambda_min + lambda_max)` of the Gram matrix `A`. The step then
    /// scales like `1 / n^2` against a curvature of order `n`: slow for large
    /// batches and unstable when `lambda_max(A) < 2`, e.g. for three objects.
    Gram,
    /// Same formula on the preconditioned matrix `D^{-1/2} A D^{-1/2}`, whose
    /// spectrum governs the iteration `P - gamma (P A - X B^T) D^{-1}`.
    #[default]
    Preconditioned,
}

impl std::str::FromStr for StepRule {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Self::Gram),
            "preconditioned" => Ok(Self::Preconditioned),
            other => Err(RankError::InvalidConfig(format!(
                "step rule must be `gram` or `preconditioned`, got `{other}`"
            ))),
        }
    }
}

/// Post-step constraints applied by [`richardson_step`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepConstraints<'a> {
    /// Clamp every entry into `[margin, 1 - margin]`.
    pub clamp_margin: Option<f64>,
    /// Restore `p0` and `p3` to the orientation corners.
    pub fixed_endpoints: Option<&'a OrientationVector>,
    pub step_rule: StepRule,
}

impl<'a> StepConstraints<'a> {
    pub fn from_config(cfg: &FitConfig, alpha: &'a OrientationVector) -> Self {
        Self {
            clamp_margin: cfg.clamp.then_some(cfg.clamp_margin),
            fixed_endpoints: (cfg.endpoints == EndpointMode::Fixed).then_some(alpha),
            step_rule: cfg.step_rule,
        }
    }

    pub(crate) fn apply<T: Scalar>(&self, p: &mut ControlPointMatrix<T>) {
        if let Some(margin) = self.clamp_margin {
            let lo = T::lit(margin);
            let hi = T::one() - lo;
            for row in p.rows_mut() {
                for v in row.iter_mut() {
                    *v = v.max(lo).min(hi);
                }
            }
        }
        if let Some(alpha) = self.fixed_endpoints {
            p.set_column(0, &alpha.start_corner::<T>());
            p.set_column(3, &alpha.end_corner::<T>());
        }
    }
}

/// One preconditioned Richardson update
/// `P - gamma (P A - X B^T) D^{-1}` for the Gram matrix `A` of the scores.
pub fn richardson_step<T: Scalar>(
    p: &ControlPointMatrix<T>,
    x: &[Vec<T>],
    s: &ScoreVector<T>,
    constraints: &StepConstraints<'_>,
) -> Result<ControlPointMatrix<T>> {
    check_rows(p, x, s.len())?;
    let (a, xb) = normal_matrices(x, s);
    let diag = preconditioner(&a)?;
    let gamma = match constraints.step_rule {
        StepRule::Gram => step_size_gamma(&a)?,
        StepRule::Preconditioned => {
            let mut scaled = a;
            for r in 0..4 {
                for c in 0..4 {
                    scaled[r][c] = a[r][c] / (diag[r] * diag[c]).sqrt();
                }
            }
            step_size_gamma(&scaled)?
        }
    };
    let rows = p
        .rows()
        .iter()
        .zip(&xb)
        .map(|(prow, xrow)| {
            let mut next = *prow;
            for c in 0..4 {
                let pa: T = (0..4).map(|k| prow[k] * a[k][c]).sum();
                next[c] = prow[c] - gamma * (pa - xrow[c]) / diag[c];
            }
            next
        })
        .collect();
    let mut out = ControlPointMatrix::from_rows(rows)?;
    constraints.apply(&mut out);
    Ok(out)
}

/// Closed-form minimizer `X (M Z)^+` of `J` for fixed scores, computed as
/// `X B^T (B B^T)^+` with an eigenvalue-thresholded pseudo-inverse, so
/// rank-deficient score sets yield the minimum-norm solution.
pub fn least_squares_oracle<T: Scalar>(
    x: &[Vec<T>],
    s: &ScoreVector<T>,
) -> Result<ControlPointMatrix<T>> {
    if x.len() != s.len() {
        return Err(RankError::DimensionMismatch {
            expected: s.len(),
            actual: x.len(),
        });
    }
    let (a, xb) = normal_matrices(x, s);
    let a_pinv = pinv_symmetric4(&a, T::lit(PINV_RCOND));
    let rows = xb
        .iter()
        .map(|xrow| {
            let mut out = [T::zero(); 4];
            for (c, o) in out.iter_mut().enumerate() {
                *o = (0..4).map(|k| xrow[k] * a_pinv[k][c]).sum();
            }
            out
        })
        .collect();
    ControlPointMatrix::from_rows(rows)
}

/// `|P A - X B^T|_F`, the gradient norm of `J` in `P` (up to a factor 2).
pub fn stationarity_residual<T: Scalar>(
    p: &ControlPointMatrix<T>,
    x: &[Vec<T>],
    s: &ScoreVector<T>,
) -> T {
    let (a, xb) = normal_matrices(x, s);
    let mut acc = T::zero();
    for (prow, xrow) in p.rows().iter().zip(&xb) {
        for c in 0..4 {
            let pa: T = (0..4).map(|k| prow[k] * a[k][c]).sum();
            let r = pa - xrow[c];
            acc += r * r;
        }
    }
    acc.sqrt()
}

/// `1 - J / sum_i |x_i - mean|^2`.
pub fn explained_variance<T: Scalar>(x: &[Vec<T>], objective: T) -> T {
    let n = x.len();
    if n == 0 {
        return T::zero();
    }
    let d = x[0].len();
    let nf = T::from_usize_lossy(n);
    let mean: Vec<T> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<T>() / nf)
        .collect();
    let total: T = x.iter().map(|r| squared_distance(r, &mean)).sum();
    if total > T::zero() {
        T::one() - objective / total
    } else if objective == T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Starting curve: endpoints at the orientation corners, shape controls at two
/// seeded sample rows ordered along the oriented diagonal.
pub fn initial_control_points<T: Scalar>(
    nds: &NormalizedDataset<T>,
    alpha: &OrientationVector,
    seed: u64,
) -> Result<ControlPointMatrix<T>> {
    let n = nds.n_objects();
    if n == 0 {
        return Err(RankError::TooFewRows {
            needed: 1,
            actual: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (first, second) = if n == 1 {
        (0, 0)
    } else {
        let picked = sample(&mut rng, n, 2);
        (picked.index(0), picked.index(1))
    };
    let along = |i: usize| -> T {
        nds.values[i]
            .iter()
            .enumerate()
            .map(|(j, &v)| alpha.delta::<T>(j) * v)
            .sum()
    };
    let (lo, hi) = if along(second) < along(first) {
        (second, first)
    } else {
        (first, second)
    };
    ControlPointMatrix::from_columns(
        &alpha.start_corner::<T>(),
        &nds.values[lo],
        &nds.values[hi],
        &alpha.end_corner::<T>(),
    )
}

/// Learns a ranking curve for normalized data.
pub fn fit<T: Scalar>(
    nds: &NormalizedDataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
) -> Result<FitOutcome<T>> {
    cfg.validate()?;
    alpha.check_dim(nds.n_attributes())?;
    let x = &nds.values;
    let constraints = StepConstraints::from_config(cfg, alpha);

    let mut p = initial_control_points(nds, alpha, cfg.seed)?;
    constraints.apply(&mut p);
    let mut s = ScoreVector(project_all(&p, x, &cfg.projection));
    if s.is_degenerate() {
        return Err(RankError::DegenerateScores);
    }
    let mut j = objective_j(&p, x, &s)?;
    let mut trajectory = vec![j];
    let mut iterations = 0;
    let mut converged = false;
    let mut stopped_on_increase = false;

    while iterations < cfg.max_iter {
        iterations += 1;
        let p_next = match richardson_step(&p, x, &s, &constraints) {
            Ok(p_next) => p_next,
            // a non-finite update counts as an increase
            Err(RankError::NonFinite(_)) => {
                stopped_on_increase = true;
                converged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let s_next = ScoreVector(project_all(&p_next, x, &cfg.projection));
        let j_next = objective_j(&p_next, x, &s_next)?;
        let decrease = j - j_next;
        if !j_next.is_finite() || decrease < T::zero() || s_next.is_degenerate() {
            stopped_on_increase = true;
            converged = true;
            break;
        }
        let relative = decrease / j.max(T::lit(RELATIVE_FLOOR));
        p = p_next;
        s = s_next;
        j = j_next;
        trajectory.push(j);
        if relative < T::lit(cfg.xi) {
            converged = true;
            break;
        }
    }

    let residual_norms = x
        .iter()
        .zip(s.as_slice())
        .map(|(row, &si)| {
            let f: Vec<T> = p.combine(&basis_unchecked(si)).collect();
            squared_distance(row, &f).sqrt()
        })
        .collect();
    let p_original = affine_transform_curve(&p, &nds.ranges(), &nds.col_min)?;
    let report = FitReport {
        j_trajectory: trajectory,
        iterations,
        converged,
        stopped_on_increase,
        explained_variance: explained_variance(x, j),
        monotone: sample_curve_monotonicity(&p, alpha, DEFAULT_MONOTONICITY_GRID),
        residual_norms,
        p_normalized: p.clone(),
        p_original,
    };
    Ok(FitOutcome {
        control_points: p,
        scores: s,
        report,
    })
}

/// Runs [`fit`] with seeds `cfg.seed, cfg.seed + 1, ...` and keeps the run
/// with the smallest final objective; ties keep the earliest seed. Runs that
/// fail with degenerate scores are skipped.
pub fn fit_restarts<T: Scalar>(
    nds: &NormalizedDataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
    restarts: usize,
) -> Result<FitOutcome<T>> {
    let mut best: Option<FitOutcome<T>> = None;
    let mut last_err = None;
    for k in 0..restarts.max(1) {
        let run_cfg = FitConfig {
            seed: cfg.seed.wrapping_add(k as u64),
            ..*cfg
        };
        match fit(nds, alpha, &run_cfg) {
            Ok(out) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| out.final_objective() < b.final_objective());
                if better {
                    best = Some(out);
                }
            }
            Err(RankError::DegenerateScores) => last_err = Some(RankError::DegenerateScores),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(RankError::DegenerateScores))
}

/// Score of a previously unseen raw observation under a fitted curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnseenScore<T> {
    pub score: T,
    /// Some attribute fell outside the fit-time range and was clamped.
    pub extrapolated: bool,
}

/// Scores raw rows that were not part of the fit, normalizing them with the
/// fit-time bounds.
pub fn score_unseen<T: Scalar>(
    p: &ControlPointMatrix<T>,
    bounds: &NormalizedDataset<T>,
    raw_rows: &[Vec<T>],
    cfg: &ProjectionConfig,
) -> Result<Vec<UnseenScore<T>>> {
    raw_rows
        .iter()
        .map(|raw| {
            let (unit, extrapolated) = bounds.normalize_row(raw)?;
            Ok(UnseenScore {
                score: project_point(p, &unit, cfg),
                extrapolated,
            })
        })
        .collect()
}

/// One object's place in a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedObject<T> {
    pub id: String,
    pub score: T,
    /// 1 is the best object.
    pub rank: usize,
}

/// Ranking in input order; use [`RankingList::by_rank`] for the sorted view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingList<T> {
    pub entries: Vec<RankedObject<T>>,
}

impl<T: Scalar> RankingList<T> {
    pub fn ranks(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.rank).collect()
    }

    /// Object indices from best to worst.
    pub fn permutation(&self) -> Vec<usize> {
        let mut order = vec![0; self.entries.len()];
        for (i, e) in self.entries.iter().enumerate() {
            order[e.rank - 1] = i;
        }
        order
    }

    pub fn by_rank(&self) -> Vec<&RankedObject<T>> {
        self.permutation()
            .into_iter()
            .map(|i| &self.entries[i])
            .collect()
    }
}

/// Ranks by descending score; exact ties keep input order.
pub fn rank_from_scores<T: Scalar>(ids: &[String], scores: &[T]) -> Result<RankingList<T>> {
    if ids.len() != scores.len() {
        return Err(RankError::DimensionMismatch {
            expected: scores.len(),
            actual: ids.len(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0; scores.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    Ok(RankingList {
        entries: ids
            .iter()
            .zip(scores)
            .zip(ranks)
            .map(|((id, &score), rank)| RankedObject {
                id: id.clone(),
                score,
                rank,
            })
            .collect(),
    })
}
