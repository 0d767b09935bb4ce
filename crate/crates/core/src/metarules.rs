//! Executable checks of the five design rules a ranking function should obey:
//! scale/translation invariance, strict monotonicity, linear and nonlinear
//! capacity, smoothness, and an explicit parameter count.
//!
//! The universally quantified rules are checked constructively: invariance on
//! random positive affine maps, capacity on a fixed battery of curve shapes,
//! smoothness as agreement between the analytic derivative and finite
//! differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bezier::{
    check_monotone_admissible, curve_derivative, evaluate_curve, sample_curve_monotonicity,
    ControlPointMatrix, MonotonicityVerdict, DEFAULT_MONOTONICITY_GRID,
};
use crate::dataset::{normalize, Dataset, NormalizedDataset, OrientationVector};
use crate::error::Result;
use crate::fit::{fit, rank_from_scores, FitConfig, FitOutcome, RankingList};
use crate::scalar::Scalar;
use crate::synthetic;

/// Number of random affine maps tried by [`assess_scale_translation`].
pub const AFFINE_TRIALS: usize = 5;
/// Required explained variance for every capacity shape.
pub const CAPACITY_MIN_EV: f64 = 0.99;
/// Allowed gap between analytic and central-difference derivatives.
pub const SMOOTHNESS_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-6;
const SMOOTHNESS_SAMPLES: usize = 101;
const CAPACITY_POINTS: usize = 100;
/// Mixed into the fit seed so trial maps do not share a stream with initialization.
const TRIAL_SEED_SALT: u64 = 0x5ca1_ab1e;

/// A per-column positive affine map `x -> scale * x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTrial {
    pub scale: Vec<f64>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTranslationVerdict {
    pub passed: bool,
    /// Valid trials run.
    pub trials: usize,
    /// Trials rejected because a scale was not positive.
    pub invalid_trials: usize,
    /// First valid trial whose ranking differed.
    pub first_mismatch: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityMethod {
    /// Corner endpoints with interior controls.
    Admissible,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityAssessment {
    pub passed: bool,
    pub method: MonotonicityMethod,
    pub verdict: MonotonicityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessVerdict {
    pub passed: bool,
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    pub shape: String,
    pub explained_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityVerdict {
    pub passed: bool,
    pub shapes: Vec<ShapeFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRuleReport {
    pub scale_translation: ScaleTranslationVerdict,
    pub strict_monotonicity: MonotonicityAssessment,
    pub smoothness: SmoothnessVerdict,
    pub capacity: CapacityVerdict,
    /// `4 d` control-point coordinates.
    pub parameter_size: usize,
    pub parameter_size_explicit: bool,
}

impl MetaRuleReport {
    pub fn all_passed(&self) -> bool {
        self.scale_translation.passed
            && self.strict_monotonicity.passed
            && self.smoothness.passed
            && self.capacity.passed
            && self.parameter_size_explicit
    }
}

/// Normalize, fit and rank.
pub fn rank_pipeline<T: Scalar>(
    dataset: &Dataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
) -> Result<(FitOutcome<T>, RankingList<T>)> {
    let nds = normalize(dataset)?;
    let outcome = fit(&nds, alpha, cfg)?;
    let ranking = rank_from_scores(&dataset.object_ids, outcome.scores.as_slice())?;
    Ok((outcome, ranking))
}

/// Seeded random positive affine maps: log-uniform scales in `[e^-3, e^3]`,
/// offsets uniform in `[-100, 100]`.
pub fn random_affine_trials(d: usize, count: usize, seed: u64) -> Vec<AffineTrial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TRIAL_SEED_SALT);
    (0..count)
        .map(|_| AffineTrial {
            scale: (0..d)
                .map(|_| rng.random_range(-3.0f64..3.0).exp())
                .collect(),
            offset: (0..d).map(|_| rng.random_range(-100.0..100.0)).collect(),
        })
        .collect()
}

/// Runs the pipeline on the data and on each transformed copy with the same
/// seed; passes iff every ranking permutation matches.
pub fn assess_scale_translation_with<T: Scalar>(
    dataset: &Dataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
    trials: &[AffineTrial],
) -> Result<ScaleTranslationVerdict> {
    let (_, reference) = rank_pipeline(dataset, alpha, cfg)?;
    let reference = reference.permutation();
    let mut valid = 0;
    let mut invalid = 0;
    let mut first_mismatch = None;
    for trial in trials {
        if trial.scale.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            invalid += 1;
            continue;
        }
        let scale: Vec<T> = trial.scale.iter().map(|&a| T::lit(a)).collect();
        let offset: Vec<T> = trial.offset.iter().map(|&b| T::lit(b)).collect();
        let mapped = dataset.affine_map(&scale, &offset)?;
        let (_, ranking) = rank_pipeline(&mapped, alpha, cfg)?;
        if ranking.permutation() != reference && first_mismatch.is_none() {
            first_mismatch = Some(valid);
        }
        valid += 1;
    }
    Ok(ScaleTranslationVerdict {
        passed: first_mismatch.is_none(),
        trials: valid,
        invalid_trials: invalid,
        first_mismatch,
    })
}

pub fn assess_scale_translation<T: Scalar>(
    dataset: &Dataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
) -> Result<ScaleTranslationVerdict> {
    let trials = random_affine_trials(dataset.n_attributes(), AFFINE_TRIALS, cfg.seed);
    assess_scale_translation_with(dataset, alpha, cfg, &trials)
}

/// The sufficient corner/interior condition first, the sampled derivative
/// scan otherwise.
pub fn assess_strict_monotonicity<T: Scalar>(
    p: &ControlPointMatrix<T>,
    alpha: &OrientationVector,
) -> MonotonicityAssessment {
    if check_monotone_admissible(p, alpha) {
        return MonotonicityAssessment {
            passed: true,
            method: MonotonicityMethod::Admissible,
            verdict: MonotonicityVerdict::Pass,
        };
    }
    let verdict = sample_curve_monotonicity(p, alpha, DEFAULT_MONOTONICITY_GRID);
    MonotonicityAssessment {
        passed: verdict.passed(),
        method: MonotonicityMethod::Sampled,
        verdict,
    }
}

/// Compares `derivative` against central differences of the curve on a grid
/// of interior parameters.
pub fn assess_smoothness_with<T, F>(p: &ControlPointMatrix<T>, derivative: F) -> SmoothnessVerdict
where
    T: Scalar,
    F: Fn(&ControlPointMatrix<T>, T) -> Result<Vec<T>>,
{
    let h = FD_STEP;
    let mut worst = 0.0f64;
    let mut ok = true;
    for k in 0..SMOOTHNESS_SAMPLES {
        let s = h + (1.0 - 2.0 * h) * k as f64 / (SMOOTHNESS_SAMPLES - 1) as f64;
        let analytic = derivative(p, T::lit(s));
        let ahead = evaluate_curve(p, T::lit(s + h));
        let behind = evaluate_curve(p, T::lit(s - h));
        match (analytic, ahead, behind) {
            (Ok(a), Ok(f1), Ok(f0)) if a.len() == f1.len() => {
                for ((&da, &hi), &lo) in a.iter().zip(&f1).zip(&f0) {
                    let fd = (hi.to_f64_lossy() - lo.to_f64_lossy()) / (2.0 * h);
                    let gap = (da.to_f64_lossy() - fd).abs();
                    if !gap.is_finite() {
                        ok = false;
                    } else {
                        worst = worst.max(gap);
                    }
                }
            }
            _ => ok = false,
        }
    }
    SmoothnessVerdict {
        passed: ok && worst <= SMOOTHNESS_TOL,
        max_discrepancy: worst,
    }
}

pub fn assess_smoothness<T: Scalar>(p: &ControlPointMatrix<T>) -> SmoothnessVerdict {
    assess_smoothness_with(p, curve_derivative)
}

/// Fits noiseless linear, S-shaped and concave samples with `fit_fn`; passes
/// iff each reaches the explained-variance bar.
pub fn assess_capacity_with<T, F>(cfg: &FitConfig, fit_fn: F) -> Result<CapacityVerdict>
where
    T: Scalar,
    F: Fn(&NormalizedDataset<T>, &OrientationVector, &FitConfig) -> Result<FitOutcome<T>>,
{
    let alpha = OrientationVector::increasing(2);
    let battery = [
        ("linear", ControlPointMatrix::<T>::diagonal(&alpha)),
        ("s_curve", synthetic::s_curve::<T>(&alpha)),
        ("concave", synthetic::concave_curve::<T>(&alpha)),
    ];
    let mut shapes = Vec::new();
    for (k, (name, curve)) in battery.iter().enumerate() {
        let sample =
            synthetic::sample_curve(curve, CAPACITY_POINTS, 0.0, cfg.seed.wrapping_add(k as u64))?;
        let nds = normalize(&sample.dataset)?;
        let outcome = fit_fn(&nds, &alpha, cfg)?;
        shapes.push(ShapeFit {
            shape: name.to_string(),
            explained_variance: outcome.report.explained_variance.to_f64_lossy(),
        });
    }
    Ok(CapacityVerdict {
        passed: shapes
            .iter()
            .all(|s| s.explained_variance >= CAPACITY_MIN_EV),
        shapes,
    })
}

pub fn assess_capacity<T: Scalar>(cfg: &FitConfig) -> Result<CapacityVerdict> {
    assess_capacity_with::<T, _>(cfg, |nds, alpha, cfg| fit(nds, alpha, cfg))
}

/// Full report for one dataset; a pure function of its arguments.
pub fn assess<T: Scalar>(
    dataset: &Dataset<T>,
    alpha: &OrientationVector,
    cfg: &FitConfig,
) -> Result<MetaRuleReport> {
    alpha.check_dim(dataset.n_attributes())?;
    let (outcome, _) = rank_pipeline(dataset, alpha, cfg)?;
    let p = &outcome.control_points;
    Ok(MetaRuleReport {
        scale_translation: assess_scale_translation(dataset, alpha, cfg)?,
        strict_monotonicity: assess_strict_monotonicity(p, alpha),
        smoothness: assess_smoothness(p),
        capacity: assess_capacity::<T>(cfg)?,
        parameter_size: p.parameter_count(),
        parameter_size_explicit: p.parameter_count() == 4 * dataset.n_attributes(),
    })
}
