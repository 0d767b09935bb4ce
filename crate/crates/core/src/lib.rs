//! Unsupervised ranking of multi-attribute objects with ranking principal curves.
//!
//! Observations are min-max normalized into the unit hypercube, a cubic Bezier
//! curve running from the worst corner to the best corner is fitted to them by
//! alternating minimization, and each object is scored by the curve parameter
//! of its nearest curve point. The numeric core is generic over [`Scalar`]
//! (`f32` or `f64`); the unsuffixed aliases below fix it to `f64`.

// NaN-rejecting `!(a > b)` tests and index loops over 4x4 matrices are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod bezier;
pub mod dataset;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod metarules;
pub mod projection;
pub mod scalar;
pub mod synthetic;

pub use baselines::{median_rank_aggregation, pca_first_component, pca_scores, PcaModel};
pub use bezier::{
    affine_transform_curve, bernstein_basis, check_monotone_admissible, curve_derivative,
    evaluate_curve, sample_curve_monotonicity, ControlPointMatrix, MonotonicityVerdict,
    BEZIER_BASIS,
};
pub use dataset::{
    attribute_rank_lists, compare_points, load_csv, normalize, read_csv, CsvLoad, Dataset,
    NormalizedDataset, OrientationVector, PointOrder,
};
pub use error::{RankError, Result};
pub use fit::{
    fit, fit_restarts, least_squares_oracle, objective_j, preconditioner, rank_from_scores,
    richardson_step, score_unseen, step_size_gamma, EndpointMode, FitConfig, FitOutcome, FitReport,
    RankedObject, RankingList, ScoreVector, StepConstraints, StepRule,
};
pub use metarules::{assess, MetaRuleReport};
pub use projection::{project_all, project_point, ProjectionConfig, TieRule};
pub use scalar::Scalar;

pub type ControlPoints = ControlPointMatrix<f64>;
pub type ControlPointsF32 = ControlPointMatrix<f32>;
pub type Data = Dataset<f64>;
pub type DataF32 = Dataset<f32>;
pub type NormalizedData = NormalizedDataset<f64>;
pub type NormalizedDataF32 = NormalizedDataset<f32>;
pub type Scores = ScoreVector<f64>;
pub type ScoresF32 = ScoreVector<f32>;
pub type Report = FitReport<f64>;
pub type ReportF32 = FitReport<f32>;
pub type Ranking = RankingList<f64>;
pub type Pca = PcaModel<f64>;
