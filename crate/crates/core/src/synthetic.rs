//! Deterministic fixtures: the three-object comparison tables and samples
//! drawn from known monotone curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bezier::{basis_unchecked, ControlPointMatrix};
use crate::dataset::{Dataset, OrientationVector};
use crate::error::{RankError, Result};
use crate::scalar::Scalar;

fn named<T: Scalar>(ids: &[&str], rows: Vec<Vec<f64>>) -> Dataset<T> {
    let d = rows[0].len();
    Dataset::new(
        (1..=d).map(|j| format!("x{j}")).collect(),
        ids.iter().map(|s| s.to_string()).collect(),
        rows.into_iter()
            .map(|r| r.into_iter().map(T::lit).collect())
            .collect(),
    )
    .expect("fixture is well formed")
}

/// Objects A, B, C of the three-object comparison, first variant.
pub fn three_objects_a<T: Scalar>() -> Dataset<T> {
    named(
        &["A", "B", "C"],
        vec![vec![0.3, 0.25], vec![0.25, 0.55], vec![0.7, 0.7]],
    )
}

/// Same comparison with A moved to A' = (0.35, 0.4).
pub fn three_objects_b<T: Scalar>() -> Dataset<T> {
    named(
        &["A'", "B", "C"],
        vec![vec![0.35, 0.4], vec![0.25, 0.55], vec![0.7, 0.7]],
    )
}

/// Admissible S-shaped curve: `p1` below the diagonal, `p2` above it, in the
/// first two coordinates, alternating for further ones.
pub fn s_curve<T: Scalar>(alpha: &OrientationVector) -> ControlPointMatrix<T> {
    let d = alpha.len();
    let lo = [0.75, 0.15, 0.65, 0.2];
    let hi = [0.25, 0.85, 0.3, 0.8];
    shaped(
        alpha,
        &(0..d).map(|j| lo[j % 4]).collect::<Vec<_>>(),
        &(0..d).map(|j| hi[j % 4]).collect::<Vec<_>>(),
    )
}

/// Admissible concave curve: both shape controls above the diagonal in the
/// even coordinates.
pub fn concave_curve<T: Scalar>(alpha: &OrientationVector) -> ControlPointMatrix<T> {
    let d = alpha.len();
    let p1: Vec<f64> = (0..d).map(|j| if j % 2 == 0 { 0.1 } else { 0.6 }).collect();
    let p2: Vec<f64> = (0..d)
        .map(|j| if j % 2 == 0 { 0.4 } else { 0.95 })
        .collect();
    shaped(alpha, &p1, &p2)
}

/// Control points given in "increasing" coordinates, mirrored for attributes
/// with negative orientation.
fn shaped<T: Scalar>(alpha: &OrientationVector, p1: &[f64], p2: &[f64]) -> ControlPointMatrix<T> {
    let orient = |j: usize, v: f64| T::lit(if alpha.deltas()[j] > 0 { v } else { 1.0 - v });
    let d = alpha.len();
    let c1: Vec<T> = (0..d).map(|j| orient(j, p1[j])).collect();
    let c2: Vec<T> = (0..d).map(|j| orient(j, p2[j])).collect();
    ControlPointMatrix::from_columns(&alpha.start_corner(), &c1, &c2, &alpha.end_corner())
        .expect("fixture curve is finite")
}

/// Observations sampled from a curve together with their generating parameters.
#[derive(Debug, Clone)]
pub struct CurveSample<T> {
    pub dataset: Dataset<T>,
    pub parameters: Vec<T>,
}

/// `n` points `f(s_i) + noise` with `s_i ~ U[0, 1]` and i.i.d. Gaussian
/// coordinate noise of standard deviation `sigma`.
pub fn sample_curve<T: Scalar>(
    curve: &ControlPointMatrix<T>,
    n: usize,
    sigma: f64,
    seed: u64,
) -> Result<CurveSample<T>> {
    if n == 0 {
        return Err(RankError::TooFewRows {
            needed: 1,
            actual: 0,
        });
    }
    let noise = Normal::new(0.0, sigma.max(0.0))
        .map_err(|e| RankError::InvalidConfig(format!("noise level: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parameters = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let s: f64 = rng.random();
        let point: Vec<T> = curve
            .combine(&basis_unchecked(T::lit(s)))
            .map(|v| {
                let e = if sigma > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                };
                v + T::lit(e)
            })
            .collect();
        parameters.push(T::lit(s));
        rows.push(point);
    }
    Ok(CurveSample {
        dataset: Dataset::from_rows(rows)?,
        parameters,
    })
}

/// Random admissible control points: corner endpoints, shape controls drawn
/// uniformly from `[margin, 1 - margin]^d`.
pub fn random_admissible<T: Scalar, R: Rng>(
    alpha: &OrientationVector,
    margin: f64,
    rng: &mut R,
) -> ControlPointMatrix<T> {
    let d = alpha.len();
    let mut draw = || -> Vec<T> {
        (0..d)
            .map(|_| T::lit(rng.random_range(margin..1.0 - margin)))
            .collect()
    };
    let p1 = draw();
    let p2 = draw();
    ControlPointMatrix::from_columns(&alpha.start_corner(), &p1, &p2, &alpha.end_corner())
        .expect("finite control points")
}

/// Seed of the bundled S-curve samples.
pub const S_CURVE_SEED: u64 = 20_240_601;
/// Objects in the bundled S-curve samples.
pub const S_CURVE_OBJECTS: usize = 200;

/// Samples of [`s_curve`] in four attributes oriented `+,+,-,-`.
pub fn s_curve_fixture<T: Scalar>(sigma: f64) -> CurveSample<T> {
    let alpha: OrientationVector = "+,+,-,-".parse().expect("valid orientation");
    sample_curve(&s_curve(&alpha), S_CURVE_OBJECTS, sigma, S_CURVE_SEED).expect("fixture sample")
}

/// Fifty points on an increasing straight line in three attributes with
/// unequal column scales.
pub fn line_fixture<T: Scalar>() -> Dataset<T> {
    let n = 50;
    let rows = (0..n)
        .map(|i| {
            let t = ((i * 37) % n) as f64 / (n - 1) as f64;
            vec![2.0 + 3.0 * t, -1.0 + 0.5 * t, 10.0 + 40.0 * t]
        })
        .collect();
    named(
        &(1..=n)
            .map(|i| format!("L{i}"))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>(),
        rows,
    )
}

/// A named dataset with the orientation it is ranked under.
#[derive(Debug, Clone)]
pub struct Fixture<T> {
    pub name: &'static str,
    pub dataset: Dataset<T>,
    pub alpha: OrientationVector,
}

/// Every dataset shipped with the crate.
pub fn bundled_fixtures<T: Scalar>() -> Vec<Fixture<T>> {
    let plus2: OrientationVector = "+,+".parse().expect("valid orientation");
    vec![
        Fixture {
            name: "three_objects_a",
            dataset: three_objects_a(),
            alpha: plus2.clone(),
        },
        Fixture {
            name: "three_objects_b",
            dataset: three_objects_b(),
            alpha: plus2,
        },
        Fixture {
            name: "s_curve",
            dataset: s_curve_fixture(0.02).dataset,
            alpha: "+,+,-,-".parse().expect("valid orientation"),
        },
        Fixture {
            name: "line",
            dataset: line_fixture(),
            alpha: OrientationVector::increasing(3),
        },
    ]
}
