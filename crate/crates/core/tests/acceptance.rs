//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpc_rank::metarules::{random_affine_trials, rank_pipeline};
use rpc_rank::projection::reconstruction_error;
use rpc_rank::synthetic::{
    bundled_fixtures, line_fixture, random_admissible, s_curve_fixture, sample_curve,
    three_objects_a, three_objects_b,
};
use rpc_rank::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn random_alpha(rng: &mut ChaCha8Rng, d: usize) -> OrientationVector {
    OrientationVector::new(
        (0..d)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect(),
    )
    .unwrap()
}

fn random_curve(rng: &mut ChaCha8Rng, d: usize, lo: f64, hi: f64) -> ControlPoints {
    let rows = (0..d)
        .map(|_| [0; 4].map(|_| rng.random_range(lo..hi)))
        .collect();
    ControlPoints::from_rows(rows).unwrap()
}

/// Average ranks, ascending.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && v[idx[j]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            out[k] = r;
        }
        i = j;
    }
    out
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn rank_aggregation_exact() -> Outcome {
    let (out, elapsed) = timed(|| {
        let mut kappas = Vec::new();
        for ds in [three_objects_a::<f64>(), three_objects_b::<f64>()] {
            let alpha = OrientationVector::increasing(2);
            let lists = attribute_rank_lists(&normalize(&ds).unwrap(), &alpha).unwrap();
            kappas.push(median_rank_aggregation(&lists).unwrap());
        }
        let ok = kappas.iter().all(|k| k == &vec![1.5, 1.5, 3.0]);
        outcome(
            ok,
            format!("kappa(a)={:?} kappa(b)={:?}", kappas[0], kappas[1]),
        )
    });
    let fast = elapsed < Duration::from_millis(100);
    outcome(out.passed && fast, format!("{} in {elapsed:?}", out.detail))
}

fn ordinal_sensitivity() -> Outcome {
    let (out, elapsed) = timed(|| {
        let cfg = FitConfig {
            endpoints: EndpointMode::Fixed,
            clamp: true,
            ..FitConfig::default()
        };
        let alpha = OrientationVector::increasing(2);
        let fit_scores = |ds: Data| {
            let nds = NormalizedData::from_unit_cube(ds.values).unwrap();
            fit_restarts(&nds, &alpha, &cfg, 8)
                .unwrap()
                .scores
                .into_inner()
        };
        let a = fit_scores(three_objects_a());
        let b = fit_scores(three_objects_b());
        // a: A < B < C; b: B < A' < C (rows are A/A', B, C)
        let gap = 1e-3;
        let ok_a = a[1] - a[0] >= gap && a[2] - a[1] >= gap;
        let ok_b = b[0] - b[1] >= gap && b[2] - b[0] >= gap;
        outcome(ok_a && ok_b, format!("s(a)={a:.4?} s(b)={b:.4?}"))
    });
    let fast = elapsed < Duration::from_secs(1);
    outcome(out.passed && fast, format!("{} in {elapsed:?}", out.detail))
}

fn explained_variance_bar() -> Outcome {
    let (out, elapsed) = timed(|| {
        let sample = s_curve_fixture::<f64>(0.02);
        let alpha: OrientationVector = "+,+,-,-".parse().unwrap();
        let (fit, _) = rank_pipeline(&sample.dataset, &alpha, &FitConfig::default()).unwrap();
        let ev = fit.report.explained_variance;
        outcome(ev >= 0.90, format!("explained variance {ev:.5}"))
    });
    let fast = elapsed < Duration::from_secs(5);
    outcome(out.passed && fast, format!("{} in {elapsed:?}", out.detail))
}

fn recovery_oracle() -> Outcome {
    let sample = s_curve_fixture::<f64>(0.0);
    let alpha: OrientationVector = "+,+,-,-".parse().unwrap();
    let (fit, _) = rank_pipeline(&sample.dataset, &alpha, &FitConfig::default()).unwrap();
    let ev = fit.report.explained_variance;
    let rho = spearman(fit.scores.as_slice(), &sample.parameters);
    outcome(
        ev >= 0.999 && rho == 1.0,
        format!("explained variance {ev:.6}, spearman {rho}"),
    )
}

fn descent_property() -> Outcome {
    let mut violations = 0;
    let mut fits = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..=4);
        let alpha = random_alpha(&mut rng, d);
        let curve = random_admissible::<f64, _>(&alpha, 0.05, &mut rng);
        let sample = sample_curve(&curve, 60, 0.03, seed).unwrap();
        let cfg = FitConfig {
            seed,
            ..FitConfig::default()
        };
        let Ok(nds) = normalize(&sample.dataset) else {
            continue;
        };
        let out = fit(&nds, &alpha, &cfg).unwrap();
        fits += 1;
        violations += out
            .report
            .j_trajectory
            .windows(2)
            .filter(|w| w[1] > w[0])
            .count();
    }
    outcome(
        fits == 100 && violations == 0,
        format!("{fits} fits, {violations} violations"),
    )
}

fn projection_oracle() -> Outcome {
    const DENSE: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let cfg = ProjectionConfig::default();
    let mut worst_ds: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..1000 {
        let d = rng.random_range(2..=4);
        let alpha = random_alpha(&mut rng, d);
        let curve = random_admissible::<f64, _>(&alpha, 0.0, &mut rng);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let s = project_point(&curve, &x, &cfg);
        let (mut best_s, mut best_g) = (0.0, f64::INFINITY);
        for k in 0..=DENSE {
            let t = k as f64 / DENSE as f64;
            let g = reconstruction_error(&curve, &x, t);
            if g < best_g {
                best_g = g;
                best_s = t;
            }
        }
        let ds = (s - best_s).abs();
        let excess = reconstruction_error(&curve, &x, s) - best_g;
        worst_ds = worst_ds.max(ds);
        worst_excess = worst_excess.max(excess);
        if ds > 1e-4 || excess > 1e-8 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} failures, max |ds| {worst_ds:.2e}, max excess {worst_excess:.2e}"),
    )
}

fn derivative_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(1..=5);
        let curve = random_curve(&mut rng, d, -1.0, 2.0);
        for _ in 0..10 {
            let s = rng.random_range(h..1.0 - h);
            let analytic = curve_derivative(&curve, s).unwrap();
            let plus = evaluate_curve(&curve, s + h).unwrap();
            let minus = evaluate_curve(&curve, s - h).unwrap();
            for j in 0..d {
                let fd = (plus[j] - minus[j]) / (2.0 * h);
                worst = worst.max((fd - analytic[j]).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max discrepancy {worst:.2e}"))
}

fn basis_properties() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    for k in 0..=10_000 {
        let b = bernstein_basis(k as f64 / 10_000.0).unwrap();
        worst_sum = worst_sum.max((b.iter().sum::<f64>() - 1.0).abs());
        min_value = b.iter().fold(min_value, |m, &v| m.min(v));
    }
    outcome(
        worst_sum <= 1e-12 && min_value >= 0.0,
        format!("max |sum - 1| {worst_sum:.2e}, min value {min_value:.2e}"),
    )
}

fn pipeline_invariance() -> Outcome {
    let cfg = FitConfig::default();
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for fx in bundled_fixtures::<f64>() {
        let (_, base) = rank_pipeline(&fx.dataset, &fx.alpha, &cfg).unwrap();
        for (t, trial) in random_affine_trials(fx.alpha.len(), 5, cfg.seed)
            .iter()
            .enumerate()
        {
            let mapped = fx.dataset.affine_map(&trial.scale, &trial.offset).unwrap();
            let (_, ranking) = rank_pipeline(&mapped, &fx.alpha, &cfg).unwrap();
            runs += 1;
            if ranking.permutation() != base.permutation() {
                mismatches.push(format!("{}#{t}", fx.name));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{runs} transformed runs, mismatches {mismatches:?}"),
    )
}

fn monotonicity_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut random_failures = 0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=6);
        let alpha = random_alpha(&mut rng, d);
        let curve = random_admissible::<f64, _>(&alpha, 1e-6, &mut rng);
        if !sample_curve_monotonicity(&curve, &alpha, 1000).passed() {
            random_failures += 1;
        }
    }
    let cfg = FitConfig {
        endpoints: EndpointMode::Fixed,
        clamp: true,
        ..FitConfig::default()
    };
    let mut fit_failures = Vec::new();
    for fx in bundled_fixtures::<f64>() {
        let (out, _) = rank_pipeline(&fx.dataset, &fx.alpha, &cfg).unwrap();
        if !sample_curve_monotonicity(&out.control_points, &fx.alpha, 1000).passed() {
            fit_failures.push(fx.name);
        }
    }
    outcome(
        random_failures == 0 && fit_failures.is_empty(),
        format!(
            "random curves failing {random_failures}/1000, fixture fits failing {fit_failures:?}"
        ),
    )
}

fn richardson_stationarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let n = 12;
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let s = Scores::new((0..n).map(|i| i as f64 / (n - 1) as f64).collect()).unwrap();
    let target = least_squares_oracle(&x, &s).unwrap();
    let constraints = StepConstraints::default();
    let mut p = ControlPoints::from_rows(vec![[0.5; 4]; 3]).unwrap();
    for _ in 0..20_000 {
        p = richardson_step(&p, &x, &s, &constraints).unwrap();
    }
    let worst = p
        .rows()
        .iter()
        .zip(target.rows())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0f64, f64::max);
    outcome(worst <= 1e-6, format!("max entrywise gap {worst:.2e}"))
}

fn linear_degeneracy() -> Outcome {
    let ds = line_fixture::<f64>();
    let alpha = OrientationVector::increasing(3);
    let (_, rpc) = rank_pipeline(&ds, &alpha, &FitConfig::default()).unwrap();
    let nds = normalize(&ds).unwrap();
    let model = pca_first_component(&nds, &alpha).unwrap();
    let pca = rank_from_scores(&ds.object_ids, &pca_scores(&model, &nds.values).unwrap()).unwrap();
    outcome(
        rpc.permutation() == pca.permutation(),
        format!(
            "{} objects, permutations equal: {}",
            ds.n_objects(),
            rpc.permutation() == pca.permutation()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("rank aggregation exactness", rank_aggregation_exact),
        ("ordinal sensitivity", ordinal_sensitivity),
        ("explained variance bar", explained_variance_bar),
        ("recovery oracle", recovery_oracle),
        ("descent property", descent_property),
        ("projection oracle", projection_oracle),
        ("derivative check", derivative_check),
        ("basis properties", basis_properties),
        ("pipeline invariance", pipeline_invariance),
        ("monotonicity guarantee", monotonicity_guarantee),
        ("richardson stationarity", richardson_stationarity),
        ("linear degeneracy agreement", linear_degeneracy),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {name}: {}", k + 1, out.detail);
        if !out.passed {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
