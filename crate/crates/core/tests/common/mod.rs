//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Bernstein weights from the binomial formula.
pub fn bernstein(s: f64) -> [f64; 4] {
    let t = 1.0 - s;
    [t * t * t, 3.0 * s * t * t, 3.0 * s * s * t, s * s * s]
}

/// Characteristic polynomial coefficients `c[0] + c[1] x + ... + x^n` by
/// Faddeev-LeVerrier.
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += coeffs[n - k + 1];
        }
        m = next;
        let am_trace: f64 = (0..n)
            .map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>())
            .sum();
        coeffs[n - k] = -am_trace / k as f64;
    }
    coeffs
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// Real roots of the characteristic polynomial of a symmetric matrix with
/// distinct eigenvalues, by scanning the Gershgorin interval and bisecting.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let c = char_poly(a);
    let radius = (0..n)
        .map(|i| {
            a[i][i].abs()
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| a[i][j].abs())
                    .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let (lo, hi) = (-radius - 1.0, radius + 1.0);
    let steps = 200_000;
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev = poly_eval(&c, lo);
    for k in 1..=steps {
        let x = lo + (hi - lo) * k as f64 / steps as f64;
        let v = poly_eval(&c, x);
        if v == 0.0 {
            roots.push(x);
        } else if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            let (mut a0, mut b0) = (prev_x, x);
            for _ in 0..200 {
                let mid = 0.5 * (a0 + b0);
                if (poly_eval(&c, mid) > 0.0) == (poly_eval(&c, a0) > 0.0) {
                    a0 = mid;
                } else {
                    b0 = mid;
                }
            }
            roots.push(0.5 * (a0 + b0));
        }
        prev_x = x;
        prev = v;
    }
    roots
}

/// Spearman correlation with average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for i in 0..v.len() {
        let below = v.iter().filter(|&&x| x < v[i]).count() as f64;
        let equal = v.iter().filter(|&&x| x == v[i]).count() as f64;
        out[i] = below + (equal + 1.0) / 2.0;
    }
    out
}
