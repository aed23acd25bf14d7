//! Small numeric helpers shared across modules.

/// Fixed-order pairwise (cascade) summation.
///
/// Recursively splits the slice at the midpoint, so the reduction tree is a
/// function of the slice length only. Results are bit-identical no matter how
/// the caller parallelizes the production of `terms`.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => 0.0,
        1 => terms[0],
        2 => terms[0] + terms[1],
        n => {
            let (lo, hi) = terms.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Composite Simpson quadrature of `f` over `[a, b]` with `panels`
/// subintervals (rounded up to the next even number).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut terms = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(w * f(a + i as f64 * h));
    }
    pairwise_sum(&terms) * h / 3.0
}

/// Composite trapezoid quadrature over uniform samples spanning `[a, b]`,
/// endpoints included.
pub fn trapezoid_uniform(samples: &[f64], a: f64, b: f64) -> f64 {
    assert!(samples.len() >= 2, "trapezoid needs at least 2 samples");
    let h = (b - a) / (samples.len() - 1) as f64;
    let mut terms = samples.to_vec();
    terms[0] *= 0.5;
    let last = terms.len() - 1;
    terms[last] *= 0.5;
    pairwise_sum(&terms) * h
}

/// Ordinary least squares of `y` on `x`: returns `(slope, intercept, r²)`.
pub fn ols_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxy: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let syy: Vec<f64> = y.iter().map(|b| (b - my) * (b - my)).collect();
    let sxy = pairwise_sum(&sxy);
    let sxx = pairwise_sum(&sxx);
    let syy = pairwise_sum(&syy);
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}
