//! Sample statistics, Kolmogorov-Smirnov tests and tail fits shared by the
//! verification tests.

use std::cmp::Ordering;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolated quantile of an already sorted sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

pub fn quantile(xs: &[f64], q: f64) -> f64 {
    quantile_sorted(&sorted(xs), q)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Empirical survival `P(X >= m)` of a sorted sample.
pub fn survival_sorted(sorted: &[f64], m: f64) -> f64 {
    let below = sorted.partition_point(|&x| x < m);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series converges fast for small lambda.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=6)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                (-k * k * c).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sn = effective_n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample Kolmogorov-Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "two-sample test needs data");
    let a = sorted(a);
    let b = sorted(b);
    let d = max_cdf_gap(&a, &b, |fa, fb| (fa - fb).abs());
    let (n, m) = (a.len() as f64, b.len() as f64);
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n * m / (n + m)),
    }
}

/// One-sided two-sample statistic `sup_x (F_b(x) - F_a(x))`, which is large
/// when `a` tends to exceed `b`. The p-value uses `exp(-2 n_eff D^2)`.
pub fn ks_one_sided(a: &[f64], b: &[f64]) -> KsResult {
    assert!(!a.is_empty() && !b.is_empty(), "two-sample test needs data");
    let a = sorted(a);
    let b = sorted(b);
    let d = max_cdf_gap(&a, &b, |fa, fb| fb - fa).max(0.0);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let ne = n * m / (n + m);
    KsResult {
        statistic: d,
        p_value: (-2.0 * ne * d * d).exp().min(1.0),
    }
}

fn max_cdf_gap(a: &[f64], b: &[f64], gap: impl Fn(f64, f64) -> f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut best = f64::NEG_INFINITY;
    while i < n || j < m {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < n && a[i].total_cmp(&x) != Ordering::Greater {
            i += 1;
        }
        while j < m && b[j].total_cmp(&x) != Ordering::Greater {
            j += 1;
        }
        best = best.max(gap(i as f64 / n as f64, j as f64 / m as f64));
    }
    best
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let s = sorted(sample);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Straight-line fit of `ln P(X >= m)` against `transform(m)` over the upper
/// half of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

const TAIL_QUANTILES: [f64; 12] = [
    0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999, 0.9995,
];

/// Fits the log-survival at the upper empirical quantiles, keeping only
/// thresholds with at least `min_exceed` exceedances. `None` when fewer than
/// three distinct thresholds survive.
pub fn fit_log_survival(
    sample: &[f64],
    transform: impl Fn(f64) -> f64,
    min_exceed: usize,
) -> Option<TailFit> {
    let s = sorted(sample);
    let n = s.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &q in &TAIL_QUANTILES {
        let m = quantile_sorted(&s, q);
        if m <= last {
            continue;
        }
        let surv = survival_sorted(&s, m);
        if surv * n < min_exceed as f64 {
            break;
        }
        last = m;
        xs.push(transform(m));
        ys.push(surv.ln());
    }
    if xs.len() < 3 {
        return None;
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    Some(TailFit {
        slope,
        intercept,
        points: xs.len(),
    })
}
