//! Point counts above a level and point-location statistics for samples of
//! (approximate) Airy point configurations.

use serde::{Deserialize, Serialize};

use super::kernel::kernel_eval;
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};
use crate::report::StatReport;
use crate::stats;

/// `(3 pi / 2)^{2/3}`: the k-th Airy point sits near `-KAPPA k^{2/3}`.
pub const KAPPA: f64 = 2.810_783_666_401_909;

/// Leading term `2 a^{3/2} / (3 pi)` of the expected number of points in
/// `[-a, inf)`; zero for `a <= 0`.
pub fn expected_count(a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else {
        2.0 * a.powf(1.5) / (3.0 * std::f64::consts::PI)
    }
}

/// Expected number of points in `[-a, cutoff]`, `int K(x, x) dx`.
pub fn expected_count_exact(a: f64, cutoff: f64) -> Result<f64> {
    if !(cutoff > -a) {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(20);
    let panels = ((cutoff + a) / 0.5).ceil() as usize;
    let mut err = None;
    let v = rule.integrate_composite(-a, cutoff, panels.max(1), |x| match kernel_eval(x, x) {
        Ok(k) => k,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    err.map_or(Ok(v), Err)
}

/// Top of one point configuration, complete above `lower_cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    /// Sorted decreasing.
    pub points: Vec<f64>,
    pub kappa: f64,
    /// Every point of the configuration above this level is present.
    pub lower_cutoff: f64,
}

impl PointSample {
    pub fn new(mut points: Vec<f64>, lower_cutoff: f64) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("points must be finite".into()));
        }
        points.sort_by(|a, b| b.total_cmp(a));
        Ok(PointSample {
            points,
            kappa: KAPPA,
            lower_cutoff,
        })
    }

    /// `N_a`, the number of points in `[-a, inf)`.
    pub fn count_above(&self, a: f64) -> usize {
        self.points.partition_point(|&p| p >= -a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub a: f64,
    pub counts: Vec<usize>,
    pub eta: Option<f64>,
    pub mean: f64,
    pub variance: f64,
    pub expected: f64,
    /// Largest `|N_a - expected_count(a)|` over the sample.
    pub max_deviation: f64,
    pub c1: f64,
    pub c2: f64,
    /// `|mean - expected_count(a)| <= 2`.
    pub mean_ok: bool,
    /// `variance <= c1 log a + c2`.
    pub variance_ok: bool,
}

pub const DEFAULT_VARIANCE_CONSTANTS: (f64, f64) = (1.0, 1.0);

/// Counts `N_a` over a collection of configurations.
pub fn count_statistics(samples: &[PointSample], a: f64) -> Result<CountStats> {
    count_statistics_with(samples, a, DEFAULT_VARIANCE_CONSTANTS)
}

pub fn count_statistics_with(samples: &[PointSample], a: f64, (c1, c2): (f64, f64)) -> Result<CountStats> {
    if samples.len() < 2 {
        return Err(Error::insufficient("count samples", 2, samples.len()));
    }
    if let Some(s) = samples.iter().find(|s| s.lower_cutoff > -a) {
        return Err(Error::Precondition(format!(
            "sample is complete only above {}, cannot count from {}",
            s.lower_cutoff, -a
        )));
    }
    let counts: Vec<usize> = samples.iter().map(|s| s.count_above(a)).collect();
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mean = stats::mean(&xs);
    let variance = stats::variance(&xs);
    let expected = expected_count(a);
    let max_deviation = xs.iter().map(|x| (x - expected).abs()).fold(0.0, f64::max);
    Ok(CountStats {
        a,
        counts,
        eta: None,
        mean,
        variance,
        expected,
        max_deviation,
        c1,
        c2,
        mean_ok: (mean - expected).abs() <= 2.0,
        variance_ok: variance <= c1 * a.max(1.0).ln() + c2,
    })
}

impl CountStats {
    pub fn report(&self) -> StatReport {
        StatReport::new("counts", "point counts of the Airy point process")
            .param("a", self.a)
            .param("c1", self.c1)
            .param("c2", self.c2)
            .stat("mean", self.mean)
            .stat("variance", self.variance)
            .stat("expected", self.expected)
            .stat("max_deviation", self.max_deviation)
            .threshold("mean_tolerance", 2.0)
            .threshold("variance_bound", self.c1 * self.a.max(1.0).ln() + self.c2)
            .replicas(self.counts.len())
            .pass(self.mean_ok && self.variance_ok)
    }
}

/// Distribution of `m_i = i^{1/3} |A_i + KAPPA i^{2/3}|` for `i <= k_max`.
/// Passes when every median is at most `median_bound` and the pooled
/// log-survival of `m` has negative slope.
pub fn point_location_test(samples: &[PointSample], k_max: usize, median_bound: f64) -> Result<StatReport> {
    if samples.len() < 100 {
        return Err(Error::insufficient("point location samples", 100, samples.len()));
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be positive".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.points.len() < k_max) {
        return Err(Error::insufficient("points per sample", k_max, s.points.len()));
    }
    let mut report = StatReport::new("point-locations", "locations of Airy points")
        .param("k_max", k_max)
        .threshold("median_bound", median_bound)
        .threshold("slope_max", 0.0)
        .replicas(samples.len());
    let mut pooled = Vec::with_capacity(samples.len() * k_max);
    let mut worst_median = 0.0_f64;
    for i in 1..=k_max {
        let fi = i as f64;
        let m: Vec<f64> = samples
            .iter()
            .map(|s| fi.powf(1.0 / 3.0) * (s.points[i - 1] + KAPPA * fi.powf(2.0 / 3.0)).abs())
            .collect();
        let med = stats::median(&m);
        worst_median = worst_median.max(med);
        report.set_stat(&format!("median[{i}]"), med);
        pooled.extend(m);
    }
    report.set_stat("max_median", worst_median);
    let fit = stats::fit_log_survival(&pooled, |m| m, 20);
    match fit {
        Some(f) => {
            report.set_stat("slope_m", f.slope);
            report.pass = worst_median <= median_bound && f.slope < 0.0;
        }
        None => report = report.note("upper tail too thin to fit"),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::function::airy_pair;

    #[test]
    fn kappa_value() {
        let k = (3.0 * std::f64::consts::PI / 2.0).powf(2.0 / 3.0);
        assert!((KAPPA - k).abs() < 1e-12);
    }

    #[test]
    fn expected_count_values() {
        assert_eq!(expected_count(0.0), 0.0);
        assert_eq!(expected_count(-3.0), 0.0);
        assert!((expected_count(10.0) - 6.710_561_613_931_6).abs() < 1e-12);
        let k: f64 = 100.0;
        assert!((expected_count(KAPPA * k.powf(2.0 / 3.0)) - k).abs() < 1.0);
    }

    #[test]
    fn exact_count_closed_form() {
        // int_s^inf K(x,x) dx = (2 s^2 Ai^2 - 2 s Ai'^2 - Ai Ai') / 3
        for &a in &[0.0, 2.0, 5.0, 10.0] {
            let s = -a;
            let (ai, aip) = airy_pair(s).unwrap();
            let closed = (2.0 * s * s * ai * ai - 2.0 * s * aip * aip - ai * aip) / 3.0;
            let q = expected_count_exact(a, 20.0).unwrap();
            assert!((q - closed).abs() < 1e-10, "a={a}: {q} vs {closed}");
            assert!((q - expected_count(a)).abs() < 1.0);
        }
    }

    #[test]
    fn empty_configuration_counts_zero() {
        let s = PointSample::new(vec![], -100.0).unwrap();
        assert_eq!(s.count_above(5.0), 0);
    }

    #[test]
    fn counting_respects_cutoff() {
        let s = PointSample::new(vec![-1.0, 0.5, -3.0], -4.0).unwrap();
        assert_eq!(s.points, vec![0.5, -1.0, -3.0]);
        assert_eq!(s.count_above(1.0), 2);
        assert_eq!(s.count_above(3.0), 3);
        let samples = vec![s.clone(), s];
        assert!(count_statistics(&samples, 3.0).is_ok());
        assert!(matches!(count_statistics(&samples, 5.0), Err(Error::Precondition(_))));
    }
}
