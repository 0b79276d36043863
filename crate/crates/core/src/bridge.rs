//! Brownian bridges, rejection sampling of nonintersecting bridge systems,
//! and the one-sided dominance and increment-tail tests built on them.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensemble::{BridgeSpec, GridSpec, Path};
use crate::error::{Error, Result};
use crate::report::StatReport;
use crate::stats;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Fills `values` (grid of `values.len() - 1` uniform steps of width
/// `spacing`) with a Brownian bridge from `start` to `end`.
///
/// Points are generated by bisection: each new midpoint is drawn from its
/// exact conditional law given the two already-sampled neighbours, so the
/// finite-dimensional marginals at grid times are exact.
pub fn fill_bridge<R: Rng + ?Sized>(
    values: &mut [f64],
    start: f64,
    end: f64,
    variance: f64,
    spacing: f64,
    rng: &mut R,
) {
    let last = values.len() - 1;
    values[0] = start;
    values[last] = end;
    bisect(values, 0, last, variance * spacing, rng);
}

fn bisect<R: Rng + ?Sized>(values: &mut [f64], lo: usize, hi: usize, unit_var: f64, rng: &mut R) {
    if hi - lo < 2 {
        return;
    }
    let mid = (lo + hi) / 2;
    let (a, b) = ((mid - lo) as f64, (hi - mid) as f64);
    let mean = values[lo] + (values[hi] - values[lo]) * a / (a + b);
    let sd = (unit_var * a * b / (a + b)).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    values[mid] = mean + sd * z;
    bisect(values, lo, mid, unit_var, rng);
    bisect(values, mid, hi, unit_var, rng);
}

pub fn sample_brownian_bridge<R: Rng + ?Sized>(spec: &BridgeSpec, rng: &mut R) -> Result<Path> {
    spec.validate()?;
    let mut values = vec![0.0; spec.grid.len()];
    fill_bridge(
        &mut values,
        spec.start_value,
        spec.end_value,
        spec.variance,
        spec.grid.spacing(),
        rng,
    );
    Path::new(spec.grid, values, spec.variance, spec.slope())
}

/// How avoidance is enforced by the rejection sampler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Avoidance {
    /// Strict ordering at every grid time; ties count as intersections.
    #[default]
    GridPoints,
    /// Grid ordering plus, for every adjacent pair and grid interval, an
    /// extra acceptance step with the probability that the difference bridge
    /// stays positive between the two grid times. For two lines (or one line
    /// over a piecewise-linear floor) this realizes continuum conditioning
    /// exactly; for three or more lines the pair events are treated as
    /// independent given the grid values.
    BridgeCrossing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RejectionOptions {
    pub max_attempts: u64,
    pub avoidance: Avoidance,
}

impl Default for RejectionOptions {
    fn default() -> Self {
        RejectionOptions {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            avoidance: Avoidance::GridPoints,
        }
    }
}

/// A validated system of bridges to be conditioned on mutual avoidance
/// (and avoidance of an optional floor).
#[derive(Clone, Debug)]
pub struct BridgeSystem {
    specs: Vec<BridgeSpec>,
    lower: Option<Path>,
    avoidance: Avoidance,
}

#[derive(Clone, Debug)]
pub struct NonintersectingSample {
    pub paths: Vec<Path>,
    /// Number of proposals drawn, including the accepted one.
    pub attempts: u64,
}

impl BridgeSystem {
    pub fn new(specs: &[BridgeSpec], lower: Option<&Path>, avoidance: Avoidance) -> Result<Self> {
        let first = specs
            .first()
            .ok_or_else(|| Error::Config("at least one bridge required".into()))?;
        for s in specs {
            s.validate()?;
            if s.grid != first.grid {
                return Err(Error::Config("all bridges must share a grid".into()));
            }
        }
        for (i, w) in specs.windows(2).enumerate() {
            if !(w[0].start_value > w[1].start_value && w[0].end_value > w[1].end_value) {
                return Err(Error::Precondition(format!(
                    "endpoints of bridges {i} and {} must be strictly ordered \
                     (coincident endpoints have zero acceptance probability)",
                    i + 1
                )));
            }
        }
        if let Some(f) = lower {
            if f.grid != first.grid {
                return Err(Error::Config("lower boundary must share the bridge grid".into()));
            }
            let bottom = specs.last().expect("nonempty");
            if !(bottom.start_value > f.first() && bottom.end_value > f.last()) {
                return Err(Error::Precondition(
                    "bottom bridge endpoints must lie strictly above the lower boundary".into(),
                ));
            }
        }
        Ok(BridgeSystem {
            specs: specs.to_vec(),
            lower: lower.cloned(),
            avoidance,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.specs[0].grid
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Draws one proposal into `buf` (one row per bridge) and reports whether
    /// it satisfies the avoidance condition. Lines are drawn top to bottom
    /// and the proposal is abandoned at the first violation.
    pub fn attempt<R: Rng + ?Sized>(&self, buf: &mut Vec<Vec<f64>>, rng: &mut R) -> bool {
        let grid = self.grid();
        let h = grid.spacing();
        buf.resize_with(self.specs.len(), Vec::new);
        let mut accept_prob = 1.0;
        for (i, spec) in self.specs.iter().enumerate() {
            let (done, rest) = buf.split_at_mut(i);
            let row = &mut rest[0];
            row.resize(grid.len(), 0.0);
            fill_bridge(row, spec.start_value, spec.end_value, spec.variance, h, rng);
            if let Some(above) = done.last() {
                if !stays_below(row, above) {
                    return false;
                }
                if self.avoidance == Avoidance::BridgeCrossing {
                    let var = spec.variance + self.specs[i - 1].variance;
                    accept_prob *= interval_survival(above, row, var, h);
                }
            }
        }
        if let Some(f) = &self.lower {
            let bottom = buf.last().expect("nonempty");
            if !stays_below(&f.values, bottom) {
                return false;
            }
            if self.avoidance == Avoidance::BridgeCrossing {
                let var = self.specs.last().expect("nonempty").variance;
                accept_prob *= interval_survival(bottom, &f.values, var, h);
            }
        }
        if self.avoidance == Avoidance::BridgeCrossing {
            let u: f64 = rng.random();
            return u < accept_prob;
        }
        true
    }

    pub fn sample<R: Rng + ?Sized>(&self, max_attempts: u64, rng: &mut R) -> Result<NonintersectingSample> {
        let mut buf = Vec::with_capacity(self.specs.len());
        for attempt in 1..=max_attempts {
            if self.attempt(&mut buf, rng) {
                let paths = self
                    .specs
                    .iter()
                    .zip(buf)
                    .map(|(s, v)| Path::new(s.grid, v, s.variance, s.slope()))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(NonintersectingSample {
                    paths,
                    attempts: attempt,
                });
            }
        }
        Err(Error::RejectionFailure {
            attempts: max_attempts,
        })
    }
}

fn stays_below(lower: &[f64], upper: &[f64]) -> bool {
    lower.iter().zip(upper).all(|(l, u)| l < u)
}

/// Probability that the difference of independent bridges through the
/// given grid values (variance sum `var`) stays positive on every interval.
fn interval_survival(upper: &[f64], lower: &[f64], var: f64, h: f64) -> f64 {
    let mut p = 1.0;
    for j in 1..upper.len() {
        let a = upper[j - 1] - lower[j - 1];
        let b = upper[j] - lower[j];
        p *= -(-2.0 * a * b / (var * h)).exp_m1();
    }
    p
}

/// Bridges conditioned to be strictly ordered (and above `lower_boundary`)
/// at every grid time, by plain rejection.
pub fn sample_nonintersecting_bridges<R: Rng + ?Sized>(
    specs: &[BridgeSpec],
    lower_boundary: Option<&Path>,
    options: &RejectionOptions,
    rng: &mut R,
) -> Result<Vec<Path>> {
    let system = BridgeSystem::new(specs, lower_boundary, options.avoidance)?;
    Ok(system.sample(options.max_attempts, rng)?.paths)
}

/// One-sided two-sample test that `sample_b` stochastically dominates
/// `sample_a`: fails only when `a` is detected to exceed `b`.
pub fn dominance_test(sample_a: &[f64], sample_b: &[f64], level: f64) -> Result<StatReport> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::insufficient("dominance test sample", 1, 0));
    }
    let ks = stats::ks_one_sided(sample_a, sample_b);
    Ok(StatReport::new("dominance", "monotone coupling of nonintersecting bridges")
        .param("n_a", sample_a.len())
        .param("n_b", sample_b.len())
        .stat("d_plus", ks.statistic)
        .stat("p_value", ks.p_value)
        .threshold("level", level)
        .replicas(sample_a.len().min(sample_b.len()))
        .pass(ks.p_value >= level))
}

/// `sup |dB - b dt| / sqrt(k dt log(1 + 1/dt))` over all pairs of grid times.
pub fn increment_scan_statistic(path: &Path, k: usize, slope_correction: bool) -> f64 {
    let h = path.grid.spacing();
    let b = if slope_correction { path.slope } else { 0.0 };
    let v = &path.values;
    let mut best = 0.0_f64;
    for lag in 1..v.len() {
        let dt = lag as f64 * h;
        let norm = (k as f64 * dt * (1.0 + 1.0 / dt).ln()).sqrt();
        let mut m = 0.0_f64;
        for i in 0..v.len() - lag {
            m = m.max((v[i + lag] - v[i] - b * dt).abs());
        }
        best = best.max(m / norm);
    }
    best
}

pub const MIN_SCAN_REPLICAS: usize = 100;

/// Distribution of [`increment_scan_statistic`] over a sample of paths from
/// a `k`-line system; passes when the upper tail of the statistic decays
/// (fitted slope of log-survival against `m^2` is negative).
pub fn increment_tail_scan(paths: &[Path], k: usize, slope_correction: bool) -> Result<StatReport> {
    if paths.len() < MIN_SCAN_REPLICAS {
        return Err(Error::insufficient(
            "increment tail scan replicas",
            MIN_SCAN_REPLICAS,
            paths.len(),
        ));
    }
    let grid = paths[0].grid;
    if paths.iter().any(|p| p.grid != grid) {
        return Err(Error::Config("increment scan paths must share a grid".into()));
    }
    let values: Vec<f64> = paths
        .iter()
        .map(|p| increment_scan_statistic(p, k, slope_correction))
        .collect();
    let sorted = stats::sorted(&values);
    let fit = stats::fit_log_survival(&values, |m| m * m, 10);
    let mut report = StatReport::new("increment-tail-scan", "increment tails of nonintersecting bridges")
        .param("k", k)
        .param("slope_correction", slope_correction)
        .param("grid_steps", grid.steps)
        .stat("q50", stats::quantile_sorted(&sorted, 0.5))
        .stat("q90", stats::quantile_sorted(&sorted, 0.9))
        .stat("q99", stats::quantile_sorted(&sorted, 0.99))
        .stat("max", *sorted.last().expect("nonempty"))
        .threshold("tail_slope_max", 0.0)
        .replicas(paths.len());
    match fit {
        Some(f) => {
            report.set_stat("tail_slope_m2", f.slope);
            report.pass = f.slope < 0.0;
        }
        None => report = report.note("upper tail too thin to fit").pass(false),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn grid(steps: usize) -> GridSpec {
        GridSpec::new(0.0, 1.0, steps).unwrap()
    }

    #[test]
    fn bridge_pins_endpoints() {
        let mut rng = RngStream::new(1, 0).rng();
        for steps in [1, 2, 7, 64] {
            let spec = BridgeSpec::new(0.3, -1.25, grid(steps), 2.0).unwrap();
            let p = sample_brownian_bridge(&spec, &mut rng).unwrap();
            assert_eq!(p.values[0], 0.3);
            assert_eq!(*p.values.last().unwrap(), -1.25);
            assert_eq!(p.values.len(), steps + 1);
        }
    }

    #[test]
    fn zero_step_grid_is_config_error() {
        let bad = BridgeSpec {
            start_value: 0.0,
            end_value: 0.0,
            grid: GridSpec {
                t_start: 0.0,
                t_end: 1.0,
                steps: 0,
            },
            variance: 1.0,
        };
        let mut rng = RngStream::new(1, 0).rng();
        assert!(matches!(
            sample_brownian_bridge(&bad, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn reproducible_per_stream() {
        let spec = BridgeSpec::new(0.0, 1.0, grid(33), 1.0).unwrap();
        let a = sample_brownian_bridge(&spec, &mut RngStream::new(9, 4).rng()).unwrap();
        let b = sample_brownian_bridge(&spec, &mut RngStream::new(9, 4).rng()).unwrap();
        let c = sample_brownian_bridge(&spec, &mut RngStream::new(9, 5).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bridge_midpoint_mean_and_variance() {
        // mean is the linear interpolation, variance v*T/4 at the midpoint
        let n = 100_000;
        for v in [1.0, 2.0] {
            let spec = BridgeSpec::new(0.0, 1.0, grid(8), v).unwrap();
            let mut rng = RngStream::new(2, v as u64).rng();
            let mids: Vec<f64> = (0..n)
                .map(|_| sample_brownian_bridge(&spec, &mut rng).unwrap().values[4])
                .collect();
            let m = stats::mean(&mids);
            let var = stats::variance(&mids);
            let target_var = v / 4.0;
            assert!((m - 0.5).abs() < 3.0 * (target_var / n as f64).sqrt(), "mean {m}");
            // sd of the sample variance of a Gaussian: var * sqrt(2/(n-1))
            let sd_var = target_var * (2.0 / (n as f64 - 1.0)).sqrt();
            assert!((var - target_var).abs() < 3.0 * sd_var, "var {var} vs {target_var}");
        }
    }

    #[test]
    fn off_midpoint_covariance() {
        // Cov(B(s), B(t)) = v s (T - t) / T for s <= t
        let n = 60_000;
        let spec = BridgeSpec::new(0.0, 0.0, grid(10), 1.5).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for _ in 0..n {
            let p = sample_brownian_bridge(&spec, &mut rng).unwrap();
            sxy += p.values[3] * p.values[7];
            sxx += p.values[3] * p.values[3];
        }
        let cov = sxy / n as f64;
        let var = sxx / n as f64;
        assert!((cov - 1.5 * 0.3 * 0.3).abs() < 0.01, "cov {cov}");
        assert!((var - 1.5 * 0.3 * 0.7).abs() < 0.01, "var {var}");
    }

    #[test]
    fn single_bridge_system_is_unconditioned() {
        let spec = BridgeSpec::new(0.0, 0.0, grid(16), 1.0).unwrap();
        let sys = BridgeSystem::new(&[spec], None, Avoidance::GridPoints).unwrap();
        let mut rng = RngStream::new(4, 0).rng();
        for _ in 0..100 {
            assert_eq!(sys.sample(1, &mut rng).unwrap().attempts, 1);
        }
    }

    #[test]
    fn nonintersecting_output_is_ordered() {
        let g = grid(32);
        let specs = [
            BridgeSpec::new(1.0, 1.0, g, 1.0).unwrap(),
            BridgeSpec::new(0.5, 0.4, g, 1.0).unwrap(),
            BridgeSpec::new(0.0, 0.0, g, 1.0).unwrap(),
        ];
        let floor = Path::constant(g, -0.3);
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..200 {
            let paths = sample_nonintersecting_bridges(
                &specs,
                Some(&floor),
                &RejectionOptions::default(),
                &mut rng,
            )
            .unwrap();
            for j in 0..g.len() {
                assert!(paths[0].values[j] > paths[1].values[j]);
                assert!(paths[1].values[j] > paths[2].values[j]);
                assert!(paths[2].values[j] > -0.3);
            }
        }
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let g = grid(8);
        let specs = [
            BridgeSpec::new(0.0, 1.0, g, 1.0).unwrap(),
            BridgeSpec::new(0.0, 0.0, g, 1.0).unwrap(),
        ];
        let mut rng = RngStream::new(6, 0).rng();
        assert!(matches!(
            sample_nonintersecting_bridges(&specs, None, &RejectionOptions::default(), &mut rng),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn exhausted_attempts_reported() {
        // gaps of 1e-3 with many steps: acceptance essentially zero
        let g = grid(256);
        let specs = [
            BridgeSpec::new(0.001, 0.001, g, 1.0).unwrap(),
            BridgeSpec::new(0.0, 0.0, g, 1.0).unwrap(),
        ];
        let opts = RejectionOptions {
            max_attempts: 50,
            ..Default::default()
        };
        let mut rng = RngStream::new(7, 0).rng();
        match sample_nonintersecting_bridges(&specs, None, &opts, &mut rng) {
            Err(Error::RejectionFailure { attempts }) => assert_eq!(attempts, 50),
            other => panic!("expected rejection failure, got {other:?}"),
        }
    }

    #[test]
    fn widely_separated_bridges_always_accept() {
        let g = grid(32);
        let specs = [
            BridgeSpec::new(50.0, 50.0, g, 1.0).unwrap(),
            BridgeSpec::new(0.0, 0.0, g, 1.0).unwrap(),
        ];
        let sys = BridgeSystem::new(&specs, None, Avoidance::BridgeCrossing).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        let mut buf = Vec::new();
        let accepted = (0..2000).filter(|_| sys.attempt(&mut buf, &mut rng)).count();
        assert_eq!(accepted, 2000);
    }

    #[test]
    fn dominance_examples() {
        let a: Vec<f64> = (0..500).map(|i| (i as f64 * 0.7).sin()).collect();
        assert!(dominance_test(&a, &a, 0.01).unwrap().pass);
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        assert!(dominance_test(&a, &b, 0.01).unwrap().pass);
        assert!(!dominance_test(&b, &a, 0.01).unwrap().pass);
        assert!(dominance_test(&[], &a, 0.01).is_err());
    }

    #[test]
    fn constant_path_scan_is_zero() {
        let p = Path::constant(grid(20), 3.0);
        assert_eq!(increment_scan_statistic(&p, 4, true), 0.0);
    }

    #[test]
    fn scan_needs_enough_replicas() {
        let p = Path::constant(grid(4), 0.0);
        let few = vec![p; 99];
        assert!(matches!(
            increment_tail_scan(&few, 1, false),
            Err(Error::InsufficientData { .. })
        ));
    }
}
