//! Parameterised drivers for every verification test.
//!
//! Each driver takes explicit parameters and an [`RngStream`]; [`run_verify`]
//! resolves an [`ExperimentConfig`] against per-test defaults and dispatches.
//! The defaults are the desk-scale parameters the test is meant to be run at.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::airy::kernel::{kernel_by_quadrature, kernel_eval, KernelEvaluator, TracyWidomTable};
use crate::airy::{count_statistics, expected_count_exact, point_location_test, PointSample};
use crate::bridge::{dominance_test, increment_tail_scan, Avoidance, BridgeSystem, RejectionOptions};
use crate::bridge_rep::{
    compare_samples, ensemble_equivalence_test, modulus_scan, sample_boundaries, sample_bridged, sample_direct,
    standard_functionals, BridgeRepConfig,
};
use crate::dyson::{
    dyson_increment_test, edge_scale, edge_tail_test, envelope_test, sample_dyson_at_times, sample_edge_points,
    sample_gue_top, sample_melon, sample_rescaled,
};
use crate::ensemble::{BridgeSpec, GridSpec};
use crate::error::{Error, Result};
use crate::jam::{
    component_size_test, count_jammed, edge_spread_test, gamma_defaults, greedy_pairs, jam_concentration_test,
    moment_bound_check, sample_jam_graphs,
};
use crate::parallel::{map_replicas, try_map_replicas};
use crate::report::StatReport;
use crate::rng::RngStream;
use crate::stats;

/// Command-level parameters; unset fields take the test's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replicas: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub ell: Option<usize>,
    pub t: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub steps: Option<usize>,
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        ExperimentConfig {
            seed,
            ..Default::default()
        }
    }

    fn stream(&self, id: TestId) -> RngStream {
        RngStream::new(self.seed, id as u64)
    }
}

macro_rules! test_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "kebab-case")]
        pub enum TestId { $($variant),* }

        impl TestId {
            pub const ALL: &'static [TestId] = &[$(TestId::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(TestId::$variant => $name),* }
            }
        }

        impl FromStr for TestId {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(TestId::$variant),)*
                    _ => Err(Error::Config(format!("unknown test id '{s}'"))),
                }
            }
        }
    };
}

test_ids! {
    TwEdge => "tw-edge",
    Kernel => "kernel",
    TwoBridge => "two-bridge",
    JamScaling => "jam-scaling",
    Greedy => "greedy",
    Components => "components",
    BridgeRep => "bridge-rep",
    Modulus => "modulus",
    DysonIncrements => "dyson-increments",
    MelonDyson => "melon-dyson",
    EdgeTail => "edge-tail",
    Envelope => "envelope",
    PointLocations => "point-locations",
    Counts => "counts",
    Dominance => "dominance",
    IncrementScan => "increment-scan",
    EdgeSpread => "edge-spread",
    Moments => "moments",
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Resolves `config` and runs test `id`. The resolved config is echoed
/// into the report parameters and the seed is recorded.
pub fn run_verify(id: TestId, config: &ExperimentConfig) -> Result<StatReport> {
    let c = config;
    let st = c.stream(id);
    let report = match id {
        TestId::TwEdge => {
            let n = c.n.unwrap_or(200);
            tw_edge_test(&[n / 4, n / 2, n], c.replicas.unwrap_or(10_000), st)?
        }
        TestId::Kernel => kernel_agreement_test(c.replicas.unwrap_or(1000), st)?,
        TestId::TwoBridge => two_bridge_test(
            &TWO_BRIDGE_CONFIGS,
            c.steps.unwrap_or(16),
            c.replicas.unwrap_or(100_000),
            st,
        )?,
        TestId::JamScaling => jam_scaling_test(
            c.n.unwrap_or(200),
            8.0,
            4.0,
            &c.delta.map_or(vec![0.02, 0.04, 0.08], |d| vec![d, 2.0 * d, 4.0 * d]),
            c.replicas.unwrap_or(1_000_000),
            st,
        )?,
        TestId::Greedy => greedy_fuzz_test(c.replicas.unwrap_or(1_000_000), st)?,
        TestId::Components => component_size_test(
            c.n.unwrap_or(200),
            c.k.unwrap_or(8),
            c.gamma.unwrap_or(1.0),
            c.t.unwrap_or(1.0),
            c.replicas.unwrap_or(500),
            st,
        )?,
        TestId::BridgeRep => {
            let k = c.k.unwrap_or(4);
            let mut cfg = BridgeRepConfig::with_defaults(k, c.t.unwrap_or(0.5), c.gamma.unwrap_or(1.0))?;
            if let Some(d) = c.delta {
                cfg.delta = d;
            }
            if let Some(l) = c.ell {
                cfg.ell = l;
            }
            if let Some(s) = c.steps {
                cfg.substeps = s;
            }
            bridge_rep_test(c.n.unwrap_or(200), &cfg, c.replicas.unwrap_or(2000), 0.01, st)?
        }
        TestId::Modulus => modulus_test(
            c.n.unwrap_or(400),
            &[2, 4, 8],
            c.t.unwrap_or(1.0),
            c.steps.unwrap_or(32),
            c.replicas.unwrap_or(500),
            st,
        )?,
        TestId::DysonIncrements => {
            let n = c.n.unwrap_or(100);
            let t = c.t.unwrap_or(1.0);
            dyson_increment_test(
                n,
                c.k.unwrap_or(1),
                t,
                &[t * (n as f64).powf(-1.0 / 3.0)],
                c.replicas.unwrap_or(100_000),
                st,
            )?
        }
        TestId::MelonDyson => melon_dyson_test(
            c.k.unwrap_or(3),
            &[0.25, 0.5, 0.75],
            c.replicas.unwrap_or(10_000),
            0.01,
            st,
        )?,
        TestId::EdgeTail => edge_tail_test(c.n.unwrap_or(100), c.k.unwrap_or(1), c.replicas.unwrap_or(100_000), st)?,
        TestId::Envelope => envelope_test(
            c.n.unwrap_or(100),
            c.replicas.unwrap_or(2000),
            &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            1.0,
            c.steps.unwrap_or(16),
            st,
        )?,
        TestId::PointLocations => point_locations(c.n.unwrap_or(200), c.k.unwrap_or(10), 2.0, c.replicas.unwrap_or(2000), st)?,
        TestId::Counts => counts_test(c.n.unwrap_or(200), 10.0, c.replicas.unwrap_or(2000), st)?,
        TestId::Dominance => bridge_dominance_test(c.steps.unwrap_or(16), c.replicas.unwrap_or(10_000), 0.01, st)?,
        TestId::IncrementScan => melon_increment_scan(c.k.unwrap_or(4), c.steps.unwrap_or(64), c.replicas.unwrap_or(1000), st)?,
        TestId::EdgeSpread => {
            let k = c.k.unwrap_or(16);
            let gamma = c.gamma.unwrap_or(1.0);
            let t = c.t.unwrap_or(0.25);
            let (delta, ell) = gamma_defaults(k, t, gamma);
            let graphs = sample_jam_graphs(
                c.n.unwrap_or(400),
                k,
                t,
                c.ell.unwrap_or(ell),
                c.delta.unwrap_or(delta),
                c.replicas.unwrap_or(50),
                st,
            )?;
            edge_spread_test(&graphs, 1.0, gamma, &[1.0, 2.0, 4.0])?
                .param("n", c.n.unwrap_or(400))
                .param("t", t)
        }
        TestId::Moments => {
            let (a, ell) = (8.0, 4.0);
            let n = c.n.unwrap_or(200);
            let samples = sample_points(n, a, c.replicas.unwrap_or(100_000), st)?;
            moment_bound_check(&samples, a, ell, c.delta.unwrap_or(0.08), &[1, 2], 10.0)?.param("n", n)
        }
    };
    Ok(report.param("config", config).seed(config.seed))
}

/// KS distance between `n^{1/6} (lambda_1 - 2 sqrt(n))` and `F_2` for each
/// `n`. Passes when the distance at the last `n` is below `0.05` and the
/// distances decrease along `n_list`.
pub fn tw_edge_test(n_list: &[usize], replicas: usize, stream: RngStream) -> Result<StatReport> {
    if replicas < 100 {
        return Err(Error::insufficient("edge replicas", 100, replicas));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Config("n_list must be nonempty and positive".into()));
    }
    let table = TracyWidomTable::standard();
    let mut report = StatReport::new("tw-edge", "Tracy-Widom limit of the top eigenvalue")
        .param("n_list", n_list)
        .threshold("ks_max", 0.05)
        .replicas(replicas);
    let mut ks = Vec::new();
    for (idx, &n) in n_list.iter().enumerate() {
        let s = stream.derive(idx as u64);
        let x = try_map_replicas(replicas, |r| -> Result<f64> {
            let mut rng = s.derive(r as u64).rng();
            Ok(edge_scale(n, sample_gue_top(n, 1, &mut rng)?[0]))
        })?;
        let res = stats::ks_one_sample(&x, |v| table.cdf(v));
        report.set_stat(&format!("ks[n={n}]"), res.statistic);
        report.set_stat(&format!("mean[n={n}]"), stats::mean(&x));
        ks.push(res.statistic);
    }
    let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    report.set_stat("ks", *ks.last().expect("nonempty"));
    report.pass = *ks.last().expect("nonempty") < 0.05 && decreasing;
    Ok(report)
}

/// Closed-form against quadrature Airy kernel on `pairs` random points of
/// `[-10, 5]^2`, and Fredholm determinants at orders 64 and 128.
pub fn kernel_agreement_test(pairs: usize, stream: RngStream) -> Result<StatReport> {
    if pairs == 0 {
        return Err(Error::insufficient("kernel pairs", 1, 0));
    }
    let diffs = try_map_replicas(pairs, |r| -> Result<f64> {
        let mut rng = stream.derive(r as u64).rng();
        let x = rng.random_range(-10.0..5.0);
        let y = rng.random_range(-10.0..5.0);
        Ok((kernel_eval(x, y)? - kernel_by_quadrature(x, y)?).abs())
    })?;
    let max_diff = diffs.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = (KernelEvaluator::new(64, 16.0)?, KernelEvaluator::new(128, 16.0)?);
    let mut det_diff = 0.0_f64;
    for s in [-8.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        det_diff = det_diff.max((lo.fredholm_determinant(s)? - hi.fredholm_determinant(s)?).abs());
    }
    Ok(StatReport::new("kernel", "Airy kernel numerics")
        .param("pairs", pairs)
        .param("determinant_points", [-8.0, -4.0, -2.0, 0.0, 2.0, 4.0])
        .stat("max_kernel_difference", max_diff)
        .stat("max_determinant_difference", det_diff)
        .threshold("kernel_tolerance", 1e-8)
        .threshold("determinant_tolerance", 1e-8)
        .replicas(pairs)
        .pass(max_diff <= 1e-8 && det_diff <= 1e-8))
}

/// `(start gap, end gap)` configurations for the two-bridge test, with
/// bridge variance 1 on `[0, 1]`.
pub const TWO_BRIDGE_CONFIGS: [(f64, f64); 5] = [(0.5, 0.5), (1.0, 1.0), (0.25, 2.0), (2.0, 0.3), (1.5, 1.5)];

/// Acceptance rate of the rejection loop for two bridges, avoiding in the
/// interval-crossing sense, against `1 - exp(-dx dy / (v T))`. Passes when
/// every configuration is within 3 standard errors.
pub fn two_bridge_test(configs: &[(f64, f64)], steps: usize, trials: usize, stream: RngStream) -> Result<StatReport> {
    if trials < 100 {
        return Err(Error::insufficient("two-bridge trials", 100, trials));
    }
    let grid = GridSpec::new(0.0, 1.0, steps)?;
    let v = 1.0;
    let mut report = StatReport::new("two-bridge", "non-crossing probability of two Brownian bridges")
        .param("configs", configs)
        .param("steps", steps)
        .param("variance", v)
        .param("avoidance", Avoidance::BridgeCrossing)
        .threshold("z_max", 3.0)
        .replicas(trials);
    let mut pass = true;
    for (idx, &(dx, dy)) in configs.iter().enumerate() {
        let specs = [
            BridgeSpec::new(dx, dy, grid, v)?,
            BridgeSpec::new(0.0, 0.0, grid, v)?,
        ];
        let system = BridgeSystem::new(&specs, None, Avoidance::BridgeCrossing)?;
        let s = stream.derive(idx as u64);
        let accepted = map_replicas(trials, |r| {
            let mut rng = s.derive(r as u64).rng();
            let mut buf = Vec::new();
            system.attempt(&mut buf, &mut rng)
        })
        .into_iter()
        .filter(|&a| a)
        .count();
        let rate = accepted as f64 / trials as f64;
        let expected = -(-dx * dy / (v * grid.duration())).exp_m1();
        let se = (expected * (1.0 - expected) / trials as f64).sqrt();
        let z = (rate - expected) / se;
        report.set_stat(&format!("rate[{idx}]"), rate);
        report.set_stat(&format!("expected[{idx}]"), expected);
        report.set_stat(&format!("z[{idx}]"), z);
        pass &= z.abs() <= 3.0;
    }
    report.pass = pass;
    Ok(report)
}

/// Rescaled GUE point configurations, complete above `-a`.
pub fn sample_points(n: usize, a: f64, replicas: usize, stream: RngStream) -> Result<Vec<PointSample>> {
    try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        PointSample::new(sample_edge_points(n, -a, &mut rng)?, -a)
    })
}

pub fn jam_scaling_test(
    n: usize,
    a: f64,
    ell: f64,
    delta_list: &[f64],
    replicas: usize,
    stream: RngStream,
) -> Result<StatReport> {
    let samples = sample_points(n, a, replicas, stream)?;
    Ok(jam_concentration_test(&samples, a, ell, delta_list)?.param("n", n))
}

/// Greedy matching on `configs` random configurations: sizes of `2..=40`
/// points, uniform, clustered or lattice-like, with random `delta`. Counts
/// configurations where the matching is smaller than `floor(L / 3)`,
/// overlaps, or pairs points further than `delta` apart.
pub fn greedy_fuzz_test(configs: usize, stream: RngStream) -> Result<StatReport> {
    if configs == 0 {
        return Err(Error::insufficient("fuzz configurations", 1, 0));
    }
    let outcomes = map_replicas(configs, |r| {
        let mut rng = stream.derive(r as u64).rng();
        let m = rng.random_range(2..=40usize);
        let delta = rng.random_range(0.0..1.0_f64).powi(2);
        let mut pts: Vec<f64> = match r % 3 {
            0 => (0..m).map(|_| rng.random_range(0.0..10.0)).collect(),
            1 => {
                let centres: Vec<f64> = (0..1 + m / 4).map(|_| rng.random_range(0.0..10.0)).collect();
                (0..m)
                    .map(|_| centres[rng.random_range(0..centres.len())] + rng.random_range(-0.5..0.5) * delta)
                    .collect()
            }
            _ => (0..m).map(|i| i as f64 * delta * rng.random_range(0.5..1.5)).collect(),
        };
        pts.sort_by(f64::total_cmp);
        let pairs = greedy_pairs(&pts, delta);
        let l = count_jammed(&pts, delta).jammed;
        let mut used = vec![false; pts.len()];
        let mut ok = pairs.len() >= l / 3;
        for &(i, j) in &pairs {
            ok &= !used[i] && !used[j] && (pts[j] - pts[i]).abs() <= delta;
            used[i] = true;
            used[j] = true;
        }
        (ok, l)
    });
    let violations = outcomes.iter().filter(|o| !o.0).count();
    let jammed: usize = outcomes.iter().map(|o| o.1).sum();
    Ok(StatReport::new("greedy", "greedy partial matching of jammed points")
        .param("configurations", configs)
        .stat("violations", violations as f64)
        .stat("total_jammed", jammed as f64)
        .threshold("violations_max", 0.0)
        .replicas(configs)
        .pass(violations == 0))
}

/// Direct against bridged at `config`, together with two controls: the
/// direct sample split in halves must pass, and the same boundaries bridged
/// with `delta = 0` must show ordering violations in more than 1% of
/// replicas.
pub fn bridge_rep_test(
    n: usize,
    config: &BridgeRepConfig,
    replicas: usize,
    level: f64,
    stream: RngStream,
) -> Result<StatReport> {
    if replicas < 4 {
        return Err(Error::insufficient("bridge-rep replicas", 4, replicas));
    }
    let direct = sample_direct(n, config, replicas, stream.derive(0))?;
    let boundaries = sample_boundaries(n, config, replicas, stream.derive(1))?;
    let bridged = sample_bridged(&boundaries, config, stream.derive(2))?;
    let main = compare_samples(&direct, &bridged, config, level)?;

    let half = replicas / 2;
    let functionals = standard_functionals(config.k, config.ell, config.substeps);
    let split = ensemble_equivalence_test(&direct[..half], &direct[half..], &functionals, level)?;

    let mut free = config.clone();
    free.delta = 0.0;
    free.gamma = None;
    let unconditioned = sample_bridged(&boundaries, &free, stream.derive(3))?;
    let control = compare_samples(&direct, &unconditioned, &free, level)?;

    let mut report = main.report.clone().param("n", n);
    report.test = "bridge-rep".into();
    report.set_stat("split_min_p", split.statistics["min_p"]);
    report.set_stat("split_rejections", split.statistics["rejections"]);
    report.set_stat("delta0_ordering_violation_fraction", control.violation_fraction);
    report.set_stat("delta0_min_p", control.report.statistics["min_p"]);
    report.set_stat("delta0_rejections", control.report.statistics["rejections"]);
    report.thresholds.insert("delta0_violation_min".into(), 0.01);
    report.pass = main.report.pass && split.pass && control.violation_fraction > 0.01;
    Ok(report)
}

/// Top 8 lines of rescaled `n`-level Dyson on `steps` steps of `[0, t]`,
/// scanned by [`modulus_scan`] with `d <= 3`, ratio bound 1.5 and
/// refinement bound 1.25.
pub fn modulus_test(n: usize, k_list: &[usize], t: f64, steps: usize, replicas: usize, stream: RngStream) -> Result<StatReport> {
    let k_top = k_list.iter().copied().max().unwrap_or(0);
    let ensembles = try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        sample_rescaled(n, k_top, 0.0, t, steps, &mut rng)
    })?;
    Ok(modulus_scan(&ensembles, k_list, 3.0, 1.5, 1.25)?
        .param("n", n)
        .param("t", t)
        .param("steps", steps))
}

/// Two-sample tests of `B_i(s)` for a `k`-melon on `[0, 1]` (variance 1)
/// against `(1 - s) W_i(s / (1 - s))` for `k`-level Dyson motion, every
/// line and every time in `times`, Bonferroni corrected.
pub fn melon_dyson_test(k: usize, times: &[f64], replicas: usize, level: f64, stream: RngStream) -> Result<StatReport> {
    if replicas < 100 {
        return Err(Error::insufficient("melon replicas", 100, replicas));
    }
    if times.is_empty() || times.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::Config("times must lie in (0, 1)".into()));
    }
    // a grid fine enough to contain every requested time
    let steps = 400;
    let grid = GridSpec::new(0.0, 1.0, steps)?;
    let idx: Vec<usize> = times
        .iter()
        .map(|&s| {
            grid.index_of(s, 1e-9)
                .ok_or_else(|| Error::Config(format!("time {s} is not a multiple of 1/{steps}")))
        })
        .collect::<Result<_>>()?;
    let melons = try_map_replicas(replicas, |r| {
        let mut rng = stream.derive_all(&[0, r as u64]).rng();
        sample_melon(k, grid, 1.0, &mut rng)
    })?;
    let tests = times.len() * k;
    let per_test = level / tests as f64;
    let mut report = StatReport::new("melon-dyson", "melon as time-changed Dyson motion")
        .param("k", k)
        .param("times", times)
        .param("correction", "bonferroni")
        .threshold("family_level", level)
        .threshold("per_test_level", per_test)
        .replicas(replicas);
    let mut rejections = 0;
    let mut min_p = 1.0_f64;
    for (ti, &s) in times.iter().enumerate() {
        let u = s / (1.0 - s);
        let dyson = try_map_replicas(replicas, |r| -> Result<Vec<f64>> {
            let mut rng = stream.derive_all(&[1, ti as u64, r as u64]).rng();
            let col = sample_dyson_at_times(k, &[u], k, &mut rng)?;
            Ok(col[0].iter().map(|w| (1.0 - s) * w).collect())
        })?;
        for line in 0..k {
            let a: Vec<f64> = melons.iter().map(|m| m.value(line, idx[ti])).collect();
            let b: Vec<f64> = dyson.iter().map(|d| d[line]).collect();
            let p = stats::ks_two_sample(&a, &b).p_value;
            report.set_stat(&format!("p[s={s},line={}]", line + 1), p);
            min_p = min_p.min(p);
            rejections += usize::from(p < per_test);
        }
    }
    report.set_stat("min_p", min_p);
    report.set_stat("rejections", rejections as f64);
    report.pass = rejections == 0;
    Ok(report)
}

pub fn point_locations(n: usize, k_max: usize, median_bound: f64, replicas: usize, stream: RngStream) -> Result<StatReport> {
    let samples = try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        let top: Vec<f64> = sample_gue_top(n, k_max, &mut rng)?.into_iter().map(|l| edge_scale(n, l)).collect();
        let cut = *top.last().unwrap_or(&f64::INFINITY);
        PointSample::new(top, cut)
    })?;
    Ok(point_location_test(&samples, k_max, median_bound)?.param("n", n))
}

/// Count statistics at level `a`, with the kernel-integral expectation
/// reported alongside.
pub fn counts_test(n: usize, a: f64, replicas: usize, stream: RngStream) -> Result<StatReport> {
    let samples = sample_points(n, a, replicas, stream)?;
    let stats = count_statistics(&samples, a)?;
    let exact = expected_count_exact(a, 16.0)?;
    let mut report = stats.report().param("n", n).stat("kernel_integral", exact);
    report.set_stat("mean_minus_kernel_integral", stats.mean - exact);
    report.thresholds.insert("kernel_integral_tolerance".into(), 2.0);
    report.pass &= (stats.mean - exact).abs() <= 2.0;
    Ok(report)
}

/// Top-line midpoints of two nonintersecting bridges, with the lower
/// bridge's endpoints at 0 and raised to 0.5; the raised configuration must
/// not be detected below the original.
pub fn bridge_dominance_test(steps: usize, replicas: usize, level: f64, stream: RngStream) -> Result<StatReport> {
    let grid = GridSpec::new(0.0, 1.0, steps)?;
    let mid = steps / 2;
    let opts = RejectionOptions::default();
    let run = |lower: f64, key: u64| {
        let specs = [
            BridgeSpec::new(1.0, 1.0, grid, 1.0)?,
            BridgeSpec::new(lower, lower, grid, 1.0)?,
        ];
        let system = BridgeSystem::new(&specs, None, opts.avoidance)?;
        try_map_replicas(replicas, |r| -> Result<f64> {
            let mut rng = stream.derive_all(&[key, r as u64]).rng();
            Ok(system.sample(opts.max_attempts, &mut rng)?.paths[0].values[mid])
        })
    };
    let original = run(0.0, 0)?;
    let raised = run(0.5, 1)?;
    Ok(dominance_test(&original, &raised, level)?
        .param("steps", steps)
        .param("top_endpoints", [1.0, 1.0])
        .param("lower_endpoints", [[0.0, 0.0], [0.5, 0.5]])
        .stat("mean_original", stats::mean(&original))
        .stat("mean_raised", stats::mean(&raised)))
}

/// Increment scan of the top line of a `k`-melon on `[0, 1]`.
pub fn melon_increment_scan(k: usize, steps: usize, replicas: usize, stream: RngStream) -> Result<StatReport> {
    let grid = GridSpec::new(0.0, 1.0, steps)?;
    let paths = try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        Ok::<_, Error>(sample_melon(k, grid, 1.0, &mut rng)?.lines.swap_remove(0))
    })?;
    Ok(increment_tail_scan(&paths, k, true)?.param("steps", steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for &id in TestId::ALL {
            assert_eq!(id.name().parse::<TestId>().unwrap(), id);
        }
        assert!("nope".parse::<TestId>().is_err());
        assert_eq!(TestId::ALL.len(), 18);
    }

    #[test]
    fn too_few_replicas_is_insufficient_data() {
        let c = ExperimentConfig {
            replicas: Some(1),
            ..ExperimentConfig::with_seed(1)
        };
        for id in [TestId::TwEdge, TestId::TwoBridge, TestId::EdgeTail, TestId::MelonDyson] {
            assert!(matches!(run_verify(id, &c), Err(Error::InsufficientData { .. })), "{id}");
        }
    }

    #[test]
    fn report_echoes_config() {
        let c = ExperimentConfig {
            replicas: Some(5),
            ..ExperimentConfig::with_seed(42)
        };
        let r = run_verify(TestId::Kernel, &c).unwrap();
        assert_eq!(r.seed, Some(42));
        assert_eq!(r.parameters["config"]["replicas"], 5);
        assert!(r.pass);
    }

    #[test]
    fn greedy_fuzz_small() {
        let r = greedy_fuzz_test(20_000, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.statistics["violations"], 0.0);
        assert!(r.statistics["total_jammed"] > 0.0);
    }

    #[test]
    fn melon_dyson_small() {
        let r = melon_dyson_test(2, &[0.5], 400, 0.01, RngStream::new(2, 0)).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }
}
