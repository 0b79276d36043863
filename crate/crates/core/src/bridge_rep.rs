//! The bridge representation of an ensemble: given its values at slab
//! times, resample every slab by Brownian bridges that are conditioned to
//! avoid each other only within their jam-graph component.

use serde::{Deserialize, Serialize};

use crate::bridge::{fill_bridge, Avoidance, BridgeSystem, DEFAULT_MAX_ATTEMPTS};
use crate::dyson::sample_rescaled;
use crate::ensemble::{BridgeSpec, GridSpec, LineEnsemble, Path};
use crate::error::{Error, Result};
use crate::jam::{gamma_defaults, JamGraph};
use crate::parallel::try_map_replicas;
use crate::report::StatReport;
use crate::rng::RngStream;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BridgeRepConfig {
    /// Number of top lines of interest; the representation uses `2k`.
    pub k: usize,
    pub t: f64,
    pub ell: usize,
    pub delta: f64,
    /// Set when `delta` and `ell` were derived from it.
    pub gamma: Option<f64>,
    /// Sampling steps per slab.
    pub substeps: usize,
    pub variance: f64,
    pub max_attempts: u64,
    pub avoidance: Avoidance,
}

impl BridgeRepConfig {
    /// `delta = k^{-1/3 - gamma/4}`, `ell = ceil(t k^{2/3 + gamma})`.
    pub fn with_defaults(k: usize, t: f64, gamma: f64) -> Result<Self> {
        if k == 0 || !(t > 0.0) || !(gamma > 0.0) {
            return Err(Error::Config(format!(
                "need k >= 1, t > 0 and gamma > 0; got k={k}, t={t}, gamma={gamma}"
            )));
        }
        let (delta, ell) = gamma_defaults(k, t, gamma);
        Ok(BridgeRepConfig {
            k,
            t,
            ell,
            delta,
            gamma: Some(gamma),
            substeps: 4,
            variance: 2.0,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            avoidance: Avoidance::GridPoints,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.ell == 0 || self.substeps == 0 {
            return Err(Error::Config("k, ell and substeps must be positive".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Config(format!("t must be positive, got {}", self.t)));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be nonnegative, got {}", self.delta)));
        }
        if !(self.variance > 0.0) {
            return Err(Error::Config("variance must be positive".into()));
        }
        if let Some(g) = self.gamma {
            let kf = self.k as f64;
            if (self.ell as f64) < self.t * kf.powf(2.0 / 3.0 + g) - 1e-9 {
                return Err(Error::Config(format!(
                    "ell = {} below t k^(2/3 + gamma) = {}",
                    self.ell,
                    self.t * kf.powf(2.0 / 3.0 + g)
                )));
            }
        }
        Ok(())
    }

    pub fn slab_grid(&self) -> GridSpec {
        GridSpec {
            t_start: 0.0,
            t_end: self.t,
            steps: self.ell,
        }
    }

    pub fn fine_grid(&self) -> GridSpec {
        self.slab_grid().refine(self.substeps)
    }
}

/// Values of `2k` lines at the slab times `s_0 < ... < s_ell`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    pub grid: GridSpec,
    /// `values[i][j]`: line `i` (zero-based) at slab time `s_j`.
    pub values: Vec<Vec<f64>>,
}

impl BoundarySamples {
    pub fn new(grid: GridSpec, values: Vec<Vec<f64>>) -> Result<Self> {
        grid.validate()?;
        if values.is_empty() || values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Config("boundary needs one value per line and slab time".into()));
        }
        for j in 0..grid.len() {
            for i in 1..values.len() {
                if !(values[i - 1][j] > values[i][j]) {
                    return Err(Error::Precondition(format!(
                        "boundary not strictly ordered: lines {} and {} at slab time {j}",
                        i,
                        i + 1
                    )));
                }
            }
        }
        Ok(BoundarySamples { grid, values })
    }

    pub fn from_ensemble(ensemble: &LineEnsemble) -> Result<Self> {
        let values = ensemble.lines.iter().map(|p| p.values.clone()).collect();
        BoundarySamples::new(ensemble.grid, values)
    }

    pub fn num_lines(&self) -> usize {
        self.values.len()
    }

    pub fn jam_graph(&self, delta: f64) -> JamGraph {
        JamGraph::from_grid_values(self.num_lines(), self.grid.steps, delta, |i, j| self.values[i][j])
    }
}

/// A component whose rejection sampler hit the attempt cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentFailure {
    /// One-based slab index.
    pub slab: usize,
    /// One-based line indices.
    pub lines: Vec<usize>,
    pub attempts: u64,
}

#[derive(Clone, Debug)]
pub struct BridgeRepSample {
    pub ensemble: LineEnsemble,
    pub graph: JamGraph,
    /// Components that could not be conditioned. Their bridges were drawn
    /// without conditioning and the sample is partial.
    pub failures: Vec<ComponentFailure>,
    pub attempts: u64,
}

impl BridgeRepSample {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

struct ComponentDraw {
    slab: usize,
    lines: Vec<usize>,
    rows: Vec<Vec<f64>>,
    attempts: u64,
    failed: bool,
}

/// Samples the bridge representation from `boundary`.
///
/// Slab `j` joins `s_{j-1}` to `s_j` with `config.substeps` steps. Bridges
/// of lines in the same component of the jam graph of `boundary` are drawn
/// jointly, conditioned to be strictly ordered at the sampling times; all
/// other bridges are independent. Component `(j, first line)` draws from
/// `stream.derive_all(&[j, first line])`.
pub fn sample_bridge_representation(
    boundary: &BoundarySamples,
    config: &BridgeRepConfig,
    stream: RngStream,
) -> Result<BridgeRepSample> {
    config.validate()?;
    let slab_grid = config.slab_grid();
    if boundary.grid.steps != slab_grid.steps
        || (boundary.grid.t_start - slab_grid.t_start).abs() > 1e-12
        || (boundary.grid.t_end - slab_grid.t_end).abs() > 1e-12
    {
        return Err(Error::Config(format!(
            "boundary grid {:?} does not match slab grid {:?}",
            boundary.grid, slab_grid
        )));
    }
    let graph = boundary.jam_graph(config.delta);
    let lines = boundary.num_lines();
    let tasks: Vec<(usize, Vec<usize>)> = (1..=config.ell)
        .flat_map(|j| graph.slab_components(j).into_iter().map(move |c| (j, c)))
        .collect();
    let h = slab_grid.spacing() / config.substeps as f64;
    let draws = try_map_replicas(tasks.len(), |idx| -> Result<ComponentDraw> {
        let (j, comp) = &tasks[idx];
        let j = *j;
        let mut rng = stream.derive_all(&[j as u64, comp[0] as u64]).rng();
        let local = GridSpec::new(slab_grid.time(j - 1), slab_grid.time(j), config.substeps)?;
        let specs: Vec<BridgeSpec> = comp
            .iter()
            .map(|&i| BridgeSpec::new(boundary.values[i - 1][j - 1], boundary.values[i - 1][j], local, config.variance))
            .collect::<Result<_>>()?;
        if specs.len() == 1 {
            let mut row = vec![0.0; local.len()];
            fill_bridge(&mut row, specs[0].start_value, specs[0].end_value, config.variance, h, &mut rng);
            return Ok(ComponentDraw {
                slab: j,
                lines: comp.clone(),
                rows: vec![row],
                attempts: 1,
                failed: false,
            });
        }
        let system = BridgeSystem::new(&specs, None, config.avoidance)?;
        match system.sample(config.max_attempts, &mut rng) {
            Ok(s) => Ok(ComponentDraw {
                slab: j,
                lines: comp.clone(),
                rows: s.paths.into_iter().map(|p| p.values).collect(),
                attempts: s.attempts,
                failed: false,
            }),
            Err(Error::RejectionFailure { attempts }) => {
                let rows = specs
                    .iter()
                    .map(|s| {
                        let mut row = vec![0.0; local.len()];
                        fill_bridge(&mut row, s.start_value, s.end_value, config.variance, h, &mut rng);
                        row
                    })
                    .collect();
                Ok(ComponentDraw {
                    slab: j,
                    lines: comp.clone(),
                    rows,
                    attempts,
                    failed: true,
                })
            }
            Err(e) => Err(e),
        }
    })?;
    let fine = config.fine_grid();
    let mut values = vec![vec![0.0; fine.len()]; lines];
    let mut failures = Vec::new();
    let mut attempts = 0;
    for d in draws {
        let offset = (d.slab - 1) * config.substeps;
        for (&i, row) in d.lines.iter().zip(&d.rows) {
            values[i - 1][offset..offset + row.len()].copy_from_slice(row);
        }
        attempts += d.attempts;
        if d.failed {
            failures.push(ComponentFailure {
                slab: d.slab,
                lines: d.lines,
                attempts: d.attempts,
            });
        }
    }
    // slab endpoints are copied from the boundary, never from the bridges
    for (i, row) in values.iter_mut().enumerate() {
        for j in 0..=config.ell {
            row[j * config.substeps] = boundary.values[i][j];
        }
    }
    let paths = values
        .into_iter()
        .map(|v| Path::new(fine, v, config.variance, 0.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(BridgeRepSample {
        ensemble: LineEnsemble::new(fine, paths, false)?,
        graph,
        failures,
        attempts,
    })
}

/// Default Dyson dimension for boundary samples, `max(200, 25 k)`.
pub fn default_boundary_n(k: usize) -> usize {
    200.max(25 * k)
}

/// Top `2k` rescaled `n`-level Dyson lines at the slab times.
pub fn boundary_from_finite_n(n: usize, config: &BridgeRepConfig, stream: RngStream) -> Result<BoundarySamples> {
    config.validate()?;
    if n < 4 * config.k {
        return Err(Error::Config(format!(
            "boundary dimension n = {n} below 4k = {}",
            4 * config.k
        )));
    }
    let mut rng = stream.rng();
    let e = sample_rescaled(n, 2 * config.k, 0.0, config.t, config.ell, &mut rng)?;
    BoundarySamples::from_ensemble(&e)
}

/// Functionals compared by [`ensemble_equivalence_test`], for lines
/// `1..=k` (one-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Functional {
    /// Value at grid index.
    Marginal { line: usize, index: usize },
    /// `value(index + span) - value(index)`.
    Increment { line: usize, index: usize, span: usize },
    Supremum { line: usize },
}

impl Functional {
    pub fn eval(&self, e: &LineEnsemble) -> f64 {
        match *self {
            Functional::Marginal { line, index } => e.value(line - 1, index),
            Functional::Increment { line, index, span } => e.value(line - 1, index + span) - e.value(line - 1, index),
            Functional::Supremum { line } => e.lines[line - 1].max(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Functional::Marginal { line, index } => format!("marginal[{line},{index}]"),
            Functional::Increment { line, index, span } => format!("increment[{line},{index},{span}]"),
            Functional::Supremum { line } => format!("supremum[{line}]"),
        }
    }
}

/// The standard battery on a grid made of `ell` slabs of `substeps` steps:
/// for each line, marginals at every slab midpoint (the first interior
/// point when `substeps == 1`), increments over dyadic spans starting at
/// grid index 1 (index 0 if the grid has a single step), and the supremum.
pub fn standard_functionals(k: usize, ell: usize, substeps: usize) -> Vec<Functional> {
    let steps = ell * substeps;
    let mut out = Vec::new();
    for line in 1..=k {
        for j in 0..ell {
            let index = j * substeps + (substeps / 2).max(1).min(substeps);
            if index < steps {
                out.push(Functional::Marginal { line, index });
            }
        }
        let start = usize::from(steps > 1);
        let mut span = 1;
        while start + span <= steps {
            out.push(Functional::Increment { line, index: start, span });
            span *= 2;
        }
        out.push(Functional::Supremum { line });
    }
    out
}

/// Two-sample KS tests of each functional between `direct` and `bridged`,
/// Bonferroni corrected to family level `level`. Passes when no functional
/// rejects.
pub fn ensemble_equivalence_test(
    direct: &[LineEnsemble],
    bridged: &[LineEnsemble],
    functionals: &[Functional],
    level: f64,
) -> Result<StatReport> {
    let first = direct
        .first()
        .ok_or_else(|| Error::insufficient("direct ensembles", 2, 0))?;
    if direct.len() < 2 || bridged.len() < 2 {
        return Err(Error::insufficient("ensembles per sample", 2, direct.len().min(bridged.len())));
    }
    let grid = first.grid;
    let same = |g: &GridSpec| {
        g.steps == grid.steps
            && (g.t_start - grid.t_start).abs() <= 1e-12
            && (g.t_end - grid.t_end).abs() <= 1e-12
    };
    if !direct.iter().chain(bridged).all(|e| same(&e.grid)) {
        return Err(Error::Config("direct and bridged ensembles must share a grid".into()));
    }
    if functionals.is_empty() {
        return Err(Error::Config("no functionals to compare".into()));
    }
    let k_min = direct.iter().chain(bridged).map(LineEnsemble::num_lines).min().unwrap_or(0);
    for f in functionals {
        let line = match *f {
            Functional::Marginal { line, index } => {
                if index > grid.steps {
                    return Err(Error::Config(format!("{} beyond the grid", f.label())));
                }
                line
            }
            Functional::Increment { line, index, span } => {
                if index + span > grid.steps {
                    return Err(Error::Config(format!("{} beyond the grid", f.label())));
                }
                line
            }
            Functional::Supremum { line } => line,
        };
        if line == 0 || line > k_min {
            return Err(Error::Config(format!("{} needs line {line} of {k_min}", f.label())));
        }
    }
    let per_test = level / functionals.len() as f64;
    let mut report = StatReport::new("bridge-rep", "bridge representation matches the ensemble")
        .param("functionals", functionals.len())
        .param("correction", "bonferroni")
        .threshold("family_level", level)
        .threshold("per_test_level", per_test)
        .replicas(direct.len().min(bridged.len()));
    let mut min_p = 1.0_f64;
    let mut rejections = 0;
    for f in functionals {
        let a: Vec<f64> = direct.iter().map(|e| f.eval(e)).collect();
        let b: Vec<f64> = bridged.iter().map(|e| f.eval(e)).collect();
        let ks = stats::ks_two_sample(&a, &b);
        report.set_stat(&format!("p[{}]", f.label()), ks.p_value);
        min_p = min_p.min(ks.p_value);
        if ks.p_value < per_test {
            rejections += 1;
        }
    }
    report.set_stat("min_p", min_p);
    report.set_stat("rejections", rejections as f64);
    report.pass = rejections == 0;
    Ok(report)
}

/// Fraction of ensembles whose top `k` lines fail to be strictly ordered at
/// some grid time.
pub fn ordering_violation_fraction(ensembles: &[LineEnsemble], k: usize) -> f64 {
    if ensembles.is_empty() {
        return 0.0;
    }
    let bad = ensembles
        .iter()
        .filter(|e| e.top(k.min(e.num_lines())).first_order_violation(true).is_some())
        .count();
    bad as f64 / ensembles.len() as f64
}

/// Outcome of a full direct-versus-bridged comparison.
#[derive(Clone, Debug)]
pub struct EquivalenceRun {
    pub report: StatReport,
    pub partial_samples: usize,
    pub violation_fraction: f64,
}

/// Top-`k` rescaled Dyson ensembles on the fine grid of `config`.
pub fn sample_direct(n: usize, config: &BridgeRepConfig, replicas: usize, stream: RngStream) -> Result<Vec<LineEnsemble>> {
    config.validate()?;
    let steps = config.fine_grid().steps;
    try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        sample_rescaled(n, config.k, 0.0, config.t, steps, &mut rng)
    })
}

pub fn sample_boundaries(
    n: usize,
    config: &BridgeRepConfig,
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<BoundarySamples>> {
    try_map_replicas(replicas, |r| boundary_from_finite_n(n, config, stream.derive(r as u64)))
}

pub fn sample_bridged(
    boundaries: &[BoundarySamples],
    config: &BridgeRepConfig,
    stream: RngStream,
) -> Result<Vec<BridgeRepSample>> {
    try_map_replicas(boundaries.len(), |r| {
        sample_bridge_representation(&boundaries[r], config, stream.derive(r as u64))
    })
}

/// Runs [`ensemble_equivalence_test`] on the standard battery for the top
/// `config.k` lines and records ordering violations and partial samples.
pub fn compare_samples(
    direct: &[LineEnsemble],
    bridged: &[BridgeRepSample],
    config: &BridgeRepConfig,
    level: f64,
) -> Result<EquivalenceRun> {
    let k = config.k;
    let partial = bridged.iter().filter(|s| s.is_partial()).count();
    let top: Vec<LineEnsemble> = bridged.iter().map(|s| s.ensemble.top(k)).collect();
    let functionals = standard_functionals(k, config.ell, config.substeps);
    let violation_fraction = ordering_violation_fraction(&top, k);
    let mut report = ensemble_equivalence_test(direct, &top, &functionals, level)?
        .param("config", config)
        .stat("ordering_violation_fraction", violation_fraction)
        .stat("partial_samples", partial as f64);
    if partial > 0 {
        report.notes.push(format!("{partial} bridged samples hit the rejection cap"));
        report.pass = false;
    }
    Ok(EquivalenceRun {
        report,
        partial_samples: partial,
        violation_fraction,
    })
}

/// Direct ensembles against bridge representations built from independent
/// boundary samples of the same Dyson dimension `n`.
pub fn run_equivalence(
    n: usize,
    config: &BridgeRepConfig,
    replicas: usize,
    level: f64,
    stream: RngStream,
) -> Result<EquivalenceRun> {
    let direct = sample_direct(n, config, replicas, stream.derive(0))?;
    let boundaries = sample_boundaries(n, config, replicas, stream.derive(1))?;
    let bridged = sample_bridged(&boundaries, config, stream.derive(2))?;
    let mut run = compare_samples(&direct, &bridged, config, level)?;
    run.report = run.report.param("n", n);
    Ok(run)
}

/// `sup_{s < s'} |A_i(s) - A_i(s')| / (sqrt(r) log^{1/2}(1 + 1/r))`, `r = s' - s`,
/// over the grid times of one line.
pub fn line_modulus(path: &Path) -> f64 {
    let g = path.grid;
    let h = g.spacing();
    let v = &path.values;
    let mut best = 0.0_f64;
    for span in 1..v.len() {
        let r = span as f64 * h;
        let norm = r.sqrt() * (1.0 + 1.0 / r).ln().sqrt();
        let m = v.windows(span + 1).map(|w| (w[span] - w[0]).abs()).fold(0.0, f64::max);
        best = best.max(m / norm);
    }
    best
}

/// Uniform statistic over lines `1..=k`: `max_i line_modulus(A_i) / log^d(i + 1)`.
pub fn uniform_modulus(per_line: &[f64], k: usize, d: f64) -> f64 {
    per_line[..k]
        .iter()
        .enumerate()
        .map(|(i, &m)| m / ((i + 2) as f64).ln().powf(d))
        .fold(0.0, f64::max)
}

/// Modulus-of-continuity scan.
///
/// For each `d` in `0, 0.25, ..., d_max` computes the 99th percentile of
/// the uniform statistic for every `k` in `k_list`; `d` works when each
/// consecutive ratio is at most `ratio_max`. Also compares the 99th
/// percentile of the line-1 statistic on the grid against the grid
/// subsampled by 2; the ratio fine/coarse must lie in `[1, refine_max]`
/// up to Monte Carlo noise of `0.05`. Passes when some `d` works and the
/// refinement check holds.
pub fn modulus_scan(
    ensembles: &[LineEnsemble],
    k_list: &[usize],
    d_max: f64,
    ratio_max: f64,
    refine_max: f64,
) -> Result<StatReport> {
    if ensembles.len() < 100 {
        return Err(Error::insufficient("modulus ensembles", 100, ensembles.len()));
    }
    let k_top = *k_list.iter().max().ok_or_else(|| Error::Config("empty k_list".into()))?;
    if k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] == 0 {
        return Err(Error::Config("k_list must be positive and increasing".into()));
    }
    if ensembles.iter().any(|e| e.num_lines() < k_top) {
        return Err(Error::Config(format!("ensembles need {k_top} lines")));
    }
    if ensembles[0].grid.steps % 2 != 0 {
        return Err(Error::Config("refinement check needs an even number of steps".into()));
    }
    let per_line: Vec<Vec<f64>> = ensembles
        .iter()
        .map(|e| e.lines[..k_top].iter().map(line_modulus).collect())
        .collect();
    let coarse: Vec<f64> = ensembles
        .iter()
        .map(|e| e.lines[0].subsample(2).map(|p| line_modulus(&p)))
        .collect::<Result<_>>()?;
    let mut report = StatReport::new("modulus", "modulus of continuity of the line ensemble")
        .param("k_list", k_list)
        .param("d_max", d_max)
        .threshold("ratio_max", ratio_max)
        .threshold("refine_max", refine_max)
        .replicas(ensembles.len());
    let mut smallest = None;
    let steps = (d_max / 0.25).round() as usize;
    for s in 0..=steps {
        let d = s as f64 * 0.25;
        let q: Vec<f64> = k_list
            .iter()
            .map(|&k| {
                let u: Vec<f64> = per_line.iter().map(|p| uniform_modulus(p, k, d)).collect();
                stats::quantile(&u, 0.99)
            })
            .collect();
        let worst = q.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        for (k, v) in k_list.iter().zip(&q) {
            report.set_stat(&format!("q99[d={d},k={k}]"), *v);
        }
        report.set_stat(&format!("max_ratio[d={d}]"), worst);
        if worst <= ratio_max && smallest.is_none() {
            smallest = Some(d);
        }
    }
    let fine_q = stats::quantile(&per_line.iter().map(|p| p[0]).collect::<Vec<_>>(), 0.99);
    let coarse_q = stats::quantile(&coarse, 0.99);
    let refine_ratio = fine_q / coarse_q;
    report.set_stat("line1_q99_fine", fine_q);
    report.set_stat("line1_q99_coarse", coarse_q);
    report.set_stat("refinement_ratio", refine_ratio);
    let refine_ok = refine_ratio >= 0.95 && refine_ratio <= refine_max;
    match smallest {
        Some(d) => report.set_stat("smallest_d", d),
        None => report.notes.push(format!("no d <= {d_max} keeps ratios below {ratio_max}")),
    }
    report.pass = smallest.is_some() && refine_ok;
    Ok(report)
}
