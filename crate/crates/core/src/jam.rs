//! Jammed points, the greedy partial matching, and the jam graph on
//! (line, slab) indices.

use serde::{Deserialize, Serialize};

use crate::airy::kernel::kernel_eval;
use crate::airy::PointSample;
use crate::dyson::sample_rescaled;
use crate::ensemble::{GridSpec, LineEnsemble};
use crate::error::{Error, Result};
use crate::parallel::try_map_replicas;
use crate::report::StatReport;
use crate::rng::RngStream;
use crate::stats;

/// Result of counting jammed points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JamCount {
    /// Window `[lo, hi]` the points were restricted to, if any.
    pub interval: Option<(f64, f64)>,
    pub delta: f64,
    /// Number of points having another point within `delta`.
    pub jammed: usize,
    /// `a^2 delta^3 ell` when counted on the window `[-a, -a + ell]`.
    pub eta: Option<f64>,
}

fn is_sorted_either_way(points: &[f64]) -> bool {
    points.windows(2).all(|w| w[0] <= w[1]) || points.windows(2).all(|w| w[0] >= w[1])
}

/// Number of points with a neighbour at distance at most `delta`, by a scan
/// of adjacent gaps. `points` must be sorted (either direction).
pub fn count_jammed(points: &[f64], delta: f64) -> JamCount {
    debug_assert!(is_sorted_either_way(points), "points must be sorted");
    let mut jammed = 0;
    for i in 0..points.len() {
        let left = i > 0 && (points[i] - points[i - 1]).abs() <= delta;
        let right = i + 1 < points.len() && (points[i + 1] - points[i]).abs() <= delta;
        if left || right {
            jammed += 1;
        }
    }
    JamCount {
        interval: None,
        delta,
        jammed,
        eta: None,
    }
}

/// Jammed points of the configuration restricted to `[-a, -a + ell]`.
pub fn count_jammed_window(points: &[f64], a: f64, ell: f64, delta: f64) -> JamCount {
    let (lo, hi) = (-a, -a + ell);
    let inside: Vec<f64> = points.iter().copied().filter(|&p| p >= lo && p <= hi).collect();
    JamCount {
        interval: Some((lo, hi)),
        eta: Some(a * a * delta.powi(3) * ell),
        ..count_jammed(&inside, delta)
    }
}

/// Greedy matching of sorted points: walk in order and pair each unmatched
/// point with its successor when they are within `delta`. Returns index
/// pairs. The matching always has at least `floor(L / 3)` pairs, where `L`
/// is the number of jammed points; this is asserted.
pub fn greedy_partial_matching(points: &[f64], delta: f64) -> Vec<(usize, usize)> {
    let pairs = greedy_pairs(points, delta);
    let l = count_jammed(points, delta).jammed;
    assert!(
        pairs.len() >= l / 3,
        "greedy matching of size {} below floor({l}/3)",
        pairs.len()
    );
    pairs
}

/// The greedy rule without the size assertion.
pub fn greedy_pairs(points: &[f64], delta: f64) -> Vec<(usize, usize)> {
    debug_assert!(is_sorted_either_way(points), "points must be sorted");
    let mut pairs = Vec::new();
    let mut i = 0;
    while i + 1 < points.len() {
        if (points[i + 1] - points[i]).abs() <= delta {
            pairs.push((i, i + 1));
            i += 2;
        } else {
            i += 1;
        }
    }
    pairs
}

/// The graph `G_k(t, ell, delta)` on indices `(i, j)`, line `i` in `1..=k`,
/// slab `j` in `1..=ell`. An edge `(i, j)` joins `(i, j)` and `(i + 1, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JamGraph {
    pub k: usize,
    pub ell: usize,
    pub delta: f64,
    /// Lower-indexed endpoint of each edge, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl JamGraph {
    /// Builds the graph from boundary values `value(i, j)` for lines
    /// `i in 0..k` and slab times `j in 0..=ell` (zero-based).
    pub fn from_grid_values(k: usize, ell: usize, delta: f64, value: impl Fn(usize, usize) -> f64) -> Self {
        let mut edges = Vec::new();
        for j in 1..=ell {
            for i in 1..k {
                let close = |jj: usize| (value(i - 1, jj) - value(i, jj)).abs() <= delta;
                if close(j - 1) || close(j) {
                    edges.push((i, j));
                }
            }
        }
        edges.sort_unstable();
        JamGraph { k, ell, delta, edges }
    }

    fn vertex(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.k + (i - 1)
    }

    /// Connected components as sorted vertex lists, ordered by first vertex.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let n = self.k * self.ell;
        let mut uf = UnionFind::new(n);
        for &(i, j) in &self.edges {
            uf.union(self.vertex(i, j), self.vertex(i + 1, j));
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
        for j in 1..=self.ell {
            for i in 1..=self.k {
                let root = uf.find(self.vertex(i, j));
                groups.entry(root).or_default().push((i, j));
            }
        }
        let mut comps: Vec<_> = groups.into_values().collect();
        for c in &mut comps {
            c.sort_unstable_by_key(|&(i, j)| (j, i));
        }
        comps.sort_unstable_by_key(|c| (c[0].1, c[0].0));
        comps
    }

    /// Components within slab `j`, each a list of line indices.
    pub fn slab_components(&self, j: usize) -> Vec<Vec<usize>> {
        self.components()
            .into_iter()
            .filter(|c| c[0].1 == j)
            .map(|c| c.into_iter().map(|(i, _)| i).collect())
            .collect()
    }

    /// Largest component size `M`.
    pub fn max_component_size(&self) -> usize {
        self.components().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Lines with at least one edge in slab `j`.
    pub fn non_isolated(&self, j: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.1 == j)
            .flat_map(|&(i, _)| [i, i + 1])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&JamGraphJson::from(self)).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: JamGraphJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        for &[i, j] in &g.edges {
            if i == 0 || i >= g.k || j == 0 || j > g.ell {
                return Err(Error::Parse(format!("edge [{i}, {j}] outside the index range")));
            }
        }
        let mut edges: Vec<(usize, usize)> = g.edges.iter().map(|&[i, j]| (i, j)).collect();
        edges.sort_unstable();
        Ok(JamGraph {
            k: g.k,
            ell: g.ell,
            delta: g.delta,
            edges,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct JamGraphJson {
    k: usize,
    ell: usize,
    delta: f64,
    edges: Vec<[usize; 2]>,
}

impl From<&JamGraph> for JamGraphJson {
    fn from(g: &JamGraph) -> Self {
        JamGraphJson {
            k: g.k,
            ell: g.ell,
            delta: g.delta,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Jam graph of the top `k` lines of `ensemble` at the slab times, which
/// must be grid points of the ensemble.
pub fn build_jam_graph(ensemble: &LineEnsemble, k: usize, slab_grid: &GridSpec, delta: f64) -> Result<JamGraph> {
    if k > ensemble.num_lines() || k == 0 {
        return Err(Error::Config(format!(
            "cannot take {k} lines of a {}-line ensemble",
            ensemble.num_lines()
        )));
    }
    let tol = 1e-9 * ensemble.grid.spacing();
    let idx = slab_grid
        .times()
        .iter()
        .map(|&t| {
            ensemble
                .grid
                .index_of(t, tol)
                .ok_or_else(|| Error::Config(format!("slab time {t} is not an ensemble grid time")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JamGraph::from_grid_values(k, slab_grid.steps, delta, |i, j| {
        ensemble.value(i, idx[j])
    }))
}

/// `delta = k^{-1/3 - gamma/4}` and `ell = ceil(t k^{2/3 + gamma})`.
pub fn gamma_defaults(k: usize, t: f64, gamma: f64) -> (f64, usize) {
    let kf = k as f64;
    let delta = kf.powf(-1.0 / 3.0 - gamma / 4.0);
    let ell = (t * kf.powf(2.0 / 3.0 + gamma) - 1e-9).ceil().max(1.0) as usize;
    (delta, ell)
}

/// Jam graphs of the top `k` lines of independent rescaled `n`-level Dyson
/// ensembles observed at `ell + 1` equally spaced times of `[0, t]`.
pub fn sample_jam_graphs(
    n: usize,
    k: usize,
    t: f64,
    ell: usize,
    delta: f64,
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<JamGraph>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if !(t > 0.0) || ell == 0 || !(delta >= 0.0) {
        return Err(Error::Config("need t > 0, ell >= 1 and delta >= 0".into()));
    }
    try_map_replicas(replicas, |r| {
        let mut rng = stream.derive(r as u64).rng();
        let e = sample_rescaled(n, k, 0.0, t, ell, &mut rng)?;
        build_jam_graph(&e, k, &e.grid, delta)
    })
}

/// Largest component of the jam graph at `delta = k^{-1/3 - gamma/4}`,
/// `ell = ceil(t k^{2/3 + gamma})`. Passes when the empirical probability
/// of `M >= 14 (1 + 1/gamma)` is at most `0.1`.
pub fn component_size_test(
    n: usize,
    k: usize,
    gamma: f64,
    t: f64,
    replicas: usize,
    stream: RngStream,
) -> Result<StatReport> {
    if replicas < 10 {
        return Err(Error::insufficient("component replicas", 10, replicas));
    }
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    let (delta, ell) = gamma_defaults(k, t, gamma);
    let graphs = sample_jam_graphs(n, k, t, ell, delta, replicas, stream)?;
    let sizes: Vec<f64> = graphs.iter().map(|g| g.max_component_size() as f64).collect();
    let m_crit = 14.0 * (1.0 + 1.0 / gamma);
    let p_hat = sizes.iter().filter(|&&m| m >= m_crit).count() as f64 / sizes.len() as f64;
    let sorted = stats::sorted(&sizes);
    Ok(StatReport::new("components", "largest jam-graph component")
        .param("n", n)
        .param("k", k)
        .param("gamma", gamma)
        .param("t", t)
        .param("delta", delta)
        .param("ell", ell)
        .stat("mean_max_component", stats::mean(&sizes))
        .stat("median_max_component", stats::quantile_sorted(&sorted, 0.5))
        .stat("max_max_component", *sorted.last().expect("nonempty"))
        .stat("p_hat", p_hat)
        .threshold("m_critical", m_crit)
        .threshold("p_max", 0.1)
        .replicas(replicas)
        .pass(p_hat <= 0.1))
}

/// Jam-count summary across a sample of configurations for one `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct JamSummary {
    pub delta: f64,
    pub eta: f64,
    pub mean: f64,
    pub counts: Vec<usize>,
}

fn jam_summaries(samples: &[PointSample], a: f64, ell: f64, delta_list: &[f64]) -> Result<Vec<JamSummary>> {
    if let Some(s) = samples.iter().find(|s| s.lower_cutoff > -a) {
        return Err(Error::Precondition(format!(
            "sample complete only above {}, window starts at {}",
            s.lower_cutoff, -a
        )));
    }
    Ok(delta_list
        .iter()
        .map(|&delta| {
            let counts: Vec<usize> = samples
                .iter()
                .map(|s| count_jammed_window(&s.points, a, ell, delta).jammed)
                .collect();
            let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            JamSummary {
                delta,
                eta: a * a * delta.powi(3) * ell,
                mean,
                counts,
            }
        })
        .collect())
}

/// Concentration of the jammed count `L` on `[-a, -a + ell]`.
///
/// For each `delta` reports `mean L / eta` and the survival of `L / eta`;
/// the test passes when the log-log slope of mean `L` against `delta` is
/// within `0.5` of 3 and every survival curve is nonincreasing and decays.
pub fn jam_concentration_test(samples: &[PointSample], a: f64, ell: f64, delta_list: &[f64]) -> Result<StatReport> {
    if samples.len() < 100 {
        return Err(Error::insufficient("jam samples", 100, samples.len()));
    }
    if delta_list.len() < 2 || delta_list.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Config("need at least two positive deltas".into()));
    }
    let sums = jam_summaries(samples, a, ell, delta_list)?;
    let mut report = StatReport::new("jam-scaling", "mean concentration of jammed points")
        .param("a", a)
        .param("ell", ell)
        .param("delta_list", delta_list)
        .threshold("slope_target", 3.0)
        .threshold("slope_tolerance", 0.5)
        .replicas(samples.len());
    let mut survival_ok = true;
    for (idx, s) in sums.iter().enumerate() {
        report.set_stat(&format!("mean_L[{idx}]"), s.mean);
        report.set_stat(&format!("eta[{idx}]"), s.eta);
        report.set_stat(&format!("mean_over_eta[{idx}]"), s.mean / s.eta);
        report.set_stat(&format!("events[{idx}]"), s.counts.iter().filter(|&&c| c > 0).count() as f64);
        // survival of L / eta at m = 0, 1, 2, 4, 8, ...
        let ratios: Vec<f64> = s.counts.iter().map(|&c| c as f64 / s.eta).collect();
        let sorted = stats::sorted(&ratios);
        let ms: Vec<f64> = std::iter::once(0.0)
            .chain((0..12).map(|p| 2f64.powi(p)))
            .collect();
        let surv: Vec<f64> = ms.iter().map(|&m| stats::survival_sorted(&sorted, m)).collect();
        let monotone = surv.windows(2).all(|w| w[1] <= w[0]);
        let decays = surv.last() < surv.first();
        survival_ok &= monotone && decays;
    }
    if sums.iter().any(|s| s.mean == 0.0) {
        report = report.note("some delta produced no jammed points; slope undefined");
        report.pass = false;
        return Ok(report);
    }
    let xs: Vec<f64> = sums.iter().map(|s| s.delta.ln()).collect();
    let ys: Vec<f64> = sums.iter().map(|s| s.mean.ln()).collect();
    let (slope, _) = stats::linear_fit(&xs, &ys);
    report.set_stat("slope", slope);
    report.pass = (slope - 3.0).abs() <= 0.5 && survival_ok;
    Ok(report)
}

/// `E[ binom(floor(L/3), n) n! ]` against `(C n eta)^n`.
///
/// Reports the fitted constant `C_n = E[...]^{1/n} / (n eta)` for each
/// requested `n` and passes when all are at most `c_max`. Also reports
/// kernel bounds on the window: `sup |K|` and `sup` of its first partial
/// derivatives by central differences.
pub fn moment_bound_check(
    samples: &[PointSample],
    a: f64,
    ell: f64,
    delta: f64,
    n_moments: &[usize],
    c_max: f64,
) -> Result<StatReport> {
    if samples.is_empty() {
        return Err(Error::insufficient("moment samples", 1, 0));
    }
    let sums = jam_summaries(samples, a, ell, &[delta])?;
    let s = &sums[0];
    let mut report = StatReport::new("moments", "factorial moments of jammed points")
        .param("a", a)
        .param("ell", ell)
        .param("delta", delta)
        .param("n_moments", n_moments)
        .threshold("c_max", c_max)
        .replicas(samples.len());
    let mut pass = true;
    for &n in n_moments {
        let m = factorial_binomial_moment(&s.counts, n);
        report.set_stat(&format!("moment[{n}]"), m);
        let c = if m == 0.0 { 0.0 } else { m.powf(1.0 / n as f64) / (n as f64 * s.eta) };
        report.set_stat(&format!("fitted_c[{n}]"), c);
        pass &= c <= c_max;
    }
    let (b0, b1) = kernel_bounds(-a, -a + ell)?;
    report.set_stat("kernel_sup", b0);
    report.set_stat("kernel_derivative_sup", b1);
    report.set_stat("eta", s.eta);
    report.pass = pass;
    Ok(report)
}

/// `mean of binom(floor(L/3), n) n!`, zero whenever `n > floor(L/3)`.
pub fn factorial_binomial_moment(counts: &[usize], n: usize) -> f64 {
    let total: f64 = counts
        .iter()
        .map(|&l| {
            let m = l / 3;
            if n > m {
                0.0
            } else {
                // binom(m, n) n! = m (m-1) ... (m-n+1)
                (0..n).map(|r| (m - r) as f64).product()
            }
        })
        .sum();
    total / counts.len() as f64
}

fn kernel_bounds(lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts = 41;
    let h = 1e-4;
    let xs: Vec<f64> = (0..pts).map(|i| lo + (hi - lo) * i as f64 / (pts - 1) as f64).collect();
    let (mut b0, mut b1) = (0.0_f64, 0.0_f64);
    for &x in &xs {
        for &y in &xs {
            b0 = b0.max(kernel_eval(x, y)?.abs());
            let dx = (kernel_eval(x + h, y)? - kernel_eval(x - h, y)?) / (2.0 * h);
            b1 = b1.max(dx.abs());
        }
    }
    Ok((b0, b1))
}

/// Spread of non-isolated vertices across lines.
///
/// For slab time `j` the set `V_j` holds the lines with an edge in either
/// slab adjacent to `j`. Windows of `floor(k^alpha)` consecutive lines are
/// slid over each `V_j`; counts are normalized by `k^{alpha - 3 gamma / 4}`.
/// Passes when the fraction of windows exceeding `m` is nonincreasing over
/// `m_list` and decays from the first to the last level.
pub fn edge_spread_test(graphs: &[JamGraph], alpha: f64, gamma: f64, m_list: &[f64]) -> Result<StatReport> {
    let first = graphs.first().ok_or_else(|| Error::insufficient("graphs", 1, 0))?;
    if graphs.iter().any(|g| g.k != first.k || g.ell != first.ell) {
        return Err(Error::Config("graphs must share k and ell".into()));
    }
    if m_list.len() < 2 || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("m_list needs at least two increasing levels".into()));
    }
    let k = first.k;
    let kf = k as f64;
    let width = (kf.powf(alpha).floor() as usize).clamp(1, k);
    let norm = kf.powf(alpha - 0.75 * gamma);
    let mut normalized = Vec::new();
    for g in graphs {
        for j in 0..=g.ell {
            let mut v: Vec<usize> = Vec::new();
            if j >= 1 {
                v.extend(g.non_isolated(j));
            }
            if j < g.ell {
                v.extend(g.non_isolated(j + 1));
            }
            let mut member = vec![false; k + 1];
            for i in v {
                member[i] = true;
            }
            for start in 1..=k + 1 - width {
                let c = (start..start + width).filter(|&i| member[i]).count();
                normalized.push(c as f64 / norm);
            }
        }
    }
    let sorted = stats::sorted(&normalized);
    let fractions: Vec<f64> = m_list
        .iter()
        .map(|&m| {
            let above = sorted.len() - sorted.partition_point(|&x| x <= m);
            above as f64 / sorted.len() as f64
        })
        .collect();
    let mut report = StatReport::new("edge-spread", "spread of jam-graph edges")
        .param("k", k)
        .param("ell", first.ell)
        .param("alpha", alpha)
        .param("gamma", gamma)
        .param("m_list", m_list)
        .param("window", width)
        .param("vertex_set", "union of the two slabs adjacent to each slab time")
        .replicas(graphs.len());
    for (i, f) in fractions.iter().enumerate() {
        report.set_stat(&format!("fraction[{i}]"), *f);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = m_list
        .iter()
        .zip(&fractions)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&m, &f)| (m, f.ln()))
        .unzip();
    if xs.len() >= 2 {
        report.set_stat("fitted_rate", -stats::linear_fit(&xs, &ys).0);
    }
    let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
    let decays = fractions.last() < fractions.first() || fractions.iter().all(|&f| f == 0.0);
    report.pass = monotone && decays;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Path;

    #[test]
    fn jam_count_examples() {
        assert_eq!(count_jammed(&[0.0, 1.0, 2.0], 0.5).jammed, 0);
        assert_eq!(count_jammed(&[0.0, 0.1, 0.2, 1.0], 0.15).jammed, 3);
        assert_eq!(count_jammed(&[3.0], 10.0).jammed, 0);
        assert_eq!(count_jammed(&[], 10.0).jammed, 0);
        // inclusive threshold
        assert_eq!(count_jammed(&[0.0, 0.5], 0.5).jammed, 2);
        assert_eq!(count_jammed(&[1.0, 0.1, 0.0], 0.15).jammed, 2);
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_partial_matching(&[0.0, 0.1, 0.2, 1.0], 0.15), vec![(0, 1)]);
        assert!(greedy_partial_matching(&[0.0, 1.0, 2.0], 0.5).is_empty());
        let pts = [0.0, 0.01, 5.0, 5.01, 10.0, 10.01];
        assert_eq!(greedy_partial_matching(&pts, 0.1).len(), 3);
    }

    #[test]
    fn window_restricts_and_sets_eta() {
        let c = count_jammed_window(&[-7.9, -7.95, -3.5, -3.9], 8.0, 4.0, 0.1);
        assert_eq!(c.jammed, 2);
        assert_eq!(c.interval, Some((-8.0, -4.0)));
        assert!((c.eta.unwrap() - 64.0 * 1e-3 * 4.0).abs() < 1e-12);
    }

    fn ensemble(values: &[&[f64]]) -> LineEnsemble {
        let g = GridSpec::new(0.0, 1.0, values[0].len() - 1).unwrap();
        let lines = values
            .iter()
            .map(|v| Path::new(g, v.to_vec(), 2.0, 0.0).unwrap())
            .collect();
        LineEnsemble::new(g, lines, false).unwrap()
    }

    #[test]
    fn edgeless_graph() {
        let e = ensemble(&[&[3.0, 3.0, 3.0], &[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]]);
        let g = build_jam_graph(&e, 3, &e.grid, 0.5).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.max_component_size(), 1);
        assert_eq!(g.components().len(), 6);
    }

    #[test]
    fn shared_slab_time_joins_both_slabs() {
        // lines 1, 2 close only at the middle time s_1
        let e = ensemble(&[&[3.0, 2.1, 3.0], &[2.0, 2.0, 2.0], &[0.0, 0.0, 0.0]]);
        let g = build_jam_graph(&e, 3, &e.grid, 0.2).unwrap();
        assert_eq!(g.edges, vec![(1, 1), (1, 2)]);
        assert_eq!(g.max_component_size(), 2);
        assert_eq!(g.slab_components(1), vec![vec![1, 2], vec![3]]);
    }

    #[test]
    fn chain_component() {
        let e = ensemble(&[&[1.2, 5.0], &[1.1, 3.0], &[1.0, 1.0]]);
        let g = build_jam_graph(&e, 3, &e.grid, 0.15).unwrap();
        assert_eq!(g.components()[0], vec![(1, 1), (2, 1), (3, 1)]);
        assert_eq!(g.max_component_size(), 3);
    }

    #[test]
    fn delta_extremes() {
        let e = ensemble(&[&[3.0, 2.5], &[2.0, 2.4], &[1.0, 0.0]]);
        assert_eq!(build_jam_graph(&e, 3, &e.grid, 0.0).unwrap().max_component_size(), 1);
        assert_eq!(build_jam_graph(&e, 3, &e.grid, 1e9).unwrap().max_component_size(), 3);
    }

    #[test]
    fn slab_grid_must_align() {
        let e = ensemble(&[&[3.0, 2.5, 2.0], &[2.0, 2.4, 1.0]]);
        let bad = GridSpec::new(0.0, 0.75, 1).unwrap();
        assert!(build_jam_graph(&e, 2, &bad, 0.1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = JamGraph {
            k: 4,
            ell: 3,
            delta: 0.25,
            edges: vec![(1, 1), (3, 2)],
        };
        let s = g.to_json();
        assert_eq!(s, r#"{"k":4,"ell":3,"delta":0.25,"edges":[[1,1],[3,2]]}"#);
        assert_eq!(JamGraph::from_json(&s).unwrap(), g);
        assert!(JamGraph::from_json(r#"{"k":2,"ell":1,"delta":0.1,"edges":[[2,1]]}"#).is_err());
    }

    #[test]
    fn moment_conventions() {
        assert_eq!(factorial_binomial_moment(&[3, 3, 3], 1), 1.0);
        assert_eq!(factorial_binomial_moment(&[5, 2], 2), 0.0);
        // floor(7/3) = 2: binom(2,2) 2! = 2
        assert_eq!(factorial_binomial_moment(&[7], 2), 2.0);
        let counts = [0, 4, 9, 2];
        let direct = counts.iter().map(|&l| (l / 3) as f64).sum::<f64>() / 4.0;
        assert_eq!(factorial_binomial_moment(&counts, 1), direct);
    }

    #[test]
    fn edgeless_spread() {
        let g = JamGraph {
            k: 8,
            ell: 4,
            delta: 0.0,
            edges: vec![],
        };
        let r = edge_spread_test(&[g.clone(), g], 0.5, 1.0, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(r.statistics["fraction[0]"], 0.0);
        assert!(r.pass);
    }
}
