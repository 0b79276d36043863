//! Exact finite-n random-matrix constructions: GUE spectra, Dyson Brownian
//! motion as eigenvalues of a Hermitian matrix Brownian motion, Brownian
//! melons from Hermitian Brownian bridges, and the edge rescaling.
//!
//! Normalization: a Hermitian increment over time `dt` has real `N(0, dt)`
//! diagonal entries and complex off-diagonal entries with `E|h|^2 = dt`
//! (real and imaginary parts of variance `dt/2`). Each eigenvalue then
//! moves as a variance-1 Brownian motion between interactions and the top
//! eigenvalue at time `t` sits near `2 sqrt(n t)`.

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{GridSpec, LineEnsemble, Path};
use crate::error::{Error, Result};
use crate::parallel::try_map_replicas;
use crate::report::StatReport;
use crate::rng::RngStream;
use crate::stats;
use crate::tridiag::SymTridiagonal;

pub const ENTRY_VARIANCE_CONVENTION: &str =
    "diagonal N(0,dt), off-diagonal complex with E|h|^2 = dt";

/// Random Hermitian matrix with the increment law above for `dt = scale^2`.
pub fn gue_matrix<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Mat<c64> {
    let mut m = Mat::<c64>::zeros(n, n);
    add_gue(&mut m, scale, rng);
    m
}

fn add_gue<R: Rng + ?Sized>(m: &mut Mat<c64>, scale: f64, rng: &mut R) {
    let n = m.nrows();
    let off = scale * std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[(j, j)].re += scale * d;
        for i in j + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = c64::new(off * re, off * im);
            m[(i, j)] += z;
            m[(j, i)] += z.conj();
        }
    }
}

fn hermitian_eigenvalues_desc(m: &Mat<c64>) -> Result<Vec<f64>> {
    let mut ev = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical {
            message: format!("Hermitian eigensolver failed: {e:?}"),
            dump: Some(format!("{m:?}")),
        })?;
    ev.reverse();
    Ok(ev)
}

/// A Hermitian matrix-valued Brownian motion, holding only its current state.
#[derive(Clone, Debug)]
pub struct HermitianWalk {
    pub n: usize,
    pub time: f64,
    state: Mat<c64>,
}

impl HermitianWalk {
    /// Walk started from the zero matrix at time 0.
    pub fn new(n: usize) -> Self {
        HermitianWalk {
            n,
            time: 0.0,
            state: Mat::zeros(n, n),
        }
    }

    /// Walk started at time `t0` from `diag(spectrum)`. By unitary invariance
    /// of the increments this gives the correct eigenvalue process for any
    /// starting matrix with that spectrum.
    pub fn from_spectrum(t0: f64, spectrum: &[f64]) -> Self {
        let n = spectrum.len();
        let mut state = Mat::zeros(n, n);
        for (i, &l) in spectrum.iter().enumerate() {
            state[(i, i)] = c64::new(l, 0.0);
        }
        HermitianWalk { n, time: t0, state }
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) {
        add_gue(&mut self.state, dt.sqrt(), rng);
        self.time += dt;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.state[(i, i)].re).sum()
    }

    /// Largest deviation from exact Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..=i {
                let d = self.state[(i, j)] - self.state[(j, i)].conj();
                worst = worst.max(d.re.abs()).max(d.im.abs());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues_desc(&self.state)
    }
}

/// Sorted (decreasing) GUE spectrum at time 1, via the tridiagonal model.
pub fn sample_gue_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("GUE dimension must be at least 1".into()));
    }
    SymTridiagonal::sample_gue(n, rng).eigenvalues()
}

/// The `m` largest GUE eigenvalues at time 1, decreasing.
pub fn sample_gue_top<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("GUE dimension must be at least 1".into()));
    }
    Ok(SymTridiagonal::sample_gue(n, rng).top_eigenvalues(m))
}

/// Edge coordinate `n^{1/6} (lambda - 2 sqrt(n))` of a time-1 eigenvalue.
pub fn edge_scale(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    (lambda - 2.0 * nf.sqrt()) * nf.powf(1.0 / 6.0)
}

/// Rescaled GUE points above `lower` in edge coordinates, decreasing.
pub fn sample_edge_points<R: Rng + ?Sized>(n: usize, lower: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Config("GUE dimension must be at least 1".into()));
    }
    let nf = n as f64;
    let cut = 2.0 * nf.sqrt() + lower * nf.powf(-1.0 / 6.0);
    let t = SymTridiagonal::sample_gue(n, rng);
    Ok(t.eigenvalues_above(cut)
        .into_iter()
        .map(|l| edge_scale(n, l))
        .collect())
}

/// Eigenvalue paths sorted decreasing at every grid time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DysonEnsemble {
    pub base: LineEnsemble,
    pub n: usize,
}

/// Top `k_keep` Dyson lines at arbitrary increasing times `times[0] >= 0`.
/// Returns one column (decreasing values) per time.
pub fn sample_dyson_at_times<R: Rng + ?Sized>(
    n: usize,
    times: &[f64],
    k_keep: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Config("Dyson dimension must be at least 1".into()));
    }
    let t0 = *times
        .first()
        .ok_or_else(|| Error::Config("at least one time required".into()))?;
    if t0 < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("times must be nonnegative and increasing".into()));
    }
    let k_keep = k_keep.min(n);
    let mut walk = if t0 == 0.0 {
        HermitianWalk::new(n)
    } else {
        let s = t0.sqrt();
        let spec: Vec<f64> = sample_gue_spectrum(n, rng)?.iter().map(|l| s * l).collect();
        HermitianWalk::from_spectrum(t0, &spec)
    };
    let mut columns = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        if j > 0 {
            walk.advance(t - times[j - 1], rng);
        }
        let ev = if t == 0.0 {
            vec![0.0; n]
        } else {
            let ev = walk.eigenvalues()?;
            if let Some(w) = ev.windows(2).position(|w| w[0] <= w[1]) {
                return Err(Error::Numerical {
                    message: format!("eigenvalue collision at time {t}, index {w}"),
                    dump: None,
                });
            }
            ev
        };
        columns.push(ev[..k_keep].to_vec());
    }
    Ok(columns)
}

/// `n`-level Dyson Brownian motion at the grid times, all lines kept.
pub fn sample_dyson_paths<R: Rng + ?Sized>(n: usize, grid: GridSpec, rng: &mut R) -> Result<DysonEnsemble> {
    grid.validate()?;
    if grid.t_start < 0.0 {
        return Err(Error::Config("Dyson grid must start at a nonnegative time".into()));
    }
    let columns = sample_dyson_at_times(n, &grid.times(), n, rng)?;
    Ok(DysonEnsemble {
        base: LineEnsemble::from_columns(grid, &columns, 1.0, true)?,
        n,
    })
}

/// Brownian `k`-melon on `grid` with bridge variance `variance`: eigenvalues
/// of a Hermitian Brownian bridge pinned to zero at both grid endpoints.
pub fn sample_melon<R: Rng + ?Sized>(
    k: usize,
    grid: GridSpec,
    variance: f64,
    rng: &mut R,
) -> Result<LineEnsemble> {
    grid.validate()?;
    if k == 0 {
        return Err(Error::Config("melon needs at least one line".into()));
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::Config(format!("melon variance must be positive, got {variance}")));
    }
    let big_t = grid.t_end;
    let mut h = Mat::<c64>::zeros(k, k);
    let mut columns = vec![vec![0.0; k]];
    for j in 1..grid.len() {
        let (a, b) = (grid.time(j - 1), grid.time(j));
        if j == grid.steps {
            columns.push(vec![0.0; k]);
            break;
        }
        let shrink = (big_t - b) / (big_t - a);
        let sd = (variance * (b - a) * shrink).sqrt();
        for jj in 0..k {
            for ii in 0..k {
                h[(ii, jj)] *= shrink;
            }
        }
        add_gue(&mut h, sd, rng);
        columns.push(hermitian_eigenvalues_desc(&h)?);
    }
    LineEnsemble::from_columns(grid, &columns, variance, true)
}

/// Dyson lines mapped to the edge scale
/// `C_k(t) = (W_k(1 + 2 t n^{-1/3}) - 2 sqrt(n) - 2 t n^{1/6}) n^{1/6}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaledEnsemble {
    pub base: LineEnsemble,
    pub n: usize,
}

/// Source time `1 + 2 t n^{-1/3}` of rescaled time `t`.
pub fn source_time(n: usize, t: f64) -> f64 {
    1.0 + 2.0 * t * (n as f64).powf(-1.0 / 3.0)
}

/// Uniform Dyson grid whose rescaled image is `steps` steps on `[t_lo, t_hi]`.
pub fn source_grid(n: usize, t_lo: f64, t_hi: f64, steps: usize) -> Result<GridSpec> {
    GridSpec::new(source_time(n, t_lo), source_time(n, t_hi), steps)
}

/// Rescales the top `k_keep` lines over the whole Dyson grid.
pub fn rescale_to_airy(dyson: &DysonEnsemble, k_keep: usize) -> Result<RescaledEnsemble> {
    let g = dyson.base.grid;
    let nf = dyson.n as f64;
    let c = nf.powf(1.0 / 3.0) / 2.0;
    let grid = GridSpec::new((g.t_start - 1.0) * c, (g.t_end - 1.0) * c, g.steps)?;
    rescale_onto(dyson, k_keep, grid, 0)
}

/// Rescales the top `k_keep` lines restricted to rescaled times
/// `[t_lo, t_hi]`, which must be covered by grid points of the Dyson grid.
pub fn rescale_window(
    dyson: &DysonEnsemble,
    k_keep: usize,
    t_lo: f64,
    t_hi: f64,
) -> Result<RescaledEnsemble> {
    let g = dyson.base.grid;
    let tol = 1e-9 * g.spacing();
    let find = |t: f64| {
        g.index_of(source_time(dyson.n, t), tol)
            .ok_or_else(|| Error::range(t, format!("rescaled window of source grid {g:?}")))
    };
    let (j0, j1) = (find(t_lo)?, find(t_hi)?);
    if j1 <= j0 {
        return Err(Error::range(t_hi, format!("> {t_lo}")));
    }
    let grid = GridSpec::new(t_lo, t_hi, j1 - j0)?;
    rescale_onto(dyson, k_keep, grid, j0)
}

fn rescale_onto(dyson: &DysonEnsemble, k_keep: usize, grid: GridSpec, offset: usize) -> Result<RescaledEnsemble> {
    if k_keep == 0 || k_keep > dyson.n {
        return Err(Error::Config(format!(
            "cannot keep {k_keep} lines of an {}-level ensemble",
            dyson.n
        )));
    }
    let nf = dyson.n as f64;
    let (sqn, n6) = (nf.sqrt(), nf.powf(1.0 / 6.0));
    let lines = dyson.base.lines[..k_keep]
        .iter()
        .map(|p| {
            let values = (0..grid.len())
                .map(|j| {
                    let t = grid.time(j);
                    (p.values[offset + j] - 2.0 * sqn - 2.0 * t * n6) * n6
                })
                .collect();
            Path::new(grid, values, 2.0, 0.0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RescaledEnsemble {
        base: LineEnsemble::new(grid, lines, true)?,
        n: dyson.n,
    })
}

/// Rescaled top `k_keep` Dyson lines on `steps` steps of `[t_lo, t_hi]`.
pub fn sample_rescaled<R: Rng + ?Sized>(
    n: usize,
    k_keep: usize,
    t_lo: f64,
    t_hi: f64,
    steps: usize,
    rng: &mut R,
) -> Result<LineEnsemble> {
    let src = source_grid(n, t_lo, t_hi, steps)?;
    let columns = sample_dyson_at_times(n, &src.times(), k_keep, rng)?;
    let nf = n as f64;
    let (sqn, n6) = (nf.sqrt(), nf.powf(1.0 / 6.0));
    let grid = GridSpec::new(t_lo, t_hi, steps)?;
    let scaled: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let t = grid.time(j);
            col.iter().map(|w| (w - 2.0 * sqn - 2.0 * t * n6) * n6).collect()
        })
        .collect();
    LineEnsemble::from_columns(grid, &scaled, 2.0, true)
}

/// Tail of `n^{1/6} |W_k(1) - 2 sqrt(n)|`: fits `ln P(m_hat >= m)` against
/// `m^{3/2}` and passes on a negative slope.
pub fn edge_tail_test(n: usize, k: usize, replicas: usize, stream: RngStream) -> Result<StatReport> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if replicas < 100 {
        return Err(Error::insufficient("edge tail replicas", 100, replicas));
    }
    let m_hat = try_map_replicas(replicas, |r| -> Result<f64> {
        let mut rng = stream.derive(r as u64).rng();
        let top = sample_gue_top(n, k, &mut rng)?;
        Ok(edge_scale(n, top[k - 1]).abs())
    })?;
    let sorted = stats::sorted(&m_hat);
    let fit = stats::fit_log_survival(&m_hat, |m| m.powf(1.5), 20);
    let mut report = StatReport::new("edge-tail", "edge tail of the k-th Dyson line")
        .param("n", n)
        .param("k", k)
        .stat("survival_at_0", stats::survival_sorted(&sorted, 0.0))
        .stat("median", stats::quantile_sorted(&sorted, 0.5))
        .stat("q99", stats::quantile_sorted(&sorted, 0.99))
        .threshold("slope_max", 0.0)
        .replicas(replicas);
    match fit {
        Some(f) => {
            report.set_stat("slope_m32", f.slope);
            report.set_stat("fitted_d", -f.slope);
            report.pass = f.slope < 0.0;
        }
        None => report = report.note("upper tail too thin to fit"),
    }
    Ok(report)
}

/// Normalized increments `|W_k(t+s) - W_k(t) - s sqrt(n/t)| / sqrt(s)`.
pub fn dyson_increments(
    n: usize,
    k: usize,
    t: f64,
    s: f64,
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::Config("increment times must be positive".into()));
    }
    let drift = s * (n as f64 / t).sqrt();
    try_map_replicas(replicas, |r| -> Result<f64> {
        let mut rng = stream.derive(r as u64).rng();
        let cols = sample_dyson_at_times(n, &[t, t + s], k, &mut rng)?;
        Ok((cols[1][k - 1] - cols[0][k - 1] - drift).abs() / s.sqrt())
    })
}

pub fn dyson_increment_test(
    n: usize,
    k: usize,
    t: f64,
    s_list: &[f64],
    replicas: usize,
    stream: RngStream,
) -> Result<StatReport> {
    if replicas < 100 {
        return Err(Error::insufficient("increment replicas", 100, replicas));
    }
    if s_list.is_empty() {
        return Err(Error::Config("at least one increment span required".into()));
    }
    let mut report = StatReport::new("dyson-increments", "increment tails of Dyson Brownian motion")
        .param("n", n)
        .param("k", k)
        .param("t", t)
        .param("s_list", s_list)
        .threshold("slope_max", 0.0)
        .threshold("q99_ratio_max", 2.0)
        .replicas(replicas);
    let mut pass = true;
    let mut q99s = Vec::new();
    for (idx, &s) in s_list.iter().enumerate() {
        let m_hat = dyson_increments(n, k, t, s, replicas, stream.derive(idx as u64))?;
        let sorted = stats::sorted(&m_hat);
        let q99 = stats::quantile_sorted(&sorted, 0.99);
        q99s.push(q99);
        report.set_stat(&format!("q99[{idx}]"), q99);
        report.set_stat(&format!("survival_at_0[{idx}]"), stats::survival_sorted(&sorted, 0.0));
        match stats::fit_log_survival(&m_hat, |m| m.powf(1.5), 20) {
            Some(f) => {
                report.set_stat(&format!("slope_m32[{idx}]"), f.slope);
                pass &= f.slope < 0.0;
            }
            None => {
                report.notes.push(format!("span {s}: tail too thin to fit"));
                pass = false;
            }
        }
    }
    let (lo, hi) = q99s
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    report.set_stat("q99_ratio", hi / lo);
    report.pass = pass && hi / lo <= 2.0;
    Ok(report)
}

/// Per-replica level `M*` at which the top line first fails to cross the
/// envelope `2 sqrt(n t) + sqrt(t) n^{-1/6} [m + b log^{2/3}(n^{1/3} log(t v 1/t) + 1)]`
/// on a log-spaced grid of `[n^{-1/3}, n^{1/3}]`; the path crosses the
/// envelope at level `m` exactly when `M* > m`.
pub fn envelope_levels(
    n: usize,
    b: f64,
    time_points: usize,
    replicas: usize,
    stream: RngStream,
) -> Result<Vec<f64>> {
    if time_points < 2 {
        return Err(Error::Config("envelope grid needs at least two times".into()));
    }
    let nf = n as f64;
    let (lo, hi) = (nf.powf(-1.0 / 3.0).ln(), nf.powf(1.0 / 3.0).ln());
    let times: Vec<f64> = (0..time_points)
        .map(|j| (lo + (hi - lo) * j as f64 / (time_points - 1) as f64).exp())
        .collect();
    let n6 = nf.powf(1.0 / 6.0);
    let n3 = nf.powf(1.0 / 3.0);
    try_map_replicas(replicas, |r| -> Result<f64> {
        let mut rng = stream.derive(r as u64).rng();
        let cols = sample_dyson_at_times(n, &times, 1, &mut rng)?;
        Ok(times
            .iter()
            .zip(&cols)
            .map(|(&t, c)| {
                let lil = (n3 * t.max(1.0 / t).ln() + 1.0).ln().powf(2.0 / 3.0);
                (c[0] - 2.0 * (nf * t).sqrt()) * n6 / t.sqrt() - b * lil
            })
            .fold(f64::NEG_INFINITY, f64::max))
    })
}

pub fn envelope_test(
    n: usize,
    replicas: usize,
    m_list: &[f64],
    b: f64,
    time_points: usize,
    stream: RngStream,
) -> Result<StatReport> {
    if replicas < 100 {
        return Err(Error::insufficient("envelope replicas", 100, replicas));
    }
    if m_list.len() < 3 || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("m_list needs at least three increasing levels".into()));
    }
    let levels = envelope_levels(n, b, time_points, replicas, stream)?;
    let sorted = stats::sorted(&levels);
    let mut report = StatReport::new("envelope", "iterated-logarithm envelope of the top Dyson line")
        .param("n", n)
        .param("b", b)
        .param("m_list", m_list)
        .param("time_points", time_points)
        .threshold("slope_max", 0.0)
        .replicas(replicas);
    let fractions: Vec<f64> = m_list
        .iter()
        .map(|&m| {
            let above = sorted.len() - sorted.partition_point(|&x| x <= m);
            above as f64 / sorted.len() as f64
        })
        .collect();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, (&m, &f)) in m_list.iter().zip(&fractions).enumerate() {
        report.set_stat(&format!("crossing_fraction[{i}]"), f);
        if f * replicas as f64 >= 5.0 {
            xs.push(m.max(0.0).powf(1.5));
            ys.push(f.ln());
        }
    }
    let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
    let decays = fractions.last() < fractions.first();
    if xs.len() >= 3 {
        let (slope, _) = stats::linear_fit(&xs, &ys);
        report.set_stat("slope_m32", slope);
        report.pass = monotone && decays && slope < 0.0;
    } else {
        report = report.note("fewer than three levels with enough crossings to fit");
        report.pass = false;
    }
    Ok(report)
}
