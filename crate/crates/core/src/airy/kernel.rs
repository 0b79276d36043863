//! Airy kernel, extended Airy kernel and the Tracy-Widom distribution as a
//! Fredholm determinant.

use std::sync::OnceLock;

use faer::Mat;

use super::function::{airy_pair, AIRY_RANGE};
use super::quadrature::GaussLegendre;
use crate::error::{Error, Result};

/// Below this separation the closed form is replaced by its expansion about
/// the diagonal.
const NEAR_DIAGONAL: f64 = 1e-4;

/// Equal-time Airy kernel
/// `K(x, y) = (Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)`, with the diagonal
/// value `Ai'(x)^2 - x Ai(x)^2`.
pub fn kernel_eval(x: f64, y: f64) -> Result<f64> {
    let (a, b) = if x <= y { (x, y) } else { (y, x) };
    if b - a < NEAR_DIAGONAL {
        let m = 0.5 * (a + b);
        let (ai, aip) = airy_pair(m)?;
        airy_pair(a)?;
        airy_pair(b)?;
        return Ok(near_diagonal(m, ai, aip, 0.5 * (b - a)));
    }
    let (ai_a, aip_a) = airy_pair(a)?;
    let (ai_b, aip_b) = airy_pair(b)?;
    Ok((ai_a * aip_b - aip_a * ai_b) / (a - b))
}

/// `K(m - h, m + h)` to second order in `h`.
fn near_diagonal(m: f64, ai: f64, aip: f64, h: f64) -> f64 {
    let k0 = aip * aip - m * ai * ai;
    // int_m^inf z Ai(z)^2 dz
    let i2 = (m * k0 - ai * aip) / 3.0;
    k0 + h * h * (2.0 * i2 + ai * aip)
}

/// Kernel from cached Airy values at two points.
fn kernel_cached(x: f64, ax: (f64, f64), y: f64, ay: (f64, f64)) -> f64 {
    if x == y {
        return ax.1 * ax.1 - x * ax.0 * ax.0;
    }
    let (a, pa, b, pb) = if x < y { (x, ax, y, ay) } else { (y, ay, x, ax) };
    (pa.0 * pb.1 - pa.1 * pb.0) / (a - b)
}

/// Upper end of the integration range in `lambda` for
/// `int_0^inf Ai(x + lambda) Ai(y + lambda)`, past which the integrand is
/// below `1e-50`.
fn decay_length(x: f64, y: f64) -> f64 {
    (25.0 - x.max(y)).max(1.0)
}

fn panels_for(length: f64) -> usize {
    (length / 0.25).ceil().max(1.0) as usize
}

fn rule20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// `K(x, y)` by direct quadrature of `int_0^inf Ai(x + l) Ai(y + l) dl`.
pub fn kernel_by_quadrature(x: f64, y: f64) -> Result<f64> {
    extended_kernel_with_length(x, 0.0, y, 0.0, decay_length(x, y))
}

/// Extended Airy kernel `K((x, s); (y, t))`.
///
/// For `s >= t` the integral over `lambda >= 0` converges through the decay
/// of `Ai`. For `s < t` the integral runs over negative arguments and
/// converges only through `exp(-(t - s) mu)`; it is truncated where the
/// remaining tail is below `1e-10`, which must keep the arguments inside the
/// Airy range, otherwise a range error is returned.
pub fn extended_kernel_eval(x: f64, s: f64, y: f64, t: f64) -> Result<f64> {
    if s >= t {
        extended_kernel_with_length(x, s, y, t, decay_length(x, y))
    } else {
        let tau = t - s;
        let length = oscillatory_length(tau);
        extended_kernel_with_length(x, s, y, t, length)
    }
}

/// Truncation point `M` with `exp(-tau M) / (pi tau sqrt(M)) <= 1e-10`.
fn oscillatory_length(tau: f64) -> f64 {
    let bound = |m: f64| (-tau * m).exp() / (std::f64::consts::PI * tau * m.sqrt());
    let mut m = 1.0;
    while bound(m) > 1e-10 {
        m *= 1.25;
    }
    m
}

/// Extended kernel with an explicit truncation `length` of the integral.
pub fn extended_kernel_with_length(x: f64, s: f64, y: f64, t: f64, length: f64) -> Result<f64> {
    let rule = rule20();
    if s >= t {
        let tau = s - t;
        let reach = x.max(y) + length;
        if reach > AIRY_RANGE || x.min(y) < -AIRY_RANGE {
            return Err(Error::range(reach, format!("integration arguments within [-{AIRY_RANGE}, {AIRY_RANGE}]")));
        }
        let mut err = None;
        let v = rule.integrate_composite(0.0, length, panels_for(length), |l| {
            match (airy_pair(x + l), airy_pair(y + l)) {
                (Ok(a), Ok(b)) => (-l * tau).exp() * a.0 * b.0,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
        err.map_or(Ok(v), Err)
    } else {
        let tau = t - s;
        let low = x.min(y) - length;
        if low < -AIRY_RANGE || x.max(y) > AIRY_RANGE {
            return Err(Error::range(
                low,
                format!(
                    "integration arguments within [-{AIRY_RANGE}, {AIRY_RANGE}] \
                     (time gap {tau} too small for these positions)"
                ),
            ));
        }
        let mut err = None;
        let v = rule.integrate_composite(0.0, length, panels_for(length), |m| {
            match (airy_pair(x - m), airy_pair(y - m)) {
                (Ok(a), Ok(b)) => (-m * tau).exp() * a.0 * b.0,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        });
        err.map_or(Ok(-v), Err)
    }
}

pub const TW_RANGE: (f64, f64) = (-10.0, 6.0);
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;
pub const DEFAULT_DOMAIN_CUTOFF: f64 = 16.0;

/// Nystrom discretization of the Airy kernel on `[s, domain_cutoff]`.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    pub quadrature_order: usize,
    pub domain_cutoff: f64,
    rule: GaussLegendre,
}

impl Default for KernelEvaluator {
    fn default() -> Self {
        KernelEvaluator::new(DEFAULT_QUADRATURE_ORDER, DEFAULT_DOMAIN_CUTOFF)
            .expect("default evaluator is valid")
    }
}

impl KernelEvaluator {
    pub fn new(quadrature_order: usize, domain_cutoff: f64) -> Result<Self> {
        if quadrature_order == 0 {
            return Err(Error::Config("quadrature order must be positive".into()));
        }
        if !(domain_cutoff > TW_RANGE.1 && domain_cutoff <= 40.0) {
            return Err(Error::Config(format!(
                "domain cutoff must lie in ({}, 40], got {domain_cutoff}",
                TW_RANGE.1
            )));
        }
        Ok(KernelEvaluator {
            quadrature_order,
            domain_cutoff,
            rule: GaussLegendre::new(quadrature_order),
        })
    }

    /// `det(I - K)` on `L^2(s, domain_cutoff)`.
    pub fn fredholm_determinant(&self, s: f64) -> Result<f64> {
        if !(s >= -AIRY_RANGE && s < self.domain_cutoff) {
            return Err(Error::range(s, format!("[-{AIRY_RANGE}, {})", self.domain_cutoff)));
        }
        let (xs, ws) = self.rule.mapped(s, self.domain_cutoff);
        let airy: Vec<(f64, f64)> = xs.iter().map(|&x| airy_pair(x)).collect::<Result<_>>()?;
        let sw: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
        let n = xs.len();
        let m = Mat::<f64>::from_fn(n, n, |i, j| {
            let k = kernel_cached(xs[i], airy[i], xs[j], airy[j]);
            let v = -sw[i] * k * sw[j];
            if i == j {
                1.0 + v
            } else {
                v
            }
        });
        let det = m.determinant();
        if !det.is_finite() {
            return Err(Error::Numerical {
                message: format!("non-finite Fredholm determinant at s = {s}"),
                dump: None,
            });
        }
        Ok(det)
    }

    /// Tracy-Widom GUE distribution function `F_2(s)` for `s` in `[-10, 6]`.
    pub fn tracy_widom_cdf(&self, s: f64) -> Result<f64> {
        if !(s >= TW_RANGE.0 && s <= TW_RANGE.1) {
            return Err(Error::range(s, format!("[{}, {}]", TW_RANGE.0, TW_RANGE.1)));
        }
        Ok(self.fredholm_determinant(s)?.clamp(0.0, 1.0))
    }

    /// Mean and variance of `F_2`, integrating the distribution function
    /// over `[-10, 6]` (the mass outside is below `1e-8`).
    pub fn tracy_widom_moments(&self) -> Result<(f64, f64)> {
        let rule = GaussLegendre::new(16);
        let (lo, hi) = TW_RANGE;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let panels = 16;
        for (a, b) in [(lo, 0.0), (0.0, hi)] {
            let h = (b - a) / panels as f64;
            for p in 0..panels {
                let (xs, ws) = rule.mapped(a + p as f64 * h, a + (p + 1) as f64 * h);
                for (x, w) in xs.into_iter().zip(ws) {
                    let f = self.tracy_widom_cdf(x)?;
                    // E X = int_0^inf (1 - F) - int_{-inf}^0 F
                    // E X^2 = int_0^inf 2x (1 - F) + int_{-inf}^0 2|x| F
                    if x < 0.0 {
                        m1 -= w * f;
                        m2 += w * 2.0 * x.abs() * f;
                    } else {
                        m1 += w * (1.0 - f);
                        m2 += w * 2.0 * x * (1.0 - f);
                    }
                }
            }
        }
        Ok((m1, m2 - m1 * m1))
    }
}

fn default_evaluator() -> &'static KernelEvaluator {
    static EVAL: OnceLock<KernelEvaluator> = OnceLock::new();
    EVAL.get_or_init(KernelEvaluator::default)
}

/// `F_2(s)` with the default evaluator (order 64, cutoff 16).
pub fn tracy_widom_cdf(s: f64) -> Result<f64> {
    default_evaluator().tracy_widom_cdf(s)
}

/// `F_2` tabulated on a uniform grid, linearly interpolated in between; 0
/// below and 1 above the tabulated range.
#[derive(Clone, Debug)]
pub struct TracyWidomTable {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl TracyWidomTable {
    pub fn new(evaluator: &KernelEvaluator, lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && hi > lo) {
            return Err(Error::Config("table needs hi > lo and a positive step".into()));
        }
        let count = ((hi - lo) / step).round() as usize + 1;
        let values = (0..count)
            .map(|i| evaluator.tracy_widom_cdf((lo + i as f64 * step).min(hi)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TracyWidomTable { lo, step, values })
    }

    pub fn standard() -> &'static TracyWidomTable {
        static TABLE: OnceLock<TracyWidomTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            TracyWidomTable::new(default_evaluator(), TW_RANGE.0, TW_RANGE.1, 0.005)
                .expect("standard table")
        })
    }

    pub fn cdf(&self, s: f64) -> f64 {
        let pos = (s - self.lo) / self.step;
        if pos <= 0.0 {
            return if pos == 0.0 { self.values[0] } else { 0.0 };
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return if i + 1 == self.values.len() { self.values[i] } else { 1.0 };
        }
        let w = pos - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::function::airy_ai;

    #[test]
    fn kernel_at_origin() {
        let k = kernel_eval(0.0, 0.0).unwrap();
        assert!((k - 0.0669875).abs() < 1e-7, "{k}");
    }

    #[test]
    fn kernel_symmetric_exactly() {
        for i in 0..100 {
            let x = -10.0 + 0.151 * i as f64;
            let y = 5.0 - 0.137 * i as f64;
            assert_eq!(kernel_eval(x, y).unwrap(), kernel_eval(y, x).unwrap());
        }
    }

    #[test]
    fn near_diagonal_is_continuous() {
        for &m in &[-12.0, -3.3, 0.0, 1.5, 6.0] {
            for &d in &[5e-5, 9.9e-5, 1.01e-4, 2e-4, 1e-3] {
                let a = kernel_eval(m - d / 2.0, m + d / 2.0).unwrap();
                let b = kernel_by_quadrature(m - d / 2.0, m + d / 2.0).unwrap();
                assert!((a - b).abs() < 1e-10, "m={m} d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn diagonal_closed_form_matches_quadrature_of_square() {
        // K(x, x) = int_x^inf Ai(z)^2 dz, integrated with a separate rule
        let g = GaussLegendre::new(40);
        for &x in &[-6.0, -1.0, 0.0, 2.0] {
            let q = g.integrate_composite(x, 30.0, 60, |z| airy_ai(z).unwrap().powi(2));
            assert!((kernel_eval(x, x).unwrap() - q).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn diagonal_small_beyond_five() {
        assert!(kernel_eval(5.0, 5.0).unwrap() < 1e-6);
    }

    #[test]
    fn extended_reduces_at_equal_times() {
        for &(x, y) in &[(0.0, 0.0), (-2.0, 1.0), (1.5, -4.0)] {
            let a = extended_kernel_eval(x, 0.7, y, 0.7).unwrap();
            assert!((a - kernel_eval(x, y).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn extended_truncation_self_consistent() {
        let a = extended_kernel_with_length(0.0, 0.1, 0.0, 0.0, 20.0).unwrap();
        let b = extended_kernel_with_length(0.0, 0.1, 0.0, 0.0, 25.0).unwrap();
        assert!((a - b).abs() < 1e-6);
        let c = extended_kernel_eval(0.5, 0.0, -0.5, 1.0).unwrap();
        let d = extended_kernel_with_length(0.5, 0.0, -0.5, 1.0, oscillatory_length(1.0) * 1.5).unwrap();
        assert!((c - d).abs() < 1e-8, "{c} vs {d}");
    }

    #[test]
    fn extended_backward_out_of_region() {
        assert!(matches!(
            extended_kernel_eval(0.0, 0.0, 0.0, 0.01),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn fredholm_order_doubling() {
        let lo = KernelEvaluator::new(64, 16.0).unwrap();
        let hi = KernelEvaluator::new(128, 16.0).unwrap();
        for &s in &[-8.0, -3.0, -1.0, 0.0, 2.0, 5.0] {
            let a = lo.fredholm_determinant(s).unwrap();
            let b = hi.fredholm_determinant(s).unwrap();
            assert!((a - b).abs() < 1e-8, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn tw_tails_and_monotonicity() {
        let e = KernelEvaluator::default();
        assert!(e.tracy_widom_cdf(-10.0).unwrap() < 1e-6);
        assert!(1.0 - e.tracy_widom_cdf(6.0).unwrap() < 1e-6);
        let mut prev = 0.0;
        for i in 0..=160 {
            let f = e.tracy_widom_cdf(-10.0 + 0.1 * i as f64).unwrap();
            assert!(f >= prev - 1e-13);
            prev = f;
        }
        assert!(e.tracy_widom_cdf(6.5).is_err());
    }

    #[test]
    fn tw_moments_match_literature() {
        let (mean, var) = KernelEvaluator::default().tracy_widom_moments().unwrap();
        assert!((mean + 1.7710868074116).abs() < 1e-7, "mean {mean}");
        assert!((var - 0.8131947928329).abs() < 1e-7, "var {var}");
    }

    #[test]
    fn table_interpolates() {
        let e = KernelEvaluator::default();
        let t = TracyWidomTable::new(&e, -4.0, 2.0, 0.01).unwrap();
        for &s in &[-3.333, -1.77, 0.005, 1.999] {
            assert!((t.cdf(s) - e.tracy_widom_cdf(s).unwrap()).abs() < 1e-5);
        }
        assert_eq!(t.cdf(-50.0), 0.0);
        assert_eq!(t.cdf(50.0), 1.0);
    }
}
