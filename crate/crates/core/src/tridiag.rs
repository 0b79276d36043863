//! Symmetric tridiagonal matrices: the beta = 2 tridiagonal model of GUE,
//! Sturm-sequence bisection for selected eigenvalues and implicit QL for
//! the full spectrum.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// Squared off-diagonal entries, `offdiag_sq[i]` couples rows `i` and `i + 1`.
    pub offdiag_sq: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag_sq: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag_sq.len() + 1 != diag.len() {
            return Err(Error::Config(format!(
                "tridiagonal needs n >= 1 diagonal and n - 1 off-diagonal entries, got {} and {}",
                diag.len(),
                offdiag_sq.len()
            )));
        }
        if offdiag_sq.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::Config("squared off-diagonals must be nonnegative".into()));
        }
        Ok(SymTridiagonal { diag, offdiag_sq })
    }

    /// Tridiagonal matrix whose spectrum has the law of an `n x n` GUE
    /// matrix with `N(0,1)` diagonal and off-diagonal `E|h|^2 = 1`.
    ///
    /// Diagonal entries are `N(0,1)`; the squared off-diagonals are
    /// independent `Gamma(n - i, 1)` for `i = 1..n-1`.
    pub fn sample_gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let diag = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let offdiag_sq = (1..n)
            .map(|i| {
                Gamma::new((n - i) as f64, 1.0)
                    .expect("positive shape")
                    .sample(rng)
            })
            .collect();
        SymTridiagonal { diag, offdiag_sq }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag_sq[i - 1].sqrt();
            }
            if i + 1 < n {
                r += self.offdiag_sq[i].sqrt();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        (lo - pad, hi + pad)
    }

    /// Number of eigenvalues strictly greater than `x` (Sturm count).
    pub fn count_above(&self, x: f64) -> usize {
        let n = self.dim();
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut below = 0;
        let mut q = self.diag[0] - x;
        for i in 0..n {
            if i > 0 {
                q = self.diag[i] - x - self.offdiag_sq[i - 1] / q;
            }
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                below += 1;
            }
        }
        n - below
    }

    /// Eigenvalue of descending rank `r` (0 is the largest) by bisection.
    fn eigenvalue_by_rank(&self, r: usize, mut lo: f64, mut hi: f64) -> f64 {
        // invariant: count_above(lo) > r >= count_above(hi)
        loop {
            let mid = 0.5 * (lo + hi);
            let tol = 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                return mid;
            }
            if self.count_above(mid) > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// The `m` largest eigenvalues, decreasing.
    pub fn top_eigenvalues(&self, m: usize) -> Vec<f64> {
        let m = m.min(self.dim());
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(m);
        let mut upper = hi;
        for r in 0..m {
            let v = self.eigenvalue_by_rank(r, lo, upper);
            out.push(v);
            // eigenvalue r+1 is <= eigenvalue r
            upper = v + 8.0 * f64::EPSILON * (v.abs() + 1.0);
        }
        out
    }

    /// All eigenvalues strictly above `x`, decreasing.
    pub fn eigenvalues_above(&self, x: f64) -> Vec<f64> {
        let m = self.count_above(x);
        let (_, hi) = self.bounds();
        let mut out = Vec::with_capacity(m);
        let mut upper = hi;
        for r in 0..m {
            let v = self.eigenvalue_by_rank(r, x, upper);
            out.push(v);
            upper = v + 8.0 * f64::EPSILON * (v.abs() + 1.0);
        }
        out
    }

    /// Full spectrum, decreasing, by implicit QL iteration with Wilkinson
    /// shifts.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e: Vec<f64> = self.offdiag_sq.iter().map(|x| x.sqrt()).collect();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numerical {
                        message: format!("QL iteration did not converge at row {l}"),
                        dump: Some(format!("diag={:?} offdiag_sq={:?}", self.diag, self.offdiag_sq)),
                    });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut deflated = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| b.total_cmp(a));
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn dense_eigs(t: &SymTridiagonal) -> Vec<f64> {
        let n = t.dim();
        let m = faer::Mat::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i]
            } else if i + 1 == j {
                t.offdiag_sq[i].sqrt()
            } else if j + 1 == i {
                t.offdiag_sq[j].sqrt()
            } else {
                0.0
            }
        });
        let mut v = m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        v.reverse();
        v
    }

    #[test]
    fn small_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1
        let t = SymTridiagonal::new(vec![2.0, 2.0], vec![1.0]).unwrap();
        let e = t.eigenvalues().unwrap();
        assert!((e[0] - 3.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
        let b = t.top_eigenvalues(2);
        assert!((b[0] - 3.0).abs() < 1e-13 && (b[1] - 1.0).abs() < 1e-13);
        assert_eq!(t.count_above(2.0), 1);
        assert_eq!(t.count_above(0.0), 2);
    }

    #[test]
    fn three_routes_agree() {
        let mut rng = RngStream::new(3, 1).rng();
        for n in [1, 2, 5, 40, 120] {
            let t = SymTridiagonal::sample_gue(n, &mut rng);
            let ql = t.eigenvalues().unwrap();
            let dense = dense_eigs(&t);
            let bis = t.top_eigenvalues(n);
            let scale = 2.0 * (n as f64).sqrt() + 1.0;
            for i in 0..n {
                assert!((ql[i] - dense[i]).abs() < 1e-11 * scale, "n={n} i={i}");
                assert!((bis[i] - dense[i]).abs() < 1e-11 * scale, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn eigenvalues_above_threshold() {
        let mut rng = RngStream::new(4, 0).rng();
        let t = SymTridiagonal::sample_gue(60, &mut rng);
        let all = t.eigenvalues().unwrap();
        let x = all[7] - 1e-6;
        let above = t.eigenvalues_above(x);
        assert_eq!(above.len(), 8);
        for (a, b) in above.iter().zip(&all) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_matches_diagonal_sum() {
        let mut rng = RngStream::new(5, 0).rng();
        let t = SymTridiagonal::sample_gue(80, &mut rng);
        let tr: f64 = t.diag.iter().sum();
        let s: f64 = t.eigenvalues().unwrap().iter().sum();
        assert!((tr - s).abs() < 1e-10 * 80.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![-1.0]).is_err());
    }
}
