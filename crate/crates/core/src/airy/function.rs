//! The Airy function `Ai` and its derivative on `|x| <= 200`.
//!
//! Three regimes:
//! * `|x| <= 2`: Maclaurin series.
//! * `|x| > 8`: the large-argument asymptotic expansions (exponentially
//!   decaying for `x > 0`, oscillatory for `x < 0`).
//! * `2 < |x| <= 8`: Taylor expansion of the solution of `y'' = x y` about
//!   the nearest point of an anchor table spaced 1/2 apart. Anchors on the
//!   positive side are integrated leftwards from the asymptotic values at 8
//!   (the stable direction for the recessive solution); anchors on the
//!   negative side are integrated from the Maclaurin values at -2.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const AIRY_RANGE: f64 = 200.0;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0) = 3^{-1/3} / Gamma(1/3)`.
const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 8.0;
const ANCHOR_STEP: f64 = 0.5;

pub fn airy_ai(x: f64) -> Result<f64> {
    Ok(airy_pair(x)?.0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    Ok(airy_pair(x)?.1)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= AIRY_RANGE) {
        return Err(Error::range(x, format!("[-{AIRY_RANGE}, {AIRY_RANGE}]")));
    }
    Ok(if x.abs() <= SERIES_LIMIT {
        maclaurin(x)
    } else if x > ASYMPTOTIC_LIMIT {
        asymptotic_positive(x)
    } else if x < -ASYMPTOTIC_LIMIT {
        asymptotic_negative(-x)
    } else {
        let anchors = anchors();
        let idx = ((x + ASYMPTOTIC_LIMIT) / ANCHOR_STEP).round() as usize;
        let x0 = -ASYMPTOTIC_LIMIT + idx as f64 * ANCHOR_STEP;
        let (a, ap) = anchors[idx];
        taylor_step(x0, a, ap, x - x0)
    })
}

fn maclaurin(x: f64) -> (f64, f64) {
    // Ai = c1 f - c2 g with f = sum a_k x^{3k}, g = sum b_k x^{3k+1}
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    // tf = a_k x^{3k}, uf = a_k x^{3k-1}; tg = b_k x^{3k+1}, vg = b_k x^{3k}
    let (mut tf, mut uf) = (1.0, 0.0);
    let (mut tg, mut vg) = (x, 1.0);
    for k in 1..60 {
        let kf = k as f64;
        let rf = 1.0 / ((3.0 * kf - 1.0) * (3.0 * kf));
        let rg = 1.0 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tf *= x3 * rf;
        uf = if k == 1 { x * x / 6.0 } else { uf * x3 * rf };
        tg *= x3 * rg;
        vg *= x3 * rg;
        f += tf;
        g += tg;
        fp += 3.0 * kf * uf;
        gp += (3.0 * kf + 1.0) * vg;
        if tf.abs() + tg.abs() + uf.abs() + vg.abs() < 1e-18 * (f.abs() + g.abs() + 1.0) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Coefficients `u_k`, `v_k` of the large-argument expansions.
fn asymptotic_coefficients() -> &'static [(f64, f64)] {
    static COEF: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut out = vec![(1.0, 1.0)];
        let mut u = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
            out.push((u, v));
        }
        out
    })
}

/// Sums `sum_k sign^k c_k / zeta^k` over the selected parity, stopping at
/// the smallest term.
fn truncated_sum(zeta: f64, pick: impl Fn(&(f64, f64)) -> f64, start: usize, stride: usize) -> f64 {
    let coef = asymptotic_coefficients();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < coef.len() {
        let term = pick(&coef[k]) / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        prev = term.abs();
        if prev < 1e-17 * sum.abs() {
            break;
        }
        sign = -sign;
        k += stride;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.sqrt().sqrt();
    let e = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    let su = truncated_sum(zeta, |p| p.0, 0, 1);
    let sv = truncated_sum(zeta, |p| p.1, 0, 1);
    (e / q * su, -e * q * sv)
}

fn asymptotic_negative(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.sqrt().sqrt();
    let phase = zeta - std::f64::consts::FRAC_PI_4;
    let (s, c) = phase.sin_cos();
    let u_even = truncated_sum(zeta, |p| p.0, 0, 2);
    let u_odd = truncated_sum(zeta, |p| p.0, 1, 2);
    let v_even = truncated_sum(zeta, |p| p.1, 0, 2);
    let v_odd = truncated_sum(zeta, |p| p.1, 1, 2);
    let rp = std::f64::consts::PI.sqrt();
    let ai = (c * u_even + s * u_odd) / (rp * q);
    let aip = q / rp * (s * v_even - c * v_odd);
    (ai, aip)
}

/// Advances `(y, y')` of `y'' = x y` from `x0` by `h` with a Taylor series.
fn taylor_step(x0: f64, y0: f64, yp0: f64, h: f64) -> (f64, f64) {
    // c_{k+2} = (x0 c_k + c_{k-1}) / ((k+2)(k+1))
    let mut c = [0.0_f64; 80];
    c[0] = y0;
    c[1] = yp0;
    c[2] = x0 * y0 / 2.0;
    let (mut y, mut yp) = (y0 + yp0 * h + c[2] * h * h, yp0 + 2.0 * c[2] * h);
    let mut hk = h * h; // h^{k}, with k the index just added
    for k in 3..c.len() {
        c[k] = (x0 * c[k - 2] + c[k - 3]) / ((k * (k - 1)) as f64);
        let dp = k as f64 * c[k] * hk;
        hk *= h;
        let d = c[k] * hk;
        y += d;
        yp += dp;
        if d.abs() + dp.abs() < 1e-18 * (y.abs() + yp.abs()) && k > 8 {
            break;
        }
    }
    (y, yp)
}

fn anchors() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = (2.0 * ASYMPTOTIC_LIMIT / ANCHOR_STEP).round() as usize + 1;
        let mut t = vec![(0.0, 0.0); count];
        let at = |i: usize| -ASYMPTOTIC_LIMIT + i as f64 * ANCHOR_STEP;
        let edge = ((ASYMPTOTIC_LIMIT - SERIES_LIMIT) / ANCHOR_STEP).round() as usize;
        let series_hi = count - 1 - edge;
        // series region, including both +-2 anchors
        for (i, slot) in t.iter_mut().enumerate().take(series_hi + 1).skip(edge) {
            *slot = maclaurin(at(i));
        }
        // positive side: from 8 down to 2.5, using half steps for accuracy
        let last = count - 1;
        t[last] = asymptotic_positive(ASYMPTOTIC_LIMIT);
        for i in (series_hi + 1..last).rev() {
            let (mut y, mut yp) = t[i + 1];
            let mut x = at(i + 1);
            for _ in 0..2 {
                (y, yp) = taylor_step(x, y, yp, -ANCHOR_STEP / 2.0);
                x -= ANCHOR_STEP / 2.0;
            }
            t[i] = (y, yp);
        }
        // negative side: from -2 down to -8
        for i in (0..edge).rev() {
            let (mut y, mut yp) = t[i + 1];
            let mut x = at(i + 1);
            for _ in 0..2 {
                (y, yp) = taylor_step(x, y, yp, -ANCHOR_STEP / 2.0);
                x -= ANCHOR_STEP / 2.0;
            }
            t[i] = (y, yp);
        }
        t
    })
}
