//! The eta-integral `B(mu, g, beta, |sigma|) = (-d/dbeta)^g sqrt(2 pi) I_{mu+1/2}(beta) / beta^(|sigma|+1/2)`.

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, falling, ratio_to_f64};
use crate::real::{Ball, Real};
use crate::sum::KahanSum;

pub const DEFAULT_SERIES_TOL: f64 = 1e-16;
pub const MAX_SERIES_TERMS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BArgs {
    pub mu: u32,
    pub g: u32,
    pub beta: f64,
    pub abs_sigma: u32,
}

/// Closed form at `beta = 0`; exactly zero outside the parity-allowed set.
pub fn b_zero(mu: u32, g: u32, abs_sigma: u32) -> f64 {
    let s = abs_sigma;
    let top = g + s;
    if mu > top || (top - mu) % 2 != 0 {
        return 0.0;
    }
    let mut num = binomial(1 + top, (top - mu) / 2) << (mu + 2);
    if (mu + s) % 2 == 1 {
        num = -num;
    }
    let den = factorial(1 + s) * binomial(top + 1, g) * binomial(2 + top + mu, 1 + (top + mu) / 2);
    ratio_to_f64(&num, &den)
}

/// Ascending series in `beta^2`, the production path for `beta != 0`.
pub fn b_series(mu: u32, g: u32, beta: f64, abs_sigma: u32, tol: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(b_zero(mu, g, abs_sigma));
    }
    if !beta.is_finite() {
        return Err(Error::Domain { function: "b_series", detail: format!("beta = {beta}") });
    }
    let s = abs_sigma as i64;
    let (mu_i, g_i) = (mu as i64, g as i64);
    // first k with mu + 2k - s >= g
    let k0 = ((g_i + s - mu_i).max(0) as u64).div_ceil(2) as u32;
    let a0 = (mu_i + 2 * k0 as i64 - s) as u32;
    let e0 = (mu_i - s - g_i + 2 * k0 as i64) as i32;
    let num: Integer = (falling(a0, g) * factorial(mu + k0)) << (mu + 1);
    let den = factorial(k0) * factorial(2 * mu + 2 * k0 + 1);
    let b = beta.abs();
    let b2 = b * b;
    let mut term = ratio_to_f64(&num, &den) * b.powi(e0);
    let mut sum = KahanSum::new();
    let mut small = 0;
    let mut k = k0;
    for _ in 0..MAX_SERIES_TERMS {
        sum.add(term);
        if term.abs() <= tol * sum.value().abs() {
            small += 1;
            if small == 3 {
                return Ok(sign_factor(e0, beta, g) * sum.value());
            }
        } else {
            small = 0;
        }
        let a = (mu_i + 2 * k as i64 - s) as f64;
        let ff = if g == 0 {
            1.0
        } else {
            (a + 2.0) * (a + 1.0) / ((a + 2.0 - g as f64) * (a + 1.0 - g as f64))
        };
        let kf = k as f64;
        let m = mu as f64;
        term *= b2 * ff * (m + kf + 1.0) / ((kf + 1.0) * (2.0 * m + 2.0 * kf + 2.0) * (2.0 * m + 2.0 * kf + 3.0));
        k += 1;
    }
    Err(Error::SeriesNotConverged { mu, g, sigma: abs_sigma, beta, terms: MAX_SERIES_TERMS })
}

/// [`b_series`] in ball arithmetic at the precision of `beta`, summed until
/// the terms drop below the working precision.
pub fn b_series_ball(mu: u32, g: u32, beta: &Ball, abs_sigma: u32) -> Result<Ball> {
    let prec = beta.prec();
    let bf = beta.to_f64();
    if bf == 0.0 {
        return Ok(Ball::from_f64(b_zero(mu, g, abs_sigma), prec));
    }
    if !bf.is_finite() {
        return Err(Error::Domain { function: "b_series", detail: format!("beta = {bf}") });
    }
    let s = abs_sigma as i64;
    let (mu_i, g_i) = (mu as i64, g as i64);
    let k0 = ((g_i + s - mu_i).max(0) as u64).div_ceil(2) as u32;
    let a0 = (mu_i + 2 * k0 as i64 - s) as u32;
    let e0 = (mu_i - s - g_i + 2 * k0 as i64) as i32;
    let num: Integer = (falling(a0, g) * factorial(mu + k0)) << (mu + 1);
    let den = factorial(k0) * factorial(2 * mu + 2 * k0 + 1);
    let b = if bf < 0.0 { -beta.clone() } else { beta.clone() };
    let b2 = b.clone() * b.clone();
    let mut term = Ball::from_int(&num, prec) / Ball::from_int(&den, prec) * b.powu(e0 as u32);
    let mut sum = Ball::zero(prec);
    let eps = 0.5f64.powi(prec as i32 + 4);
    let mut small = 0;
    let mut k = k0;
    for _ in 0..MAX_SERIES_TERMS * 4 {
        sum = sum + term.clone();
        let (t, acc) = (term.to_f64().abs(), sum.to_f64().abs());
        if t <= eps * acc {
            small += 1;
            if small == 3 {
                // remaining terms shrink at least geometrically by 1/2
                let tail = Ball::with_radius(rug::Float::new(prec), 2.0 * t);
                let v = sum + tail;
                return Ok(if sign_factor(e0, bf, g) < 0.0 { -v } else { v });
            }
        } else {
            small = 0;
        }
        let a = mu_i + 2 * k as i64 - s;
        let (mut n, mut d) = (Integer::from(mu + k + 1), Integer::from(k + 1) * (2 * mu + 2 * k + 2) * (2 * mu + 2 * k + 3));
        if g > 0 {
            n *= Integer::from(a + 2) * (a + 1);
            d *= Integer::from(a + 2 - g_i) * (a + 1 - g_i);
        }
        term = term * b2.clone() * Ball::from_int(&n, prec) / Ball::from_int(&d, prec);
        k += 1;
    }
    Err(Error::SeriesNotConverged { mu, g, sigma: abs_sigma, beta: bf, terms: MAX_SERIES_TERMS * 4 })
}

/// `(-1)^g sign(beta)^e0`.
fn sign_factor(e0: i32, beta: f64, g: u32) -> f64 {
    let mut s = if g % 2 == 1 { -1.0 } else { 1.0 };
    if beta < 0.0 && e0 % 2 != 0 {
        s = -s;
    }
    s
}

fn alternating_ball(mu: u32, g: u32, beta: &Ball, abs_sigma: u32) -> Ball {
    let p = beta.prec();
    let s = abs_sigma;
    let ep = beta.exp();
    let em = ep.recip();
    let inv_b = beta.recip();
    let inv_2b = inv_b.clone() * Ball::from_f64(0.5, p);
    let mut total = Ball::zero(p);
    for k in 0..=mu {
        let ck = Ball::from_int(&(falling(mu, k) * binomial(mu + k, k)), p) * inv_2b.powu(k);
        let mut inner = Ball::zero(p);
        for j in 0..=g {
            let cj = Ball::from_int(&(binomial(g, j) * binomial(k + s + j, j) * factorial(j)), p) * inv_b.powu(j);
            let bracket = if (k + j + g + mu + 1) % 2 == 1 { em.clone() - ep.clone() } else { em.clone() + ep.clone() };
            inner = inner + cj * bracket;
        }
        total = total + ck * inner;
    }
    let t = total * inv_b.powu(s + 1);
    if mu % 2 == 0 {
        -t
    } else {
        t
    }
}

/// Working precision for a ball computation: retry with more bits until the
/// radius falls below `2^-target_bits` relative.
fn adaptive<F: Fn(u32) -> Ball>(f: F, target_bits: u32) -> Ball {
    let mut prec = 128;
    loop {
        let v = f(prec);
        let lost = v.rel_radius_log2();
        if lost <= -(target_bits as f64) || prec > 1 << 16 {
            return v;
        }
        let extra = if lost.is_finite() { (lost + target_bits as f64).ceil() as u32 + 32 } else { prec };
        prec += extra;
    }
}

/// Alternating exponential closed form. Cancellation-prone at small `|beta|`,
/// so it is evaluated in multiprecision; reference path only.
pub fn b_alternating(mu: u32, g: u32, beta: f64, abs_sigma: u32) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Domain { function: "b_alternating", detail: format!("beta = {beta}") });
    }
    let v = adaptive(|p| alternating_ball(mu, g, &Ball::from_f64(beta, p), abs_sigma), 64);
    Ok(v.to_f64())
}

/// `g`-th central difference of the `g = 0` function with step `h`,
/// the verification path for the derivative definition of B.
pub fn b_derivative_oracle(mu: u32, g: u32, beta: f64, abs_sigma: u32, h: f64) -> Result<f64> {
    if g == 0 {
        return b_alternating(mu, 0, beta, abs_sigma);
    }
    let half = 0.5 * g as f64 * h;
    if beta == 0.0 || beta.abs() <= half || !(h > 0.0) {
        return Err(Error::Domain {
            function: "b_derivative_oracle",
            detail: format!("stencil of width {half} around beta = {beta} reaches zero"),
        });
    }
    let v = adaptive(
        |p| {
            let mut acc = Ball::zero(p);
            for i in 0..=g {
                let node = Float::with_val(p, beta) + Float::with_val(p, h) * (g as f64 / 2.0 - i as f64);
                let f = alternating_ball(mu, 0, &Ball::exact(node), abs_sigma);
                let c = Ball::from_int(&binomial(g, i), p);
                acc = if i % 2 == 0 { acc + c * f } else { acc - c * f };
            }
            // B = (-d/dbeta)^g G, so the sign is (-1)^g
            let d = acc * Ball::from_f64(h, p).powu(g).recip();
            if g % 2 == 1 {
                -d
            } else {
                d
            }
        },
        64,
    );
    Ok(v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_closed_form() {
        assert_eq!(b_zero(0, 0, 0), 2.0);
        assert_eq!(b_zero(2, 0, 0), 0.0);
        assert!((b_zero(1, 1, 0) + 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn series_examples() {
        let v = b_series(0, 0, 1.0, 0, 1e-16).unwrap();
        assert!(rel(v, 2.0 * 1f64.sinh()) < 1e-15);
        let b = 1e-3;
        let v = b_series(0, 0, b, 0, 1e-16).unwrap();
        assert!((v - (2.0 + b * b / 3.0)).abs() < 1e-12);
        assert!((b_series(1, 1, 1e-3, 0, 1e-16).unwrap() + 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn alternating_examples() {
        let v = b_alternating(0, 0, 10.0, 0).unwrap();
        assert!(rel(v, 2.0 * 10f64.sinh() / 10.0) < 1e-15);
        let a = b_alternating(2, 1, 5.0, 1).unwrap();
        let s = b_series(2, 1, 5.0, 1, 1e-16).unwrap();
        assert!(rel(a, s) < 1e-13);
        let a = b_alternating(6, 4, 0.1, 2).unwrap();
        let s = b_series(6, 4, 0.1, 2, 1e-16).unwrap();
        assert!(rel(a, s) < 1e-13, "{a} {s}");
    }

    #[test]
    fn derivative_examples() {
        let d = b_derivative_oracle(1, 1, 1.0, 0, 1e-4).unwrap();
        let s = b_series(1, 1, 1.0, 0, 1e-16).unwrap();
        assert!(rel(d, s) < 1e-7);
        let d = b_derivative_oracle(0, 2, 2.0, 0, 1e-3).unwrap();
        let s = b_series(0, 2, 2.0, 0, 1e-16).unwrap();
        assert!((d - s).abs() < 1e-5);
        let d = b_derivative_oracle(3, 0, 1.0, 2, 1e-3).unwrap();
        assert!(rel(d, b_series(3, 0, 1.0, 2, 1e-16).unwrap()) < 1e-14);
    }

    #[test]
    fn parity_is_exact() {
        for (mu, g, s, b) in [(3, 1, 1, 0.7), (4, 2, 0, 5.0), (5, 5, 3, 20.0)] {
            let p = b_series(mu, g, b, s, 1e-16).unwrap();
            let n = b_series(mu, g, -b, s, 1e-16).unwrap();
            let sign = if (mu + s + g) % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(n, sign * p);
        }
    }
}
