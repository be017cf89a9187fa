//! Associated Legendre functions of degree `mu`, order `s`: on `x > 1` in
//! the Hobson convention `(x^2-1)^(s/2) d^s/dx^s`, and on the cut without
//! the Condon-Shortley sign.

use crate::error::{Error, Result};

fn double_factorial_odd(s: u32) -> f64 {
    (1..=s).map(|i| (2 * i - 1) as f64).product()
}

fn p_recurrence(mu: u32, s: u32, x: f64, seed: f64) -> f64 {
    if mu < s {
        return 0.0;
    }
    let mut p0 = seed;
    if mu == s {
        return p0;
    }
    let mut p1 = (2 * s + 1) as f64 * x * p0;
    for n in (s + 1)..mu {
        let p2 = ((2 * n + 1) as f64 * x * p1 - (n + s) as f64 * p0) / (n - s + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `P_mu^s(x)` for `x > 1`.
pub fn p_xi(mu: u32, s: u32, x: f64) -> f64 {
    p_recurrence(mu, s, x, double_factorial_odd(s) * (x * x - 1.0).powf(s as f64 / 2.0))
}

/// `P_mu^s(x)` for `|x| <= 1`.
pub fn p_cut(mu: u32, s: u32, x: f64) -> f64 {
    p_recurrence(mu, s, x, double_factorial_odd(s) * (1.0 - x * x).max(0.0).powf(s as f64 / 2.0))
}

/// `Q_n(x)` for `n = 0..=nmax`, `x > 1`.
pub fn q_degrees(nmax: u32, x: f64) -> Vec<f64> {
    let q0 = 0.5 * (2.0 / (x - 1.0)).ln_1p();
    let n = nmax as usize;
    let rho = x + (x * x - 1.0).sqrt();
    let lr = rho.ln();
    if nmax == 0 {
        return vec![q0];
    }
    let mut q = vec![0.0; n + 1];
    q[0] = q0;
    if 2.0 * nmax as f64 * lr < 3.0 * std::f64::consts::LN_10 {
        // upward recurrence loses at most ~3 digits here
        q[1] = x * q0 - 1.0;
        for k in 1..n {
            q[k + 1] = ((2 * k + 1) as f64 * x * q[k] - k as f64 * q[k - 1]) / (k + 1) as f64;
        }
        return q;
    }
    // Miller's backward recurrence, normalized by Q_0
    let start = n + 10 + (20.0 / lr).ceil() as usize;
    let (mut hi, mut cur) = (0.0f64, 1e-280f64);
    for k in (1..=start).rev() {
        let lo = ((2 * k + 1) as f64 * x * cur - (k + 1) as f64 * hi) / k as f64;
        hi = cur;
        cur = lo;
        if k - 1 <= n {
            q[k - 1] = cur;
        }
        if cur.abs() > 1e250 {
            hi *= 1e-250;
            cur *= 1e-250;
            for v in q.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = q0 / q[0];
    q.iter_mut().for_each(|v| *v *= scale);
    q
}

/// `Q_mu^s(x)` for `x > 1`, by order raising from degree `mu - s` upward.
pub fn q_xi(mu: u32, s: u32, x: f64) -> f64 {
    let base = q_degrees(mu, x);
    if s == 0 {
        return base[mu as usize];
    }
    let lo = (mu - s.min(mu)) as usize;
    let mut cur: Vec<f64> = base;
    let root = (x * x - 1.0).sqrt();
    for tau in 0..s {
        let t = tau as usize;
        let mut next = vec![0.0; mu as usize + 1];
        for nu in (lo + t + 1)..=(mu as usize) {
            next[nu] = ((nu - t) as f64 * x * cur[nu] - (nu + t) as f64 * cur[nu - 1]) / root;
        }
        cur = next;
    }
    cur[mu as usize]
}

pub fn legendre_p(mu: u32, s: u32, x: f64) -> Result<f64> {
    check(mu, s, x)?;
    Ok(p_xi(mu, s, x))
}

pub fn legendre_q(mu: u32, s: u32, x: f64) -> Result<f64> {
    check(mu, s, x)?;
    Ok(q_xi(mu, s, x))
}

fn check(mu: u32, s: u32, x: f64) -> Result<()> {
    if !(x > 1.0) || x.is_infinite() {
        return Err(Error::Domain { function: "legendre", detail: format!("x = {x} (need x > 1)") });
    }
    if s > mu {
        return Err(Error::Domain { function: "legendre", detail: format!("order {s} > degree {mu}") });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_cases() {
        assert_eq!(legendre_p(0, 0, 2.0).unwrap(), 1.0);
        assert!((legendre_q(0, 0, 2.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(legendre_p(1, 0, 2.0).unwrap(), 2.0);
        assert!((legendre_q(1, 0, 2.0).unwrap() - (3f64.ln() - 1.0)).abs() < 1e-15);
        assert!(legendre_q(1, 0, 1.0).is_err());
    }

    #[test]
    fn wronskian() {
        for x in [1.1, 2.0, 10.0, 150.0] {
            for mu in 1..=8 {
                let w = p_xi(mu, 0, x) * q_xi(mu - 1, 0, x) - p_xi(mu - 1, 0, x) * q_xi(mu, 0, x);
                assert!((w * mu as f64 - 1.0).abs() < 1e-12, "x={x} mu={mu} w={w}");
            }
        }
    }

    #[test]
    fn explicit_forms() {
        for x in [1.0001f64, 1.3, 3.0, 25.0] {
            let q0 = 0.5 * ((x + 1.0) / (x - 1.0)).ln();
            let p2 = 0.5 * (3.0 * x * x - 1.0);
            let p3 = 0.5 * (5.0 * x * x * x - 3.0 * x);
            let q2 = p2 * q0 - 1.5 * x;
            let q3 = p3 * q0 - 2.5 * x * x + 2.0 / 3.0;
            let tol = |v: f64| 1e-12 * v.abs().max(1e-300) + 1e-15;
            if x < 5.0 {
                assert!((q_xi(2, 0, x) - q2).abs() < tol(q2));
                assert!((q_xi(3, 0, x) - q3).abs() < tol(q3));
            }
            // (x^2-1)^(1/2) d/dx (x Q0 - 1) with Q0' = -1/(x^2-1)
            let rt = (x * x - 1.0).sqrt();
            let q11 = rt * q0 - x / rt;
            assert!((q_xi(1, 1, x) - q11).abs() < 1e-11 * q11.abs(), "x={x}");
            let p11 = (x * x - 1.0).sqrt();
            assert!((p_xi(1, 1, x) - p11).abs() < 1e-14 * p11.max(1.0));
            assert!((p_xi(2, 2, x) - 3.0 * (x * x - 1.0)).abs() < 1e-12 * x * x);
        }
    }

    #[test]
    fn cut_values() {
        let x: f64 = 0.3;
        assert!((p_cut(2, 1, x) - 3.0 * x * (1.0 - x * x).sqrt()).abs() < 1e-15);
        assert!((p_cut(3, 0, x) - 0.5 * (5.0 * x.powi(3) - 3.0 * x)).abs() < 1e-15);
    }
}
