//! Brute-force evaluation of a four-orbital integral from the Neumann
//! expansion of `1/r12`, with the orbital products sampled directly.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::{legendre, orbital_value};
use crate::error::{Error, Result};
use crate::exact::{factorial, ratio_to_f64};
use crate::model::{selection_check, Center, IntegralRequest, Selection};
use crate::sum::KahanSum;

/// Truncated Neumann series of `1/r12` for two points given in prolate
/// spheroidal coordinates `(xi, eta, phi)`.
pub fn inverse_distance_series(r: f64, p1: (f64, f64, f64), p2: (f64, f64, f64), mu_max: u32) -> f64 {
    let (lo, hi) = if p1.0 < p2.0 { (p1.0, p2.0) } else { (p2.0, p1.0) };
    let mut s = KahanSum::new();
    for mu in 0..=mu_max {
        for m in -(mu as i32)..=(mu as i32) {
            let am = m.unsigned_abs();
            let f = ratio_to_f64(&factorial(mu - am), &factorial(mu + am));
            let sign = if am % 2 == 1 { -1.0 } else { 1.0 };
            let radial = legendre::p_xi(mu, am, lo) * legendre::q_xi(mu, am, hi);
            let ang = legendre::p_cut(mu, am, p1.1) * legendre::p_cut(mu, am, p2.1) * (m as f64 * (p1.2 - p2.2)).cos();
            s.add(sign * (2 * mu + 1) as f64 * f * f * radial * ang);
        }
    }
    2.0 / r * s.value()
}

/// Spherical coordinates `(r, cos theta)` about center a (lower) or b (upper).
fn local(center: Center, r: f64, xi: f64, eta: f64) -> (f64, f64) {
    match center {
        Center::A => (0.5 * r * (xi + eta), ((1.0 + xi * eta) / (xi + eta)).clamp(-1.0, 1.0)),
        Center::B => (0.5 * r * (xi - eta), ((xi * eta - 1.0) / (xi - eta)).clamp(-1.0, 1.0)),
    }
}

/// `P_mu^s` for `mu = s..=mu_max` from one upward sweep.
fn p_sweep(mu_max: u32, s: u32, x: f64, on_cut: bool) -> Vec<f64> {
    let seed = if on_cut { legendre::p_cut(s, s, x) } else { legendre::p_xi(s, s, x) };
    let mut out = Vec::with_capacity((mu_max - s + 1) as usize);
    out.push(seed);
    if mu_max > s {
        out.push((2 * s + 1) as f64 * x * seed);
    }
    for n in (s + 1)..mu_max {
        let k = (n - s) as usize;
        let v = ((2 * n + 1) as f64 * x * out[k] - (n + s) as f64 * out[k - 1]) / (n - s + 1) as f64;
        out.push(v);
    }
    out
}

struct Density<'a> {
    req: &'a IntegralRequest,
    slots: (usize, usize),
}

impl Density<'_> {
    /// Real part of the product of the two orbitals at `phi = 0`.
    fn value(&self, xi: f64, eta: f64) -> f64 {
        let c = self.req.class.centers();
        let r = self.req.distance;
        let mut v = 1.0;
        for slot in [self.slots.0, self.slots.1] {
            let (rr, ct) = local(c[slot], r, xi, eta);
            v *= orbital_value(&self.req.orbitals[slot], rr, ct.acos(), 0.0).re;
        }
        v
    }
}

/// Gauss grid in `t = sqrt(xi - 1)`, graded toward `t = 0`.
struct Grid {
    breaks: Vec<f64>,
    rule: Vec<(f64, f64)>,
}

impl Grid {
    fn new(t_max: f64, panels: usize, order: usize) -> Self {
        let h = t_max / panels as f64;
        let mut breaks = vec![0.0];
        for k in (0..12).rev() {
            breaks.push(h * 0.5f64.powi(k + 1));
        }
        breaks.extend((1..=panels).map(|k| h * k as f64));
        let gl = GaussLegendre::new(NonZeroUsize::new(order).expect("nonzero"));
        let rule = gl.nodes().zip(gl.weights()).map(|(x, w)| (*x, *w)).collect();
        Grid { breaks, rule }
    }

    /// Nodes and weights of `[a, b]` in `t`, weights including `d xi = 2t dt`.
    fn map(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.rule.iter().map(move |&(x, w)| {
            let t = c + h * x;
            (1.0 + t * t, w * h * 2.0 * t)
        })
    }
}

struct Moments {
    eta: Vec<(f64, f64)>,
    p_eta: Vec<Vec<f64>>,
    s: u32,
    mu_max: u32,
}

impl Moments {
    /// `int d eta (xi^2 - eta^2) rho(xi, eta) P_mu^s(eta)` for every `mu`.
    fn at(&self, d: &Density, xi: f64) -> Vec<f64> {
        let mut acc = vec![0.0; (self.mu_max - self.s + 1) as usize];
        for (&(x, w), p) in self.eta.iter().zip(&self.p_eta) {
            let f = w * (xi * xi - x * x) * d.value(xi, x);
            for (a, pv) in acc.iter_mut().zip(p) {
                *a += f * pv;
            }
        }
        acc
    }
}

/// Integral over two electrons of `Phi1 Phi3 (1/r12) Phi2 Phi4`, summed over
/// the Neumann index `mu` until three shells fall below `tol`.
pub fn neumann_integral(req: &IntegralRequest, tol: f64, mu_cap: u32) -> Result<f64> {
    neumann_on_grid(req, tol, mu_cap, 40, 20, 64)
}

/// As [`neumann_integral`] with an explicit number of uniform `xi` panels,
/// Gauss order per panel and number of `eta` nodes.
pub fn neumann_on_grid(
    req: &IntegralRequest,
    tol: f64,
    mu_cap: u32,
    panels: usize,
    order: usize,
    eta_nodes: usize,
) -> Result<f64> {
    req.validate()?;
    let sigma = match selection_check(req.m_values()) {
        Selection::ZeroBySelection => return Ok(0.0),
        Selection::Allowed { sigma } => sigma,
    };
    let s = sigma.unsigned_abs();
    if mu_cap < s {
        return Err(Error::InvalidConfig(format!("mu_cap {mu_cap} below |sigma| {s}")));
    }
    let gl = GaussLegendre::new(NonZeroUsize::new(eta_nodes).ok_or_else(|| Error::InvalidConfig("no eta nodes".into()))?);
    let eta: Vec<(f64, f64)> = gl.nodes().zip(gl.weights()).map(|(x, w)| (*x, *w)).collect();
    let p_eta = eta.iter().map(|&(x, _)| p_sweep(mu_cap, s, x, true)).collect();
    let mom = Moments { eta, p_eta, s, mu_max: mu_cap };
    let d1 = Density { req, slots: (0, 2) };
    let d2 = Density { req, slots: (1, 3) };
    let r = req.distance;
    let o = &req.orbitals;
    let amin = 0.5 * r * (o[0].delta + o[2].delta).min(o[1].delta + o[3].delta);
    let nsum: u32 = o.iter().map(|x| x.n).sum();
    let cut = 1.0 + (60.0 + 4.0 * nsum as f64) / amin;
    let grid = Grid::new((cut - 1.0).sqrt(), panels, order);
    let nmu = (mu_cap - s + 1) as usize;

    // region xi1 < xi2 contributes P(xi1) Q(xi2), and the mirror region
    let mut shells = vec![0.0; nmu];
    let mut cum1 = vec![0.0; nmu];
    let mut cum2 = vec![0.0; nmu];
    for win in grid.breaks.windows(2) {
        let (ta, tb) = (win[0], win[1]);
        for (k, (xi, w)) in grid.map(ta, tb).enumerate() {
            let t = (xi - 1.0).sqrt();
            let mut part1 = cum1.clone();
            let mut part2 = cum2.clone();
            for (y, wy) in grid.map(ta, t) {
                let p = p_sweep(mu_cap, s, y, false);
                let (m1, m2) = (mom.at(&d1, y), mom.at(&d2, y));
                for i in 0..nmu {
                    part1[i] += wy * m1[i] * p[i];
                    part2[i] += wy * m2[i] * p[i];
                }
            }
            let _ = k;
            let (m1, m2) = (mom.at(&d1, xi), mom.at(&d2, xi));
            for i in 0..nmu {
                let q = legendre::q_xi(s + i as u32, s, xi);
                shells[i] += w * q * (m2[i] * part1[i] + m1[i] * part2[i]);
            }
        }
        for (y, wy) in grid.map(ta, tb) {
            let p = p_sweep(mu_cap, s, y, false);
            let (m1, m2) = (mom.at(&d1, y), mom.at(&d2, y));
            for i in 0..nmu {
                cum1[i] += wy * m1[i] * p[i];
                cum2[i] += wy * m2[i] * p[i];
            }
        }
    }

    let pref = 2.0 / r * (2.0 * PI).powi(2) * (0.5 * r).powi(6) * if s % 2 == 1 { -1.0 } else { 1.0 };
    let mut total = KahanSum::new();
    let mut small = 0;
    for (i, sh) in shells.iter().enumerate() {
        let mu = s + i as u32;
        let f = ratio_to_f64(&factorial(mu - s), &factorial(mu + s));
        let shell = (2 * mu + 1) as f64 * f * f * sh;
        total.add(shell);
        if shell.abs() <= tol * total.value().abs() {
            small += 1;
            if small == 3 {
                return Ok(pref * total.value());
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NotConverged { mu_cap, last_shell: pref * shells[nmu - 1], partial: pref * total.value() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_reproduces_inverse_distance() {
        let r = 1.4;
        let to_xyz = |(xi, eta, phi): (f64, f64, f64)| {
            let rho = 0.5 * r * ((xi * xi - 1.0) * (1.0 - eta * eta)).sqrt();
            (rho * phi.cos(), rho * phi.sin(), 0.5 * r * xi * eta)
        };
        for (p1, p2) in [
            ((1.3, 0.2, 0.1), (2.5, -0.6, 1.9)),
            ((1.05, -0.9, 0.0), (1.6, 0.7, 3.0)),
            ((3.0, 0.5, 0.4), (1.2, 0.1, 0.4)),
        ] {
            let (a, b) = (to_xyz(p1), to_xyz(p2));
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2) + (a.2 - b.2).powi(2)).sqrt();
            let v = inverse_distance_series(r, p1, p2, 60);
            assert!((v * d - 1.0).abs() < 1e-8, "{v} vs {}", 1.0 / d);
        }
    }
}
