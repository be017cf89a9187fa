//! Independent verification paths. Nothing here calls the production B
//! series or the closed-form A; the shared pieces are exact binomials and
//! the model types.

pub mod legendre;
pub mod neumann;
pub mod quad;

use num_complex::Complex64;
use rug::Rational;

use crate::afunc::{a_quadrature, AArgs};
use crate::bfunc::{b_derivative_oracle, b_zero};
use crate::error::{Error, Result};
use crate::exact::factorial;
use crate::model::SlaterOrbital;
use crate::sum::KahanSum;

pub use legendre::{legendre_p, legendre_q};
pub use neumann::neumann_integral;

fn norm_radical(o: &SlaterOrbital) -> f64 {
    let am = o.abs_m();
    let num = rug::Integer::from(2 * o.l + 1) * factorial(o.l - am);
    let den = factorial(2 * o.n) * factorial(o.l + am);
    let q = Rational::from((num, den)).to_f64();
    (q / (4.0 * std::f64::consts::PI)).sqrt()
}

/// Normalized STO at spherical coordinates `(r, theta, phi)` about its center.
pub fn orbital_value(orb: &SlaterOrbital, r: f64, theta: f64, phi: f64) -> Complex64 {
    let am = orb.abs_m();
    let phase = if orb.m < 0 && orb.m % 2 != 0 { -1.0 } else { 1.0 };
    let n = orb.n as i32;
    let radial = (2.0 * orb.delta).powf(n as f64 + 0.5) * r.powi(n - 1) * (-orb.delta * r).exp();
    let ang = legendre::p_cut(orb.l, am, theta.cos());
    let mag = phase * norm_radical(orb) * radial * ang;
    Complex64::from_polar(1.0, orb.m as f64 * phi) * mag
}

/// Classical two-center Coulomb integral over four identical 1s orbitals.
pub fn coulomb_1s_closed(zeta: f64, r: f64) -> f64 {
    let rho = zeta * r;
    zeta * (1.0 / rho - (-2.0 * rho).exp() * (1.0 / rho + 11.0 / 8.0 + 0.75 * rho + rho * rho / 6.0))
}

/// The same integral as the interaction of the density on a with the
/// potential `1/r - e^(-2 zeta r) (zeta + 1/r)` of the density on b,
/// integrated in spherical coordinates about a.
pub fn coulomb_1s_radial(zeta: f64, r: f64, tol: f64) -> Result<f64> {
    let pot = |d: f64| {
        if d < 1e-12 {
            zeta
        } else {
            (1.0 - (-2.0 * zeta * d).exp() * (1.0 + zeta * d)) / d
        }
    };
    let dens = |x: f64| zeta.powi(3) / std::f64::consts::PI * (-2.0 * zeta * x).exp();
    let cut = 60.0 / zeta + r;
    let t = quad::Tolerance::rel(tol * 1e-2);
    let radial = |x: f64| {
        let ang = quad::integrate(|c| pot((x * x + r * r - 2.0 * x * r * c).max(0.0).sqrt()), -1.0, 1.0, t);
        2.0 * std::f64::consts::PI * x * x * dens(x) * ang.value
    };
    let t = quad::Tolerance::rel(tol);
    // split at the other nucleus, where the angular integrand has a kink
    let a = quad::integrate(&radial, 0.0, r, t);
    let b = quad::integrate(&radial, r, cut, t);
    if !(a.converged && b.converged) {
        return Err(Error::QuadratureNotConverged { value: a.value + b.value, error: a.error + b.error, tolerance: tol });
    }
    Ok(a.value + b.value)
}

/// Four-term expansion of the product of four 1s orbitals: `(g1, g2, r1, r2, C)`.
pub const FOUR_1S_TERMS: [(u32, u32, u32, u32, f64); 4] =
    [(0, 0, 2, 2, 0.125), (0, 2, 2, 0, -0.125), (2, 0, 0, 2, -0.125), (2, 2, 0, 0, 0.125)];

const ORACLE_FD_STEP: f64 = 1e-6;

fn oracle_b(mu: u32, g: u32, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        Ok(b_zero(mu, g, 0))
    } else {
        b_derivative_oracle(mu, g, beta, 0, ORACLE_FD_STEP * beta.abs().max(1.0))
    }
}

/// Sum the one-s expansion over mu using quadrature A and finite-difference B.
fn assembled_1s(w: f64, alpha: (f64, f64), beta: (f64, f64), tol: f64) -> Result<f64> {
    let mut total = KahanSum::new();
    let mut small = 0;
    let finite = beta.0 == 0.0 || beta.1 == 0.0;
    for mu in 0..=80u32 {
        let mut shell = KahanSum::new();
        for &(g1, g2, r1, r2, c) in &FOUR_1S_TERMS {
            let b1 = oracle_b(mu, g1, beta.0)?;
            let b2 = oracle_b(mu, g2, beta.1)?;
            if b1 == 0.0 || b2 == 0.0 {
                continue;
            }
            let a = a_quadrature(&AArgs::new(mu, r1, r2, alpha.0, alpha.1, 0), tol * 1e-2)?;
            shell.add(c * (2 * mu + 1) as f64 * b1 * b2 * a.value);
        }
        let sh = shell.value();
        total.add(sh);
        if finite && mu >= 4 {
            break;
        }
        if !finite {
            if sh.abs() <= tol * total.value().abs() {
                small += 1;
                if small == 3 {
                    return Ok(w * total.value());
                }
            } else {
                small = 0;
            }
        }
    }
    if finite {
        Ok(w * total.value())
    } else {
        Err(Error::QuadratureNotConverged { value: w * total.value(), error: f64::NAN, tolerance: tol })
    }
}

/// Exchange integral `<1s_a(z1) 1s_a(z1) | 1s_b(z2) 1s_b(z2)>` (electron 1
/// in the first orbital of each pair) by an independent route.
pub fn exchange_1s_oracle(z1: f64, z2: f64, r: f64, tol: f64) -> Result<f64> {
    let a = 0.5 * r * (z1 + z2);
    let b = 0.5 * r * (z1 - z2);
    let w = r.powi(5) * (z1 * z2).powi(3);
    assembled_1s(w, (a, a), (b, b), tol)
}

/// Coulomb integral over four identical 1s orbitals by the same independent
/// assembly as [`exchange_1s_oracle`].
pub fn coulomb_1s_assembled(zeta: f64, r: f64, tol: f64) -> Result<f64> {
    let a = r * zeta;
    let w = r.powi(5) * zeta.powi(6);
    assembled_1s(w, (a, a), (a, -a), tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(o: &SlaterOrbital) -> f64 {
        let gl = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(40).unwrap());
        let cut = (60.0 + 8.0 * o.n as f64) / o.delta;
        let e = quad::integrate(
            |r: f64| {
                let ang = gl.integrate(0.0, std::f64::consts::PI, |t| {
                    orbital_value(o, r, t, 0.3).norm_sqr() * t.sin()
                });
                r * r * ang
            },
            0.0,
            cut,
            quad::Tolerance::rel(1e-13),
        );
        2.0 * std::f64::consts::PI * e.value
    }

    #[test]
    fn normalization() {
        for n in 1..=4u32 {
            for l in 0..n.min(4) {
                for m in -(l as i32)..=(l as i32) {
                    let o = SlaterOrbital::new(n, l, m, 0.7 + 0.2 * n as f64);
                    let v = norm(&o);
                    assert!((v - 1.0).abs() < 1e-10, "{o:?}: {v}");
                }
            }
        }
    }

    #[test]
    fn orbital_shapes() {
        let p = SlaterOrbital::new(2, 1, 0, 1.0);
        assert!(orbital_value(&p, 1.0, std::f64::consts::FRAC_PI_2, 0.0).norm() < 1e-16);
        let (a, b) = (SlaterOrbital::new(3, 2, 1, 1.0), SlaterOrbital::new(3, 2, -1, 1.0));
        let (x, y) = (orbital_value(&a, 1.2, 0.4, 0.9), orbital_value(&b, 1.2, 0.4, 0.9));
        assert!((x.conj() * -1.0 - y).norm() < 1e-15);
        let s = SlaterOrbital::new(1, 0, 0, 1.0);
        let v = orbital_value(&s, 0.0, 1.0, 2.0).re;
        assert!((v - 2.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn coulomb_closed_against_radial() {
        for (z, r) in [(1.0, 1.4), (0.8, 3.0), (1.5, 0.5)] {
            let c = coulomb_1s_closed(z, r);
            let q = coulomb_1s_radial(z, r, 1e-12).unwrap();
            assert!((c - q).abs() < 1e-10 * c, "{z} {r}: {c} {q}");
        }
        assert!((coulomb_1s_closed(1.0, 50.0) * 50.0 - 1.0).abs() < 1e-6);
        assert!((coulomb_1s_closed(1.0, 1e-4) - 0.625).abs() < 1e-3);
        assert!((coulomb_1s_closed(1.0, 1.4) - 0.503_520_932_943_976_7).abs() < 1e-13);
    }

    #[test]
    fn coulomb_closed_against_assembly() {
        let c = coulomb_1s_closed(1.0, 1.4);
        let a = coulomb_1s_assembled(1.0, 1.4, 1e-10).unwrap();
        assert!((c - a).abs() < 1e-8 * c, "{c} {a}");
    }
}
