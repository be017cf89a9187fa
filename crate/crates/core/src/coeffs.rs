//! Polynomial expansion of the orbital products in elliptic coordinates.
//!
//! Each electron contributes a polynomial in `eta` and `xi`; its powers become
//! the derivative orders `g` (on B) and `r` (on A). Integer weights are
//! accumulated exactly and the common normalization radicals are applied last.

use std::collections::BTreeMap;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exact::binomial;
use crate::model::{selection_check, Center, IntegralRequest, Selection, SlaterOrbital};

/// Summation indices of one tuple. Orbital arrays follow slots 1..4;
/// electron arrays follow electrons 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpansionIndices {
    /// Index of the `(xi +/- eta)^N` radial binomial.
    pub radial: [u32; 4],
    pub s: [u32; 4],
    pub p: [u32; 4],
    pub q: [u32; 4],
    pub c: [u32; 2],
    pub d: [u32; 2],
    /// Index of the leftover volume factor of a one-center electron (0 otherwise).
    pub v: [u32; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub g1: u32,
    pub g2: u32,
    pub r1: u32,
    pub r2: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTerm {
    pub key: TermKey,
    /// `prefactor * weight` rounded to double.
    pub coeff: f64,
    /// Exact grouped integer weight.
    pub weight: Integer,
}

/// Phase applied to the `p`, `q` indices of orbitals on center b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseRule {
    /// `(-1)^(p + q)` once per orbital.
    #[default]
    Once,
    /// The even-power reading that drops the `p`, `q` phase entirely.
    /// Only used to demonstrate that the oracles detect the difference.
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermTable {
    pub sigma: i32,
    /// Grouped terms sorted by key.
    pub terms: Vec<CoeffTerm>,
    /// Number of index tuples before grouping.
    pub tuple_count: usize,
    pub prefactor: f64,
}

#[derive(Debug, Clone)]
struct Piece {
    radial: u32,
    s: u32,
    p: u32,
    q: u32,
    eta: u32,
    xi: u32,
    weight: Integer,
}

/// Terms of `Phi` for one orbital: `(xi + e eta)^N (xi + e eta)^(2s) (1 + e xi eta)^(l-|m|-2s)`
/// times the Legendre coefficient, where `e = +1` on a and `-1` on b.
fn orbital_pieces(o: &SlaterOrbital, center: Center, nrad: u32, rule: PhaseRule) -> Vec<Piece> {
    let am = o.abs_m();
    let lm = o.l - am;
    let on_b = center == Center::B;
    let mut out = Vec::new();
    for s in 0..=lm / 2 {
        let big_l = lm - 2 * s;
        let mut base = binomial(2 * o.l - 2 * s, big_l) * binomial(o.l, s);
        if s % 2 == 1 {
            base = -base;
        }
        if on_b && lm % 2 == 1 {
            base = -base;
        }
        for x in 0..=nrad {
            for p in 0..=2 * s {
                for q in 0..=big_l {
                    let mut w = Integer::from(&base * binomial(nrad, x));
                    w *= binomial(2 * s, p);
                    w *= binomial(big_l, q);
                    let flip = match rule {
                        PhaseRule::Once => x + p + q,
                        PhaseRule::Dropped => x,
                    };
                    if on_b && flip % 2 == 1 {
                        w = -w;
                    }
                    out.push(Piece {
                        radial: x,
                        s,
                        p,
                        q,
                        eta: x + p + q,
                        xi: nrad - x + 2 * s - p + q,
                        weight: w,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
struct ElectronTerm {
    first: usize,
    second: usize,
    c: u32,
    d: u32,
    v: u32,
    eta: u32,
    xi: u32,
    weight: Integer,
}

fn electron_terms(
    req: &IntegralRequest,
    slots: (usize, usize),
    abs_sigma: u32,
    rule: PhaseRule,
) -> Result<(Vec<Piece>, Vec<Piece>, Vec<ElectronTerm>)> {
    let centers = req.class.centers();
    let (i, j) = slots;
    let (oi, oj) = (&req.orbitals[i], &req.orbitals[j]);
    let same_center = centers[i] == centers[j];
    let ni = oi.n - oi.l;
    // On a one-center electron only the first orbital absorbs the volume factor.
    let nj = if same_center { oj.n - oj.l - 1 } else { oj.n - oj.l };
    let pi = orbital_pieces(oi, centers[i], ni, rule);
    let pj = orbital_pieces(oj, centers[j], nj, rule);
    let mm = oi.abs_m() + oj.abs_m();
    if mm < abs_sigma || (mm - abs_sigma) % 2 != 0 {
        return Err(Error::Inconsistent(format!(
            "azimuthal bound (|m{}|+|m{}|-|sigma|)/2 is not a non-negative integer",
            i + 1,
            j + 1
        )));
    }
    let cmax = (mm - abs_sigma) / 2;
    let vmax = u32::from(same_center);
    let mut out = Vec::new();
    for (a, x) in pi.iter().enumerate() {
        for (b, y) in pj.iter().enumerate() {
            let xy = Integer::from(&x.weight * &y.weight);
            for c in 0..=cmax {
                for d in 0..=cmax {
                    for v in 0..=vmax {
                        let mut w = Integer::from(&xy * binomial(cmax, c));
                        w *= binomial(cmax, d);
                        let mut odd = (c + d) % 2 == 1;
                        if same_center && centers[i] == Center::A && v == 1 {
                            odd = !odd;
                        }
                        if odd {
                            w = -w;
                        }
                        let (ev, xv) = if same_center { (v, 1 - v) } else { (0, 0) };
                        out.push(ElectronTerm {
                            first: a,
                            second: b,
                            c,
                            d,
                            v,
                            eta: x.eta + y.eta + 2 * c + ev,
                            xi: x.xi + y.xi + 2 * d + xv,
                            weight: w,
                        });
                    }
                }
            }
        }
    }
    Ok((pi, pj, out))
}

/// Common factor `1/2 * prod_i sqrt((2l+1)(l-|m|)!(l+|m|)!/(2n)!) / (2^l l!)`.
pub fn prefactor(req: &IntegralRequest) -> f64 {
    use crate::exact::factorial;
    let mut rad = Rational::from(1);
    let mut lin = Rational::from((1, 2));
    for o in &req.orbitals {
        let am = o.abs_m();
        let num = Integer::from(2 * o.l + 1) * factorial(o.l - am) * factorial(o.l + am);
        rad *= Rational::from((num, factorial(2 * o.n)));
        lin /= Integer::from(Integer::u_pow_u(2, o.l)) * factorial(o.l);
    }
    rad.to_f64().sqrt() * lin.to_f64()
}

/// Visit every index tuple with its key and exact signed weight (before the
/// common prefactor). Returns the number of tuples visited.
pub fn for_each_tuple<F>(req: &IntegralRequest, rule: PhaseRule, mut f: F) -> Result<usize>
where
    F: FnMut(&ExpansionIndices, TermKey, &Integer),
{
    let sigma = match selection_check(req.m_values()) {
        Selection::Allowed { sigma } => sigma,
        Selection::ZeroBySelection => {
            return Err(Error::Inconsistent("request fails the selection rule".into()))
        }
    };
    let s = sigma.unsigned_abs();
    let (p1, p3, e1) = electron_terms(req, (0, 2), s, rule)?;
    let (p2, p4, e2) = electron_terms(req, (1, 3), s, rule)?;
    let mut count = 0;
    for t1 in &e1 {
        for t2 in &e2 {
            let (a, b, c, d) = (&p1[t1.first], &p2[t2.first], &p3[t1.second], &p4[t2.second]);
            let idx = ExpansionIndices {
                radial: [a.radial, b.radial, c.radial, d.radial],
                s: [a.s, b.s, c.s, d.s],
                p: [a.p, b.p, c.p, d.p],
                q: [a.q, b.q, c.q, d.q],
                c: [t1.c, t2.c],
                d: [t1.d, t2.d],
                v: [t1.v, t2.v],
            };
            let key = TermKey { g1: t1.eta, g2: t2.eta, r1: t1.xi, r2: t2.xi };
            let w = Integer::from(&t1.weight * &t2.weight);
            f(&idx, key, &w);
            count += 1;
        }
    }
    Ok(count)
}

pub fn generate_terms(req: &IntegralRequest) -> Result<TermTable> {
    generate_terms_with(req, PhaseRule::Once)
}

pub fn generate_terms_with(req: &IntegralRequest, rule: PhaseRule) -> Result<TermTable> {
    req.validate()?;
    let sigma = req.sigma();
    let mut acc: BTreeMap<TermKey, Integer> = BTreeMap::new();
    let tuple_count = for_each_tuple(req, rule, |_, key, w| {
        *acc.entry(key).or_default() += w;
    })?;
    let pre = prefactor(req);
    let terms = acc
        .into_iter()
        .filter(|(_, w)| *w != 0)
        .map(|(key, w)| CoeffTerm { key, coeff: pre * w.to_f64(), weight: w })
        .filter(|t| t.coeff.abs() >= 1e-300)
        .collect();
    Ok(TermTable { sigma, terms, tuple_count, prefactor: pre })
}

impl TermTable {
    /// `sum_k C_k x^g1 y^g2 u^r1 v^r2`.
    pub fn polynomial(&self, x: f64, y: f64, u: f64, v: f64) -> f64 {
        let mut s = crate::sum::KahanSum::new();
        for t in &self.terms {
            let k = t.key;
            s.add(t.coeff * x.powi(k.g1 as i32) * y.powi(k.g2 as i32) * u.powi(k.r1 as i32) * v.powi(k.r2 as i32));
        }
        s.value()
    }
}

/// Same polynomial summed tuple by tuple without grouping.
pub fn ungrouped_polynomial(req: &IntegralRequest, x: f64, y: f64, u: f64, v: f64) -> Result<f64> {
    let pre = prefactor(req);
    let mut s = crate::sum::KahanSum::new();
    for_each_tuple(req, PhaseRule::Once, |_, k, w| {
        let c = pre * w.to_f64();
        s.add(c * x.powi(k.g1 as i32) * y.powi(k.g2 as i32) * u.powi(k.r1 as i32) * v.powi(k.r2 as i32));
    })?;
    Ok(s.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IntegralClass;

    fn s1() -> SlaterOrbital {
        SlaterOrbital::new(1, 0, 0, 1.0)
    }

    #[test]
    fn four_1s_table() {
        for class in [IntegralClass::Exchange, IntegralClass::Coulomb] {
            let req = IntegralRequest::new(class, [s1(); 4], 1.0);
            let t = generate_terms(&req).unwrap();
            let got: Vec<(u32, u32, u32, u32, f64)> =
                t.terms.iter().map(|c| (c.key.g1, c.key.g2, c.key.r1, c.key.r2, c.coeff)).collect();
            assert_eq!(
                got,
                vec![(0, 0, 2, 2, 0.125), (0, 2, 2, 0, -0.125), (2, 0, 0, 2, -0.125), (2, 2, 0, 0, 0.125)],
                "{class}"
            );
        }
    }

    #[test]
    fn p_sigma_slot_one() {
        let req = IntegralRequest::new(
            IntegralClass::Exchange,
            [SlaterOrbital::new(2, 1, 0, 1.0), s1(), s1(), s1()],
            1.0,
        );
        let mut seen = Vec::new();
        let n = for_each_tuple(&req, PhaseRule::Once, |i, _, _| seen.push(*i)).unwrap();
        // slot 1: radial 0..=1, s=0, q 0..=1; slots 2..4 radial 0..=1
        assert_eq!(n, 2 * 2 * 2 * 2 * 2);
        assert!(seen.iter().all(|i| i.s[0] == 0 && i.q[0] <= 1 && i.radial[0] <= 1));
    }

    #[test]
    fn selection_failure_is_reported() {
        let mut o = [s1(); 4];
        o[0] = SlaterOrbital::new(2, 1, 1, 1.0);
        let req = IntegralRequest::new(IntegralClass::Exchange, o, 1.0);
        assert!(generate_terms(&req).is_err());
    }
}
