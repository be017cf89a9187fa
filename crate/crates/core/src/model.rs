//! Orbitals, integral classes and the scaled parameters of a request.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Normalized Slater-type orbital `(n, l, m, delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlaterOrbital {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub delta: f64,
}

impl SlaterOrbital {
    pub fn new(n: u32, l: u32, m: i32, delta: f64) -> Self {
        SlaterOrbital { n, l, m, delta }
    }

    pub fn abs_m(&self) -> u32 {
        self.m.unsigned_abs()
    }

    pub fn validate(&self, slot: usize) -> Result<()> {
        if self.n == 0 || self.l >= self.n || self.abs_m() > self.l {
            return Err(Error::InvalidQuantumNumbers { slot, n: self.n, l: self.l, m: self.m });
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidExponent { slot, delta: self.delta });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    A,
    B,
}

/// Which centers carry the four orbitals; electron 1 owns slots 1 and 3,
/// electron 2 owns slots 2 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegralClass {
    /// `<a1 a2 | b1 b2>`
    Exchange,
    /// `<a1 a2 | a3 b2>`
    Hybrid,
    /// `<a1 b2 | a3 b4>`
    Coulomb,
}

impl IntegralClass {
    pub const ALL: [IntegralClass; 3] = [IntegralClass::Exchange, IntegralClass::Hybrid, IntegralClass::Coulomb];

    /// Centers of slots 1..4.
    pub fn centers(self) -> [Center; 4] {
        use Center::*;
        match self {
            IntegralClass::Exchange => [A, A, B, B],
            IntegralClass::Hybrid => [A, A, A, B],
            IntegralClass::Coulomb => [A, B, A, B],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IntegralClass::Exchange => "exchange",
            IntegralClass::Hybrid => "hybrid",
            IntegralClass::Coulomb => "coulomb",
        }
    }
}

impl fmt::Display for IntegralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegralClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exchange" => Ok(IntegralClass::Exchange),
            "hybrid" => Ok(IntegralClass::Hybrid),
            "coulomb" => Ok(IntegralClass::Coulomb),
            other => Err(Error::InvalidConfig(format!(
                "unknown integral class '{other}' (expected exchange, hybrid or coulomb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralRequest {
    pub orbitals: [SlaterOrbital; 4],
    pub distance: f64,
    pub class: IntegralClass,
}

impl IntegralRequest {
    pub fn new(class: IntegralClass, orbitals: [SlaterOrbital; 4], distance: f64) -> Self {
        IntegralRequest { orbitals, distance, class }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, o) in self.orbitals.iter().enumerate() {
            o.validate(i + 1)?;
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::InvalidDistance(self.distance));
        }
        Ok(())
    }

    pub fn m_values(&self) -> [i32; 4] {
        self.orbitals.map(|o| o.m)
    }

    /// `sigma = m2 + m4`, the azimuthal order carried by the mu expansion.
    pub fn sigma(&self) -> i32 {
        self.orbitals[1].m + self.orbitals[3].m
    }
}

pub fn validate_request(req: &IntegralRequest) -> Result<IntegralRequest> {
    req.validate()?;
    Ok(*req)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Allowed { sigma: i32 },
    ZeroBySelection,
}

/// The phi integrations vanish unless `m1 + m2 + m3 + m4 = 0`.
pub fn selection_check(m: [i32; 4]) -> Selection {
    if m.iter().sum::<i32>() == 0 {
        Selection::Allowed { sigma: m[1] + m[3] }
    } else {
        Selection::ZeroBySelection
    }
}

/// Dimensionless exponents of the two electrons and the global prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub sigma: i32,
    pub w: f64,
}

/// Exponent of the one-electron density along `xi` (alpha) and `eta` (beta).
fn electron_exponents(r: f64, d_first: f64, c_first: Center, d_second: f64, c_second: Center) -> (f64, f64) {
    let e = |c: Center| if c == Center::A { 1.0 } else { -1.0 };
    let alpha = 0.5 * r * (d_first + d_second);
    let beta = 0.5 * r * (e(c_first) * d_first + e(c_second) * d_second);
    (alpha, beta)
}

pub fn scale_parameters(req: &IntegralRequest) -> ScaledParams {
    let c = req.class.centers();
    let o = &req.orbitals;
    let r = req.distance;
    let (alpha1, beta1) = electron_exponents(r, o[0].delta, c[0], o[2].delta, c[2]);
    let (alpha2, beta2) = electron_exponents(r, o[1].delta, c[1], o[3].delta, c[3]);
    ScaledParams { alpha1, alpha2, beta1, beta2, sigma: req.sigma(), w: w_forms(req)[0] }
}

/// The three algebraically equal forms of the prefactor `W`, written with the
/// exchange-type combinations `alpha +/- beta = R delta`.
pub fn w_forms(req: &IntegralRequest) -> [f64; 3] {
    let r = req.distance;
    let o = &req.orbitals;
    let pw = |x: f64, e: f64| x.powf(e);
    let nsum: u32 = o.iter().map(|x| x.n).sum();
    let w1 = r.powi(nsum as i32 + 1) * o.iter().map(|x| pw(x.delta, x.n as f64 + 0.5)).product::<f64>();
    let rd = |i: usize| r * o[i].delta;
    let h = |i: usize| o[i].n as f64 + 0.5;
    let w2 = o[0].delta * pw(rd(0), h(0) - 1.0) * pw(rd(2), h(2)) * pw(rd(1), h(1)) * pw(rd(3), h(3));
    let w3 = pw(rd(0), h(0)) * pw(rd(2), h(2)) * pw(rd(1), h(1)) * pw(rd(3), h(3)) / r;
    [w1, w2, w3]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1(d: f64) -> SlaterOrbital {
        SlaterOrbital::new(1, 0, 0, d)
    }

    #[test]
    fn validation() {
        assert!(SlaterOrbital::new(2, 1, -1, 0.5).validate(1).is_ok());
        assert!(matches!(
            SlaterOrbital::new(1, 1, 0, 1.0).validate(2),
            Err(Error::InvalidQuantumNumbers { slot: 2, .. })
        ));
        assert!(SlaterOrbital::new(3, 1, 2, 1.0).validate(1).is_err());
        assert!(SlaterOrbital::new(1, 0, 0, 0.0).validate(1).is_err());
        let req = IntegralRequest::new(IntegralClass::Exchange, [s1(1.0); 4], -1.0);
        assert_eq!(validate_request(&req), Err(Error::InvalidDistance(-1.0)));
    }

    #[test]
    fn selection() {
        assert_eq!(selection_check([1, 0, 0, 0]), Selection::ZeroBySelection);
        assert_eq!(selection_check([1, -1, 1, -1]), Selection::Allowed { sigma: -2 });
    }

    #[test]
    fn exchange_scaling() {
        let req = IntegralRequest::new(IntegralClass::Exchange, [s1(1.2), s1(0.8), s1(1.0), s1(0.6)], 2.0);
        let p = scale_parameters(&req);
        assert!((p.alpha1 - 2.2).abs() < 1e-15 && (p.beta1 - 0.2).abs() < 1e-15);
        assert!((p.alpha2 - 1.4).abs() < 1e-15 && (p.beta2 - 0.2).abs() < 1e-15);
        let w = w_forms(&req);
        assert!((w[0] - w[1]).abs() <= 1e-14 * w[0] && (w[0] - w[2]).abs() <= 1e-14 * w[0]);
    }

    #[test]
    fn one_center_scaling() {
        let req = IntegralRequest::new(IntegralClass::Coulomb, [s1(1.0); 4], 1.4);
        let p = scale_parameters(&req);
        assert_eq!((p.alpha1, p.beta1), (1.4, 1.4));
        assert_eq!((p.alpha2, p.beta2), (1.4, -1.4));
        let req = IntegralRequest::new(IntegralClass::Hybrid, [s1(1.0); 4], 1.4);
        let p = scale_parameters(&req);
        assert_eq!((p.alpha1, p.beta1, p.beta2), (1.4, 1.4, 0.0));
    }

    #[test]
    fn class_names_round_trip() {
        for c in IntegralClass::ALL {
            assert_eq!(c.name().parse::<IntegralClass>().unwrap(), c);
        }
        assert!("ionic".parse::<IntegralClass>().is_err());
    }
}
