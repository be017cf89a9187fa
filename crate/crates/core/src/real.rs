//! Scalar types used by the generic closed forms: plain `f64` and a
//! midpoint-radius ball over MPFR floats that tracks its own rounding error.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::{Float, Integer};

pub trait Real:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Copy;

    fn ctx(&self) -> Self::Ctx;
    fn from_f64(x: f64, ctx: Self::Ctx) -> Self;
    fn from_int(x: &Integer, ctx: Self::Ctx) -> Self;
    fn euler_gamma(ctx: Self::Ctx) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    /// `exp(x) * E1(x)` for `x > 0`.
    fn scaled_e1(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self) {
        let v = self.clone() + a.clone() * b.clone();
        *self = v;
    }

    fn from_i64(x: i64, ctx: Self::Ctx) -> Self {
        Self::from_int(&Integer::from(x), ctx)
    }

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }

    fn recip(&self) -> Self {
        Self::one(self.ctx()) / self.clone()
    }

    fn powu(&self, n: u32) -> Self {
        let mut acc = Self::one(self.ctx());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Real for f64 {
    type Ctx = ();

    fn ctx(&self) {}

    fn from_f64(x: f64, _: ()) -> Self {
        x
    }

    fn from_int(x: &Integer, _: ()) -> Self {
        x.to_f64()
    }

    fn euler_gamma(_: ()) -> Self {
        0.577_215_664_901_532_9
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn scaled_e1(&self) -> Self {
        crate::afunc::scaled_e1(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, n: u32) -> Self {
        self.powi(n as i32)
    }
}

const UP: f64 = 1.0 + 4.0 * f64::EPSILON;
const DOWN: f64 = 1.0 - 4.0 * f64::EPSILON;

fn frexp(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let ex = ((bits >> 52) & 0x7ff) as i64;
    if ex == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    (f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52)), ex - 1022)
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    if e > 1100 {
        return x * f64::INFINITY;
    }
    if e < -1200 {
        return 0.0;
    }
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Nonnegative magnitude `m * 2^e` with an unbounded exponent, rounded
/// upward by every operation. `m` is zero, infinite, or in `[0.5, 1)`.
#[derive(Clone, Copy, PartialEq)]
struct Mag {
    m: f64,
    e: i64,
}

impl Mag {
    const ZERO: Mag = Mag { m: 0.0, e: 0 };
    const INF: Mag = Mag { m: f64::INFINITY, e: 0 };

    fn new(x: f64, e: i64) -> Mag {
        let x = x.abs();
        if x == 0.0 {
            Mag::ZERO
        } else if !x.is_finite() {
            Mag::INF
        } else {
            let (m, k) = frexp(x);
            Mag { m, e: e + k }
        }
    }

    fn is_zero(self) -> bool {
        self.m == 0.0
    }

    fn is_inf(self) -> bool {
        self.m.is_infinite()
    }

    fn pow2(e: i64) -> Mag {
        Mag { m: 0.5, e: e + 1 }
    }

    /// Upper bound on `|x|`.
    fn of(x: &Float) -> Mag {
        if x.is_zero() {
            return Mag::ZERO;
        }
        if !x.is_finite() {
            return Mag::INF;
        }
        let (m, e) = x.to_f64_exp();
        Mag::new(m * UP, e as i64)
    }

    /// Lower bound on `|x|`.
    fn lower_of(x: &Float) -> Mag {
        if x.is_zero() || !x.is_finite() {
            return Mag::of(x);
        }
        let (m, e) = x.to_f64_exp();
        Mag::new(m * DOWN, e as i64)
    }

    fn add(self, o: Mag) -> Mag {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        if self.is_inf() || o.is_inf() {
            return Mag::INF;
        }
        let (a, b) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = a.e - b.e;
        // below 2^-200 the smaller term hides inside the upward rounding
        let small = if d > 200 { 0.0 } else { b.m * 2f64.powi(-(d as i32)) };
        Mag::new((a.m + small) * UP, a.e)
    }

    fn mul(self, o: Mag) -> Mag {
        if self.is_zero() || o.is_zero() {
            return Mag::ZERO;
        }
        Mag::new(self.m * o.m * UP, self.e + o.e)
    }

    fn div(self, o: Mag) -> Mag {
        if self.is_zero() {
            return Mag::ZERO;
        }
        if o.is_zero() {
            return Mag::INF;
        }
        Mag::new(self.m / o.m * UP, self.e - o.e)
    }

    /// Lower bound on `self - o`, or `None` when it may be nonpositive.
    fn sub_lower(self, o: Mag) -> Option<Mag> {
        if o.is_zero() {
            return Some(self);
        }
        if self.is_inf() || o.is_inf() || o.e > self.e {
            return None;
        }
        let d = self.e - o.e;
        let v = if d > 200 { self.m * DOWN } else { (self.m - o.m * 2f64.powi(-(d as i32))) * DOWN };
        (v > 0.0).then(|| Mag::new(v, self.e))
    }

    fn to_f64(self) -> f64 {
        if self.is_inf() {
            return f64::INFINITY;
        }
        ldexp(self.m, self.e)
    }

    fn log2(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.m.log2() + self.e as f64
    }
}

/// Arbitrary-precision value with an error radius: the exact quantity lies in
/// `[mid - rad, mid + rad]`.
#[derive(Clone)]
pub struct Ball {
    mid: Float,
    rad: Mag,
}

/// Half-ulp bound of a freshly rounded midpoint, taken generously as one ulp.
fn ulp(mid: &Float) -> Mag {
    match mid.get_exp() {
        Some(e) => Mag::pow2(e as i64 - mid.prec() as i64),
        None => Mag::ZERO,
    }
}

impl Ball {
    pub fn exact(mid: Float) -> Self {
        Ball { mid, rad: Mag::ZERO }
    }

    pub fn with_radius(mid: Float, rad: f64) -> Self {
        Ball { mid, rad: Mag::new(rad, 0) }
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn radius(&self) -> f64 {
        self.rad.to_f64()
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    /// Radius relative to the midpoint; infinite when the midpoint is zero.
    pub fn rel_radius(&self) -> f64 {
        if self.rad.is_zero() {
            return 0.0;
        }
        self.rad.div(Mag::lower_of(&self.mid)).to_f64()
    }

    /// `log2(rad / |mid|)`, robust to values outside the f64 range.
    pub fn rel_radius_log2(&self) -> f64 {
        if self.rad.is_zero() {
            return f64::NEG_INFINITY;
        }
        if self.mid.is_zero() {
            return f64::INFINITY;
        }
        self.rad.div(Mag::lower_of(&self.mid)).log2()
    }

    fn from_rounded(mid: Float, ord: Ordering) -> Self {
        let rad = if ord == Ordering::Equal { Mag::ZERO } else { ulp(&mid) };
        Ball { mid, rad }
    }
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} +/- {:e}", self.mid.to_f64(), self.rad.to_f64())
    }
}

impl Add for Ball {
    type Output = Ball;
    fn add(self, o: Ball) -> Ball {
        let prec = self.mid.prec().max(o.mid.prec());
        let mid = Float::with_val(prec, &self.mid + &o.mid);
        let rad = self.rad.add(o.rad).add(ulp(&mid));
        Ball { mid, rad }
    }
}

impl Sub for Ball {
    type Output = Ball;
    fn sub(self, o: Ball) -> Ball {
        self + (-o)
    }
}

impl Neg for Ball {
    type Output = Ball;
    fn neg(self) -> Ball {
        Ball { mid: -self.mid, rad: self.rad }
    }
}

impl Mul for Ball {
    type Output = Ball;
    fn mul(self, o: Ball) -> Ball {
        let prec = self.mid.prec().max(o.mid.prec());
        let mid = Float::with_val(prec, &self.mid * &o.mid);
        let rad = Mag::of(&self.mid)
            .mul(o.rad)
            .add(Mag::of(&o.mid).mul(self.rad))
            .add(self.rad.mul(o.rad))
            .add(ulp(&mid));
        Ball { mid, rad }
    }
}

impl Div for Ball {
    type Output = Ball;
    fn div(self, o: Ball) -> Ball {
        let prec = self.mid.prec().max(o.mid.prec());
        let mid = Float::with_val(prec, &self.mid / &o.mid);
        let rad = match Mag::lower_of(&o.mid).sub_lower(o.rad) {
            Some(denom) => Mag::of(&mid).mul(o.rad).add(self.rad).div(denom),
            None => Mag::INF,
        };
        let rad = rad.add(ulp(&mid));
        Ball { mid, rad }
    }
}

impl Real for Ball {
    type Ctx = u32;

    fn ctx(&self) -> u32 {
        self.mid.prec()
    }

    fn from_f64(x: f64, prec: u32) -> Self {
        let (mid, ord) = Float::with_val_round(prec, x, rug::float::Round::Nearest);
        Ball::from_rounded(mid, ord)
    }

    fn from_int(x: &Integer, prec: u32) -> Self {
        let (mid, ord) = Float::with_val_round(prec, x, rug::float::Round::Nearest);
        Ball::from_rounded(mid, ord)
    }

    fn euler_gamma(prec: u32) -> Self {
        let mid = Float::with_val(prec, Constant::Euler);
        let rad = ulp(&mid);
        Ball { mid, rad }
    }

    fn exp(&self) -> Self {
        let mid = Float::with_val(self.prec(), self.mid.exp_ref());
        // exp(r) - 1 <= r (1 + r) for r <= 2^-30
        let r = self.rad;
        let grow = if r.is_zero() {
            Mag::ZERO
        } else if r.log2() < -30.0 {
            r.mul(Mag::new(1.0 + 2f64.powi(-29), 0))
        } else {
            Mag::new(r.to_f64().exp_m1() * UP, 0)
        };
        let rad = grow.mul(Mag::of(&mid)).add(ulp(&mid));
        Ball { mid, rad }
    }

    fn ln(&self) -> Self {
        let mid = Float::with_val(self.prec(), self.mid.ln_ref());
        let rad = match Mag::lower_of(&self.mid).sub_lower(self.rad) {
            Some(denom) => self.rad.div(denom),
            None => Mag::INF,
        };
        let rad = rad.add(ulp(&mid)).add(Mag::pow2(-(self.prec() as i64)));
        Ball { mid, rad }
    }

    fn scaled_e1(&self) -> Self {
        // -Ei(-x) = E1(x); the derivative of exp(x)E1(x) is bounded by 1/x.
        let prec = self.prec() + 16;
        let neg = Float::with_val(prec, -&self.mid);
        let e1 = -neg.eint();
        let ex = Float::with_val(prec, self.mid.exp_ref());
        let mid = Float::with_val(self.prec(), e1 * ex);
        let rad = match Mag::lower_of(&self.mid).sub_lower(self.rad) {
            Some(denom) => self.rad.div(denom),
            None => Mag::INF,
        };
        let rad = rad.add(ulp(&mid)).add(ulp(&mid));
        Ball { mid, rad }
    }

    fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    fn add_mul(&mut self, a: &Ball, b: &Ball) {
        let prec = self.prec().max(a.prec()).max(b.prec());
        if self.mid.prec() < prec {
            self.mid.set_prec(prec);
        }
        self.mid += &a.mid * &b.mid;
        self.rad = self
            .rad
            .add(Mag::of(&a.mid).mul(b.rad))
            .add(Mag::of(&b.mid).mul(a.rad))
            .add(a.rad.mul(b.rad))
            .add(ulp(&self.mid));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_tracks_cancellation() {
        let p = 80;
        let big = Ball::from_f64(1e20, p);
        let x = (big.clone() + Ball::one(p)) - big;
        assert_eq!(x.to_f64(), 1.0);
        assert!(x.radius() > 1e-6 && x.radius() < 1e-2);
    }

    #[test]
    fn elementary_functions() {
        let p = 200;
        let two = Ball::from_i64(2, p);
        assert!((two.ln().to_f64() - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((two.exp().to_f64() - 2f64.exp()).abs() < 1e-15);
        let v = two.scaled_e1().to_f64();
        assert!((v - 0.361_328_616_888_222).abs() < 1e-14, "{v}");
        assert!(two.scaled_e1().rel_radius() < 1e-55);
        assert_eq!(Ball::from_i64(3, p).powu(5).to_f64(), 243.0);
    }

    #[test]
    fn division_radius() {
        let p = 64;
        let a = Ball::with_radius(Float::with_val(p, 1), 1e-10);
        let q = Ball::one(p) / a;
        assert!((q.radius() - 1e-10).abs() < 1e-12);
    }
}
