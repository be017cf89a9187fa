//! The xi-integral `A(mu, r1, r2, alpha1, alpha2, |sigma|)` in closed form.
//!
//! The closed form is a signed sum whose terms grow much faster than the
//! result, so production evaluation runs in ball arithmetic with the
//! precision raised until the error radius is negligible. The printed nested
//! sums are regrouped into per-(alpha1, alpha2) tables that are shared across
//! all `mu`, `r1`, `r2` and `|sigma|`.

use rug::Integer;

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, falling};
use crate::oracle::{legendre, quad};
use crate::real::{Ball, Real};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AArgs {
    pub mu: u32,
    pub r1: u32,
    pub r2: u32,
    pub alpha1: f64,
    pub alpha2: f64,
    pub abs_sigma: u32,
}

impl AArgs {
    pub fn new(mu: u32, r1: u32, r2: u32, alpha1: f64, alpha2: f64, abs_sigma: u32) -> Self {
        AArgs { mu, r1, r2, alpha1, alpha2, abs_sigma }
    }

    pub fn validate(&self) -> Result<()> {
        if self.abs_sigma > self.mu {
            return Err(Error::Domain { function: "A", detail: format!("|sigma| = {} > mu = {}", self.abs_sigma, self.mu) });
        }
        if !(self.alpha1 > 0.0 && self.alpha2 > 0.0 && self.alpha1.is_finite() && self.alpha2.is_finite()) {
            return Err(Error::Domain {
                function: "A",
                detail: format!("alpha1 = {}, alpha2 = {}", self.alpha1, self.alpha2),
            });
        }
        Ok(())
    }
}

fn e1_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..200 {
        term *= -x / n as f64;
        let t = term / n as f64;
        sum += t;
        if t.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// `exp(x) E1(x)` by the modified Lentz continued fraction, for `x > 1`.
fn e1_cf_scaled(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x + 1.0;
    let mut c = f;
    let mut d = 0.0;
    for i in 1..1000 {
        let a = -((i * i) as f64);
        let b = x + (2 * i + 1) as f64;
        d = b + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    1.0 / f
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn exp_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain { function: "exp_e1", detail: format!("x = {x} (need x > 0)") });
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_cf_scaled(x) * (-x).exp())
    }
}

/// `exp(x) E1(x)`, finite for large `x`.
pub fn scaled_e1(x: f64) -> f64 {
    if x <= 1.0 {
        e1_series(x) * x.exp()
    } else {
        e1_cf_scaled(x)
    }
}

fn int<R: Real>(x: impl Into<Integer>, ctx: R::Ctx) -> R {
    R::from_int(&x.into(), ctx)
}

fn rat<R: Real>(num: impl Into<Integer>, den: impl Into<Integer>, ctx: R::Ctx) -> R {
    int::<R>(num, ctx) / int::<R>(den, ctx)
}

fn sg<R: Real>(odd: u32, v: R) -> R {
    if odd % 2 == 1 {
        -v
    } else {
        v
    }
}

fn pow2(e: u32) -> Integer {
    Integer::from(1) << e
}

/// Scalars shared by every term at fixed `(alpha1, alpha2)`.
struct Consts<R: Real> {
    ia: Vec<R>,
    ib: Vec<R>,
    is: Vec<R>,
    /// `ln(2 a1 a2 / (a1 + a2)) + gamma`
    lam: R,
    x: R,
    y1: R,
    y2: R,
    e: R,
}

fn powers<R: Real>(base: &R, n: usize) -> Vec<R> {
    let mut v = Vec::with_capacity(n + 1);
    v.push(R::one(base.ctx()));
    for i in 0..n {
        let next = v[i].clone() * base.clone();
        v.push(next);
    }
    v
}

impl<R: Real> Consts<R> {
    fn new(alpha1: f64, alpha2: f64, n: usize, ctx: R::Ctx) -> Self {
        let a = R::from_f64(alpha1, ctx);
        let b = R::from_f64(alpha2, ctx);
        let s = a.clone() + b.clone();
        let two = R::from_i64(2, ctx);
        let lam = (two.clone() * a.clone() * b.clone() / s.clone()).ln() + R::euler_gamma(ctx);
        Consts {
            ia: powers(&a.recip(), n),
            ib: powers(&b.recip(), n),
            is: powers(&s.recip(), n),
            lam,
            x: (two.clone() * s.clone()).scaled_e1(),
            y1: (two.clone() * a).scaled_e1(),
            y2: (two * b).scaled_e1(),
            e: (-s).exp(),
        }
    }
}

/// `e^(a1+a2) int int xi1^k1 xi2^k2 ln((x>+1)/(x>-1)) e^(-a1 xi1 - a2 xi2)`,
/// summed exactly as the printed three towers.
fn j_literal<R: Real>(c: &Consts<R>, k1: u32, k2: u32, ctx: R::Ctx) -> R {
    let z = || R::zero(ctx);
    let (k1u, k2u) = (k1 as usize, k2 as usize);
    let mut s1 = z();
    for n1 in 0..=k1 {
        for n2 in 0..=k2 {
            let u = int::<R>(falling(k1, n1) * falling(k2, n2), ctx)
                * c.ia[n1 as usize + 1].clone()
                * c.ib[n2 as usize + 1].clone();
            let br = c.lam.clone()
                + sg(n1 + n2 + k1 + k2 + 1, c.x.clone())
                + sg(k1 + n1, c.y1.clone())
                + sg(k2 + n2, c.y2.clone());
            s1 = s1 + u * br;
        }
    }
    let mut s2 = z();
    for n2 in 1..=k2 {
        for j2 in 0..=(k2 - n2) {
            let pre = rat::<R>(falling(k2, n2 + j2), n2, ctx);
            let mut v = z();
            for n1 in 0..=k1 {
                let (n1u, n2u, j2u) = (n1 as usize, n2 as usize, j2 as usize);
                let f1 = int::<R>(falling(k1, n1), ctx);
                v = v - f1.clone() * c.ia[n1u + 1].clone() * c.ib[n2u + j2u + 1].clone();
                let mut st = z();
                for t in 0..n2 {
                    st = st
                        + rat::<R>(pow2(n2 - t - 1), factorial(n2 - t - 1), ctx)
                            * c.ia[n1u + 1].clone()
                            * c.ib[j2u + t as usize + 2].clone();
                }
                v = v + sg(k2 + n2 + j2, f1 * st);
                for j1 in 0..=n1 {
                    let pre1 = rat::<R>(factorial(k1), factorial(n1 - j1), ctx);
                    let ja = c.ia[j1 as usize + 1].clone() * c.ib[j2u + 1].clone();
                    let mut w = int::<R>(binomial(k1 + n2 - n1 - 1, k1 - n1), ctx)
                        * c.is[(k1 + n2 - n1) as usize].clone()
                        * ja.clone();
                    for t in 0..n2 {
                        let term = rat::<R>(pow2(n2 - t - 1), factorial(n2 - t - 1), ctx)
                            * int::<R>(binomial(t + k1 - n1, t), ctx)
                            * c.is[(k1 + t + 1 - n1) as usize].clone()
                            * ja.clone();
                        w = w + sg(k2 + n2 + j2 + 1, term);
                    }
                    v = v + pre1 * w;
                }
            }
            s2 = s2 + pre * v;
        }
    }
    let mut s3 = z();
    for n2 in 0..=k2 {
        for n1 in 1..=k1 {
            for j1 in 0..=(k1 - n1) {
                let pre = rat::<R>(falling(k2, n2) * falling(k1, n1 + j1), n1, ctx);
                let (n1u, n2u, j1u) = (n1 as usize, n2 as usize, j1 as usize);
                let bb = c.ib[n2u + 1].clone();
                let mut v = c.ia[j1u + 1].clone() * bb.clone() * c.is[n1u].clone()
                    - c.ia[n1u + j1u + 1].clone() * bb.clone();
                for t in 0..n1 {
                    let q = rat::<R>(pow2(n1 - 1 - t), factorial(n1 - t - 1), ctx);
                    let inner = c.ia[j1u + t as usize + 2].clone() * bb.clone()
                        + sg(k2 + n2 + 1, c.is[t as usize + 1].clone() * c.ia[j1u + 1].clone() * bb.clone());
                    v = v + sg(k1 + j1 + n1, q * inner);
                }
                s3 = s3 + pre * v;
            }
        }
    }
    let _ = (k1u, k2u);
    s1 + s2 + s3
}

fn br_literal<R: Real>(c: &Consts<R>, k1o: u32, k2: u32, f1: u32, f2: u32, ctx: R::Ctx) -> R {
    let mut v = R::zero(ctx);
    for n1 in 0..=k1o {
        for n2 in 0..=f2 {
            for j2 in 0..=n2 {
                let num = falling(k1o, n1) * binomial(n1 + f2 - n2, f2 - n2) * factorial(f2);
                v = v + rat::<R>(num, factorial(n2 - j2), ctx)
                    * c.ib[j2 as usize + 1].clone()
                    * c.is[(f2 + n1 - n2 + 1) as usize].clone();
            }
        }
    }
    for n2 in 0..=k2 {
        for n1 in 0..=f1 {
            for j1 in 0..=n1 {
                let num = falling(k2, n2) * binomial(n2 + f1 - n1, f1 - n1) * factorial(f1);
                v = v + rat::<R>(num, factorial(n1 - j1), ctx)
                    * c.ia[j1 as usize + 1].clone()
                    * c.is[(f1 + n2 - n1 + 1) as usize].clone();
            }
        }
    }
    v
}

fn ck(mu: u32, s: u32, k: u32) -> Integer {
    let v = binomial(2 * mu - 2 * k, mu - s) * binomial(mu, k);
    if k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Coefficients and `(f1, f2)` offsets of the second block, independent of alpha.
/// Each entry is `(coeff, n + j)`; the BR arguments follow from `n + j`.
fn second_block_coeffs(mu: u32, s: u32) -> Vec<(rug::Rational, u32)> {
    let m = mu + s;
    let mut out = Vec::new();
    for kap in 1..=s {
        for j in 0..=(kap - 1) / 2 {
            for n in 0..=(m - kap) / 2 {
                let mut num = factorial(s)
                    * binomial(m - kap, mu)
                    * binomial(kap, kap - 2 * j - 1)
                    * binomial(2 * mu - 2 * n, mu - s + kap)
                    * binomial(mu, n);
                if (kap + n) % 2 == 1 {
                    num = -num;
                }
                if num != 0 {
                    out.push((rug::Rational::from((num, Integer::from(kap))), n + j));
                }
            }
        }
    }
    if mu > s {
        for j in 0..=(mu - s - 1) / 2 {
            let top = mu - 2 * j - 1;
            let pre_num = Integer::from(2 * mu - 4 * j - 1) * factorial(top + s) * pow2(2 * j + 1);
            let pre_den = Integer::from((2 * j + 1) * (mu - j)) * factorial(top);
            for n in 0..=(m - 2 * j - 1) / 2 {
                if n > top || 2 * (top - n) < top - s {
                    continue;
                }
                let mut num = Integer::from(&pre_num * binomial(2 * (top - n), top - s)) * binomial(top, n);
                // the j-sum enters with a minus sign
                if n % 2 == 0 {
                    num = -num;
                }
                if num != 0 {
                    out.push((rug::Rational::from((num, pre_den.clone())), n + j));
                }
            }
        }
    }
    out
}

fn from_rational<R: Real>(q: &rug::Rational, ctx: R::Ctx) -> R {
    int::<R>(q.numer().clone(), ctx) / int::<R>(q.denom().clone(), ctx)
}

/// Assemble A from `J(k1, k2)` and `BR(k1o, k2, f1, f2)` providers.
fn assemble<R: Real>(
    mu: u32,
    r1: u32,
    r2: u32,
    s: u32,
    e: &R,
    ctx: R::Ctx,
    j: impl Fn(u32, u32) -> R,
    br: impl Fn(u32, u32, u32, u32) -> R,
) -> R {
    let m = mu + s;
    let kmax = m / 2;
    let cks: Vec<Integer> = (0..=kmax).map(|k| ck(mu, s, k)).collect();
    let mut block1 = R::zero(ctx);
    for k in 0..=kmax {
        if cks[k as usize] == 0 {
            continue;
        }
        for p in 0..=kmax {
            if cks[p as usize] == 0 {
                continue;
            }
            let c = int::<R>(Integer::from(&cks[k as usize] * &cks[p as usize]), ctx);
            block1 = block1 + c * j(m - 2 * p + r1, m - 2 * k + r2);
        }
    }
    let fm = rat::<R>(factorial(m), factorial(mu), ctx);
    let pref1 = e.clone() * fm.clone() * fm.clone() / int::<R>(pow2(2 * mu + 1), ctx);
    let coeffs = second_block_coeffs(mu, s);
    let mut block2 = R::zero(ctx);
    if !coeffs.is_empty() {
        for k in 0..=kmax {
            if cks[k as usize] == 0 {
                continue;
            }
            let (k1o, k2) = (m - 2 * k + r1, m - 2 * k + r2);
            let mut inner = R::zero(ctx);
            for (q, nj) in &coeffs {
                let f1 = m - 2 * nj - 1 + r1;
                let f2 = m - 2 * nj - 1 + r2;
                inner = inner + from_rational::<R>(q, ctx) * br(k1o, k2, f1, f2);
            }
            block2 = block2 + int::<R>(cks[k as usize].clone(), ctx) * inner;
        }
    }
    let pref2 = e.clone() * fm / int::<R>(pow2(2 * mu), ctx);
    pref1 * block1 + pref2 * block2
}

/// Direct transcription of the nested sums of the closed form. Cost grows
/// like a high power of `mu`; intended for cross-checking small cases.
pub fn a_closed_literal<R: Real>(args: &AArgs, ctx: R::Ctx) -> R {
    let n = (2 * (args.mu + args.abs_sigma + args.r1.max(args.r2)) + 4) as usize;
    let c = Consts::<R>::new(args.alpha1, args.alpha2, n, ctx);
    assemble(
        args.mu,
        args.r1,
        args.r2,
        args.abs_sigma,
        &c.e,
        ctx,
        |k1, k2| j_literal(&c, k1, k2, ctx),
        |a, b, f1, f2| br_literal(&c, a, b, f1, f2, ctx),
    )
}

/// Regrouped tables of `J(k1, k2)` and the two halves of `BR` for all indices
/// up to `cap`, built in `O(cap^3)` operations.
pub struct ATables<R: Real> {
    cap: u32,
    ctx: R::Ctx,
    e: R,
    j: Vec<R>,
    bx: Vec<R>,
    by: Vec<R>,
}

impl<R: Real> ATables<R> {
    pub fn build(alpha1: f64, alpha2: f64, cap: u32, ctx: R::Ctx) -> Self {
        let n = cap as usize;
        let w = n + 1;
        let c = Consts::<R>::new(alpha1, alpha2, 2 * n + 4, ctx);
        let one = R::one(ctx);
        let fact: Vec<R> = (0..=n as u32 + 1).map(|k| int::<R>(factorial(k), ctx)).collect();
        // 2^k / k!
        let tk: Vec<R> = (0..=n as u32).map(|k| rat::<R>(pow2(k), factorial(k), ctx)).collect();
        // falling(k, m) / m for 1 <= m <= k
        let mut ffn = vec![R::zero(ctx); w * w];
        for k in 1..=n as u32 {
            for m in 1..=k {
                ffn[k as usize * w + m as usize] = rat::<R>(falling(k, m), m, ctx);
            }
        }
        let bw = 2 * w + 1;
        let mut binom = vec![R::zero(ctx); bw * bw];
        for top in 0..bw as u32 {
            for k in 0..=top {
                binom[top as usize * bw + k as usize] = int::<R>(binomial(top, k), ctx);
            }
        }
        let bin = |top: u32, k: u32| binom[top as usize * bw + k as usize].clone();

        // U(k) = sum_n k!/(k-n)! a^-(n+1) and its alternating twin
        let mut u1 = vec![c.ia[1].clone()];
        let mut u1a = vec![c.ia[1].clone()];
        let mut u2 = vec![c.ib[1].clone()];
        let mut u2a = vec![c.ib[1].clone()];
        for k in 1..=n {
            let kk = R::from_i64(k as i64, ctx);
            u1.push((one.clone() + kk.clone() * u1[k - 1].clone()) * c.ia[1].clone());
            u1a.push((one.clone() - kk.clone() * u1a[k - 1].clone()) * c.ia[1].clone());
            u2.push((one.clone() + kk.clone() * u2[k - 1].clone()) * c.ib[1].clone());
            u2a.push((one.clone() - kk * u2a[k - 1].clone()) * c.ib[1].clone());
        }

        // St (b), Sa (a), Ss (s): sum_t 2^(n-t-1)/(n-t-1)! x^-t; Ss carries one more 1/s
        let mut st = vec![R::zero(ctx)];
        let mut sa = vec![R::zero(ctx)];
        let mut ss = vec![R::zero(ctx)];
        for k in 0..n {
            st.push(tk[k].clone() + st[k].clone() * c.ib[1].clone());
            sa.push(tk[k].clone() + sa[k].clone() * c.ia[1].clone());
            ss.push((tk[k].clone() + ss[k].clone()) * c.is[1].clone());
        }

        // w(n) = sum_j 1/((n-j)! x^(j+1)) for x = a and x = b
        let inv_fact: Vec<R> = fact.iter().map(|f| f.recip()).collect();
        let mut wa = vec![c.ia[1].clone()];
        let mut wb = vec![c.ib[1].clone()];
        for k in 1..=n {
            wa.push((inv_fact[k].clone() + wa[k - 1].clone()) * c.ia[1].clone());
            wb.push((inv_fact[k].clone() + wb[k - 1].clone()) * c.ib[1].clone());
        }

        // binom(a + b, a) s^-(a+b+1)
        let mut bis = vec![R::zero(ctx); w * w];
        for x in 0..=n as u32 {
            for y in 0..=n as u32 {
                bis[x as usize * w + y as usize] = bin(x + y, x) * c.is[(x + y + 1) as usize].clone();
            }
        }

        // Vb(m, n2) and Zb(m, n2) for 1 <= n2 <= n
        let mut vb = vec![R::zero(ctx); w * w];
        let mut zb = vec![R::zero(ctx); w * w];
        for m in 0..=n as u32 {
            for n2 in 1..=n as u32 {
                let i = m as usize * w + n2 as usize;
                vb[i] = bin(m + n2 - 1, m) * c.is[(m + n2) as usize].clone();
                let mut acc = R::zero(ctx);
                for t in 0..n2 {
                    acc.add_mul(&tk[(n2 - t - 1) as usize], &bis[t as usize * w + m as usize]);
                }
                zb[i] = acc;
            }
        }
        // PV(k1, n2), PZ(k1, n2)
        let mut pv = vec![R::zero(ctx); w * w];
        let mut pz = vec![R::zero(ctx); w * w];
        for k1 in 0..=n {
            for n2 in 1..=n {
                let mut av = R::zero(ctx);
                let mut az = R::zero(ctx);
                for n1 in 0..=k1 {
                    let i = (k1 - n1) * w + n2;
                    av.add_mul(&wa[n1], &vb[i]);
                    az.add_mul(&wa[n1], &zb[i]);
                }
                pv[k1 * w + n2] = fact[k1].clone() * av;
                pz[k1 * w + n2] = fact[k1].clone() * az;
            }
        }

        // The n2 sum of J splits into a part proportional to U1(k1) and a
        // PV/PZ convolution; the n1 sum into parts proportional to U2(k2)
        // and its alternating twin.
        let mut h2 = vec![R::zero(ctx); w];
        let mut q2a = vec![R::zero(ctx); w * w];
        let mut q2b = vec![R::zero(ctx); w * w];
        for k2 in 1..=n {
            let mut acc = R::zero(ctx);
            for n2 in 1..=k2 {
                let f = ffn[k2 * w + n2].clone();
                let (a2, b2) = (u2[k2 - n2].clone(), u2a[k2 - n2].clone());
                let g = -(a2.clone() * c.ib[n2].clone())
                    + sg((k2 + n2) as u32, st[n2].clone() * b2.clone() * c.ib[1].clone());
                acc = acc + f.clone() * g;
                q2a[k2 * w + n2] = f.clone() * a2;
                q2b[k2 * w + n2] = sg((k2 + n2 + 1) as u32, f * b2);
            }
            h2[k2] = acc;
        }
        let mut p3 = vec![R::zero(ctx); w];
        let mut r3 = vec![R::zero(ctx); w];
        for k1 in 1..=n {
            let (mut pa, mut ra) = (R::zero(ctx), R::zero(ctx));
            for n1 in 1..=k1 {
                let f = ffn[k1 * w + n1].clone();
                let (a1, b1) = (u1[k1 - n1].clone(), u1a[k1 - n1].clone());
                let odd = (k1 + n1) as u32;
                pa = pa
                    + f.clone()
                        * (a1 * (c.is[n1].clone() - c.ia[n1].clone())
                            + sg(odd, sa[n1].clone() * b1.clone() * c.ia[1].clone()));
                ra = ra + sg(odd, f * ss[n1].clone() * b1);
            }
            p3[k1] = pa;
            r3[k1] = ra;
        }

        let mut j = vec![R::zero(ctx); w * w];
        for k1 in 0..=n {
            for k2 in 0..=n {
                let (k1u, k2u) = (k1 as u32, k2 as u32);
                let t1 = u1[k1].clone() * u2[k2].clone() * c.lam.clone()
                    - sg(k1u + k2u, u1a[k1].clone() * u2a[k2].clone() * c.x.clone())
                    + sg(k1u, u1a[k1].clone() * u2[k2].clone() * c.y1.clone())
                    + sg(k2u, u1[k1].clone() * u2a[k2].clone() * c.y2.clone());
                let mut t2 = u1[k1].clone() * h2[k2].clone();
                for n2 in 1..=k2 {
                    t2.add_mul(&pv[k1 * w + n2], &q2a[k2 * w + n2]);
                    t2.add_mul(&pz[k1 * w + n2], &q2b[k2 * w + n2]);
                }
                let t3 = u2[k2].clone() * p3[k1].clone() - sg(k2u, u2a[k2].clone() * r3[k1].clone());
                j[k1 * w + k2] = t1 + t2 + t3;
            }
        }

        // Yx(c, d) = sum_n1 c!/(c-n1)! binom(n1+d, d) s^-(d+n1+1)
        let mut fall = vec![R::zero(ctx); w * w];
        for cc in 0..=n as u32 {
            for n1 in 0..=cc {
                fall[cc as usize * w + n1 as usize] = int::<R>(falling(cc, n1), ctx);
            }
        }
        let mut yx = vec![R::zero(ctx); w * w];
        for cc in 0..=n as u32 {
            for d in 0..=n as u32 {
                let mut acc = R::zero(ctx);
                for n1 in 0..=cc {
                    acc.add_mul(&fall[cc as usize * w + n1 as usize], &bis[n1 as usize * w + d as usize]);
                }
                yx[cc as usize * w + d as usize] = acc;
            }
        }
        let mut bx = vec![R::zero(ctx); w * w];
        let mut by = vec![R::zero(ctx); w * w];
        for cc in 0..=n {
            for f in 0..=n {
                let mut ax = R::zero(ctx);
                let mut ay = R::zero(ctx);
                for t in 0..=f {
                    let y = &yx[cc * w + f - t];
                    ax.add_mul(&wb[t], y);
                    ay.add_mul(&wa[t], y);
                }
                bx[cc * w + f] = fact[f].clone() * ax;
                by[cc * w + f] = fact[f].clone() * ay;
            }
        }
        ATables { cap, ctx, e: c.e, j, bx, by }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    fn idx(&self, a: u32, b: u32) -> usize {
        a as usize * (self.cap as usize + 1) + b as usize
    }

    /// `J(k1, k2) = e^(a1+a2) int int xi1^k1 xi2^k2 ln((x>+1)/(x>-1)) e^(-a1 xi1 - a2 xi2)`.
    pub fn j(&self, k1: u32, k2: u32) -> &R {
        &self.j[self.idx(k1, k2)]
    }

    pub fn br(&self, k1o: u32, k2: u32, f1: u32, f2: u32) -> R {
        self.bx[self.idx(k1o, f2)].clone() + self.by[self.idx(k2, f1)].clone()
    }

    /// Largest table index needed by `A(mu, r1, r2, s)`.
    pub fn required_cap(mu: u32, r1: u32, r2: u32, s: u32) -> u32 {
        mu + s + r1.max(r2)
    }

    pub fn a(&self, mu: u32, r1: u32, r2: u32, s: u32) -> R {
        assert!(Self::required_cap(mu, r1, r2, s) <= self.cap, "A table capacity exceeded");
        assemble(
            mu,
            r1,
            r2,
            s,
            &self.e,
            self.ctx,
            |k1, k2| self.j(k1, k2).clone(),
            |a, b, f1, f2| self.br(a, b, f1, f2),
        )
    }
}

/// Adaptive-precision evaluator of A at fixed `(alpha1, alpha2)`.
pub struct AEvaluator {
    alpha1: f64,
    alpha2: f64,
    target_bits: u32,
    prec: u32,
    tables: Option<ATables<Ball>>,
    rebuilds: usize,
}

pub const MAX_A_PRECISION: u32 = 1 << 15;

impl AEvaluator {
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        AEvaluator { alpha1, alpha2, target_bits: 64, prec: 0, tables: None, rebuilds: 0 }
    }

    /// Required relative accuracy as `2^-bits` (default 64).
    pub fn with_target_bits(mut self, bits: u32) -> Self {
        self.target_bits = bits;
        self
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    fn rebuild(&mut self, cap: u32, prec: u32) {
        self.prec = prec;
        self.tables = Some(ATables::build(self.alpha1, self.alpha2, cap, prec));
        self.rebuilds += 1;
    }

    pub fn eval_ball(&mut self, mu: u32, r1: u32, r2: u32, s: u32) -> Ball {
        let need = ATables::<Ball>::required_cap(mu, r1, r2, s);
        let cap = self.tables.as_ref().map_or(0, |t| t.cap());
        if self.tables.is_none() || cap < need {
            let grown = need.max(cap + cap / 2).max(8);
            // heuristic start; the loop below raises it when the radius says so
            let prec = self.prec.max(96 + 5 * grown);
            self.rebuild(grown, prec);
        }
        loop {
            let v = self.tables.as_ref().expect("tables built").a(mu, r1, r2, s);
            let lost = v.rel_radius_log2();
            if lost <= -(self.target_bits as f64) || self.prec >= MAX_A_PRECISION {
                return v;
            }
            let extra = if lost.is_finite() { (lost + self.target_bits as f64).ceil() as u32 + 32 } else { self.prec };
            let cap = self.tables.as_ref().map_or(need, |t| t.cap());
            self.rebuild(cap, (self.prec + extra).min(MAX_A_PRECISION));
        }
    }

    pub fn eval(&mut self, mu: u32, r1: u32, r2: u32, s: u32) -> f64 {
        self.eval_ball(mu, r1, r2, s).to_f64()
    }
}

/// Closed-form A, evaluated to full double precision.
pub fn a_closed(args: &AArgs) -> Result<f64> {
    args.validate()?;
    Ok(AEvaluator::new(args.alpha1, args.alpha2).eval(args.mu, args.r1, args.r2, args.abs_sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    /// Bound on the neglected `xi > cutoff` part.
    pub tail: f64,
}

/// Xi beyond which `e^(-alpha (xi - 1))` times the polynomial growth is negligible.
pub fn quadrature_cutoff(args: &AArgs) -> f64 {
    let amin = args.alpha1.min(args.alpha2);
    let deg = (2 * (args.mu + args.abs_sigma) + args.r1 + args.r2) as f64;
    // tail of xi^deg e^(-amin xi) is below e^-50 relative once amin (xi-1) > 50 + deg ln xi
    let mut x = 1.0 + 50.0 / amin;
    for _ in 0..50 {
        x = 1.0 + (50.0 + deg * x.ln()) / amin;
    }
    x
}

/// Defining double integral of A by nested adaptive quadrature split along
/// the diagonal; independent of the closed form.
pub fn a_quadrature(args: &AArgs, tol: f64) -> Result<QuadEstimate> {
    args.validate()?;
    let AArgs { mu, r1, r2, alpha1, alpha2, abs_sigma: s } = *args;
    let cut = quadrature_cutoff(args);
    let pt = |x: f64| legendre::p_xi(mu, s, x) * (x * x - 1.0).powf(s as f64 / 2.0);
    let qt = |x: f64| legendre::q_xi(mu, s, x) * (x * x - 1.0).powf(s as f64 / 2.0);
    let inner_tol = tol * 1e-2;
    // Region xi1 < xi2 and its mirror, each as outer(x) * int_1^x inner.
    let region = |ra: u32, aa: f64, rb: u32, ab: f64| {
        let outer = |x: f64| -> f64 {
            let inner = quad::integrate(
                |y: f64| y.powi(ra as i32) * pt(y) * (-aa * (y - 1.0)).exp(),
                1.0,
                x,
                quad::Tolerance { abs: 0.0, rel: inner_tol },
            );
            x.powi(rb as i32) * qt(x) * (-ab * (x - 1.0)).exp() * inner.value
        };
        let est = quad::integrate_singular_left(&outer, 1.0, cut, quad::Tolerance { abs: 0.0, rel: tol });
        // the integrand decays at least like e^(-min(alpha) xi) beyond the cutoff
        let tail = outer(cut).abs() / aa.min(ab);
        (est, tail)
    };
    let e = (-(alpha1 + alpha2)).exp();
    let (i1, t1) = region(r1, alpha1, r2, alpha2);
    let (i2, t2) = region(r2, alpha2, r1, alpha1);
    let value = e * (i1.value + i2.value);
    let error = e * (i1.error + i2.error);
    let tail = e * (t1 + t2);
    if !i1.converged || !i2.converged {
        return Err(Error::QuadratureNotConverged { value, error, tolerance: tol });
    }
    Ok(QuadEstimate { value, error, tail })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_values() {
        assert!((exp_e1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-15);
        let v = exp_e1(1e-8).unwrap();
        let approx = -EULER_GAMMA + 8.0 * 10f64.ln();
        assert!((v - approx).abs() < 1e-7 * approx);
        let x = 10.0;
        let v = exp_e1(x).unwrap();
        assert!((v - 4.156_968_929_685_324e-6).abs() < 1e-19);
        let sc = scaled_e1(x);
        assert!(sc > 1.0 / (x + 1.0) && sc < 1.0 / x);
        assert!(exp_e1(0.0).is_err());
    }

    #[test]
    fn e1_against_mpfr() {
        for x in [1e-6, 0.3, 0.999, 1.0, 1.001, 2.5, 7.0, 40.0, 300.0] {
            let r = Ball::from_f64(x, 128).scaled_e1().to_f64() * (-x).exp();
            let v = exp_e1(x).unwrap();
            assert!((v - r).abs() <= 1e-14 * r, "x={x}: {v} vs {r}");
        }
    }

    #[test]
    fn regrouped_matches_literal() {
        let ctx = 256;
        for (a1, a2) in [(1.0, 1.0), (0.7, 2.3), (5.0, 0.5)] {
            let t = ATables::<Ball>::build(a1, a2, 7, ctx);
            let c = Consts::<Ball>::new(a1, a2, 20, ctx);
            for k1 in 0..=4 {
                for k2 in 0..=4 {
                    let x = t.j(k1, k2).to_f64();
                    let y = j_literal(&c, k1, k2, ctx).to_f64();
                    assert!((x - y).abs() <= 1e-25 * y.abs(), "J({k1},{k2}) {x} {y}");
                    let b1 = t.br(k1, k2, k2, k1).to_f64();
                    let b2 = br_literal(&c, k1, k2, k2, k1, ctx).to_f64();
                    assert!((b1 - b2).abs() <= 1e-25 * b2.abs());
                }
            }
            for (mu, r1, r2, s) in [(0, 0, 0, 0), (2, 1, 0, 1), (3, 1, 2, 2), (2, 2, 2, 2)] {
                let x = t.a(mu, r1, r2, s).to_f64();
                let y = a_closed_literal::<Ball>(&AArgs::new(mu, r1, r2, a1, a2, s), ctx).to_f64();
                assert!((x - y).abs() <= 1e-25 * y.abs(), "A {mu} {r1} {r2} {s}: {x} {y}");
            }
        }
    }

    #[test]
    fn known_values() {
        let v = a_closed(&AArgs::new(0, 0, 0, 1.0, 1.0, 0)).unwrap();
        assert!((v - 0.073_996_409_970_089).abs() < 1e-14, "{v}");
        let v = a_closed(&AArgs::new(1, 0, 0, 2.0, 3.0, 0)).unwrap();
        assert!((v - 0.000_332_414_536_185_57).abs() < 1e-17, "{v}");
        assert!(a_closed(&AArgs::new(0, 0, 0, 30.0, 30.0, 0)).unwrap().abs() < 1e-20);
    }

    #[test]
    fn double_precision_loses_digits() {
        // the closed form in plain f64 is unusable at moderate mu
        let args = AArgs::new(10, 2, 0, 1.4, 1.4, 0);
        let exact = a_closed(&args).unwrap();
        let plain = ATables::<f64>::build(1.4, 1.4, 12, ()).a(10, 2, 0, 0);
        assert!((plain - exact).abs() > 1e-6 * exact.abs());
    }
}
