//! Invariant and oracle-equivalence suites. The CLI `verify` command and the
//! acceptance tests both run these.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::afunc::{a_closed, a_quadrature, AArgs};
use crate::bfunc::{b_alternating, b_derivative_oracle, b_series, b_zero, DEFAULT_SERIES_TOL};
use crate::coeffs::{generate_terms_with, ungrouped_polynomial, PhaseRule, TermKey};
use crate::engine::{evaluate, evaluate_batch_with_workers, EvalConfig};
use crate::error::{Error, Result};
use crate::model::{w_forms, IntegralClass, IntegralRequest, SlaterOrbital};
use crate::oracle::neumann::neumann_integral;
use crate::oracle::{coulomb_1s_closed, exchange_1s_oracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grid {
    #[default]
    Small,
    Full,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(Grid::Small),
            "full" => Ok(Grid::Full),
            other => Err(Error::InvalidConfig(format!("unknown grid {other:?} (small|full)"))),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grid::Small => "small",
            Grid::Full => "full",
        })
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed error in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub note: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<22} cases={:<6} worst={:.3e} tol={:.1e} time={:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance,
            self.elapsed.as_secs_f64()
        )?;
        if !self.note.is_empty() {
            write!(f, "  {}", self.note)?;
        }
        Ok(())
    }
}

/// Accumulates the worst error and the first failure of a check.
struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
    failed: bool,
    note: String,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tally { name, tolerance, cases: 0, worst: 0.0, failed: false, note: String::new(), start: Instant::now() }
    }

    /// Record an error measure; fails when it exceeds the tolerance.
    fn err(&mut self, e: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let e = if e.is_nan() { f64::INFINITY } else { e };
        if e > self.worst {
            self.worst = e;
        }
        if e > self.tolerance {
            self.fail(what);
        }
    }

    fn ok(&mut self, cond: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !cond {
            self.fail(what);
        }
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        if !self.failed {
            self.note = what();
        }
        self.failed = true;
    }

    fn error(&mut self, e: Error) {
        self.cases += 1;
        self.worst = f64::INFINITY;
        self.fail(|| e.to_string());
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            name: self.name,
            passed: !self.failed,
            cases: self.cases,
            worst: self.worst,
            tolerance: self.tolerance,
            note: self.note,
            elapsed: self.start.elapsed(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-300 {
        return 0.0;
    }
    (a - b).abs() / scale
}

fn sigma_range(mu: u32, cap: u32) -> std::ops::RangeInclusive<u32> {
    0..=mu.min(cap)
}

const B_BETAS: [f64; 8] = [-20.0, -5.0, -1.0, -0.1, 0.1, 1.0, 5.0, 20.0];

fn b_grid(grid: Grid) -> (u32, u32, u32) {
    match grid {
        Grid::Small => (5, 3, 2),
        Grid::Full => (8, 6, 4),
    }
}

/// Series against the alternating closed form (relative) and against the
/// finite-difference derivative of the `g = 0` function (second order in `h`).
pub fn check_b_cross_path(grid: Grid) -> CheckReport {
    let mut t = Tally::new("b_cross_path", 1e-9);
    let mut fd = Tally::new("", 1e-9);
    let (mu_max, g_max, s_max) = b_grid(grid);
    for mu in 0..=mu_max {
        for g in 0..=g_max {
            for s in sigma_range(mu, s_max) {
                for &beta in &B_BETAS {
                    let series = b_series(mu, g, beta, s, DEFAULT_SERIES_TOL);
                    let alt = b_alternating(mu, g, beta, s);
                    let (series, alt) = match (series, alt) {
                        (Ok(a), Ok(b)) => (a, b),
                        (Err(e), _) | (_, Err(e)) => {
                            t.error(e);
                            continue;
                        }
                    };
                    t.err(rel(series, alt), || format!("B({mu},{g},{beta},{s}) series {series} alternating {alt}"));
                    if g == 0 {
                        continue;
                    }
                    let h = 1e-4 * beta.abs().max(1.0);
                    let (d1, d2) = match (
                        b_derivative_oracle(mu, g, beta, s, h),
                        b_derivative_oracle(mu, g, beta, s, h / 2.0),
                    ) {
                        (Ok(a), Ok(b)) => (a, b),
                        (Err(e), _) | (_, Err(e)) => {
                            t.error(e);
                            continue;
                        }
                    };
                    // second order: halving h cuts the error by four and
                    // Richardson extrapolation removes the leading term
                    let (e1, e2) = (rel(d1, series), rel(d2, series));
                    let rich = (4.0 * d2 - d1) / 3.0;
                    fd.err(rel(rich, series), || format!("B({mu},{g},{beta},{s}) extrapolated derivative {rich} series {series}"));
                    if e1 > 1e-12 {
                        let ratio = e1 / e2;
                        fd.ok((3.5..4.5).contains(&ratio), || {
                            format!("B({mu},{g},{beta},{s}) step-halving ratio {ratio:.3} (expected ~4)")
                        });
                    }
                }
            }
        }
    }
    let fd = fd.finish();
    let mut r = t.finish();
    r.cases += fd.cases;
    if !fd.passed {
        r.passed = false;
        if r.note.is_empty() {
            r.note = fd.note;
        }
    }
    if r.note.is_empty() {
        r.note = format!("extrapolated finite-difference worst {:.2e}", fd.worst);
    }
    r
}

/// `B(-beta) = (-1)^(mu-s-g) B(beta)` bit for bit, and continuity at `beta -> 0`.
pub fn check_b_parity(grid: Grid) -> CheckReport {
    let mut t = Tally::new("b_parity_continuity", 1e-10);
    let (mu_max, g_max, s_max) = b_grid(grid);
    for mu in 0..=mu_max {
        for g in 0..=g_max {
            for s in sigma_range(mu, s_max) {
                let odd = (mu + s + g) % 2 == 1;
                for &beta in B_BETAS.iter().filter(|b| **b > 0.0) {
                    match (b_series(mu, g, beta, s, DEFAULT_SERIES_TOL), b_series(mu, g, -beta, s, DEFAULT_SERIES_TOL)) {
                        (Ok(p), Ok(m)) => {
                            let expect = if odd { -p } else { p };
                            t.ok(m.to_bits() == expect.to_bits(), || format!("B({mu},{g},+-{beta},{s}): {p} vs {m}"));
                        }
                        (Err(e), _) | (_, Err(e)) => t.error(e),
                    }
                }
                if odd {
                    continue;
                }
                let z = b_zero(mu, g, s);
                match b_series(mu, g, 1e-6, s, DEFAULT_SERIES_TOL) {
                    Ok(v) => t.err((v - z).abs() / z.abs().max(1.0), || format!("B({mu},{g},1e-6,{s}) = {v}, B0 = {z}")),
                    Err(e) => t.error(e),
                }
            }
        }
    }
    t.finish()
}

const A_ALPHAS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

/// Closed form against the defining double integral. The error is reported
/// in units of `max(1e-8 |quad|, 1e-12)`.
pub fn check_a_quadrature(grid: Grid) -> CheckReport {
    let mut t = Tally::new("a_closed_vs_quadrature", 1.0);
    let (mu_max, r_max, alphas): (u32, u32, &[f64]) = match grid {
        Grid::Small => (2, 2, &[0.5, 2.0, 10.0]),
        Grid::Full => (4, 3, &A_ALPHAS),
    };
    for mu in 0..=mu_max {
        for s in sigma_range(mu, 2) {
            for r1 in 0..=r_max {
                for r2 in 0..=r_max {
                    for &a1 in alphas {
                        for &a2 in alphas {
                            let args = AArgs::new(mu, r1, r2, a1, a2, s);
                            match (a_closed(&args), a_quadrature(&args, 1e-10)) {
                                (Ok(c), Ok(q)) => {
                                    let allowed = (1e-8 * q.value.abs()).max(1e-12);
                                    t.err((c - q.value).abs() / allowed, || format!("{args:?}: closed {c} quadrature {}", q.value));
                                }
                                (Err(e), _) | (_, Err(e)) => t.error(e),
                            }
                        }
                    }
                }
            }
        }
    }
    t.finish()
}

/// `A(r1 + 1) = -dA(r1)/d alpha1` by central differences.
pub fn check_a_derivative(grid: Grid) -> CheckReport {
    let mut t = Tally::new("a_derivative", 1e-6);
    let (mu_max, alphas): (u32, &[f64]) = match grid {
        Grid::Small => (2, &[0.7, 3.0]),
        Grid::Full => (4, &[0.5, 1.0, 2.0, 5.0, 10.0]),
    };
    for mu in 0..=mu_max {
        for s in sigma_range(mu, 2) {
            for r1 in 0..=2 {
                for r2 in 0..=2 {
                    for &a1 in alphas {
                        for &a2 in alphas {
                            let h = 1e-4 * a1;
                            let at = |a1: f64, r1: u32| a_closed(&AArgs::new(mu, r1, r2, a1, a2, s));
                            match (at(a1, r1 + 1), at(a1 + h, r1), at(a1 - h, r1)) {
                                (Ok(next), Ok(up), Ok(down)) => {
                                    let d = -(up - down) / (2.0 * h);
                                    t.err(rel(next, d), || format!("A({mu},{r1},{r2},{a1},{a2},{s}): {next} vs {d}"));
                                }
                                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error(e),
                            }
                        }
                    }
                }
            }
        }
    }
    t.finish()
}

/// A random valid request: `n <= n_max`, `l <= l_max`, `sum m = 0`.
pub fn random_request(rng: &mut impl Rng, class: IntegralClass, n_max: u32, l_max: u32) -> IntegralRequest {
    loop {
        let mut orbs = [SlaterOrbital::new(1, 0, 0, 1.0); 4];
        for o in orbs.iter_mut() {
            let n = rng.gen_range(1..=n_max);
            let l = rng.gen_range(0..=l_max.min(n - 1));
            let m = rng.gen_range(-(l as i32)..=l as i32);
            *o = SlaterOrbital::new(n, l, m, rng.gen_range(0.5..2.0));
        }
        let m4 = -(orbs[0].m + orbs[1].m + orbs[2].m);
        if m4.unsigned_abs() > orbs[3].l {
            continue;
        }
        orbs[3].m = m4;
        return IntegralRequest::new(class, orbs, rng.gen_range(0.5..5.0));
    }
}

/// The three W expressions on random requests.
pub fn check_w_forms(grid: Grid) -> CheckReport {
    let mut t = Tally::new("w_forms", 1e-12);
    let count = match grid {
        Grid::Small => 1000,
        Grid::Full => 10_000,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5744);
    for i in 0..count {
        let class = IntegralClass::ALL[i % 3];
        let req = random_request(&mut rng, class, 5, 4);
        let w = w_forms(&req);
        t.err(rel(w[0], w[1]).max(rel(w[0], w[2])), || format!("{req:?}: {w:?}"));
    }
    t.finish()
}

fn one_s(delta: f64) -> SlaterOrbital {
    SlaterOrbital::new(1, 0, 0, delta)
}

/// Four 1s orbitals: `(z1, z2)` on electron 1's pair, repeated on electron 2.
pub fn request_1s(class: IntegralClass, z1: f64, z2: f64, r: f64) -> IntegralRequest {
    IntegralRequest::new(class, [one_s(z1), one_s(z1), one_s(z2), one_s(z2)], r)
}

const ZETAS: [f64; 3] = [0.8, 1.0, 1.5];
const DISTANCES: [f64; 4] = [0.5, 1.4, 3.0, 10.0];

fn engine_value(req: &IntegralRequest, cfg: &EvalConfig) -> Result<f64> {
    evaluate(req, cfg).map(|r| r.value)
}

/// Engine against the classical 1s Coulomb and exchange expressions, plus
/// the far and united-atom limits.
pub fn check_oracle_1s(grid: Grid, cfg: &EvalConfig) -> CheckReport {
    let mut t = Tally::new("engine_vs_1s_oracles", 1.0);
    let (zetas, dists): (&[f64], &[f64]) = match grid {
        Grid::Small => (&[0.8, 1.5], &[0.5, 1.4, 10.0]),
        Grid::Full => (&ZETAS, &DISTANCES),
    };
    let push = |t: &mut Tally, got: Result<f64>, want: Result<f64>, tol: f64, what: String| match (got, want) {
        (Ok(g), Ok(w)) => t.err(rel(g, w) / tol, || format!("{what}: engine {g} oracle {w}")),
        (Err(e), _) | (_, Err(e)) => t.error(e),
    };
    for &z in zetas {
        for &r in dists {
            let coul = IntegralRequest::new(IntegralClass::Coulomb, [one_s(z); 4], r);
            push(&mut t, engine_value(&coul, cfg), Ok(coulomb_1s_closed(z, r)), 1e-10, format!("coulomb z={z} R={r}"));
            let exch = request_1s(IntegralClass::Exchange, z, z, r);
            push(&mut t, engine_value(&exch, cfg), exchange_1s_oracle(z, z, r, 1e-10), 1e-7, format!("exchange z={z} R={r}"));
        }
    }
    let unequal: &[(f64, f64, f64)] = match grid {
        Grid::Small => &[(1.2, 0.8, 2.0)],
        Grid::Full => &[(1.2, 0.8, 2.0), (1.5, 0.8, 1.4), (0.8, 1.5, 3.0), (1.0, 2.0, 0.5), (2.0, 1.0, 10.0)],
    };
    for &(z1, z2, r) in unequal {
        let exch = request_1s(IntegralClass::Exchange, z1, z2, r);
        push(&mut t, engine_value(&exch, cfg), exchange_1s_oracle(z1, z2, r, 1e-10), 1e-7, format!("exchange z={z1},{z2} R={r}"));
    }
    let far = IntegralRequest::new(IntegralClass::Coulomb, [one_s(1.0); 4], 50.0);
    match engine_value(&far, cfg) {
        Ok(v) => t.err((50.0 * v - 1.0).abs() / 1e-6, || format!("R J at R=50 is {}", 50.0 * v)),
        Err(e) => t.error(e),
    }
    let near = IntegralRequest::new(IntegralClass::Coulomb, [one_s(1.0); 4], 1e-4);
    match engine_value(&near, cfg) {
        Ok(v) => t.err((v - 0.625).abs() / 1e-3, || format!("J at R=1e-4 is {v}")),
        Err(e) => t.error(e),
    }
    t.note = if t.note.is_empty() { "errors in units of each tolerance".into() } else { t.note };
    t.finish()
}

/// Sign picked up when the molecule is reflected through its midplane.
fn mirror_parity(req: &IntegralRequest) -> f64 {
    let p: u32 = req.orbitals.iter().map(|o| o.l - o.abs_m()).sum();
    if p % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Electron 1 takes electron 2's orbitals and vice versa. For Coulomb this
/// also reflects the molecule so that each pair stays on its center.
pub fn electron_swap(req: &IntegralRequest) -> Option<(IntegralRequest, f64)> {
    let o = req.orbitals;
    let swapped = IntegralRequest::new(req.class, [o[1], o[0], o[3], o[2]], req.distance);
    match req.class {
        IntegralClass::Exchange => Some((swapped, 1.0)),
        IntegralClass::Coulomb => Some((swapped, mirror_parity(req))),
        IntegralClass::Hybrid => None,
    }
}

/// Exchange orbitals between the centers (slots 1 <-> 3 and 2 <-> 4).
pub fn center_swap(req: &IntegralRequest) -> Option<(IntegralRequest, f64)> {
    let o = req.orbitals;
    match req.class {
        IntegralClass::Exchange => {
            Some((IntegralRequest::new(req.class, [o[2], o[3], o[0], o[1]], req.distance), mirror_parity(req)))
        }
        _ => None,
    }
}

pub fn negate_m(req: &IntegralRequest) -> IntegralRequest {
    let mut out = *req;
    for o in out.orbitals.iter_mut() {
        o.m = -o.m;
    }
    out
}

/// Symmetry invariances on random requests with `l <= 2`, exact selection
/// zeros and positivity of m = 0 Coulomb self-densities.
pub fn check_symmetries(grid: Grid, cfg: &EvalConfig) -> CheckReport {
    let mut t = Tally::new("engine_symmetries", 1e-12);
    let per_class = match grid {
        Grid::Small => 3,
        Grid::Full => 12,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x53594d);
    for class in IntegralClass::ALL {
        for _ in 0..per_class {
            let req = random_request(&mut rng, class, 3, 2);
            let base = match engine_value(&req, cfg) {
                Ok(v) => v,
                Err(e) => {
                    t.error(e);
                    continue;
                }
            };
            let mut variants = vec![("m-negation", negate_m(&req), 1.0)];
            if let Some((r, f)) = electron_swap(&req) {
                variants.push(("electron swap", r, f));
            }
            if let Some((r, f)) = center_swap(&req) {
                variants.push(("center swap", r, f));
            }
            for (what, v, f) in variants {
                match engine_value(&v, cfg) {
                    Ok(x) => t.err(rel(base, f * x), || format!("{what} of {req:?}: {base} vs {}", f * x)),
                    Err(e) => t.error(e),
                }
            }
        }
    }
    for class in IntegralClass::ALL {
        let mut req = random_request(&mut rng, class, 3, 2);
        while req.orbitals[3].l == 0 {
            req = random_request(&mut rng, class, 3, 2);
        }
        req.orbitals[3].m += if req.orbitals[3].m < req.orbitals[3].l as i32 { 1 } else { -1 };
        match evaluate(&req, cfg) {
            Ok(r) => t.ok(r.value == 0.0 && r.zero_by_selection, || format!("selection zero of {req:?} gave {}", r.value)),
            Err(e) => t.error(e),
        }
    }
    let positive = match grid {
        Grid::Small => 3,
        Grid::Full => 10,
    };
    for _ in 0..positive {
        let a = random_request(&mut rng, IntegralClass::Coulomb, 3, 2).orbitals;
        let (mut p, mut q) = (a[0], a[1]);
        p.m = 0;
        q.m = 0;
        let req = IntegralRequest::new(IntegralClass::Coulomb, [p, q, p, q], rng.gen_range(0.5..5.0));
        match engine_value(&req, cfg) {
            Ok(v) => t.ok(v > 0.0, || format!("self-density Coulomb {req:?} = {v}")),
            Err(e) => t.error(e),
        }
    }
    t.finish()
}

/// `I(c delta, R / c) = c I(delta, R)` on the 1s grid.
pub fn check_scaling(grid: Grid, cfg: &EvalConfig) -> CheckReport {
    let mut t = Tally::new("scaling_law", 1e-11);
    let dists: &[f64] = match grid {
        Grid::Small => &[0.5, 3.0],
        Grid::Full => &DISTANCES,
    };
    for class in [IntegralClass::Coulomb, IntegralClass::Exchange, IntegralClass::Hybrid] {
        for &z in &ZETAS {
            for &r in dists {
                let req = request_1s(class, z, 1.3 * z, r);
                for c in [0.5, 2.0] {
                    let mut scaled = req;
                    scaled.distance = r / c;
                    for o in scaled.orbitals.iter_mut() {
                        o.delta *= c;
                    }
                    match (engine_value(&req, cfg), engine_value(&scaled, cfg)) {
                        (Ok(a), Ok(b)) => t.err(rel(c * a, b), || format!("{class} z={z} R={r} c={c}: {} vs {b}", c * a)),
                        (Err(e), _) | (_, Err(e)) => t.error(e),
                    }
                }
            }
        }
    }
    t.finish()
}

/// Grouped term table against tuple-by-tuple summation, and the four-1s
/// table entries.
pub fn check_coefficients(grid: Grid, rule: PhaseRule) -> CheckReport {
    let mut t = Tally::new("coefficient_table", 1e-13);
    let count = match grid {
        Grid::Small => 40,
        Grid::Full => 300,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x434f);
    for i in 0..count {
        let req = random_request(&mut rng, IntegralClass::ALL[i % 3], 4, 3);
        let table = match generate_terms_with(&req, rule) {
            Ok(t) => t,
            Err(e) => {
                t.error(e);
                continue;
            }
        };
        for _ in 0..3 {
            let (x, y, u, v) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
            let grouped = table.polynomial(x, y, u, v);
            match ungrouped_polynomial(&req, x, y, u, v) {
                Ok(direct) => {
                    // compare on the scale of the term magnitudes
                    let scale: f64 = table
                        .terms
                        .iter()
                        .map(|c| {
                            let k = c.key;
                            (c.coeff * x.powi(k.g1 as i32) * y.powi(k.g2 as i32) * u.powi(k.r1 as i32) * v.powi(k.r2 as i32)).abs()
                        })
                        .sum::<f64>()
                        .max(direct.abs())
                        .max(1e-300);
                    t.err((grouped - direct).abs() / scale, || format!("{req:?}: grouped {grouped} direct {direct}"));
                }
                Err(e) => t.error(e),
            }
        }
    }
    let expect = [((0, 0, 2, 2), 0.125), ((0, 2, 2, 0), -0.125), ((2, 0, 0, 2), -0.125), ((2, 2, 0, 0), 0.125)];
    for class in [IntegralClass::Exchange, IntegralClass::Coulomb] {
        let req = IntegralRequest::new(class, [one_s(1.0); 4], 1.0);
        match generate_terms_with(&req, rule) {
            Ok(table) => {
                let got: Vec<(TermKey, f64)> = table.terms.iter().map(|c| (c.key, c.coeff)).collect();
                let want: Vec<(TermKey, f64)> =
                    expect.iter().map(|&((g1, g2, r1, r2), c)| (TermKey { g1, g2, r1, r2 }, c)).collect();
                t.ok(got == want, || format!("four-1s {class} table {got:?}"));
            }
            Err(e) => t.error(e),
        }
    }
    t.finish()
}

/// Requests with p and d orbitals on both centers, compared with direct
/// summation of the Neumann series over sampled orbital products.
pub fn neumann_cases(grid: Grid) -> Vec<IntegralRequest> {
    let o = SlaterOrbital::new;
    let mut v = vec![
        IntegralRequest::new(IntegralClass::Exchange, [o(2, 1, 0, 1.0), o(1, 0, 0, 1.2), o(2, 0, 0, 0.9), o(2, 1, 0, 1.1)], 1.4),
        IntegralRequest::new(IntegralClass::Coulomb, [o(2, 1, 1, 1.0), o(2, 1, -1, 1.2), o(2, 1, -1, 0.9), o(2, 1, 1, 1.1)], 2.0),
        IntegralRequest::new(IntegralClass::Hybrid, [o(3, 2, 1, 1.0), o(2, 1, -1, 1.2), o(2, 1, 0, 0.9), o(3, 2, 0, 1.1)], 1.6),
    ];
    if grid == Grid::Full {
        v.extend([
            IntegralRequest::new(IntegralClass::Exchange, [o(2, 1, 1, 1.0), o(2, 1, 1, 1.2), o(2, 1, -1, 0.9), o(2, 1, -1, 1.1)], 2.0),
            IntegralRequest::new(IntegralClass::Hybrid, [o(2, 1, 1, 1.0), o(1, 0, 0, 1.2), o(2, 1, -1, 0.9), o(2, 0, 0, 1.1)], 1.6),
            IntegralRequest::new(IntegralClass::Coulomb, [o(3, 2, 1, 1.5), o(2, 1, -1, 1.3), o(3, 1, -1, 1.2), o(2, 1, 1, 1.1)], 10.0),
            IntegralRequest::new(IntegralClass::Exchange, [o(3, 2, 2, 1.1), o(3, 1, 0, 0.9), o(3, 2, -1, 1.3), o(2, 1, -1, 1.0)], 3.0),
        ]);
    }
    v
}

pub fn check_engine_neumann(grid: Grid, cfg: &EvalConfig) -> CheckReport {
    let mut t = Tally::new("engine_vs_neumann", 1e-9);
    for req in neumann_cases(grid) {
        match (engine_value(&req, cfg), neumann_integral(&req, 1e-12, 80)) {
            (Ok(a), Ok(b)) => t.err(rel(a, b), || format!("{req:?}: engine {a} oracle {b}")),
            (Err(e), _) | (_, Err(e)) => t.error(e),
        }
    }
    t.finish()
}

/// Bit-identical batch results for one and several workers.
pub fn check_determinism(grid: Grid, cfg: &EvalConfig) -> CheckReport {
    let mut t = Tally::new("batch_determinism", 0.0);
    let count = match grid {
        Grid::Small => 6,
        Grid::Full => 30,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x444554);
    let reqs: Vec<IntegralRequest> = (0..count).map(|i| random_request(&mut rng, IntegralClass::ALL[i % 3], 3, 2)).collect();
    let runs: Vec<Result<Vec<Option<u64>>>> = [1, 3, 1]
        .iter()
        .map(|&w| {
            evaluate_batch_with_workers(&reqs, cfg, w).map(|v| v.iter().map(|r| r.as_ref().ok().map(|x| x.value.to_bits())).collect())
        })
        .collect();
    match (&runs[0], &runs[1], &runs[2]) {
        (Ok(a), Ok(b), Ok(c)) => {
            for i in 0..reqs.len() {
                t.ok(a[i].is_some() && a[i] == b[i] && a[i] == c[i], || format!("case {i}: {:?} {:?} {:?}", a[i], b[i], c[i]));
            }
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error(e.clone()),
    }
    t.finish()
}

/// Every suite in a fixed order. `rule` feeds the coefficient generator, so
/// a wrong phase choice can be shown to fail the oracle checks.
pub fn run_all(grid: Grid, rule: PhaseRule) -> Vec<CheckReport> {
    let cfg = EvalConfig { phase_rule: rule, ..EvalConfig::default() };
    vec![
        check_w_forms(grid),
        check_coefficients(grid, rule),
        check_b_cross_path(grid),
        check_b_parity(grid),
        check_a_quadrature(grid),
        check_a_derivative(grid),
        check_oracle_1s(grid, &cfg),
        check_engine_neumann(grid, &cfg),
        check_symmetries(grid, &cfg),
        check_scaling(grid, &cfg),
        check_determinism(grid, &cfg),
    ]
}
