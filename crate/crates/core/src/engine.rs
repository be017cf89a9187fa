//! Assembly of the full integral: `W * sum_k C_k sum_mu (2mu+1) B B A`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::afunc::AEvaluator;
use crate::bfunc::{b_alternating, b_series, b_series_ball, DEFAULT_SERIES_TOL};
use crate::coeffs::{generate_terms_with, PhaseRule, TermTable};
use crate::error::{Error, Result};
use crate::model::{scale_parameters, selection_check, w_forms, IntegralRequest, ScaledParams, Selection};
use crate::real::{Ball, Real};
use crate::sum::KahanSum;

pub const DEFAULT_MU_TOL: f64 = 1e-14;
pub const DEFAULT_MU_CAP: u32 = 120;
/// Consecutive sub-tolerance shells required before an open mu-sum stops.
pub const QUIET_SHELLS: u32 = 4;
/// Relative accuracy demanded of the assembled sum, in bits.
pub const RESULT_BITS: u32 = 56;
const START_BITS: u32 = 64;
const MAX_BITS: u32 = 640;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub mu_tol: f64,
    pub mu_cap: u32,
    pub series_tol: f64,
    /// Cross-check W forms and every B value against the alternating form.
    pub oracle_mode: bool,
    pub phase_rule: PhaseRule,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mu_tol: DEFAULT_MU_TOL,
            mu_cap: DEFAULT_MU_CAP,
            series_tol: DEFAULT_SERIES_TOL,
            oracle_mode: false,
            phase_rule: PhaseRule::Once,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.mu_tol) {
            return Err(Error::InvalidConfig(format!("mu_tol must be positive, got {}", self.mu_tol)));
        }
        if !ok(self.series_tol) {
            return Err(Error::InvalidConfig(format!("series_tol must be positive, got {}", self.series_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub mu_used: u32,
    pub terms_evaluated: usize,
    pub truncation_estimate: f64,
    pub zero_by_selection: bool,
}

impl IntegralResult {
    fn zero() -> Self {
        IntegralResult { value: 0.0, mu_used: 0, terms_evaluated: 0, truncation_estimate: 0.0, zero_by_selection: true }
    }
}

/// Values of `mu` that can contribute for one term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MuPlan {
    pub start: u32,
    pub end: Option<u32>,
    /// Required parity of `mu`.
    pub parity: Option<u32>,
    pub empty: bool,
}

impl MuPlan {
    pub fn contains(&self, mu: u32) -> bool {
        !self.empty
            && mu >= self.start
            && self.end.map_or(true, |e| mu <= e)
            && self.parity.map_or(true, |p| mu % 2 == p)
    }

    pub fn values(&self) -> Option<Vec<u32>> {
        let end = self.end?;
        Some((self.start..=end).filter(|&m| self.contains(m)).collect())
    }
}

/// A vanishing beta restricts mu to `mu + |sigma| + g` even and `mu <= g + |sigma|`.
pub fn mu_limits(beta1: f64, beta2: f64, g1: u32, g2: u32, abs_sigma: u32) -> MuPlan {
    let mut plan = MuPlan { start: abs_sigma, end: None, parity: None, empty: false };
    for (beta, g) in [(beta1, g1), (beta2, g2)] {
        if beta != 0.0 {
            continue;
        }
        let par = (abs_sigma + g) % 2;
        if plan.parity.is_some_and(|p| p != par) {
            plan.empty = true;
        }
        plan.parity = Some(par);
        let e = g + abs_sigma;
        plan.end = Some(plan.end.map_or(e, |x: u32| x.min(e)));
    }
    if plan.end.is_some_and(|e| e < plan.start) {
        plan.empty = true;
    }
    plan
}

fn b_value(mu: u32, g: u32, beta: &Ball, s: u32, cfg: &EvalConfig) -> Result<Ball> {
    let v = b_series_ball(mu, g, beta, s)?;
    let bf = beta.to_f64();
    if cfg.oracle_mode && bf != 0.0 {
        let fast = b_series(mu, g, bf, s, cfg.series_tol)?;
        let alt = b_alternating(mu, g, bf, s)?;
        if (alt - fast).abs() > 1e-9 * alt.abs().max(1e-300) || (alt - v.to_f64()).abs() > 1e-9 * alt.abs().max(1e-300) {
            return Err(Error::Inconsistent(format!("B({mu},{g},{bf},{s}): series {fast} vs alternating {alt}")));
        }
    }
    Ok(v)
}

pub fn evaluate(req: &IntegralRequest, cfg: &EvalConfig) -> Result<IntegralResult> {
    req.validate()?;
    cfg.validate()?;
    if selection_check(req.m_values()) == Selection::ZeroBySelection {
        return Ok(IntegralResult::zero());
    }
    let p = scale_parameters(req);
    if cfg.oracle_mode {
        let w = w_forms(req);
        if (w[0] - w[1]).abs() > 1e-12 * w[0] || (w[0] - w[2]).abs() > 1e-12 * w[0] {
            return Err(Error::Inconsistent(format!("W forms disagree: {w:?}")));
        }
    }
    let table = generate_terms_with(req, cfg.phase_rule)?;
    let s = p.sigma.unsigned_abs();
    if cfg.mu_cap < s {
        return Err(Error::InvalidConfig(format!("mu_cap {} below |sigma| = {s}", cfg.mu_cap)));
    }
    let plans: Vec<MuPlan> =
        table.terms.iter().map(|t| mu_limits(p.beta1, p.beta2, t.key.g1, t.key.g2, s)).collect();
    let last = if plans.iter().all(|pl| pl.end.is_some() || pl.empty) {
        Some(plans.iter().filter(|pl| !pl.empty).filter_map(|pl| pl.end).max().unwrap_or(s))
    } else {
        None
    };

    let mut bits = START_BITS;
    loop {
        let run = run_shells(&table, &plans, last, &p, s, cfg, bits)?;
        let lost = run.total.rel_radius_log2();
        if lost <= -(RESULT_BITS as f64) || bits >= MAX_BITS {
            let scale = p.w * table.prefactor;
            let value = scale * run.total.to_f64();
            if !value.is_finite() {
                return Err(Error::Inconsistent(format!("non-finite integral value {value}")));
            }
            return Ok(IntegralResult {
                value,
                mu_used: run.mu_used,
                terms_evaluated: run.terms_evaluated,
                truncation_estimate: (scale * run.last_shell).abs(),
                zero_by_selection: false,
            });
        }
        let extra = if lost.is_finite() { (lost + RESULT_BITS as f64).ceil() as u32 + 8 } else { bits };
        bits = (bits + extra).min(MAX_BITS);
    }
}

struct ShellRun {
    total: Ball,
    mu_used: u32,
    terms_evaluated: usize,
    last_shell: f64,
}

/// One pass over the mu shells with every factor carried as a ball whose
/// relative radius is at most `2^-bits`.
fn run_shells(
    table: &TermTable,
    plans: &[MuPlan],
    last: Option<u32>,
    p: &ScaledParams,
    s: u32,
    cfg: &EvalConfig,
    bits: u32,
) -> Result<ShellRun> {
    let prec = bits + 64;
    let mut a_eval = AEvaluator::new(p.alpha1, p.alpha2).with_target_bits(bits);
    let weights: Vec<Ball> = table.terms.iter().map(|t| Ball::from_int(&t.weight, prec)).collect();
    let (beta1, beta2) = (Ball::from_f64(p.beta1, prec), Ball::from_f64(p.beta2, prec));
    let mut total = Ball::zero(prec);
    let mut total_f = KahanSum::new();
    let mut quiet = 0;
    let mut terms_evaluated = 0;
    let mut last_shell = 0.0;
    let mut mu = s;
    // shells before every term has started cannot signal convergence
    let settled = plans.iter().map(|p| p.start).max().unwrap_or(s);
    loop {
        if mu > cfg.mu_cap {
            let scale = p.w * table.prefactor;
            return Err(Error::NotConverged {
                mu_cap: cfg.mu_cap,
                last_shell: scale * last_shell,
                partial: scale * total.to_f64(),
            });
        }
        let mut b1: HashMap<u32, Ball> = HashMap::new();
        let mut b2: HashMap<u32, Ball> = HashMap::new();
        let mut av: HashMap<(u32, u32), Ball> = HashMap::new();
        let mut shell = Ball::zero(prec);
        for ((t, plan), wt) in table.terms.iter().zip(plans).zip(&weights) {
            if !plan.contains(mu) {
                continue;
            }
            let k = t.key;
            let x = match b1.get(&k.g1) {
                Some(v) => v.clone(),
                None => {
                    let v = b_value(mu, k.g1, &beta1, s, cfg)?;
                    b1.insert(k.g1, v.clone());
                    v
                }
            };
            if x.mid().is_zero() {
                continue;
            }
            let y = match b2.get(&k.g2) {
                Some(v) => v.clone(),
                None => {
                    let v = b_value(mu, k.g2, &beta2, s, cfg)?;
                    b2.insert(k.g2, v.clone());
                    v
                }
            };
            if y.mid().is_zero() {
                continue;
            }
            let a = av.entry((k.r1, k.r2)).or_insert_with(|| a_eval.eval_ball(mu, k.r1, k.r2, s)).clone();
            shell = shell + wt.clone() * x * y * a;
            terms_evaluated += 1;
        }
        let sh = Ball::from_int(&rug::Integer::from(2 * mu + 1), prec) * shell;
        let shf = sh.to_f64();
        total = total + sh;
        total_f.add(shf);
        last_shell = shf;
        match last {
            Some(end) if mu >= end => break,
            Some(_) => {}
            None if mu < settled => {}
            None => {
                if shf.abs() <= cfg.mu_tol * total_f.value().abs() {
                    quiet += 1;
                    if quiet >= QUIET_SHELLS {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        mu += 1;
    }
    Ok(ShellRun { total, mu_used: mu, terms_evaluated, last_shell })
}

/// Order-preserving parallel map of [`evaluate`] on the global pool.
pub fn evaluate_batch(reqs: &[IntegralRequest], cfg: &EvalConfig) -> Vec<Result<IntegralResult>> {
    reqs.par_iter().map(|r| evaluate(r, cfg)).collect()
}

/// [`evaluate_batch`] on a dedicated pool of `workers` threads.
pub fn evaluate_batch_with_workers(
    reqs: &[IntegralRequest],
    cfg: &EvalConfig,
    workers: usize,
) -> Result<Vec<Result<IntegralResult>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| evaluate_batch(reqs, cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{IntegralClass, SlaterOrbital};
    use crate::oracle::coulomb_1s_closed;

    fn s1(d: f64) -> SlaterOrbital {
        SlaterOrbital::new(1, 0, 0, d)
    }

    #[test]
    fn plans() {
        assert_eq!(mu_limits(0.0, 1.0, 2, 0, 0).values(), Some(vec![0, 2]));
        assert_eq!(mu_limits(0.0, 0.0, 2, 4, 0).values(), Some(vec![0, 2]));
        let open = mu_limits(0.5, -1.0, 3, 1, 2);
        assert_eq!((open.start, open.end, open.parity), (2, None, None));
        assert!(mu_limits(0.0, 0.0, 1, 2, 0).empty);
    }

    #[test]
    fn selection_zero() {
        let mut o = [s1(1.0); 4];
        o[0] = SlaterOrbital::new(2, 1, 1, 1.0);
        let r = evaluate(&IntegralRequest::new(IntegralClass::Exchange, o, 1.0), &EvalConfig::default()).unwrap();
        assert!(r.zero_by_selection && r.value == 0.0);
    }

    #[test]
    fn coulomb_1s() {
        let req = IntegralRequest::new(IntegralClass::Coulomb, [s1(1.0); 4], 1.4);
        let r = evaluate(&req, &EvalConfig::default()).unwrap();
        let c = coulomb_1s_closed(1.0, 1.4);
        assert!((r.value - c).abs() < 1e-12 * c, "{r:?} vs {c}");
    }

    #[test]
    fn batch_keeps_order() {
        let good = IntegralRequest::new(IntegralClass::Coulomb, [s1(1.0); 4], 1.4);
        let mut o = [s1(1.0); 4];
        o[1] = SlaterOrbital::new(2, 1, 1, 1.0);
        let zero = IntegralRequest::new(IntegralClass::Coulomb, o, 1.4);
        let out = evaluate_batch(&[good, zero, good], &EvalConfig::default());
        assert_eq!(out.len(), 3);
        assert!(out[1].as_ref().unwrap().zero_by_selection);
        assert_eq!(out[0], out[2]);
        assert!(evaluate_batch(&[], &EvalConfig::default()).is_empty());
    }
}
