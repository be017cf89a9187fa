//! Record types and command bodies behind the `stoint` binary.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use stoint::coeffs::PhaseRule;
use stoint::verify::{run_all, CheckReport, Grid};
use stoint::{evaluate, Error, EvalConfig, IntegralClass, IntegralRequest, IntegralResult, SlaterOrbital};

pub const ENV_MU_TOL: &str = "STOINT_MU_TOL";
pub const ENV_SERIES_TOL: &str = "STOINT_SERIES_TOL";
pub const ENV_MU_CAP: &str = "STOINT_MU_CAP";

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {detail}")]
    Parse { flag: String, detail: String },
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn parse(flag: impl Into<String>, detail: impl Into<String>) -> Self {
        CliError::Parse { flag: flag.into(), detail: detail.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => EXIT_PARSE,
            CliError::Engine(e) => engine_exit_code(e),
        }
    }
}

pub fn engine_exit_code(e: &Error) -> i32 {
    match e {
        Error::SeriesNotConverged { .. } | Error::QuadratureNotConverged { .. } | Error::NotConverged { .. } => {
            EXIT_CONVERGENCE
        }
        Error::Inconsistent(_) => 1,
        _ => EXIT_PARSE,
    }
}

/// `"n l m delta"`, whitespace separated.
pub fn parse_orbital(flag: &str, text: &str) -> Result<SlaterOrbital, CliError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(CliError::parse(flag, format!("expected \"n l m delta\", got {text:?}")));
    }
    let bad = |what: &str| CliError::parse(flag, format!("cannot read {what} from {text:?}"));
    let n = parts[0].parse().map_err(|_| bad("n"))?;
    let l = parts[1].parse().map_err(|_| bad("l"))?;
    let m = parts[2].parse().map_err(|_| bad("m"))?;
    let delta = parts[3].parse().map_err(|_| bad("delta"))?;
    Ok(SlaterOrbital::new(n, l, m, delta))
}

pub fn parse_positive(flag: &str, text: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| CliError::parse(flag, format!("not a number: {text:?}")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::parse(flag, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

/// Defaults, then the tolerance environment variables.
pub fn config_from_env() -> Result<EvalConfig, CliError> {
    let mut cfg = EvalConfig::default();
    if let Ok(v) = std::env::var(ENV_MU_TOL) {
        cfg.mu_tol = parse_positive(ENV_MU_TOL, &v)?;
    }
    if let Ok(v) = std::env::var(ENV_SERIES_TOL) {
        cfg.series_tol = parse_positive(ENV_SERIES_TOL, &v)?;
    }
    if let Ok(v) = std::env::var(ENV_MU_CAP) {
        cfg.mu_cap = v.trim().parse().map_err(|_| CliError::parse(ENV_MU_CAP, format!("not an integer: {v:?}")))?;
    }
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_cap: Option<u32>,
}

impl Overrides {
    pub fn apply(&self, base: &EvalConfig) -> EvalConfig {
        EvalConfig {
            mu_tol: self.mu_tol.unwrap_or(base.mu_tol),
            series_tol: self.series_tol.unwrap_or(base.series_tol),
            mu_cap: self.mu_cap.unwrap_or(base.mu_cap),
            ..*base
        }
    }
}

/// One batch input line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub id: String,
    pub class: String,
    pub orb1: (u32, u32, i32, f64),
    pub orb2: (u32, u32, i32, f64),
    pub orb3: (u32, u32, i32, f64),
    pub orb4: (u32, u32, i32, f64),
    #[serde(rename = "R")]
    pub distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<Overrides>,
}

impl CaseRecord {
    pub fn from_request(id: impl Into<String>, req: &IntegralRequest) -> Self {
        let o = |i: usize| {
            let x = req.orbitals[i];
            (x.n, x.l, x.m, x.delta)
        };
        CaseRecord {
            id: id.into(),
            class: req.class.name().to_string(),
            orb1: o(0),
            orb2: o(1),
            orb3: o(2),
            orb4: o(3),
            distance: req.distance,
            overrides: None,
        }
    }

    pub fn to_request(&self) -> Result<IntegralRequest, CliError> {
        let class = IntegralClass::from_str(&self.class).map_err(|e| CliError::parse("class", e.to_string()))?;
        let o = |t: (u32, u32, i32, f64)| SlaterOrbital::new(t.0, t.1, t.2, t.3);
        let req = IntegralRequest::new(class, [o(self.orb1), o(self.orb2), o(self.orb3), o(self.orb4)], self.distance);
        req.validate()?;
        Ok(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ZeroBySelection,
    Error,
}

/// One batch output line. Key order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultRecord {
    pub id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, serialize_with = "sci", deserialize_with = "opt_f64", skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_used: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms_evaluated: Option<usize>,
    #[serde(default, serialize_with = "sci", deserialize_with = "opt_f64", skip_serializing_if = "Option::is_none")]
    pub truncation_estimate: Option<f64>,
    #[serde(default, serialize_with = "sci", deserialize_with = "opt_f64", skip_serializing_if = "Option::is_none")]
    pub elapsed: Option<f64>,
}

/// Seventeen significant digits, enough to recover every double exactly.
pub fn format_sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn sci<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) if x.is_finite() => RawValue::from_string(format_sci(*x)).map_err(S::Error::custom)?.serialize(s),
        _ => s.serialize_none(),
    }
}

fn opt_f64<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let v: Option<serde_json::Number> = Option::deserialize(d)?;
    v.map(|n| n.as_f64().ok_or_else(|| D::Error::custom("number out of range"))).transpose()
}

impl ResultRecord {
    pub fn from_outcome(id: impl Into<String>, outcome: &stoint::Result<IntegralResult>, elapsed: Option<f64>) -> Self {
        let id = id.into();
        match outcome {
            Ok(r) => ResultRecord {
                id,
                status: if r.zero_by_selection { Status::ZeroBySelection } else { Status::Ok },
                message: None,
                value: Some(r.value),
                mu_used: Some(r.mu_used),
                terms_evaluated: Some(r.terms_evaluated),
                truncation_estimate: Some(r.truncation_estimate),
                elapsed,
            },
            Err(e) => ResultRecord::error(id, e.to_string(), elapsed),
        }
    }

    pub fn error(id: impl Into<String>, message: impl Into<String>, elapsed: Option<f64>) -> Self {
        ResultRecord {
            id: id.into(),
            status: Status::Error,
            message: Some(message.into()),
            value: None,
            mu_used: None,
            terms_evaluated: None,
            truncation_estimate: None,
            elapsed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result records always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:<20} {}\n", "id", self.id);
        let status = match self.status {
            Status::Ok => "ok",
            Status::ZeroBySelection => "zero_by_selection",
            Status::Error => "error",
        };
        out += &format!("{:<20} {status}\n", "status");
        if let Some(m) = &self.message {
            out += &format!("{:<20} {m}\n", "message");
        }
        if let Some(v) = self.value {
            out += &format!("{:<20} {}\n", "value", format_sci(v));
        }
        if let Some(v) = self.mu_used {
            out += &format!("{:<20} {v}\n", "mu_used");
        }
        if let Some(v) = self.terms_evaluated {
            out += &format!("{:<20} {v}\n", "terms_evaluated");
        }
        if let Some(v) = self.truncation_estimate {
            out += &format!("{:<20} {}\n", "truncation_estimate", format_sci(v));
        }
        if let Some(v) = self.elapsed {
            out += &format!("{:<20} {v:.6}\n", "elapsed");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BatchSummary {
    pub ok: usize,
    pub zero: usize,
    pub error: usize,
}

impl std::fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ok={} zero_by_selection={} error={}", self.ok, self.zero, self.error)
    }
}

enum Parsed {
    Case(String, IntegralRequest, EvalConfig),
    Bad(ResultRecord),
}

fn parse_line(line: &str, number: usize, base: &EvalConfig) -> Parsed {
    let id_of = || {
        serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("id").and_then(|x| x.as_str()).map(str::to_string))
            .unwrap_or_else(|| format!("line{number}"))
    };
    let rec: CaseRecord = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return Parsed::Bad(ResultRecord::error(id_of(), format!("line {number}: {e}"), None)),
    };
    let cfg = rec.overrides.unwrap_or_default().apply(base);
    match rec.to_request().and_then(|r| cfg.validate().map(|_| r).map_err(CliError::from)) {
        Ok(req) => Parsed::Case(rec.id, req, cfg),
        Err(e) => Parsed::Bad(ResultRecord::error(rec.id, e.to_string(), None)),
    }
}

/// Evaluate every non-comment line of `input`. Records come back in input
/// order whatever the number of workers.
pub fn run_batch(input: &str, base: &EvalConfig, workers: Option<usize>, timing: bool) -> Result<(Vec<ResultRecord>, BatchSummary), CliError> {
    let parsed: Vec<Parsed> = input
        .lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_line(l, i + 1, base))
        .collect();
    let work = || -> Vec<ResultRecord> {
        parsed
            .par_iter()
            .map(|p| match p {
                Parsed::Bad(r) => r.clone(),
                Parsed::Case(id, req, cfg) => {
                    let start = Instant::now();
                    let out = evaluate(req, cfg);
                    let elapsed = timing.then(|| start.elapsed().as_secs_f64());
                    ResultRecord::from_outcome(id.clone(), &out, elapsed)
                }
            })
            .collect()
    };
    let records = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::parse("--workers", e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut summary = BatchSummary::default();
    for r in &records {
        match r.status {
            Status::Ok => summary.ok += 1,
            Status::ZeroBySelection => summary.zero += 1,
            Status::Error => summary.error += 1,
        }
    }
    Ok((records, summary))
}

pub fn verify(grid: Grid, mutate_phase: bool) -> Vec<CheckReport> {
    let rule = if mutate_phase { PhaseRule::Dropped } else { PhaseRule::Once };
    run_all(grid, rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbital_flag_errors_name_the_flag() {
        let e = parse_orbital("--orb2", "1 0 x 1.0").unwrap_err();
        assert!(e.to_string().contains("--orb2"));
        assert_eq!(e.exit_code(), EXIT_PARSE);
        assert!(parse_orbital("--orb1", "1 0 0").is_err());
        assert_eq!(parse_orbital("--orb1", " 2  1 -1 0.5 ").unwrap(), SlaterOrbital::new(2, 1, -1, 0.5));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_sci(0.1), "1.0000000000000001e-1");
        assert_eq!(format_sci(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn overrides_apply() {
        let base = EvalConfig::default();
        let o = Overrides { mu_tol: Some(1e-10), ..Default::default() };
        let c = o.apply(&base);
        assert_eq!(c.mu_tol, 1e-10);
        assert_eq!(c.series_tol, base.series_tol);
    }
}
