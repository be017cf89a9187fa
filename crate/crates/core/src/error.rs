use thiserror::Error;

/// Failures reported by the integral machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("orbital {slot}: invalid quantum numbers n={n}, l={l}, m={m} (need n > l >= |m|)")]
    InvalidQuantumNumbers { slot: usize, n: u32, l: u32, m: i32 },
    #[error("orbital {slot}: screening constant must be positive and finite, got {delta}")]
    InvalidExponent { slot: usize, delta: f64 },
    #[error("internuclear distance R must be positive and finite, got {0}")]
    InvalidDistance(f64),
    #[error("{function}: argument outside domain ({detail})")]
    Domain { function: &'static str, detail: String },
    #[error("B series for mu={mu}, g={g}, sigma={sigma}, beta={beta} did not converge in {terms} terms")]
    SeriesNotConverged { mu: u32, g: u32, sigma: u32, beta: f64, terms: usize },
    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {error:e}, value {value})")]
    QuadratureNotConverged { value: f64, error: f64, tolerance: f64 },
    #[error("mu expansion not converged at mu cap {mu_cap} (last shell {last_shell:e}, partial value {partial})")]
    NotConverged { mu_cap: u32, last_shell: f64, partial: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
