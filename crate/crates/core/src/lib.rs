//! State-vector simulation and analysis of single quantum many-body scars on
//! periodically driven transmon chains.
//!
//! The library builds scar parent Hamiltonians out of cross-resonance
//! two- and three-site blocks, Trotterizes them into a three-substep Floquet
//! cycle, and implements the detection protocols (quench stability, controlled
//! coefficient noise, Trotter-resolution scans) plus full Floquet-mode
//! spectroscopy at desk scale (L <= 12).
//!
//! Conventions used throughout:
//!
//! * chain sites are numbered 1..=L, periodic boundary conditions;
//! * basis index bit (L - s) holds site s, so site 1 is the most significant
//!   bit; bit value 0 is the sigma^z = +1 state |up>;
//! * all internal angular frequencies are rad/ns; configuration values are
//!   plain MHz / GHz and converted on entry (x MHz -> 2*pi*x*1e-3 rad/ns);
//! * entropies are in nats.

pub mod cr_engine;
pub mod experiments;
pub mod floquet;
pub mod scar_models;
pub mod seed;
pub mod spin_ops;

use thiserror::Error;

/// Errors surfaced by construction, validation, and dense numerics.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or parameter combination failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A dense operation was requested above the guarded size.
    #[error("dense operation limited to L <= {max} sites, got L = {l}")]
    TooLargeForDense { l: usize, max: usize },
    /// An effective-Hamiltonian denominator sits too close to resonance.
    #[error(
        "near-resonant denominator {name} = {value_mhz:.6} MHz (|value| must exceed {min_mhz} MHz)"
    )]
    NearResonance {
        name: &'static str,
        value_mhz: f64,
        min_mhz: f64,
    },
    /// The dimensionless-anharmonicity quadratic has no positive root.
    #[error("no positive root for the anharmonicity measure: roots are {0:.6} and {1:.6} (sign-convention violation)")]
    NoPositiveRoot(f64, f64),
    /// An eigendecomposition did not converge or failed its residual check.
    #[error("eigendecomposition failure: {0}")]
    Eigen(String),
    /// Vector/matrix dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Unit conversions. Internally every energy/frequency is rad/ns.
pub mod units {
    use std::f64::consts::TAU;

    /// Plain MHz to rad/ns.
    pub fn mhz(v: f64) -> f64 {
        v * TAU * 1e-3
    }

    /// Plain GHz to rad/ns.
    pub fn ghz(v: f64) -> f64 {
        v * TAU
    }

    /// rad/ns back to plain MHz.
    pub fn to_mhz(v: f64) -> f64 {
        v / (TAU * 1e-3)
    }
}
