//! Numerics toolkit for explicit constants in constructive parabolic Harnack
//! estimates and fast-diffusion asymptotics.
//!
//! The crate computes every constant appearing in the constructive Harnack /
//! fast-diffusion machinery — from the Moser iteration constant up to the
//! double-exponentially large threshold time `t⋆` — and verifies the
//! associated inequalities at desk scale via a radial fast-diffusion solver,
//! quadrature-based entropy functionals, and an ODE shooting solver for the
//! Gagliardo–Nirenberg constant on the unit disk.
//!
//! Modules:
//! - [`params`]: the `(d, m)` parameter bundle and the Sobolev constant table.
//! - [`lognum`]: overflow-safe sign/level/magnitude "tower" scalars.
//! - [`harnack`]: Moser/Bombieri–Giusti/Harnack constants and the Hölder
//!   exponent machinery.
//! - [`fde_bounds`]: Herrero–Pierre, smoothing, positivity and Aleksandrov
//!   constants with mass thresholds.
//! - [`threshold`]: the end-to-end threshold-time pipeline producing a
//!   provenance-annotated constant report.
//! - [`entropy`]: Barenblatt profiles and entropy functionals by radial
//!   quadrature.
//! - [`sim`]: radial finite-volume fast-diffusion solver and inequality
//!   verification harnesses.
//! - [`gn_disk`]: shooting solver for the disk Gagliardo–Nirenberg constant.

pub mod cli;
pub mod entropy;
pub mod fde_bounds;
pub mod gn_disk;
pub mod harnack;
pub mod lognum;
pub mod params;
pub mod radial;
pub mod report;
pub mod sim;
pub mod threshold;

/// Crate-wide error type. Variants mirror the failure modes of the individual
/// modules so callers can match on the precise cause.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("overflow error: {0}")]
    Overflow(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("decay error: {0}")]
    Decay(String),
    #[error("tolerance error: {0}")]
    Tolerance(String),
    #[error("tube error: {0}")]
    Tube(String),
    #[error("stability error: {0}")]
    Stability(String),
    #[error("non-positivity error: {0}")]
    NonPositivity(String),
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("support error: {0}")]
    Support(String),
    #[error("blow-up error: {0}")]
    Blowup(String),
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
