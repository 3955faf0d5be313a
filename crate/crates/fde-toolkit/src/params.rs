//! Parameter bundle for the fast-diffusion constants: validates the `(d, m)`
//! regime and derives every scalar parameter used by the rest of the crate.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lanczos approximation of the gamma function, `g = 7`, 9 coefficients
/// (Godfrey's classic double-precision set). Relative error below 1e-13 on
/// the positive real axis, well inside the 1e-12 budget.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the positive real axis (reflection formula extends it to
/// negative non-integer arguments).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Surface measure of the unit sphere in `R^d`: `ω_d = 2 π^{d/2} / Γ(d/2)`.
pub fn omega_d(d: u32) -> f64 {
    let dh = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(dh) / gamma(dh)
}

/// How the parameters are going to be used; each profile admits a different
/// `m`-interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UsageProfile {
    /// Local bounds for the fast-diffusion equation: `m ∈ (0, 1)`.
    FdeBounds,
    /// Entropy functionals: `m ∈ (m₁, 1)` for `d ≥ 2`, `m ∈ (1/3, 1)` for
    /// `d = 1` (the second-moment requirement).
    Entropy,
    /// Threshold-time pipeline: same admissible interval as `Entropy`.
    Threshold,
}

/// Dimension/exponent bundle with all derived scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub d: u32,
    pub m: f64,
    /// `m₁ = (d-1)/d`.
    pub m1: f64,
    /// `m_c = (d-2)/d`.
    pub mc: f64,
    /// `α = 2 - d(1-m) = d(m - m_c)`.
    pub alpha: f64,
    /// `μ = ((1-m)/(2m))^{1/α}`.
    pub mu: f64,
    /// `b = ((1-m)/(2mα))^{1/α}`; satisfies `μ = b α^{1/α}`.
    pub b_const: f64,
    /// Moser iteration exponent: `(d+2)/d` if `d ≥ 3`, else `5/3`.
    pub gamma_moser: f64,
    /// Smoothing exponent `β = 2 - 2q(1-m)`.
    pub beta_smoothing: f64,
    /// Hölder-interpolation exponent `q` (dimension-dependent table value).
    pub q_exp: f64,
    /// Interpolation norm exponent `p_m` (table value; `4/m` when `d = 1`).
    pub p_m: f64,
    /// Sobolev-step exponent used in the iteration lemma: `2d/(d-2)` if
    /// `d ≥ 3`, `4` if `d = 2`, `8` if `d = 1` (distinct from `p_m`).
    pub p_sf: f64,
    /// `η = 2d(m - m₁) = 2(α - 1)`.
    pub eta: f64,
    /// Tube-admissibility constant: `1/322` if `d ≥ 2`, `m/(266+56m)` if
    /// `d = 1`.
    pub chi: f64,
    /// Unit-sphere surface `ω_d`.
    pub omega_d: f64,
}

impl ParamSet {
    /// Validates `(d, m)` for the given usage profile and derives all fields.
    pub fn derive(d: u32, m: f64, profile: UsageProfile) -> Result<Self> {
        if d < 1 {
            return Err(Error::Dimension("dimension must satisfy d >= 1".into()));
        }
        let df = d as f64;
        let m1 = (df - 1.0) / df;
        let lower = match profile {
            UsageProfile::FdeBounds => 0.0,
            UsageProfile::Entropy | UsageProfile::Threshold => {
                if d == 1 {
                    1.0 / 3.0
                } else {
                    m1
                }
            }
        };
        if !(m > lower && m < 1.0) {
            return Err(Error::Range(format!(
                "exponent m = {m} outside the admitted interval ({lower}, 1) for d = {d} ({profile:?})"
            )));
        }
        let mc = (df - 2.0) / df;
        let alpha = 2.0 - df * (1.0 - m);
        let mu = ((1.0 - m) / (2.0 * m)).powf(1.0 / alpha);
        let b_const = ((1.0 - m) / (2.0 * m * alpha)).powf(1.0 / alpha);
        let gamma_moser = if d >= 3 { (df + 2.0) / df } else { 5.0 / 3.0 };
        let (q_exp, p_m, p_sf) = match d {
            1 => (2.0 / (2.0 - m), 4.0 / m, 8.0),
            2 => (2.0, 4.0, 4.0),
            _ => (df / 2.0, 2.0 * df / (df - 2.0), 2.0 * df / (df - 2.0)),
        };
        let beta_smoothing = 2.0 - 2.0 * q_exp * (1.0 - m);
        let eta = 2.0 * df * (m - m1);
        let chi = if d >= 2 { 1.0 / 322.0 } else { m / (266.0 + 56.0 * m) };
        Ok(ParamSet {
            d,
            m,
            m1,
            mc,
            alpha,
            mu,
            b_const,
            gamma_moser,
            beta_smoothing,
            q_exp,
            p_m,
            p_sf,
            eta,
            chi,
            omega_d: omega_d(d),
        })
    }

    /// Interpolation constant `𝒦`: `(2/π) Γ(d/2+1)^{2/d}` if `d ≥ 3`,
    /// `2/√π` if `d = 2`, `2^{1+m/2} max(2(2-m)/(mπ²), 1/4)` if `d = 1`
    /// (the `d = 1` row is the `p = 4/m` instance of the general bound
    /// `2^{1+2/p} max((p-2)/π², 1/4)`).
    pub fn sobolev_constant(&self) -> f64 {
        let d = self.d as f64;
        match self.d {
            1 => {
                let m = self.m;
                2f64.powf(1.0 + m / 2.0)
                    * (2.0 * (2.0 - m) / (m * std::f64::consts::PI.powi(2))).max(0.25)
            }
            2 => 2.0 / std::f64::consts::PI.sqrt(),
            _ => 2.0 / std::f64::consts::PI * gamma(d / 2.0 + 1.0).powf(2.0 / d),
        }
    }

    /// Mass of the static profile `(1+|x|²)^{1/(m-1)}`, via the closed form
    /// `π^{d/2} Γ(p - d/2)/Γ(p)` with `p = 1/(1-m)` (finite for `m > m_c`).
    pub fn barenblatt_mass(&self) -> Result<f64> {
        let p = 1.0 / (1.0 - self.m);
        let half_d = self.d as f64 / 2.0;
        if p <= half_d {
            return Err(Error::Range(format!(
                "mass diverges: need m > (d-2)/d, got m = {}",
                self.m
            )));
        }
        Ok(std::f64::consts::PI.powf(half_d) * gamma(p - half_d) / gamma(p))
    }
}
