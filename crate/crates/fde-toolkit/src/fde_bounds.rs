//! Explicit constants for the local bounds of the fast-diffusion flow: the
//! comparison constant `c3`, the smoothing constant `kbar` (computed along
//! two independent algebraic routes and cross-checked), the positivity
//! constants `kappa_star` and `kappa`, the admissible-mass thresholds, and
//! the Aleksandrov reflection constant `A_d`.

use serde::{Deserialize, Serialize};

use crate::lognum::TowerScalar;
use crate::params::ParamSet;
use crate::{Error, Result};

/// `ln(e^a + e^b)` without overflow.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `Σ_{j>=1} ρ^j ln j` with an analytic tail bound (`ln j <= j` gives
/// `tail <= ρ^{J+1}((J+1)(1-ρ)+ρ)/(1-ρ)²`).
fn log_weighted_geometric(rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&rho));
    let mut sum = 0.0;
    let mut pow = rho;
    let mut j = 1usize;
    loop {
        sum += pow * (j as f64).ln();
        let jn = (j + 1) as f64;
        let tail = rho.powf(jn) * (jn * (1.0 - rho) + rho) / ((1.0 - rho) * (1.0 - rho));
        if tail <= 1e-16 * sum.max(1.0) {
            return sum;
        }
        pow *= rho;
        j += 1;
    }
}

/// Comparison constant
/// `c3 = 2^{m/(1-m)} ω_d (16(d+1)(3+m)/(1-m))^{1/(1-m)} (ρ0 + 1)`,
/// returned as a tower scalar (the `1/(1-m)` power escapes `f64` as `m → 1`).
pub fn herrero_pierre_c3(params: &ParamSet, rho0: f64) -> Result<TowerScalar> {
    if !(rho0 > 0.0) {
        return Err(Error::Domain("comparison radius factor rho0 must be positive".into()));
    }
    let (d, m) = (params.d as f64, params.m);
    let ln = m / (1.0 - m) * 2f64.ln()
        + params.omega_d.ln()
        + (16.0 * (d + 1.0) * (3.0 + m) / (1.0 - m)).ln() / (1.0 - m)
        + (rho0 + 1.0).ln();
    TowerScalar::from_ln(ln)
}

/// Smoothing-estimate constant package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConstants {
    pub q: f64,
    pub beta: f64,
    /// `ξ = (2/3)^{β/(4(q+1))}`, always in `(2/3, 1)`.
    pub xi: f64,
    /// Auxiliary interpolation constant `X` (contains the `K^{2q/β}` factor).
    pub x_aux: TowerScalar,
    /// Front constant of the first route.
    pub frak_c: TowerScalar,
    /// Comparison constant entering the bracket of the first route.
    pub scr_c: TowerScalar,
    /// Smoothing constant, first route.
    pub kbar: TowerScalar,
    /// Smoothing constant, second route (`k · K^{2q/β}`); must agree with
    /// `kbar`.
    pub kbar_alt: TowerScalar,
    /// The `K`-free factor of the second route.
    pub k_aux: TowerScalar,
    /// Upper local-bound constant `C2 = 2^d max{1, kbar ω_d / d}`.
    pub c2_cap: TowerScalar,
    /// Comparison-bound constant
    /// `C3 = (16/(1-m))^{1/(1-m)} max{1, 2 ω_d (16(d+1)(3+m)/(1-m))^{1/(1-m)}}`.
    pub c3_cap: TowerScalar,
    /// Aleksandrov constant `A_d = ω_d 4^{d-1}`.
    pub a_d: f64,
    /// Whether the stronger recorded lower bound `16^d d^d <= C3` holds.
    pub c3_lower_16dd_holds: bool,
    /// Whether the weaker recorded lower bound `(4d)^d <= C3` holds.
    pub c3_lower_4dd_holds: bool,
}

/// Aleksandrov reflection constant `A_d = ω_d 4^{d-1}`.
pub fn aleksandrov_a_d(d: u32) -> f64 {
    crate::params::omega_d(d) * 4f64.powi(d as i32 - 1)
}

/// Derives the smoothing constant along both routes, asserts their agreement
/// and the bracketing invariants, and assembles `C2`, `C3`, `A_d`.
pub fn smoothing_kappa_bar(params: &ParamSet) -> Result<SmoothingConstants> {
    let (d, m) = (params.d as f64, params.m);
    let q = params.q_exp;
    let beta = params.beta_smoothing;
    if beta <= 0.0 {
        return Err(Error::Range(format!(
            "smoothing exponent beta = {beta} must be positive (m too small for d = {})",
            params.d
        )));
    }
    let w = params.omega_d;
    let k_sob = params.sobolev_constant();
    let rho = q / (q + 1.0);
    let s1 = log_weighted_geometric(rho);

    let xi = (2f64 / 3.0).powf(beta / (4.0 * (q + 1.0)));

    // X = (β/(β+2)) (4/(β+2))^{2/β} K^{2q/β} (π^q e^{S1})^{8(q+1)/(qβ)}.
    let ln_x = (beta / (beta + 2.0)).ln()
        + 2.0 / beta * (4.0 / (beta + 2.0)).ln()
        + 2.0 * q / beta * k_sob.ln()
        + 8.0 * (q + 1.0) / (q * beta) * (q * std::f64::consts::PI.ln() + s1);

    // frak_c = 4 (38/(1-ξ)²)^{2(q+1)/β} X.
    let ln_frak_c = 4f64.ln()
        + 2.0 * (q + 1.0) / beta * (38f64.ln() - 2.0 * (1.0 - xi).ln())
        + ln_x;

    // scr_c = 2^{m/(1-m)} · 3 ω_d (16(d+1)(3+m)/(1-m))^{1/(1-m)}.
    let ln_big = (16.0 * (d + 1.0) * (3.0 + m) / (1.0 - m)).ln() / (1.0 - m);
    let ln_scr_c = m / (1.0 - m) * 2f64.ln() + (3.0 * w).ln() + ln_big;

    // First-route bracket: 2^{m/(1-m)} + ((1-m)/(2-m)) scr_c + (2/3)^d ω_d/d.
    let ln_bracket = ln_add(
        ln_add(
            m / (1.0 - m) * 2f64.ln(),
            ((1.0 - m) / (2.0 - m)).ln() + ln_scr_c,
        ),
        d * (2f64 / 3.0).ln() + (w / d).ln(),
    );
    let ln_kbar = ln_frak_c + 2.0 / beta * ln_bracket;

    // Second route: kbar = k · K^{2q/β} with
    // k^β = (4β/(β+2))^β (4/(β+2))² π^{8(q+1)} e^{8 Σ_{j>=0} ln(j+1) ρ^j}
    //       2^{2m/(1-m)} (1 + a ω_d)² b.
    let ln_a = ln_add(
        (3.0f64).ln() + (16.0 * (d + 1.0) * (3.0 + m)).ln() / (1.0 - m)
            - (2.0 - m).ln()
            - m / (1.0 - m) * (1.0 - m).ln(),
        (d - m * (d + 1.0)) / (1.0 - m) * 2f64.ln() - d * 3f64.ln() - d.ln(),
    );
    let ln_one_plus_aw = {
        let x = ln_a + w.ln();
        if x > 0.0 {
            x + (-x).exp().ln_1p()
        } else {
            x.exp().ln_1p()
        }
    };
    let ln_b = 2.0 * (q + 1.0) * 38f64.ln() - 4.0 * (q + 1.0) * (1.0 - xi).ln();
    let s0 = s1 / rho; // Σ_{j>=0} ln(j+1) ρ^j
    let ln_k_aux = (beta * (4.0 * beta / (beta + 2.0)).ln()
        + 2.0 * (4.0 / (beta + 2.0)).ln()
        + 8.0 * (q + 1.0) * std::f64::consts::PI.ln()
        + 8.0 * s0
        + 2.0 * m / (1.0 - m) * 2f64.ln()
        + 2.0 * ln_one_plus_aw
        + ln_b)
        / beta;
    let ln_kbar_alt = ln_k_aux + 2.0 * q / beta * k_sob.ln();

    let scale = ln_kbar.abs().max(1.0);
    if (ln_kbar - ln_kbar_alt).abs() > 1e-9 * scale {
        return Err(Error::Tolerance(format!(
            "smoothing-constant routes disagree: {ln_kbar} vs {ln_kbar_alt}"
        )));
    }

    // C2 = 2^d max{1, kbar ω_d / d}.
    let ln_c2 = d * 2f64.ln() + (ln_kbar + (w / d).ln()).max(0.0);
    // C3 = (16/(1-m))^{1/(1-m)} max{1, 2 ω_d (16(d+1)(3+m)/(1-m))^{1/(1-m)}}.
    let ln_c3 = (16.0 / (1.0 - m)).ln() / (1.0 - m) + ((2.0 * w).ln() + ln_big).max(0.0);

    // Bracketing invariants (checked in log space).
    if !(xi > 2.0 / 3.0 && xi < 1.0) {
        return Err(Error::Tolerance(format!("xi = {xi} escaped (2/3, 1)")));
    }
    let ln_c2_hi = d * 2f64.ln() + ln_kbar + 2.0 * std::f64::consts::PI.ln();
    if ln_c2 < d * 2f64.ln() - 1e-12 || ln_c2 > ln_c2_hi + 1e-12 {
        return Err(Error::Tolerance("C2 escaped its bracket".into()));
    }
    let ln_c3_hi = 2.0 / (1.0 - m) * (128.0 * d / (1.0 - m)).ln()
        + (4.0 * std::f64::consts::PI.powi(3)).ln();
    let ln_4dd = d * (4.0 * d).ln();
    if ln_c3 < ln_4dd - 1e-12 || ln_c3 > ln_c3_hi + 1e-12 {
        return Err(Error::Tolerance("C3 escaped its bracket".into()));
    }

    Ok(SmoothingConstants {
        q,
        beta,
        xi,
        x_aux: TowerScalar::from_ln(ln_x)?,
        frak_c: TowerScalar::from_ln(ln_frak_c)?,
        scr_c: TowerScalar::from_ln(ln_scr_c)?,
        kbar: TowerScalar::from_ln(ln_kbar)?,
        kbar_alt: TowerScalar::from_ln(ln_kbar_alt)?,
        k_aux: TowerScalar::from_ln(ln_k_aux)?,
        c2_cap: TowerScalar::from_ln(ln_c2)?,
        c3_cap: TowerScalar::from_ln(ln_c3)?,
        a_d: aleksandrov_a_d(params.d),
        c3_lower_16dd_holds: ln_c3 >= d * (16.0 * d).ln(),
        c3_lower_4dd_holds: ln_c3 >= ln_4dd,
    })
}

/// Positivity constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityConstants {
    /// `kappa_star = 2^{3α+2} d^α`, exact in `f64`.
    pub kappa_star: f64,
    /// `ln kappa`, the (typically astronomically small) inner positivity
    /// constant, kept in log space.
    pub ln_kappa: f64,
}

/// `kappa_star = 2^{3α+2} d^α` and
/// `ln kappa = ln α + ln ω_d + (2/((1-m)² α d)) [4 ln(1-m) - 38 ln 2
///             - 4 ln d - 16 (1-m) α ln π - α² (1-m) ln kbar]`.
pub fn positivity_constants(params: &ParamSet, kbar: &TowerScalar) -> Result<PositivityConstants> {
    let (d, m, a) = (params.d as f64, params.m, params.alpha);
    if a <= 0.0 {
        return Err(Error::Range(format!(
            "positivity constants need alpha > 0, got alpha = {a}"
        )));
    }
    let ln_kbar = kbar
        .ln_abs_f64()
        .ok_or_else(|| Error::Overflow("ln kbar exceeds f64 range".into()))?;
    let kappa_star = 2f64.powf(3.0 * a + 2.0) * d.powf(a);
    let ln_kappa = a.ln()
        + params.omega_d.ln()
        + 2.0 / ((1.0 - m) * (1.0 - m) * a * d)
            * (4.0 * (1.0 - m).ln()
                - 38.0 * 2f64.ln()
                - 4.0 * d.ln()
                - 16.0 * (1.0 - m) * a * std::f64::consts::PI.ln()
                - a * a * (1.0 - m) * ln_kbar);
    Ok(PositivityConstants { kappa_star, ln_kappa })
}

/// Admissible-mass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassThresholds {
    /// `ln M_under` (the threshold itself is usually far below `f64` range).
    pub ln_m_under: f64,
    /// `eps_under = 1 - (M_under/M)^{2/α}` (rounds to 1 when the ratio is
    /// negligible; see `ln_complement`).
    pub eps_under: f64,
    /// `ln(1 - eps_under) = (2/α) ln(M_under/M)`, kept for reporting.
    pub ln_complement: f64,
    /// `eps_over = (M_over/M)^{2/α} - 1`, present only when `M_over` is
    /// configured.
    pub eps_over: Option<f64>,
    /// `eps_md = min{eps_over, eps_under, 1/2}`.
    pub eps_md: f64,
}

/// Derives the mass thresholds from the positivity constants, the profile
/// mass `mass` and an optional configured upper mass `m_over`.
pub fn mass_thresholds(
    params: &ParamSet,
    pos: &PositivityConstants,
    mass: f64,
    m_over: Option<f64>,
) -> Result<MassThresholds> {
    if !(mass > 0.0) {
        return Err(Error::Config("mass must be positive".into()));
    }
    let (d, m, a) = (params.d as f64, params.m, params.alpha);
    let b = params.b_const;
    // M_under = min{2^{-d/2} (kappa/b^d)^{α/2},
    //               kappa / ((d(1-m))^{d/2} α^{α/(2(1-m))})}
    //           · kappa_star^{1/(1-m)} · mass².
    let branch1 = -d / 2.0 * 2f64.ln() + a / 2.0 * (pos.ln_kappa - d * b.ln());
    let branch2 = pos.ln_kappa
        - d / 2.0 * (d * (1.0 - m)).ln()
        - a / (2.0 * (1.0 - m)) * a.ln();
    let ln_m_under =
        branch1.min(branch2) + pos.kappa_star.ln() / (1.0 - m) + 2.0 * mass.ln();
    let ln_ratio = ln_m_under - mass.ln();
    if ln_ratio >= 0.0 {
        return Err(Error::Config(format!(
            "mass threshold is not below the profile mass: ln(M_under/M) = {ln_ratio}"
        )));
    }
    let ln_complement = 2.0 / a * ln_ratio;
    let eps_under = -ln_complement.exp_m1();
    let eps_over = match m_over {
        None => None,
        Some(mo) => {
            if mo <= mass {
                return Err(Error::Config(format!(
                    "configured upper mass {mo} must exceed the profile mass {mass}"
                )));
            }
            Some((2.0 / a * (mo / mass).ln()).exp_m1())
        }
    };
    let eps_md = eps_under.min(0.5).min(eps_over.unwrap_or(f64::INFINITY));
    Ok(MassThresholds { ln_m_under, eps_under, ln_complement, eps_over, eps_md })
}
