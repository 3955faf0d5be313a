//! Explicit constants for the parabolic Harnack inequality: the Moser
//! iteration constant `c1`, the logarithmic-estimate constant `c2`, the
//! Bombieri–Giusti constant `kappa0`, the Harnack constants `h` and `hbar`,
//! and the Hölder continuity machinery (exponent `nu`, parabolic distance,
//! oscillation bound).

use serde::{Deserialize, Serialize};

use crate::lognum::TowerScalar;
use crate::params::ParamSet;
use crate::{Error, Result};

/// `ln ln 4`.
const LN_LN4: f64 = 0.326_634_259_978_281_24;

/// Partial sum of `σ = Σ_{j≥0} (3/4)^j ((2+j)(1+j))^{2d+4}` together with an
/// analytic geometric tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSum {
    pub value: f64,
    /// Upper bound on the omitted tail: `tail ≤ tail_bound`.
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Sums the series until the geometric tail bound drops below
/// `rel_tol * partial_sum`. The term ratio is
/// `(3/4) ((3+j)/(1+j))^{2d+4}`, which decreases to `3/4`; once it is below
/// one the tail is bounded by `term_J * r/(1-r)` with `r` the ratio at `J`.
pub fn sigma_series(d: u32, rel_tol: f64) -> Result<SigmaSum> {
    if d < 1 {
        return Err(Error::Dimension("sigma series needs d >= 1".into()));
    }
    if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
        return Err(Error::Range(format!("rel_tol = {rel_tol} outside (0, 1e-3]")));
    }
    let p = 2 * d as i32 + 4;
    let mut sum = 0.0f64;
    let mut term = 2f64.powi(p); // j = 0: ((2)(1))^{2d+4}
    let mut j = 0usize;
    loop {
        sum += term;
        let jf = j as f64;
        let ratio = 0.75 * ((3.0 + jf) / (1.0 + jf)).powi(p);
        let next = term * ratio;
        if ratio < 1.0 {
            let tail = next / (1.0 - ratio);
            if tail <= rel_tol * sum {
                return Ok(SigmaSum { value: sum, tail_bound: tail, terms_used: j + 1 });
            }
        }
        term = next;
        j += 1;
        if j > 2_000_000 {
            return Err(Error::Tolerance("sigma series failed to converge".into()));
        }
    }
}

/// Natural log of the Moser iteration constant
/// `c1 = 3^{γ-1} (2^{2γ²+7(γ-1)} γ^{(γ+1)(2γ-1)} d^{(γ+1)(γ-1)} K^{γ-1})^{γ/(γ-1)²}`
/// with `γ = (d+2)/d` if `d ≥ 3` and `γ = 5/3` otherwise.
pub fn moser_c1_ln(params: &ParamSet) -> f64 {
    let g = params.gamma_moser;
    let d = params.d as f64;
    let k = params.sobolev_constant();
    let inner = (2.0 * g * g + 7.0 * (g - 1.0)) * 2f64.ln()
        + (g + 1.0) * (2.0 * g - 1.0) * g.ln()
        + (g + 1.0) * (g - 1.0) * d.ln()
        + (g - 1.0) * k.ln();
    (g - 1.0) * 3f64.ln() + g / ((g - 1.0) * (g - 1.0)) * inner
}

/// Moser iteration constant as an `f64` (finite for `d ≤ 25`).
pub fn moser_c1(params: &ParamSet) -> f64 {
    moser_c1_ln(params).exp()
}

/// Logarithmic-estimate constant `c2 = 2^{d+2} 3^d d`, exact.
pub fn log_estimate_c2(d: u32) -> f64 {
    2f64.powi(d as i32 + 2) * 3f64.powi(d as i32) * d as f64
}

/// Bombieri–Giusti constant
/// `κ0 = exp[ 2 c2 ∨ 8 c1³ σ / (1-θ)^{2β} ]` (σ-inclusive form).
///
/// Computed in log space so that `c1³` never overflows.
pub fn bgm_kappa0(beta: f64, c1: f64, c2: f64, theta: f64, sigma: f64) -> Result<TowerScalar> {
    if !(0.5..1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [1/2, 1)")));
    }
    if !(beta > 0.0 && c1 > 0.0 && sigma > 0.0) {
        return Err(Error::Domain("beta, c1, sigma must be positive".into()));
    }
    if c2 < 1.0 / std::f64::consts::E {
        return Err(Error::Domain(format!("c2 = {c2} below 1/e")));
    }
    let ln_branch =
        8f64.ln() + 3.0 * c1.ln() + sigma.ln() - 2.0 * beta * (1.0 - theta).ln();
    let ln_kappa0 = (2.0 * c2).ln().max(ln_branch);
    // kappa0 = exp(exp(ln_kappa0)); as a tower value its logarithm is
    // exp(ln_kappa0), i.e. level-1 input mag ln_kappa0 after one exp.
    TowerScalar::exp_of(&TowerScalar::from_ln(ln_kappa0)?)
}

/// The Part-I constant package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackConstants {
    pub sigma: SigmaSum,
    pub c1_moser: f64,
    pub c1_moser_ln: f64,
    pub c2_log: f64,
    /// Simplified stand-in constant `c0` (exceeds `f64` for large `d`).
    pub c0: TowerScalar,
    /// `ln h`, itself possibly exponentially large.
    pub log_h: TowerScalar,
    /// Upper-estimate constant (`θ = 1/√2` branch, effective `c1·2^{(d+2)/2}`).
    pub kappa0_over: TowerScalar,
    /// Lower-estimate constant (`θ = 1/2` branch).
    pub kappa0_under: TowerScalar,
    /// Sign of `ln c0 - ln c1`: the simplified constant is computed and
    /// *compared* with the iteration constant rather than assumed larger.
    pub c0_ge_c1: bool,
}

/// Natural log of `c0 = 3^{2/d} 2^{((d+2)(3d²+18d+24)+13)/(2d)}
/// ((2+d)^{1+4/d²}/d^{1+2/d²})^{(d+1)(d+2)} K^{(2d+4)/d}`.
pub fn c0_ln(params: &ParamSet) -> f64 {
    let d = params.d as f64;
    let k = params.sobolev_constant();
    2.0 / d * 3f64.ln()
        + ((d + 2.0) * (3.0 * d * d + 18.0 * d + 24.0) + 13.0) / (2.0 * d) * 2f64.ln()
        + (d + 1.0) * (d + 2.0)
            * ((1.0 + 4.0 / (d * d)) * (2.0 + d).ln() - (1.0 + 2.0 / (d * d)) * d.ln())
        + (2.0 * d + 4.0) / d * k.ln()
}

/// `ln h` assembled from a cubed front constant `front` (either `c0` or
/// `c1`): `additive + front³ · 2^{2(d+2)+3} (1 + 2^{d+2}/(√2-1)^{2(d+2)}) σ`
/// with `additive` the stated first summand.
fn log_h_from(d: u32, front_ln: f64, sigma: f64, additive: f64) -> Result<TowerScalar> {
    let di = d as i32;
    let factor = 2f64.powi(2 * (di + 2) + 3)
        * (1.0 + 2f64.powi(di + 2) / (std::f64::consts::SQRT_2 - 1.0).powi(2 * (di + 2)));
    let term = TowerScalar::from_ln(3.0 * front_ln + factor.ln() + sigma.ln())?;
    TowerScalar::from_f64(additive)?.add(&term)
}

/// `ln h` per the simplified expression (additive term `2^{d+4} 3^d d`,
/// front constant `c0`).
pub fn harnack_log_h(params: &ParamSet, sigma: f64) -> Result<TowerScalar> {
    let additive = 2f64.powi(params.d as i32 + 4) * 3f64.powi(params.d as i32) * (params.d as f64);
    log_h_from(params.d, c0_ln(params), sigma, additive)
}

/// `ln h` in the verbose proof form `4 c2 + front³ 2^{2(d+2)+3} (1 + …) σ`;
/// with `front = c0` this agrees with [`harnack_log_h`] exactly because
/// `4 c2 = 2^{d+4} 3^d d`.
pub fn harnack_log_h_verbose(params: &ParamSet, front_ln: f64, sigma: f64) -> Result<TowerScalar> {
    log_h_from(params.d, front_ln, sigma, 4.0 * log_estimate_c2(params.d))
}

impl HarnackConstants {
    pub fn compute(params: &ParamSet, rel_tol: f64) -> Result<Self> {
        let sigma = sigma_series(params.d, rel_tol)?;
        let c1_ln = moser_c1_ln(params);
        let c2 = log_estimate_c2(params.d);
        let c0ln = c0_ln(params);
        let log_h = harnack_log_h(params, sigma.value)?;
        let verbose = harnack_log_h_verbose(params, c0ln, sigma.value)?;
        debug_assert_eq!(log_h, verbose);
        let beta = params.d as f64 + 2.0;
        // Upper branch uses the Moser bound with the extra 2^{(d+2)/2} factor
        // on c1 and aperture 1/sqrt(2).
        let c1 = c1_ln.exp();
        let c1_eff_ln = c1_ln + (beta / 2.0) * 2f64.ln();
        let kappa0_over = bgm_kappa0(
            beta,
            c1_eff_ln.exp(),
            c2,
            1.0 / std::f64::consts::SQRT_2,
            sigma.value,
        )?;
        let kappa0_under = bgm_kappa0(beta, c1, c2, 0.5, sigma.value)?;
        Ok(HarnackConstants {
            sigma,
            c1_moser: c1,
            c1_moser_ln: c1_ln,
            c2_log: c2,
            c0: TowerScalar::from_ln(c0ln)?,
            log_h,
            kappa0_over,
            kappa0_under,
            c0_ge_c1: c0ln >= c1_ln,
        })
    }
}

/// `ln hbar = (λ1 + 1/λ0) ln h`.
pub fn hbar_log(log_h: &TowerScalar, lambda0: f64, lambda1: f64) -> Result<TowerScalar> {
    if !(lambda0 > 0.0) || lambda1 < lambda0 {
        return Err(Error::Domain(format!(
            "need 0 < lambda0 <= lambda1, got ({lambda0}, {lambda1})"
        )));
    }
    log_h.mul(&TowerScalar::from_f64(lambda1 + 1.0 / lambda0)?)
}

/// Hölder exponent `ν = log4(hbar/(hbar-1))` from `ln hbar`.
///
/// For `ln hbar ≤ 700` the formula is evaluated exactly; beyond that the
/// first-order expansion `ν ≈ 1/(hbar ln 4)` is used, whose relative error is
/// at most `1/hbar` (documented in reports).
pub fn holder_exponent(log_hbar: &TowerScalar) -> Result<TowerScalar> {
    let min_log = (4f64 / 3.0).ln();
    if log_hbar.compare(&TowerScalar::from_f64(min_log)?) == std::cmp::Ordering::Less {
        return Err(Error::Domain("holder exponent needs hbar >= 4/3".into()));
    }
    let l = log_hbar.to_f64();
    if l.is_finite() && l <= 700.0 {
        // nu = -ln(1 - exp(-L)) / ln 4, exact.
        let nu = -(-(-l).exp()).ln_1p() / 4f64.ln();
        return TowerScalar::from_f64(nu);
    }
    // ln nu = -(ln hbar + ln ln 4); the tower add absorbs the additive
    // constant when ln hbar is itself huge (sub-precision correction).
    let ln_nu = log_hbar.add(&TowerScalar::from_f64(LN_LN4)?)?.neg();
    TowerScalar::exp_of(&ln_nu)
}

/// Space-time cylinder `(t_start, t_end) × B_radius(center)`, with the
/// center recorded through its displacement magnitude from a common origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub t_start: f64,
    pub t_end: f64,
    pub center_offset: f64,
    pub radius: f64,
}

impl Cylinder {
    pub fn new(t_start: f64, t_end: f64, center_offset: f64, radius: f64) -> Result<Self> {
        if !(t_end > t_start && radius > 0.0 && center_offset >= 0.0) {
            return Err(Error::Geometry("degenerate cylinder".into()));
        }
        Ok(Cylinder { t_start, t_end, center_offset, radius })
    }
}

/// Parabolic distance `inf |x-y| + |t-s|^{1/2}` between an inner cylinder
/// and the parabolic boundary of an outer one: the minimum of the lateral
/// spatial gap and the two temporal gaps (square-rooted).
pub fn parabolic_distance(q1: &Cylinder, q2: &Cylinder) -> Result<f64> {
    let spatial_gap = q2.radius - (q1.center_offset - q2.center_offset).abs() - q1.radius;
    let t_before = q1.t_start - q2.t_start;
    let t_after = q2.t_end - q1.t_end;
    if spatial_gap < 0.0 || t_before < 0.0 || t_after < 0.0 {
        return Err(Error::Geometry("inner cylinder is not nested in the outer one".into()));
    }
    Ok(spatial_gap.min(t_before.sqrt()).min(t_after.sqrt()))
}

/// Oscillation-bound coefficient `2 (128/dist)^ν · sup_norm`.
pub fn holder_bound(nu: &TowerScalar, dist: f64, sup_norm: f64) -> Result<TowerScalar> {
    if !(dist > 0.0) {
        return Err(Error::Geometry("parabolic distance must be positive".into()));
    }
    if sup_norm < 0.0 {
        return Err(Error::Domain("sup norm must be nonnegative".into()));
    }
    let ratio = TowerScalar::from_f64(128.0 / dist)?;
    ratio
        .pow(nu)?
        .mul(&TowerScalar::from_f64(2.0 * sup_norm)?)
}
