//! End-to-end threshold-time pipeline: from `(d, m, ε, A, G)` and the
//! configured companion constants to the intrinsic radii `ρ(ε)`, the waiting
//! times `T(ε)`, the ellipticity bounds `λ0/λ1`, the Hölder data `ν, ϑ`, the
//! uniform-convergence constant `K`, and finally the threshold time `t⋆` —
//! all collected into a provenance-annotated [`ConstantReport`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::fde_bounds::{
    mass_thresholds, positivity_constants, smoothing_kappa_bar, MassThresholds,
};
use crate::harnack::{hbar_log, holder_exponent, HarnackConstants};
use crate::lognum::TowerScalar;
use crate::params::ParamSet;
use crate::report::ConstantReport;
use crate::{Error, Result};

/// Full input bundle. The four companion constants (`m_over`, `c_dnu1`,
/// `c_over`, `c_under`) have no closed form here; they are configuration
/// with documented defaults of `1.0` and are flagged as "configured, not
/// derived" in the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInputs {
    pub params: ParamSet,
    /// Target relative accuracy `ε`.
    pub eps: f64,
    /// Tail bound `A` on the initial datum.
    pub a_tail: f64,
    /// Free-energy bound `G`.
    pub g_energy: f64,
    /// Configured upper mass threshold (must exceed the profile mass).
    pub m_over: f64,
    /// Configured interpolation constant.
    pub c_dnu1: f64,
    /// Configured upper envelope constant.
    pub c_over: f64,
    /// Configured lower envelope constant.
    pub c_under: f64,
}

impl ThresholdInputs {
    pub fn new(params: ParamSet, eps: f64, a_tail: f64, g_energy: f64) -> Self {
        ThresholdInputs {
            params,
            eps,
            a_tail,
            g_energy,
            m_over: 1.0,
            c_dnu1: 1.0,
            c_over: 1.0,
            c_under: 1.0,
        }
    }
}

/// Intrinsic radius `R(t) = (1 + α t)^{1/α}`.
pub fn radius_r(t: f64, alpha: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("radius needs t >= 0, got {t}")));
    }
    Ok((1.0 + alpha * t).powf(1.0 / alpha))
}

/// Ellipticity bounds for the relative solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds {
    pub lambda0: f64,
    pub lambda1: f64,
    /// `ln` of the envelope supremum used for `lambda0`.
    pub ln_sup_envelope: f64,
    /// `ln` of the envelope infimum used for `lambda1`.
    pub ln_inf_envelope: f64,
}

/// Assembles `lambda0 = m (C_over · S)^{m-1}` and
/// `lambda1 = m (C_under · I)^{m-1}` from given log-envelopes
/// `ln S >= ln I`. Exposed separately so that the degenerate equal-envelope
/// consistency mode can be exercised.
pub fn lambda_bounds_from_envelopes(
    params: &ParamSet,
    c_over: f64,
    c_under: f64,
    ln_sup: f64,
    ln_inf: f64,
) -> Result<LambdaBounds> {
    if !(c_under > 0.0) || c_over < c_under {
        return Err(Error::Config(format!(
            "need C_over >= C_under > 0, got ({c_over}, {c_under})"
        )));
    }
    let m = params.m;
    let lambda0 = m * ((m - 1.0) * (c_over.ln() + ln_sup)).exp();
    let lambda1 = m * ((m - 1.0) * (c_under.ln() + ln_inf)).exp();
    if lambda0 > lambda1 {
        return Err(Error::Config(format!(
            "ellipticity bounds inverted: lambda0 = {lambda0} > lambda1 = {lambda1}"
        )));
    }
    // AM-GM: lambda1 + 1/lambda0 >= 2 sqrt(lambda1/lambda0).
    debug_assert!(
        lambda1 + 1.0 / lambda0 >= 2.0 * (lambda1 / lambda0).sqrt() * (1.0 - 1e-12)
    );
    Ok(LambdaBounds { lambda0, lambda1, ln_sup_envelope: ln_sup, ln_inf_envelope: ln_inf })
}

/// Closed-form envelope brackets over the two reference cylinders:
/// the supremum over the outer cylinder is bounded by `b^d 4^{d/α}` and by
/// the scaled-family chain; the infimum is bounded below by
/// `4^{-1/(1-m)} b^{-α/(1-m)} (2^{2/α}/b² + 2^6)^{1/(m-1)}` and
/// `2^{-7/(1-m)} b^{-α/(1-m)}`.
pub fn lambda_bounds(params: &ParamSet, c_over: f64, c_under: f64) -> Result<LambdaBounds> {
    let (m, a, b) = (params.m, params.alpha, params.b_const);
    let d = params.d as f64;
    // Upper envelopes.
    let ln_sup_q2 = d * b.ln() + d / a * 4f64.ln();
    let ln_sup_q4 = 2f64.ln() / (1.0 - m) - a / (1.0 - m) * b.ln()
        + (1.0 / (b * b * 4f64.powf(2.0 / a)) + 1.0 / 16.0).ln() / (m - 1.0);
    let ln_sup = ln_sup_q2.max(ln_sup_q4);
    // Lower envelopes.
    let ln_inf_q2 = -4f64.ln() / (1.0 - m) - a / (1.0 - m) * b.ln()
        + (2f64.powf(2.0 / a) / (b * b) + 64.0).ln() / (m - 1.0);
    let ln_inf_q4 = -7.0 * 2f64.ln() / (1.0 - m) - a / (1.0 - m) * b.ln();
    let ln_inf = ln_inf_q2.min(ln_inf_q4);
    lambda_bounds_from_envelopes(params, c_over, c_under, ln_sup, ln_inf)
}

/// Outer/inner stabilization radii and their maximum, with the closed-form
/// sandwich for the outer radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoRadii {
    pub rho_under: f64,
    pub rho_over: f64,
    pub rho: f64,
    /// Sandwich `1/√(1-m) · 1/(μ√ε) <= rho_over <= 4/√(1-m) · 1/(μ√ε)`.
    pub over_sandwich_lo: f64,
    pub over_sandwich_hi: f64,
}

/// Outer radius `(1/μ) ((X+1)/(X-1))^{1/2}` with `X = (1+ε)^{1-m}`,
/// with an explicit `μ` (the pipeline passes the derived one).
pub fn rho_over_raw(m: f64, mu: f64, eps: f64) -> f64 {
    let xm1 = ((1.0 - m) * eps.ln_1p()).exp_m1();
    ((xm1 + 2.0) / xm1).sqrt() / mu
}

/// Both radii. The inner radius is evaluated in log space because the
/// `(1-ε)/(1-ε_under)` ratio is astronomically large for the derived
/// thresholds.
pub fn rho_eps(params: &ParamSet, eps: f64, thresholds: &MassThresholds) -> Result<RhoRadii> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    if eps >= thresholds.eps_under {
        return Err(Error::Domain(format!(
            "eps = {eps} >= eps_under = {}: inner-radius formula degenerates",
            thresholds.eps_under
        )));
    }
    let (m, mu) = (params.m, params.mu);
    let rho_over = rho_over_raw(m, mu, eps);
    let over_sandwich_lo = 1.0 / ((1.0 - m).sqrt() * mu * eps.sqrt());
    let over_sandwich_hi = 4.0 * over_sandwich_lo;

    // rho_under² μ² = (1 + (1+ε)^{1-m}) ((1-ε)/(1-ε_under))^{1-m} - 1) /
    //                 (1 - (1-ε)^{1-m}).
    let front = 1.0 + ((1.0 - m) * eps.ln_1p()).exp();
    let ln_ratio_pow = (1.0 - m) * ((-eps).ln_1p() - thresholds.ln_complement);
    let ratio_minus_1 = if ln_ratio_pow > 36.0 {
        ln_ratio_pow // ln(e^x - 1) = x up to e^{-x}
    } else {
        ln_ratio_pow.exp_m1().ln()
    };
    let denom = -((1.0 - m) * (-eps).ln_1p()).exp_m1();
    let ln_rho_under =
        -mu.ln() + 0.5 * (front.ln() + ratio_minus_1 - denom.ln());
    let rho_under = ln_rho_under.exp();
    Ok(RhoRadii {
        rho_under,
        rho_over,
        rho: rho_over.max(rho_under),
        over_sandwich_lo,
        over_sandwich_hi,
    })
}

/// Waiting times, tower-valued (the smoothing constant's power may be large).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTimes {
    /// `t0 = A^{1-m}`.
    pub t0: f64,
    /// `c = max{1, 2^{5-m} kbar^{1-m} b^α}`.
    pub c_const: TowerScalar,
    pub t_under: TowerScalar,
    pub t_over: TowerScalar,
    pub t_max: TowerScalar,
}

/// Waiting times `T_under = (kappa_star (2A)^{1-m} + 2/α)/(1-(1-ε)^{1-m})`
/// and `T_over = 2 c t0 / ((1+ε)^{1-m} - 1)`.
pub fn t_eps(
    params: &ParamSet,
    eps: f64,
    kbar: &TowerScalar,
    kappa_star: f64,
    a_tail: f64,
) -> Result<ThresholdTimes> {
    if !(eps > 0.0 && eps < 1.0) || a_tail < 0.0 {
        return Err(Error::Domain("t_eps needs eps in (0,1) and A >= 0".into()));
    }
    let (m, a, b) = (params.m, params.alpha, params.b_const);
    let t0 = if a_tail == 0.0 { 0.0 } else { a_tail.powf(1.0 - m) };
    let candidate = kbar
        .powf(1.0 - m)?
        .mul(&TowerScalar::from_ln((5.0 - m) * 2f64.ln() + a * b.ln())?)?;
    let c_const = candidate.max(&TowerScalar::one());
    let up = ((1.0 - m) * eps.ln_1p()).exp_m1(); // (1+ε)^{1-m} - 1
    let down = -((1.0 - m) * (-eps).ln_1p()).exp_m1(); // 1 - (1-ε)^{1-m}
    let t_over = c_const.mul(&TowerScalar::from_f64(2.0 * t0 / up)?)?;
    let t_under = TowerScalar::from_f64(
        (kappa_star * (2.0 * a_tail).powf(1.0 - m) + 2.0 / a) / down,
    )?;
    let t_max = t_over.max(&t_under);
    Ok(ThresholdTimes { t0, c_const, t_under, t_over, t_max })
}

/// `‖∇B(1-1/α, ·)‖_∞` in closed form:
/// `(μ^{d+1}/α^{(d+1)/α}) 2^{1/(m-1)} / √((1-m)(3-m)) ((3-m)/(2-m))^{(2-m)/(1-m)}`.
pub fn gradient_norm_barenblatt(params: &ParamSet) -> f64 {
    let (m, a, mu) = (params.m, params.alpha, params.mu);
    let d = params.d as f64;
    (mu / a.powf(1.0 / a)).powf(d + 1.0)
        * 2f64.powf(1.0 / (m - 1.0))
        / ((1.0 - m) * (3.0 - m)).sqrt()
        * ((3.0 - m) / (2.0 - m)).powf((2.0 - m) / (1.0 - m))
}

/// `c2 = 2 max{b, ‖∇B(1-1/α,·)‖_∞}`.
pub fn c2_envelope(params: &ParamSet) -> f64 {
    2.0 * params.b_const.max(gradient_norm_barenblatt(params))
}

/// `2^ν/(2^ν - 1)`, with the expansion `1/(ν ln 2)` (relative error `<= ν/2`)
/// when `ν` is too small for direct evaluation. Returns the value and an
/// optional error note.
pub fn two_pow_nu_ratio(nu: &TowerScalar) -> Result<(TowerScalar, Option<String>)> {
    if nu.sign() <= 0 {
        return Err(Error::Domain("ratio needs nu > 0".into()));
    }
    if let Some(l) = nu.ln_abs_f64() {
        if l > -30.0 {
            // Direct: 1/(1 - 2^{-ν}) evaluated stably.
            let nu_f = l.exp();
            let v = 1.0 / (-(-nu_f * 2f64.ln()).exp_m1());
            return Ok((TowerScalar::from_f64(v)?, None));
        }
    }
    // ln ratio = -ln ν - ln ln 2.
    let ln_ratio = nu
        .mul(&TowerScalar::from_f64(2f64.ln())?)?
        .recip()?;
    Ok((
        ln_ratio,
        Some("first-order expansion 1/(nu ln 2); relative error <= nu/2".into()),
    ))
}

/// `ϑ = ν/(d + ν)`.
pub fn theta_exponent(d: u32, nu: &TowerScalar) -> Result<TowerScalar> {
    let dpn = TowerScalar::from_f64(d as f64)?.add(nu)?;
    nu.div(&dpn)
}

/// The uniform-convergence constant
/// `K = 2^{3d/α + (3+6α)/(α(1-m)) + ϑ + 10} (α+M)^ϑ / (m^ϑ (1-m)^{2(1+ϑ)+2/(1-m)})
///      · [1 + b^d C_dnu1 ((kbar M^{2/α} 2^ν/(2^ν-1) + c2)^{d/(d+ν)}
///        + (μ^{2d}/α^{d/α}) M^{d/(d+ν)})]`.
pub fn mathsf_k(
    params: &ParamSet,
    nu: &TowerScalar,
    theta: &TowerScalar,
    c_dnu1: f64,
    kbar: &TowerScalar,
    mass: f64,
) -> Result<TowerScalar> {
    if !(c_dnu1 > 0.0) {
        return Err(Error::Config("interpolation constant must be positive".into()));
    }
    let (m, a, b, mu) = (params.m, params.alpha, params.b_const, params.mu);
    let d = params.d as f64;
    // Front factor in log space (theta enters as a tower correction).
    let base_exp = 3.0 * d / a + (3.0 + 6.0 * a) / (a * (1.0 - m)) + 10.0;
    let ln_front_base = base_exp * 2f64.ln()
        - (2.0 + 2.0 / (1.0 - m)) * (1.0 - m).ln();
    let theta_coeff = 2f64.ln() + (a + mass).ln() - m.ln() - 2.0 * (1.0 - m).ln();
    let ln_front = TowerScalar::from_f64(ln_front_base)?
        .add(&theta.mul(&TowerScalar::from_f64(theta_coeff)?)?)?;
    let front = TowerScalar::exp_of(&ln_front)?;

    let (ratio, _note) = two_pow_nu_ratio(nu)?;
    let first = kbar
        .mul(&TowerScalar::from_f64(mass.powf(2.0 / a))?)?
        .mul(&ratio)?
        .add(&TowerScalar::from_f64(c2_envelope(params))?)?;
    let d_over_dpn = TowerScalar::from_f64(d)?
        .div(&TowerScalar::from_f64(d)?.add(nu)?)?;
    let first_pow = first.pow(&d_over_dpn)?;
    let second = TowerScalar::from_ln(2.0 * d * mu.ln() - d / a * a.ln())?
        .mul(&TowerScalar::from_f64(mass)?.pow(&d_over_dpn)?)?;
    let bracket = TowerScalar::one().add(
        &TowerScalar::from_ln(d * b.ln() + c_dnu1.ln())?
            .mul(&first_pow.add(&second)?)?,
    )?;
    front.mul(&bracket)
}

/// Output of the final collection step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CStarOutput {
    pub c_star: TowerScalar,
    /// Exponent `a = (α/ϑ)(2-m)/(1-m)`.
    pub a_exp: TowerScalar,
    pub t_star: TowerScalar,
    /// The ε-independent value `ε^a κ2(ε) = (4α)^{α-1} K^{α/ϑ}`.
    pub kappa2_const: TowerScalar,
    /// `ln sup_ε max{ε κ1, ε κ3}` over the admissible interval.
    pub sup_ln_eps_kappa13: f64,
    /// Location of that supremum.
    pub argmax_eps: f64,
}

/// Comparison key for `t⋆`: the tower value, with sub-representation
/// tiebreaks. When the Hölder exponent is double-exponentially small the
/// `ε`- and `(A,G)`-dependence of `t⋆` falls below the representable
/// precision of the level-2 magnitude; the key therefore carries
/// `ln(1/ε)` (which the huge exponent `a` multiplies) and the bracket
/// `ln(1 + A^{1-m} + G^{α/2})` and compares lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TStarKey {
    pub value: TowerScalar,
    pub ln_inv_eps: f64,
    pub ln_bracket: f64,
}

impl TStarKey {
    pub fn compare(&self, other: &Self) -> Ordering {
        self.value
            .compare(&other.value)
            .then(
                self.ln_inv_eps
                    .partial_cmp(&other.ln_inv_eps)
                    .unwrap_or(Ordering::Equal),
            )
            .then(
                self.ln_bracket
                    .partial_cmp(&other.ln_bracket)
                    .unwrap_or(Ordering::Equal),
            )
    }
}

/// `ln(ε κ1(ε))` and `ln(ε κ3(ε))`: the two ε-dependent branches of the
/// collection supremum, in log space.
fn ln_eps_kappa13(params: &ParamSet, eps: f64, ln_c: f64, kappa_star: f64) -> f64 {
    let (m, a) = (params.m, params.alpha);
    let up = ((1.0 - m) * eps.ln_1p()).exp_m1();
    let down = -((1.0 - m) * (-eps).ln_1p()).exp_m1();
    let k1 = (8f64.ln() + ln_c - up.ln())
        .max((3.0 - m) * 2f64.ln() + kappa_star.ln() - down.ln());
    let k3 = 8f64.ln() - a.ln() - down.ln();
    eps.ln() + k1.max(k3)
}

/// Collection step: the numerical constant
/// `c_star = sup_ε max{ε κ1, ε^a κ2, ε κ3}` and the threshold time
/// `t_star = c_star ε^{-a} (1 + A^{1-m} + G^{α/2})`.
///
/// The `ε^a κ2` branch is ε-independent by exact exponent cancellation and
/// is evaluated once; the other two branches are maximized on a log-spaced
/// grid of 10^4 points with golden-section refinement at the argmax.
#[allow(clippy::too_many_arguments)]
pub fn c_star_and_t_star(
    params: &ParamSet,
    eps: f64,
    eps_md: f64,
    a_tail: f64,
    g_energy: f64,
    c_const: &TowerScalar,
    kappa_star: f64,
    k_big: &TowerScalar,
    theta: &TowerScalar,
) -> Result<CStarOutput> {
    if !(eps > 0.0 && eps < eps_md) {
        return Err(Error::Domain(format!(
            "eps = {eps} outside the admissible interval (0, {eps_md})"
        )));
    }
    let (m, a) = (params.m, params.alpha);
    let ln_c = c_const
        .ln_abs_f64()
        .ok_or_else(|| Error::Overflow("waiting-time constant exceeds log range".into()))?;

    // a_exp = (α/ϑ)(2-m)/(1-m).
    let a_exp = TowerScalar::from_f64(a * (2.0 - m) / (1.0 - m))?
        .div(theta)?;
    // ε-free branch: (4α)^{α-1} K^{α/ϑ}.
    let kappa2_const = TowerScalar::from_f64((4.0 * a).powf(a - 1.0))?
        .mul(&k_big.pow(&TowerScalar::from_f64(a)?.div(theta)?)?)?;

    // Grid + golden-section maximization of the two ε-dependent branches.
    let lo = (eps_md * 1e-9).ln();
    let hi = (eps_md * (1.0 - 1e-9)).ln();
    let n = 10_000usize;
    let g = |x: f64| ln_eps_kappa13(params, x.exp(), ln_c, kappa_star);
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0usize;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let v = g(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut a_br = lo + step * best_i.saturating_sub(1) as f64;
    let mut b_br = (lo + step * (best_i + 1) as f64).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b_br - phi * (b_br - a_br), a_br + phi * (b_br - a_br));
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a_br = x1;
            x1 = x2;
            f1 = f2;
            x2 = a_br + phi * (b_br - a_br);
            f2 = g(x2);
        } else {
            b_br = x2;
            x2 = x1;
            f2 = f1;
            x1 = b_br - phi * (b_br - a_br);
            f1 = g(x1);
        }
    }
    let argmax_x = if f1 > f2 { x1 } else { x2 };
    let sup_ln = best.max(f1.max(f2));

    let c_star = kappa2_const.max(&TowerScalar::from_ln(sup_ln)?);

    // t_star = c_star ε^{-a} (1 + A^{1-m} + G^{α/2}).
    let bracket = 1.0 + a_tail.powf(1.0 - m) + g_energy.powf(a / 2.0);
    let eps_pow = TowerScalar::exp_of(
        &a_exp.mul(&TowerScalar::from_f64((1.0 / eps).ln())?)?,
    )?;
    let t_star = c_star.mul(&eps_pow)?.mul(&TowerScalar::from_f64(bracket)?)?;

    Ok(CStarOutput {
        c_star,
        a_exp,
        t_star,
        kappa2_const,
        sup_ln_eps_kappa13: sup_ln,
        argmax_eps: argmax_x.exp(),
    })
}

/// Full pipeline result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutput {
    pub report: ConstantReport,
    pub eps_md: f64,
    pub rho: RhoRadii,
    pub times: ThresholdTimes,
    pub c_star: CStarOutput,
    pub t_star_key: TStarKey,
}

/// Runs the whole pipeline deterministically and assembles the report.
pub fn pipeline(inputs: &ThresholdInputs) -> Result<ThresholdOutput> {
    let p = &inputs.params;
    let mut rep = ConstantReport::new();
    rep.input("d", p.d)?;
    rep.input("m", p.m)?;
    rep.input("eps", inputs.eps)?;
    rep.input("A", inputs.a_tail)?;
    rep.input("G", inputs.g_energy)?;
    rep.input("M_over", inputs.m_over)?;
    rep.input("C_dnu1", inputs.c_dnu1)?;
    rep.input("C_over", inputs.c_over)?;
    rep.input("C_under", inputs.c_under)?;
    let configured = Some("configured, not derived".to_string());

    let mass = p.barenblatt_mass()?;
    rep.push_f64("mass", "profile mass, closed form", mass, &["d", "m"], None)?;

    // Hölder machinery.
    let hc = HarnackConstants::compute(p, 1e-12)?;
    rep.push_f64(
        "sigma",
        "series sum with geometric tail bound",
        hc.sigma.value,
        &["d"],
        Some(format!("tail bound {:.3e}", hc.sigma.tail_bound)),
    )?;
    rep.push("c1_moser", "iteration constant", TowerScalar::from_ln(hc.c1_moser_ln)?, &["d", "m"], None)?;
    rep.push_f64("c2_log", "logarithmic-estimate constant", hc.c2_log, &["d"], None)?;
    rep.push("c0", "simplified front constant", hc.c0, &["d", "m"], None)?;
    rep.push(
        "log_h",
        "log of the intrinsic Harnack constant",
        hc.log_h,
        &["c0", "c2_log", "sigma"],
        None,
    )?;

    let lam = lambda_bounds(p, inputs.c_over, inputs.c_under)?;
    rep.push_f64(
        "lambda0",
        "lower ellipticity bound",
        lam.lambda0,
        &["C_over", "m"],
        configured.clone(),
    )?;
    rep.push_f64(
        "lambda1",
        "upper ellipticity bound",
        lam.lambda1,
        &["C_under", "m"],
        configured.clone(),
    )?;

    let log_hbar = hbar_log(&hc.log_h, lam.lambda0, lam.lambda1)?;
    rep.push("log_hbar", "rescaled Harnack log", log_hbar, &["log_h", "lambda0", "lambda1"], None)?;
    let nu = holder_exponent(&log_hbar)?;
    rep.push(
        "nu",
        "Hölder exponent",
        nu,
        &["log_hbar"],
        Some("expansion branch relative error <= 1/hbar when hbar is huge".into()),
    )?;
    let theta = theta_exponent(p.d, &nu)?;
    rep.push("theta", "interpolation exponent nu/(d+nu)", theta, &["nu"], None)?;

    // Smoothing/positivity/mass thresholds.
    let sc = smoothing_kappa_bar(p)?;
    rep.push("kbar", "smoothing constant (two routes cross-checked)", sc.kbar, &["d", "m"], None)?;
    let pos = positivity_constants(p, &sc.kbar)?;
    rep.push_f64("kappa_star", "outer positivity constant", pos.kappa_star, &["d", "m"], None)?;
    rep.push(
        "kappa",
        "inner positivity constant",
        TowerScalar::from_ln(pos.ln_kappa)?,
        &["kbar"],
        None,
    )?;
    let mt = mass_thresholds(p, &pos, mass, Some(inputs.m_over))?;
    rep.push(
        "m_under",
        "lower mass threshold",
        TowerScalar::from_ln(mt.ln_m_under)?,
        &["kappa", "kappa_star", "mass"],
        None,
    )?;
    rep.push_f64("eps_under", "lower accuracy threshold", mt.eps_under, &["m_under", "mass"], None)?;
    let eps_over = mt.eps_over.expect("m_over supplied");
    rep.push_f64(
        "eps_over",
        "upper accuracy threshold",
        eps_over,
        &["M_over", "mass"],
        configured.clone(),
    )?;
    rep.push_f64(
        "eps_md",
        "admissible accuracy bound min{eps_over, eps_under, 1/2}",
        mt.eps_md,
        &["eps_over", "eps_under"],
        Some(
            "tube admissibility also requires eps < chi*eta; chi follows the \
             dimension-dependent definition (1/322 if d >= 2), the scalar \
             variant m/(266+56m) is recorded here"
                .into(),
        ),
    )?;
    if !(inputs.eps > 0.0 && inputs.eps < mt.eps_md) {
        return Err(Error::Domain(format!(
            "eps = {} outside (0, eps_md = {})",
            inputs.eps, mt.eps_md
        )));
    }
    if inputs.eps >= p.chi * p.eta {
        return Err(Error::Domain(format!(
            "eps = {} violates the tube admissibility bound chi*eta = {}",
            inputs.eps,
            p.chi * p.eta
        )));
    }

    // Radii and times.
    let rho = rho_eps(p, inputs.eps, &mt)?;
    rep.push_f64("rho_under", "inner stabilization radius", rho.rho_under, &["eps", "eps_under"], None)?;
    rep.push_f64(
        "rho_over",
        "outer stabilization radius",
        rho.rho_over,
        &["eps", "m"],
        Some(format!(
            "sandwich [{:.6e}, {:.6e}]",
            rho.over_sandwich_lo, rho.over_sandwich_hi
        )),
    )?;
    rep.push_f64("rho", "max of the radii", rho.rho, &["rho_under", "rho_over"], None)?;
    let times = t_eps(p, inputs.eps, &sc.kbar, pos.kappa_star, inputs.a_tail)?;
    rep.push("T_under", "inner waiting time", times.t_under, &["eps", "A", "kappa_star"], None)?;
    rep.push("T_over", "outer waiting time", times.t_over, &["eps", "A", "kbar"], None)?;
    rep.push("T", "max of the waiting times", times.t_max, &["T_under", "T_over"], None)?;

    // Uniform-convergence constant and collection.
    let k_big = mathsf_k(p, &nu, &theta, inputs.c_dnu1, &sc.kbar, mass)?;
    rep.push(
        "K",
        "uniform-convergence constant",
        k_big,
        &["nu", "theta", "kbar", "mass", "C_dnu1"],
        configured,
    )?;
    let cs = c_star_and_t_star(
        p,
        inputs.eps,
        mt.eps_md,
        inputs.a_tail,
        inputs.g_energy,
        &times.c_const,
        pos.kappa_star,
        &k_big,
        &theta,
    )?;
    rep.push("a_exp", "threshold exponent (alpha/theta)(2-m)/(1-m)", cs.a_exp, &["theta"], None)?;
    rep.push(
        "c_star",
        "collection supremum",
        cs.c_star,
        &["K", "a_exp", "kappa_star", "T_over"],
        Some(format!(
            "eps-dependent branches peak at eps = {:.6e}",
            cs.argmax_eps
        )),
    )?;
    rep.push(
        "t_star",
        "threshold time",
        cs.t_star,
        &["c_star", "a_exp", "eps", "A", "G"],
        None,
    )?;

    let key = TStarKey {
        value: cs.t_star,
        ln_inv_eps: (1.0 / inputs.eps).ln(),
        ln_bracket: (1.0
            + inputs.a_tail.powf(1.0 - p.m)
            + inputs.g_energy.powf(p.alpha / 2.0))
        .ln(),
    };

    Ok(ThresholdOutput {
        report: rep,
        eps_md: mt.eps_md,
        rho,
        times,
        c_star: cs,
        t_star_key: key,
    })
}
