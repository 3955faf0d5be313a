//! Self-similar profiles, the four entropy functionals by radial quadrature,
//! and the improved entropy–entropy-production machinery (`s1`, `s2`, `f`,
//! tube verdicts).

use serde::{Deserialize, Serialize};

use crate::params::ParamSet;
use crate::radial::{derivative_on_grid, stretched_grid, RadialField};
use crate::{Error, Result};

/// A quadrature value with a Richardson (grid-halving) error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadValue {
    pub value: f64,
    /// Estimated absolute discretization error.
    pub error: f64,
}

/// Static profile `(1 + r^2)^{1/(m-1)}`.
pub fn barenblatt_static(r: f64, params: &ParamSet) -> f64 {
    (1.0 + r * r).powf(1.0 / (params.m - 1.0))
}

/// Time-shifted self-similar profile
/// `t^{1/(1-m)}/b^{α/(1-m)} (t^{2/α}/b^2 + r^2)^{1/(m-1)}`.
pub fn barenblatt_evolved(r: f64, t: f64, params: &ParamSet) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "time-dependent profile needs t > 0, got {t}"
        )));
    }
    let (m, a, b) = (params.m, params.alpha, params.b_const);
    Ok(t.powf(1.0 / (1.0 - m)) / b.powf(a / (1.0 - m))
        * (t.powf(2.0 / a) / (b * b) + r * r).powf(1.0 / (m - 1.0)))
}

/// Quadrature grid: uniform core, geometric stretching, and `r_max` chosen
/// from the closed-form power-law tail bound so that the neglected tail of
/// the slowest-decaying integrand is below `1e-10` relative. Valid for
/// `m > d/(d+2)` (otherwise the profile mass itself diverges).
pub fn reference_grid(params: &ParamSet, h0: f64) -> Result<Vec<f64>> {
    let d = params.d as f64;
    let m = params.m;
    if m <= d / (d + 2.0) {
        return Err(Error::Domain(format!(
            "quadrature tail bound needs m > d/(d+2), got m = {m}, d = {d}"
        )));
    }
    if !(h0 > 0.0 && h0 < 1.0) {
        return Err(Error::Domain("core spacing must lie in (0,1)".into()));
    }
    // Slowest-decaying integrands handled here behave like r^p with
    // p = d - 1 + 4 - 2(2-m)/(1-m)  (weight B^{2-m} against g^2 ~ r^4)
    // or p = d - 1 - 2m/(1-m)        (profile power B^m).
    let p = (d + 3.0 - 2.0 * (2.0 - m) / (1.0 - m)).max(d - 1.0 - 2.0 * m / (1.0 - m));
    if p >= -1.0 {
        return Err(Error::Domain(format!(
            "tail exponent {p} not integrable for d = {d}, m = {m}"
        )));
    }
    // tail(R) ~ R^{p+1}/|p+1| <= 1e-10  (the compared integrals are O(1)).
    let r_max = (1e10 / (-p - 1.0)).powf(-1.0 / (p + 1.0)).max(16.0);
    Ok(stretched_grid(2.0, h0, 1.02, r_max))
}

/// Every-other-node coarsening (always keeps the endpoints) for Richardson
/// error estimates.
fn coarsen(field: &RadialField) -> RadialField {
    let n = field.grid.len();
    let mut grid = Vec::with_capacity(n / 2 + 2);
    let mut values = Vec::with_capacity(n / 2 + 2);
    for i in (0..n).step_by(2) {
        grid.push(field.grid[i]);
        values.push(field.values[i]);
    }
    if n % 2 == 0 {
        grid.push(field.grid[n - 1]);
        values.push(field.values[n - 1]);
    }
    RadialField { d: field.d, grid, values }
}

/// Composite-trapezoid order: halving the spacing scales the error by 4,
/// so `|I_h - I_{2h}|/3` estimates the fine-grid error.
fn richardson(fine: f64, coarse: f64) -> QuadValue {
    QuadValue { value: fine, error: (fine - coarse).abs() / 3.0 }
}

/// Requires `v` to stay inside a multiplicative envelope of the profile:
/// `v in [c1 B, c2 B]` with `0 < c1 <= c2` and a bounded dynamic range.
fn tube_envelope(v: &RadialField, params: &ParamSet) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&r, &x) in v.grid.iter().zip(&v.values) {
        let ratio = x / barenblatt_static(r, params);
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(Error::Decay(format!(
                "value {x} at r = {r} is not comparable to the profile"
            )));
        }
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    if hi / lo > 1e8 {
        return Err(Error::Decay(format!(
            "envelope ratio {:.3e} too wide: integrand uncontrolled past the grid",
            hi / lo
        )));
    }
    Ok((lo, hi))
}

fn free_energy_on(v: &RadialField, params: &ParamSet) -> f64 {
    let m = params.m;
    v.integrate_with(|i, r| {
        let b = barenblatt_static(r, params);
        let x = v.values[i];
        (x.powf(m) - b.powf(m) - m * b.powf(m - 1.0) * (x - b)) / (m - 1.0)
    })
}

/// Relative entropy (free energy)
/// `F[v] = 1/(m-1) ∫ (v^m - B^m - m B^{m-1}(v - B))`.
pub fn free_energy(v: &RadialField, params: &ParamSet) -> Result<QuadValue> {
    tube_envelope(v, params)?;
    let fine = free_energy_on(v, params);
    let coarse = free_energy_on(&coarsen(v), params);
    Ok(richardson(fine, coarse))
}

fn fisher_on(v: &RadialField, params: &ParamSet) -> f64 {
    let m = params.m;
    let vm1: Vec<f64> = v.values.iter().map(|&x| x.powf(m - 1.0)).collect();
    let bm1: Vec<f64> = v
        .grid
        .iter()
        .map(|&r| barenblatt_static(r, params).powf(m - 1.0))
        .collect();
    // Both pressure gradients are taken with the same discrete stencil, so
    // the identity case v = B yields exactly zero.
    let dv = derivative_on_grid(&v.grid, &vm1);
    let db = derivative_on_grid(&v.grid, &bm1);
    let mm = m / (1.0 - m);
    v.integrate_with(|i, _| {
        let diff = dv[i] - db[i];
        mm * v.values[i] * diff * diff
    })
}

/// Fisher information `I[v] = m/(1-m) ∫ v |∇v^{m-1} - ∇B^{m-1}|^2`.
pub fn fisher_information(v: &RadialField, params: &ParamSet) -> Result<QuadValue> {
    tube_envelope(v, params)?;
    let fine = fisher_on(v, params);
    let coarse = fisher_on(&coarsen(v), params);
    Ok(richardson(fine, coarse))
}

fn linearized_on(g: &RadialField, params: &ParamSet) -> (f64, f64) {
    let m = params.m;
    let f_lin = g.integrate_with(|i, r| {
        let b = barenblatt_static(r, params);
        0.5 * m * g.values[i] * g.values[i] * b.powf(2.0 - m)
    });
    let dg = derivative_on_grid(&g.grid, &g.values);
    let i_lin = g.integrate_with(|i, r| {
        m * (1.0 - m) * dg[i] * dg[i] * barenblatt_static(r, params)
    });
    (f_lin, i_lin)
}

/// Quadratic forms `F[g] = m/2 ∫ |g|^2 B^{2-m}` and
/// `I[g] = m(1-m) ∫ |∇g|^2 B`.
pub fn linearized_functionals(g: &RadialField, params: &ParamSet) -> Result<(QuadValue, QuadValue)> {
    let (ff, fi) = linearized_on(g, params);
    let c = coarsen(g);
    let (cf, ci) = linearized_on(&c, params);
    Ok((richardson(ff, cf), richardson(fi, ci)))
}

/// Weighted mean `∫ g B^{2-m}` used by the orthogonality precondition.
pub fn weighted_mean_moment(g: &RadialField, params: &ParamSet) -> f64 {
    g.integrate_with(|i, r| {
        g.values[i] * barenblatt_static(r, params).powf(2.0 - params.m)
    })
}

/// Constrained evaluation: checks the mean-zero precondition
/// `∫ g B^{2-m} = 0` (within `tol`, relative to `∫ |g| B^{2-m}`), then
/// returns `(F[g], I[g], I/F)`.
pub fn hardy_poincare_check(
    g: &RadialField,
    params: &ParamSet,
    tol: f64,
) -> Result<(QuadValue, QuadValue, f64)> {
    let moment = weighted_mean_moment(g, params);
    let scale = g.integrate_with(|i, r| {
        g.values[i].abs() * barenblatt_static(r, params).powf(2.0 - params.m)
    });
    if moment.abs() > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Tolerance(format!(
            "mean-zero precondition violated: moment = {moment:.3e}, scale = {scale:.3e}"
        )));
    }
    let (f_lin, i_lin) = linearized_functionals(g, params)?;
    if f_lin.value <= 0.0 {
        return Err(Error::Tolerance("quadratic form vanished; ratio undefined".into()));
    }
    Ok((f_lin, i_lin, i_lin.value / f_lin.value))
}

/// The improvement coefficients (`a = 2 - m` throughout).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub s1: f64,
    pub s2: f64,
    pub f: f64,
}

/// `s1 = (1+ε)^{2a}/(1-ε)`,
/// `s2 = (2d/m)(1-m)^2 ((1+ε)^{2a}/(1-ε)^{2a} - 1)`,
/// `f = (4α(1-ε)^a - 4 s1 - (1+ε)^a s2)/s1`, evaluated exactly (no range
/// shortcuts; the crude bounds `4α <= 8`, `(d/m)(1-m)^2 <= 1` are not used).
pub fn improvement_functions(eps: f64, params: &ParamSet) -> Result<Improvement> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Domain(format!("eps = {eps} outside [0, 1/2)")));
    }
    let (m, alpha) = (params.m, params.alpha);
    let d = params.d as f64;
    let a = 2.0 - m;
    let s1 = (1.0 + eps).powf(2.0 * a) / (1.0 - eps);
    let s2 = (2.0 * d / m)
        * (1.0 - m)
        * (1.0 - m)
        * (((1.0 + eps) / (1.0 - eps)).powf(2.0 * a) - 1.0);
    let f = (4.0 * alpha * (1.0 - eps).powf(a) - 4.0 * s1 - (1.0 + eps).powf(a) * s2) / s1;
    Ok(Improvement { s1, s2, f })
}

/// Concavity helper `g(ε) = 1 - (1-ε)^{1+a}/(1+ε)^{2a}`.
pub fn helper_g(eps: f64, params: &ParamSet) -> f64 {
    let a = 2.0 - params.m;
    1.0 - (1.0 - eps).powf(1.0 + a) / (1.0 + eps).powf(2.0 * a)
}

/// Convexity helper `h(ε) = ((1-ε)/(1+ε)^a)((1+ε)^{2a}/(1-ε)^{2a} - 1)`.
pub fn helper_h(eps: f64, params: &ParamSet) -> f64 {
    let a = 2.0 - params.m;
    (1.0 - eps) / (1.0 + eps).powf(a)
        * (((1.0 + eps) / (1.0 - eps)).powf(2.0 * a) - 1.0)
}

/// Verdict of the improved entropy–entropy-production check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EepVerdict {
    /// Tube width after mass renormalization.
    pub eps_effective: f64,
    /// Multiplicative mass-renormalization factor applied to `v`.
    pub mass_scale: f64,
    pub free_energy: QuadValue,
    pub fisher: QuadValue,
    /// `I/F`; `None` in the vacuous identity case `F = 0`.
    pub ratio: Option<f64>,
    /// `4 + η`.
    pub threshold: f64,
    pub pass: bool,
    pub vacuous: bool,
    pub f_lin: QuadValue,
    pub i_lin: QuadValue,
    /// `(1+ε)^{-a} F_lin <= F <= (1-ε)^{-a} F_lin` within error bars.
    pub entropy_sandwich_pass: bool,
    /// `I_lin <= s1 I + s2 F_lin` within error bars.
    pub fisher_sandwich_pass: bool,
}

/// Checks `I[v] >= (4+η) F[v]` for `v` inside the `(1±ε)B` tube, together
/// with the entropy and Fisher sandwiches against the quadratic forms of
/// `g = v B^{m-2} - B^{m-1}`. The profile mass is matched by multiplicative
/// renormalization; the adjusted tube width is recorded.
pub fn eep_check(v: &RadialField, eps_tube: f64, params: &ParamSet) -> Result<EepVerdict> {
    if !(eps_tube > 0.0 && eps_tube < params.chi * params.eta) {
        return Err(Error::Domain(format!(
            "tube width {eps_tube} outside (0, chi*eta = {})",
            params.chi * params.eta
        )));
    }
    for (&r, &x) in v.grid.iter().zip(&v.values) {
        let b = barenblatt_static(r, params);
        if x < (1.0 - eps_tube) * b || x > (1.0 + eps_tube) * b {
            return Err(Error::Tube(format!(
                "v exits the (1±{eps_tube})B tube at r = {r}: v = {x}, B = {b}"
            )));
        }
    }
    // Mass renormalization against the same-grid quadrature of the profile.
    let b_field = RadialField::from_fn(v.d, v.grid.clone(), |r| barenblatt_static(r, params))?;
    let mass_scale = b_field.integrate() / v.integrate();
    let v_scaled = RadialField {
        d: v.d,
        grid: v.grid.clone(),
        values: v.values.iter().map(|&x| x * mass_scale).collect(),
    };
    let mut eps_eff = 0.0f64;
    for (&r, &x) in v_scaled.grid.iter().zip(&v_scaled.values) {
        eps_eff = eps_eff.max((x / barenblatt_static(r, params) - 1.0).abs());
    }

    let m = params.m;
    let a = 2.0 - m;
    let fe = free_energy(&v_scaled, params)?;
    let fi = fisher_information(&v_scaled, params)?;
    let g = RadialField {
        d: v.d,
        grid: v.grid.clone(),
        values: v_scaled
            .grid
            .iter()
            .zip(&v_scaled.values)
            .map(|(&r, &x)| {
                let b = barenblatt_static(r, params);
                x * b.powf(m - 2.0) - b.powf(m - 1.0)
            })
            .collect(),
    };
    let (f_lin, i_lin) = linearized_functionals(&g, params)?;

    let threshold = 4.0 + params.eta;
    let vacuous = fe.value <= fe.error;
    let ratio = if vacuous { None } else { Some(fi.value / fe.value) };
    // Fail only when violated beyond the error bars.
    let pass = vacuous || fi.value + fi.error >= threshold * (fe.value - fe.error);

    let sandwich_lo = (1.0 + eps_eff).powf(-a) * f_lin.value;
    let sandwich_hi = (1.0 - eps_eff).powf(-a) * f_lin.value;
    let bar = fe.error + f_lin.error;
    let entropy_sandwich_pass =
        fe.value >= sandwich_lo - bar && fe.value <= sandwich_hi + bar;
    let imp = improvement_functions(eps_eff.min(0.499), params)?;
    let fisher_sandwich_pass = i_lin.value
        <= imp.s1 * fi.value + imp.s2 * f_lin.value + i_lin.error + fi.error + f_lin.error;

    Ok(EepVerdict {
        eps_effective: eps_eff,
        mass_scale,
        free_energy: fe,
        fisher: fi,
        ratio,
        threshold,
        pass,
        vacuous,
        f_lin,
        i_lin,
        entropy_sandwich_pass,
        fisher_sandwich_pass,
    })
}
