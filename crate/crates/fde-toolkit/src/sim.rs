//! Radial finite-volume solver for the fast-diffusion equation
//! `u_t = Δu^m` with zero-flux boundary, plus verification harnesses for the
//! local mass-displacement, upper/lower, reflection-principle, and
//! truncation-function bounds.

use serde::{Deserialize, Serialize};

use crate::entropy::barenblatt_evolved;
use crate::lognum::TowerScalar;
use crate::params::{omega_d, ParamSet};
use crate::radial::{uniform_grid, RadialField};
use crate::{Error, Result};

/// Regularization floor for the singular diffusivity `m u^{m-1}` at `u = 0`.
pub const U_FLOOR: f64 = 1e-14;

/// Time-step policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DtPolicy {
    /// Constant step.
    Fixed { dt: f64 },
    /// Accuracy-oriented adaptive step `cfl * h^2 / (2 d a_ref)` where
    /// `a_ref` is the diffusivity at the mean density (the implicit scheme
    /// is unconditionally stable, so this is an accuracy knob).
    CflAdaptive { cfl: f64, dt_max: f64 },
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub d: u32,
    pub m: f64,
    pub r_max: f64,
    /// Number of grid nodes.
    pub n: usize,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 || !(self.m > 0.0 && self.m < 1.0) {
            return Err(Error::Domain(format!(
                "need d >= 1 and m in (0,1), got d = {}, m = {}",
                self.d, self.m
            )));
        }
        if !(self.r_max > 0.0) || self.n < 16 || !(self.t_end > 0.0) {
            return Err(Error::Domain("need r_max > 0, n >= 16, t_end > 0".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.r_max, self.n)
    }
}

/// Time-indexed snapshots with the mass series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub config: SolverConfig,
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialField>,
    pub mass_series: Vec<f64>,
}

impl Solution {
    /// Snapshot at time `t` (must match a stored time to 1e-9 relative).
    pub fn at_time(&self, t: f64) -> Result<&RadialField> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|i| &self.snapshots[i])
            .ok_or_else(|| Error::Domain(format!("no snapshot at t = {t}")))
    }
}

/// Mass inside the ball of radius `rho` (trapezoid with linear interpolation
/// at the cut radius).
pub fn ball_mass(u: &RadialField, rho: f64) -> f64 {
    let w = omega_d(u.d);
    let p = u.d as i32 - 1;
    let weight = |r: f64, v: f64| if u.d == 1 { v } else { v * r.powi(p) };
    let mut acc = 0.0;
    for i in 1..u.grid.len() {
        let (r0, r1) = (u.grid[i - 1], u.grid[i]);
        if r0 >= rho {
            break;
        }
        let f0 = weight(r0, u.values[i - 1]);
        if r1 <= rho {
            acc += 0.5 * (f0 + weight(r1, u.values[i])) * (r1 - r0);
        } else {
            let s = (rho - r0) / (r1 - r0);
            let vmid = u.values[i - 1] + s * (u.values[i] - u.values[i - 1]);
            acc += 0.5 * (f0 + weight(rho, vmid)) * (rho - r0);
        }
    }
    w * acc
}

/// Finite-volume cell volumes for the uniform grid (cells centered at the
/// nodes, with the half-cells at the ends).
fn cell_volumes(d: u32, grid: &[f64]) -> Vec<f64> {
    let w = omega_d(d);
    let n = grid.len();
    let h = grid[1] - grid[0];
    let dd = d as f64;
    let mut vol = vec![0.0; n];
    for (i, v) in vol.iter_mut().enumerate() {
        let lo = if i == 0 { 0.0 } else { grid[i] - 0.5 * h };
        let hi = if i == n - 1 { grid[i] } else { grid[i] + 0.5 * h };
        *v = w * (hi.powf(dd) - lo.powf(dd)) / dd;
    }
    vol
}

/// Tridiagonal solve (Thomas algorithm); `a` sub-, `b` main, `c` super-.
fn thomas(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = rhs[0] / b[0];
    for i in 1..n {
        let denom = b[i] - a[i] * cp[i - 1];
        cp[i] = if i < n - 1 { c[i] / denom } else { 0.0 };
        dp[i] = (rhs[i] - a[i] * dp[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

/// One implicit step of size `dt` with Picard-lagged diffusivity. Returns
/// `None` when the Picard iteration stalls.
fn implicit_step(
    d: u32,
    m: f64,
    grid: &[f64],
    vol: &[f64],
    u: &[f64],
    dt: f64,
) -> Option<Vec<f64>> {
    let n = grid.len();
    let h = grid[1] - grid[0];
    let w = omega_d(d);
    let p = d as f64 - 1.0;
    let mut cur = u.to_vec();
    for _ in 0..60 {
        // Face diffusivities from the current Picard iterate.
        let mut sub = vec![0.0; n];
        let mut main = vec![0.0; n];
        let mut sup = vec![0.0; n];
        for i in 0..n {
            main[i] = vol[i] / dt;
        }
        for i in 0..n - 1 {
            let rf = 0.5 * (grid[i] + grid[i + 1]);
            let area = w * rf.powf(p);
            let af = 0.5
                * m
                * (cur[i].max(U_FLOOR).powf(m - 1.0) + cur[i + 1].max(U_FLOOR).powf(m - 1.0));
            let k = area * af / h;
            main[i] += k;
            main[i + 1] += k;
            sup[i] -= k;
            sub[i + 1] -= k;
        }
        let rhs: Vec<f64> = u.iter().zip(vol).map(|(&x, &v)| x * v / dt).collect();
        let next = thomas(&sub, &main, &sup, &rhs);
        let mut delta = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            delta = delta.max((next[i] - cur[i]).abs());
            scale = scale.max(next[i].abs());
        }
        cur = next;
        if delta <= 1e-12 * scale.max(1e-300) {
            return Some(cur);
        }
    }
    None
}

/// Evolves `u0` (sampled on the solver grid) recording snapshots at the
/// requested times. `snapshot_times` must be increasing and end at or before
/// `t_end`; `t = 0` is always recorded.
pub fn evolve(config: &SolverConfig, u0: &RadialField, snapshot_times: &[f64]) -> Result<Solution> {
    config.validate()?;
    let grid = config.grid();
    if u0.grid.len() != grid.len()
        || u0
            .grid
            .iter()
            .zip(&grid)
            .any(|(&a, &b)| (a - b).abs() > 1e-12 * config.r_max)
    {
        return Err(Error::Domain("initial datum must be sampled on the solver grid".into()));
    }
    if u0.values.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::NonPositivity("initial datum must be nonnegative and finite".into()));
    }
    if !snapshot_times.windows(2).all(|w| w[1] > w[0])
        || snapshot_times.last().is_some_and(|&t| t > config.t_end * (1.0 + 1e-12))
        || snapshot_times.first().is_some_and(|&t| t <= 0.0)
    {
        return Err(Error::Domain("snapshot times must be increasing in (0, t_end]".into()));
    }
    let vol = cell_volumes(config.d, &grid);
    let h = grid[1] - grid[0];
    let total_vol: f64 = vol.iter().sum();

    let mut u = u0.values.clone();
    let mut t = 0.0f64;
    let mut times = vec![0.0];
    let mut snaps = vec![u0.clone()];
    let mut masses = vec![u.iter().zip(&vol).map(|(&x, &v)| x * v).sum::<f64>()];

    for &target in snapshot_times {
        while t < target * (1.0 - 1e-14) {
            let mass: f64 = u.iter().zip(&vol).map(|(&x, &v)| x * v).sum();
            let mut dt = match config.dt_policy {
                DtPolicy::Fixed { dt } => dt,
                DtPolicy::CflAdaptive { cfl, dt_max } => {
                    let mean = (mass / total_vol).max(U_FLOOR);
                    let a_ref = config.m * mean.powf(config.m - 1.0);
                    (cfl * h * h / (2.0 * config.d as f64 * a_ref)).min(dt_max)
                }
            };
            dt = dt.min(target - t);
            let mut halvings = 0;
            let next = loop {
                match implicit_step(config.d, config.m, &grid, &vol, &u, dt) {
                    Some(v) => break v,
                    None => {
                        halvings += 1;
                        if halvings > 40 {
                            return Err(Error::Stability(format!(
                                "step rejection cascade at t = {t}"
                            )));
                        }
                        dt *= 0.5;
                    }
                }
            };
            if next.iter().any(|&x| x < -1e-12 || !x.is_finite()) {
                return Err(Error::NonPositivity(format!(
                    "solution lost nonnegativity at t = {}",
                    t + dt
                )));
            }
            u = next.into_iter().map(|x| x.max(0.0)).collect();
            t += dt;
        }
        t = target;
        times.push(t);
        snaps.push(RadialField { d: config.d, grid: grid.clone(), values: u.clone() });
        masses.push(u.iter().zip(&vol).map(|(&x, &v)| x * v).sum::<f64>());
    }

    Ok(Solution { config: *config, times, snapshots: snaps, mass_series: masses })
}

/// Pass/fail record for one inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` (nonnegative slack means the inequality holds).
    pub slack: f64,
    /// Discretization/quadrature error bar; a check only fails when the
    /// inequality is violated beyond this bar.
    pub error_bar: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl Verdict {
    fn upper_bound(name: &str, lhs: f64, rhs: f64, bar: f64) -> Self {
        Verdict {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            error_bar: bar,
            pass: lhs <= rhs + bar,
            notes: Vec::new(),
        }
    }
}

/// Discretization error bar used by the integral verdicts: the trapezoid
/// estimate from every-other-node coarsening plus a 0.5% solver allowance.
fn integral_bar(u: &RadialField, rho: f64) -> f64 {
    let coarse = RadialField {
        d: u.d,
        grid: u.grid.iter().copied().step_by(2).collect(),
        values: u.values.iter().copied().step_by(2).collect(),
    };
    let fine = ball_mass(u, rho);
    (fine - ball_mass(&coarse, rho)).abs() / 3.0 + 5e-3 * fine.abs()
}

/// Mass-displacement check:
/// `∫_{B_2R} u(t) <= 2^{m/(1-m)} ∫_{B_{2R+r}} u(τ) + c3 |t-τ|^{1/(1-m)} / r^{α/(1-m)}`.
pub fn verify_herrero_pierre(
    sol: &Solution,
    params: &ParamSet,
    big_r: f64,
    r: f64,
    t: f64,
    tau: f64,
    rho0: f64,
) -> Result<Verdict> {
    if rho0 * r < 2.0 * big_r {
        return Err(Error::Hypothesis(format!(
            "need rho0 r >= 2R, got {rho0} * {r} < {}",
            2.0 * big_r
        )));
    }
    let m = params.m;
    let ut = sol.at_time(t)?;
    let utau = sol.at_time(tau)?;
    let lhs = ball_mass(ut, 2.0 * big_r);
    let c3 = crate::fde_bounds::herrero_pierre_c3(params, rho0)?
        .to_f64();
    let tail = if t == tau {
        0.0
    } else {
        c3 * (t - tau).abs().powf(1.0 / (1.0 - m))
            / r.powf(params.alpha / (1.0 - m))
    };
    let rhs = 2f64.powf(m / (1.0 - m)) * ball_mass(utau, 2.0 * big_r + r) + tail;
    let bar = integral_bar(ut, 2.0 * big_r) + integral_bar(utau, 2.0 * big_r + r);
    Ok(Verdict::upper_bound("mass-displacement", lhs, rhs, bar))
}

/// Local upper bound:
/// `sup_{B_{R/2}} u(t) <= kbar (t^{-d/α} (∫_{B_R} u0)^{2/α} + (t/R^2)^{1/(1-m)})`.
pub fn verify_local_upper(
    sol: &Solution,
    params: &ParamSet,
    big_r: f64,
    t: f64,
    kbar: &TowerScalar,
) -> Result<Verdict> {
    let ut = sol.at_time(t)?;
    let u0 = &sol.snapshots[0];
    let (d, m, a) = (params.d as f64, params.m, params.alpha);
    let sup = ut
        .grid
        .iter()
        .zip(&ut.values)
        .filter(|(&r, _)| r <= 0.5 * big_r)
        .map(|(_, &v)| v)
        .fold(0.0f64, f64::max);
    let mass0 = ball_mass(u0, big_r);
    let bracket = t.powf(-d / a) * mass0.powf(2.0 / a)
        + (t / (big_r * big_r)).powf(1.0 / (1.0 - m));
    // kbar can exceed f64 range; compare in log space.
    let ln_kbar = kbar
        .ln_abs_f64()
        .ok_or_else(|| Error::Overflow("smoothing constant exceeds log range".into()))?;
    let ln_rhs = ln_kbar + bracket.ln();
    let lhs = sup.max(U_FLOOR);
    let mut v = Verdict::upper_bound("local-upper", lhs.ln(), ln_rhs, 1e-2);
    v.notes.push("compared in log space".into());
    Ok(v)
}

/// Local lower bound: `inf_{|x| <= R} u(t) >= κ (R^{-2} t)^{1/(1-m)}` for
/// `t in [0, 2 t_under]`, `t_under = κ⋆ M_R^{1-m} R^α / 2`.
pub fn verify_local_lower(
    sol: &Solution,
    params: &ParamSet,
    big_r: f64,
    t: f64,
    ln_kappa: f64,
    kappa_star: f64,
) -> Result<Verdict> {
    let u0 = &sol.snapshots[0];
    let m = params.m;
    let mass_r = ball_mass(u0, big_r);
    if !(mass_r > 0.0) {
        return Err(Error::Hypothesis("need M_R > 0".into()));
    }
    let t_under = 0.5 * kappa_star * mass_r.powf(1.0 - m) * big_r.powf(params.alpha);
    if !(0.0..=2.0 * t_under).contains(&t) {
        return Err(Error::Window(format!(
            "t = {t} outside the admissible window [0, {}]",
            2.0 * t_under
        )));
    }
    let ut = sol.at_time(t)?;
    let inf = ut
        .grid
        .iter()
        .zip(&ut.values)
        .filter(|(&r, _)| r <= big_r)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let ln_rhs = ln_kappa + (t / (big_r * big_r)).ln() / (1.0 - m);
    let ln_lhs = inf.max(U_FLOOR).ln();
    let mut v = Verdict::upper_bound("local-lower", ln_rhs, ln_lhs, 1e-2);
    v.name = "local-lower".into();
    v.notes.push(format!("t_under = {t_under:.6e}; compared in log space"));
    Ok(v)
}

/// Reflection-principle mean-value bound: for data supported in `B_R` and
/// `λ > 2`, the center value dominates the average over the annulus
/// `D = B_{λR} \ B_{2R}`.
pub fn verify_aleksandrov(
    sol: &Solution,
    big_r: f64,
    lambda: f64,
    t: f64,
) -> Result<Verdict> {
    if lambda <= 2.0 {
        return Err(Error::Domain(format!(
            "annulus is empty unless lambda > 2, got {lambda}"
        )));
    }
    let u0 = &sol.snapshots[0];
    for (&r, &v) in u0.grid.iter().zip(&u0.values) {
        if r > big_r && v > 1e-12 {
            return Err(Error::Support(format!(
                "initial datum leaks outside B_R: u0({r}) = {v}"
            )));
        }
    }
    let ut = sol.at_time(t)?;
    let d = ut.d as f64;
    let annulus_mass = ball_mass(ut, lambda * big_r) - ball_mass(ut, 2.0 * big_r);
    let annulus_vol =
        omega_d(ut.d) / d * ((lambda * big_r).powf(d) - (2.0 * big_r).powf(d));
    let avg = annulus_mass / annulus_vol;
    let center = ut.values[0];
    let bar = integral_bar(ut, lambda * big_r) / annulus_vol + 5e-3 * center;
    Ok(Verdict::upper_bound("reflection-mean-value", avg, center, bar))
}

/// Quadratic cut-off `φ_{R1,R0}`: 1 inside `B_{R1}`, 0 outside `B_{R0}`,
/// with the two parabolic blends meeting at the midpoint. Returns
/// `(φ, |∇φ|, Δφ)` evaluated exactly from the closed forms.
pub fn truncation_phi(r1: f64, r0: f64, x_radius: f64, d: u32) -> Result<(f64, f64, f64)> {
    if !(0.0 < r1 && r1 < r0) {
        return Err(Error::Domain(format!("need 0 < R1 < R0, got ({r1}, {r0})")));
    }
    let r = x_radius;
    let w2 = (r0 - r1) * (r0 - r1);
    let mid = 0.5 * (r0 + r1);
    let dm1 = (d - 1) as f64;
    if r <= r1 {
        Ok((1.0, 0.0, 0.0))
    } else if r <= mid {
        let phi = 1.0 - 2.0 * (r - r1) * (r - r1) / w2;
        let dphi = -4.0 * (r - r1) / w2;
        let lap = -4.0 / w2 - dm1 * 4.0 * (r - r1) / (r * w2);
        Ok((phi, dphi.abs(), lap))
    } else if r < r0 {
        let phi = 2.0 * (r - r0) * (r - r0) / w2;
        let dphi = 4.0 * (r - r0) / w2; // negative: r < r0
        let lap = 4.0 / w2 + dm1 * 4.0 * (r - r0) / (r * w2);
        Ok((phi, dphi.abs(), lap))
    } else {
        Ok((0.0, 0.0, 0.0))
    }
}

/// Samples the cut-off on `sample_count` radii and asserts the closed-form
/// sup bounds `‖∇φ‖ <= 2/(R0-R1)` and `‖Δφ‖ <= 4d/(R0-R1)^2`.
pub fn verify_truncation_bounds(
    r1: f64,
    r0: f64,
    d: u32,
    sample_count: usize,
) -> Result<Verdict> {
    let mut sup_grad = 0.0f64;
    let mut sup_lap = 0.0f64;
    let r_hi = 1.25 * r0;
    for i in 0..sample_count {
        let r = r_hi * (i as f64 + 0.5) / sample_count as f64;
        let (_, g, l) = truncation_phi(r1, r0, r, d)?;
        sup_grad = sup_grad.max(g);
        sup_lap = sup_lap.max(l.abs());
    }
    let grad_bound = 2.0 / (r0 - r1);
    let lap_bound = 4.0 * d as f64 / ((r0 - r1) * (r0 - r1));
    let pass = sup_grad <= grad_bound && sup_lap <= lap_bound;
    Ok(Verdict {
        name: "truncation-bounds".into(),
        lhs: sup_grad / grad_bound,
        rhs: sup_lap / lap_bound,
        slack: (grad_bound - sup_grad).min(lap_bound - sup_lap),
        error_bar: 0.0,
        pass,
        notes: vec![format!(
            "sup|grad| = {sup_grad:.6e} (bound {grad_bound:.6e}); sup|lap| = {sup_lap:.6e} (bound {lap_bound:.6e})"
        )],
    })
}

/// Scenario file: `{d, m, grid: {r_max, n}, times, initial: {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub d: u32,
    pub m: f64,
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub initial: InitialData,
    #[serde(default)]
    pub dt_policy: Option<DtPolicy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitialData {
    /// Self-similar profile launched at internal time `t0 > 0`.
    Barenblatt { t0: f64 },
    /// `height (1 - (r/radius)^2)_+^power` — compactly supported bump.
    Bump { radius: f64, height: f64, power: f64 },
    /// Profile read from a `r,value` CSV file.
    Csv { path: String },
}

impl Scenario {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            d: self.d,
            m: self.m,
            r_max: self.grid.r_max,
            n: self.grid.n,
            dt_policy: self.dt_policy.unwrap_or(DtPolicy::CflAdaptive {
                cfl: 0.5,
                dt_max: 1e-2,
            }),
            t_end: self.times.last().copied().unwrap_or(1.0),
        }
    }

    pub fn initial_field(&self, params: &ParamSet) -> Result<RadialField> {
        let grid = self.solver_config().grid();
        match &self.initial {
            InitialData::Barenblatt { t0 } => {
                if !(*t0 > 0.0) {
                    return Err(Error::Domain("profile launch time must be positive".into()));
                }
                RadialField::from_fn(self.d, grid, |r| {
                    barenblatt_evolved(r, *t0, params).unwrap_or(0.0)
                })
            }
            InitialData::Bump { radius, height, power } => {
                let (radius, height, power) = (*radius, *height, *power);
                if !(radius > 0.0 && height > 0.0 && power >= 1.0) {
                    return Err(Error::Domain("bump needs radius, height > 0 and power >= 1".into()));
                }
                RadialField::from_fn(self.d, grid, move |r| {
                    let s = 1.0 - (r / radius) * (r / radius);
                    if s > 0.0 { height * s.powf(power) } else { 0.0 }
                })
            }
            InitialData::Csv { path } => {
                let file = std::fs::File::open(path)?;
                let src = RadialField::read_csv(self.d, std::io::BufReader::new(file))?;
                // Re-sample onto the solver grid by linear interpolation.
                RadialField::from_fn(self.d, grid, |r| interp_linear(&src, r))
            }
        }
    }

    pub fn run(&self, params: &ParamSet) -> Result<Solution> {
        let u0 = self.initial_field(params)?;
        evolve(&self.solver_config(), &u0, &self.times)
    }
}

fn interp_linear(f: &RadialField, r: f64) -> f64 {
    if r <= f.grid[0] {
        return f.values[0];
    }
    if r >= *f.grid.last().unwrap() {
        return *f.values.last().unwrap();
    }
    let i = f.grid.partition_point(|&x| x < r);
    let (r0, r1) = (f.grid[i - 1], f.grid[i]);
    let s = (r - r0) / (r1 - r0);
    f.values[i - 1] + s * (f.values[i] - f.values[i - 1])
}
