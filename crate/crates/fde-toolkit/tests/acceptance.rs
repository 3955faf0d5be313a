//! Acceptance gate: one test per top-level criterion, each printing a single
//! pass line (run with `--nocapture` to see them; a failing assertion shows
//! the criterion that broke).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fde_toolkit::cli::run_suite;
use fde_toolkit::entropy::{
    barenblatt_static, eep_check, fisher_information, free_energy, hardy_poincare_check,
    improvement_functions, linearized_functionals, reference_grid, weighted_mean_moment,
};
use fde_toolkit::fde_bounds::{positivity_constants, smoothing_kappa_bar};
use fde_toolkit::gn_disk::{find_a_star, optimal_constant, shoot};
use fde_toolkit::harnack::{holder_exponent, log_estimate_c2, sigma_series};
use fde_toolkit::lognum::TowerScalar;
use fde_toolkit::params::{ParamSet, UsageProfile};
use fde_toolkit::radial::RadialField;
use fde_toolkit::sim::{
    evolve, DtPolicy, GridSpec, InitialData, Scenario, SolverConfig,
};
use fde_toolkit::threshold::{
    c_star_and_t_star, pipeline, theta_exponent, ThresholdInputs, TStarKey,
};

fn p3() -> ParamSet {
    ParamSet::derive(3, 5.0 / 6.0, UsageProfile::Threshold).unwrap()
}

#[test]
fn criterion_1_disk_shooting() {
    let start = Instant::now();
    let a_star = find_a_star((5.0, 10.0), 1e-10).unwrap();
    let shot = shoot(a_star, 1e-10).unwrap();
    let (c_opt, residual) = optimal_constant(&shot);
    assert!(
        (a_star - 7.52449).abs() <= 1e-3,
        "shooting parameter {a_star} off target"
    );
    assert!(
        (c_opt - 0.0564922).abs() <= 1e-4,
        "optimal constant {c_opt} off target"
    );
    assert!(residual <= 1e-6, "energy-identity residual {residual}");
    // The disk constant must undercut the two-dimensional interpolation
    // constant.
    let k2 = ParamSet::derive(2, 0.7, UsageProfile::FdeBounds)
        .unwrap()
        .sobolev_constant();
    assert!(c_opt < k2, "disk constant {c_opt} not below {k2}");
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "shooting took {dt:?}");
    println!("acceptance 1 (disk shooting + optimal constant): PASS ({dt:?})");
}

#[test]
fn criterion_2_sigma_series_oracle() {
    let start = Instant::now();
    for d in 1..=3u32 {
        let got = sigma_series(d, 1e-12).unwrap();
        // Independent oracle: brute-force partial sums of
        // (3/4)^j ((j+1)(j+2))^{2d+4} until far past f64 resolution.
        let p = (2 * d + 4) as i32;
        let mut oracle = 0.0f64;
        for j in 0..2000u32 {
            let jf = j as f64;
            oracle += 0.75f64.powi(j as i32) * ((jf + 1.0) * (jf + 2.0)).powi(p);
        }
        let rel = (got.value - oracle).abs() / oracle;
        assert!(rel <= 1e-10, "d = {d}: relative gap {rel}");
        // The tail bound must bracket the oracle: partial sum from the
        // reported number of terms plus the bound covers the full series.
        let mut partial = 0.0f64;
        for j in 0..got.terms_used as u32 {
            let jf = j as f64;
            partial += 0.75f64.powi(j as i32) * ((jf + 1.0) * (jf + 2.0)).powi(p);
        }
        assert!(partial <= oracle && oracle <= partial + got.tail_bound,
            "d = {d}: tail bound fails to bracket the oracle");
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "series evaluation took {dt:?}");
    println!("acceptance 2 (series vs brute-force oracle + tail bracket): PASS ({dt:?})");
}

#[test]
fn criterion_3_exact_constants() {
    let rel = |got: f64, want: f64| (got - want).abs() <= 1e-12 * want.abs();
    assert!(rel(log_estimate_c2(1), 24.0));
    assert!(rel(log_estimate_c2(2), 288.0));
    assert!(rel(fde_toolkit::fde_bounds::aleksandrov_a_d(1), 2.0));
    assert!(rel(
        fde_toolkit::fde_bounds::aleksandrov_a_d(2),
        8.0 * std::f64::consts::PI
    ));
    let p = ParamSet::derive(3, 5.0 / 6.0, UsageProfile::FdeBounds).unwrap();
    let kbar = smoothing_kappa_bar(&p).unwrap().kbar;
    let pos = positivity_constants(&p, &kbar).unwrap();
    assert!(rel(pos.kappa_star, 2f64.powf(6.5) * 3f64.powf(1.5)));
    let p2 = ParamSet::derive(2, 0.7, UsageProfile::FdeBounds).unwrap();
    assert!(rel(p2.sobolev_constant(), 2.0 / std::f64::consts::PI.sqrt()));
    println!("acceptance 3 (closed-form constants to 1e-12): PASS");
}

#[test]
fn criterion_4_holder_exponent() {
    // Exact anchors: hbar = 4/3 gives exponent 1, hbar = 2 gives 1/2.
    let n1 = holder_exponent(&TowerScalar::from_f64((4f64 / 3.0).ln()).unwrap())
        .unwrap()
        .to_f64();
    assert!((n1 - 1.0).abs() <= 1e-12, "nu(4/3) = {n1}");
    let n2 = holder_exponent(&TowerScalar::from_f64(2f64.ln()).unwrap())
        .unwrap()
        .to_f64();
    assert!((n2 - 0.5).abs() <= 1e-12, "nu(2) = {n2}");

    // Strict monotone decrease on a randomized increasing log(hbar)
    // sequence spanning both tower levels, with the exponent in (0, 1).
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut logs: Vec<TowerScalar> = Vec::new();
    for _ in 0..40 {
        logs.push(TowerScalar::from_f64(rng.gen_range(0.3f64..30.0)).unwrap());
    }
    for _ in 0..40 {
        logs.push(TowerScalar::from_ln(rng.gen_range(4.0f64..6.5)).unwrap());
    }
    for _ in 0..40 {
        // Genuine level-1 log(hbar): values around e^{40..690}.
        logs.push(TowerScalar::normalize(1, 1, rng.gen_range(40.0f64..690.0)).unwrap());
    }
    logs.sort_by(|a, b| a.compare(b));
    logs.dedup_by(|a, b| a.compare(b) == std::cmp::Ordering::Equal);
    let nus: Vec<TowerScalar> = logs
        .iter()
        .map(|l| holder_exponent(l).unwrap())
        .collect();
    for w in nus.windows(2) {
        assert_eq!(
            w[1].compare(&w[0]),
            std::cmp::Ordering::Less,
            "exponent not strictly decreasing"
        );
    }
    let one = TowerScalar::one();
    for n in &nus {
        assert!(n.sign() > 0, "exponent not positive");
        assert!(
            n.compare(&one) == std::cmp::Ordering::Less,
            "exponent not below 1 for hbar > 4/3"
        );
    }
    println!("acceptance 4 (regularity exponent anchors + strict monotonicity): PASS");
}

#[test]
fn criterion_5_threshold_pipeline() {
    let start = Instant::now();
    let p = p3();

    // Deterministic, schema-valid report: two runs serialize identically
    // and round-trip through the typed report structure.
    let inputs = ThresholdInputs::new(p, 1e-3, 1.0, 1.0);
    let out1 = pipeline(&inputs).unwrap();
    let out2 = pipeline(&inputs).unwrap();
    let j1 = out1.report.to_json().unwrap();
    let j2 = out2.report.to_json().unwrap();
    assert_eq!(j1, j2, "pipeline output not deterministic");
    let parsed: serde_json::Value = serde_json::from_str(&j1).unwrap();
    assert!(parsed.get("inputs").is_some() && parsed.get("entries").is_some());
    for e in parsed["entries"].as_array().unwrap() {
        for key in ["name", "equation_label", "value", "provenance"] {
            assert!(e.get(key).is_some(), "entry missing '{key}': {e}");
        }
    }
    let round: fde_toolkit::report::ConstantReport = serde_json::from_str(&j1).unwrap();
    assert_eq!(round, out1.report);

    // eps-invariance of eps^a * kappa2(eps), moderate-exponent regime:
    // reconstruct kappa2(eps) = kappa2_const * eps^{-a} with tower
    // arithmetic and fold eps^a back in; the log must match to 1e-10.
    let nu = TowerScalar::from_f64(0.4).unwrap();
    let theta = theta_exponent(3, &nu).unwrap();
    let kbar = smoothing_kappa_bar(&p).unwrap().kbar;
    let pos = positivity_constants(&p, &kbar).unwrap();
    let k_big = TowerScalar::from_f64(50.0).unwrap();
    let c_const = TowerScalar::from_ln(5.0).unwrap();
    let mut reference: Option<f64> = None;
    for &eps in &[1e-4, 1e-3, 1e-2, 0.1, 0.4] {
        let cs = c_star_and_t_star(&p, eps, 0.5, 1.0, 1.0, &c_const, pos.kappa_star, &k_big, &theta)
            .unwrap();
        let ln_inv_eps = TowerScalar::from_f64((1.0f64 / eps).ln()).unwrap();
        let kappa2_eps = cs
            .kappa2_const
            .mul(&TowerScalar::exp_of(&cs.a_exp.mul(&ln_inv_eps).unwrap()).unwrap())
            .unwrap();
        let folded = kappa2_eps
            .mul(
                &TowerScalar::exp_of(&cs.a_exp.mul(&ln_inv_eps).unwrap().neg()).unwrap(),
            )
            .unwrap();
        let ln_folded = folded.ln_abs_f64().unwrap();
        match reference {
            None => reference = Some(ln_folded),
            Some(r) => assert!(
                (ln_folded - r).abs() <= 1e-10 * r.abs().max(1.0),
                "eps-invariance broken at eps = {eps}: {ln_folded} vs {r}"
            ),
        }
        let ln_const = cs.kappa2_const.ln_abs_f64().unwrap();
        assert!((ln_folded - ln_const).abs() <= 1e-10 * ln_const.abs().max(1.0));
    }
    // Double-exponential regime: the constant reported by the full
    // pipeline is identical across eps (exact exponent cancellation).
    let k_ref = out1.c_star.kappa2_const;
    for &eps in &[2e-4, 2e-3] {
        let o = pipeline(&ThresholdInputs::new(p, eps, 1.0, 1.0)).unwrap();
        assert_eq!(
            o.c_star.kappa2_const.compare(&k_ref),
            std::cmp::Ordering::Equal
        );
    }

    // Monotonicity of the threshold time on a 5x5x5 grid: decreasing the
    // accuracy eps, or increasing either datum bound, never decreases it.
    let eps_grid = [2.5e-3, 1.5e-3, 8e-4, 4e-4, 2e-4];
    let tails = [0.0, 0.5, 1.0, 2.0, 4.0];
    let energies = [0.0, 0.5, 1.0, 2.0, 4.0];
    let keys: Vec<Vec<Vec<TStarKey>>> = eps_grid
        .iter()
        .map(|&eps| {
            tails
                .iter()
                .map(|&a| {
                    energies
                        .iter()
                        .map(|&g| {
                            pipeline(&ThresholdInputs::new(p, eps, a, g))
                                .unwrap()
                                .t_star_key
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                if i > 0 {
                    assert_eq!(
                        keys[i][j][k].compare(&keys[i - 1][j][k]),
                        std::cmp::Ordering::Greater,
                        "threshold time not increasing as eps shrinks"
                    );
                }
                if j > 0 {
                    assert_eq!(
                        keys[i][j][k].compare(&keys[i][j - 1][k]),
                        std::cmp::Ordering::Greater,
                        "threshold time not increasing in the tail bound"
                    );
                }
                if k > 0 {
                    assert_eq!(
                        keys[i][j][k].compare(&keys[i][j][k - 1]),
                        std::cmp::Ordering::Greater,
                        "threshold time not increasing in the energy bound"
                    );
                }
            }
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "pipeline suite took {dt:?}");
    println!("acceptance 5 (threshold pipeline: determinism, invariance, monotone grid): PASS ({dt:?})");
}

fn self_similar_run(n: usize, dt: f64, t_end: f64) -> (ParamSet, fde_toolkit::sim::Solution) {
    let p = ParamSet::derive(3, 5.0 / 6.0, UsageProfile::FdeBounds).unwrap();
    let config = SolverConfig {
        d: 3,
        m: p.m,
        r_max: 20.0,
        n,
        dt_policy: DtPolicy::Fixed { dt },
        t_end,
    };
    let u0 = RadialField::from_fn(3, config.grid(), |r| {
        fde_toolkit::entropy::barenblatt_evolved(r, 1.0, &p).unwrap()
    })
    .unwrap();
    let sol = evolve(&config, &u0, &[t_end]).unwrap();
    (p, sol)
}

fn linf_rel_error(sol: &fde_toolkit::sim::Solution, p: &ParamSet, t: f64) -> f64 {
    let ut = sol.at_time(t).unwrap();
    let sup = fde_toolkit::entropy::barenblatt_evolved(0.0, 1.0 + t, p).unwrap();
    ut.grid
        .iter()
        .zip(&ut.values)
        .map(|(&r, &v)| {
            (v - fde_toolkit::entropy::barenblatt_evolved(r, 1.0 + t, p).unwrap()).abs()
        })
        .fold(0.0f64, f64::max)
        / sup
}

#[test]
fn criterion_6_simulator() {
    let start = Instant::now();

    // Self-similar regression within 1% and mass conservation to 1e-6.
    let (p, sol) = self_similar_run(801, 2e-3, 0.5);
    let err = linf_rel_error(&sol, &p, 0.5);
    assert!(err < 0.01, "L-inf relative error {err}");
    let m0 = sol.mass_series[0];
    for &mt in &sol.mass_series {
        assert!((mt - m0).abs() / m0 <= 1e-6, "mass drift {}", (mt - m0) / m0);
    }

    // Error shrinks by 3x-5x per grid doubling (dt scaled with h^2).
    let (_, s1) = self_similar_run(201, 4e-3, 0.25);
    let (_, s2) = self_similar_run(401, 1e-3, 0.25);
    let factor = linf_rel_error(&s1, &p, 0.25) / linf_rel_error(&s2, &p, 0.25);
    assert!((3.0..=5.0).contains(&factor), "convergence factor {factor}");

    // Comparison principle on 20 random ordered pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let config = SolverConfig {
        d: 3,
        m: p.m,
        r_max: 8.0,
        n: 101,
        dt_policy: DtPolicy::Fixed { dt: 5e-3 },
        t_end: 0.2,
    };
    let grid = config.grid();
    for case in 0..20 {
        let a: f64 = rng.gen_range(0.2..1.0);
        let b: f64 = rng.gen_range(0.05..0.5);
        let w: f64 = rng.gen_range(1.0..3.0);
        let w2: f64 = rng.gen_range(0.5..4.0);
        let lo = RadialField::from_fn(3, grid.clone(), |r| a * (-r * r / w).exp()).unwrap();
        let hi = RadialField::from_fn(3, grid.clone(), |r| {
            a * (-r * r / w).exp() + b * (-r * r / w2).exp()
        })
        .unwrap();
        let sl = evolve(&config, &lo, &[0.1, 0.2]).unwrap();
        let sh = evolve(&config, &hi, &[0.1, 0.2]).unwrap();
        for k in 1..=2 {
            for (x, y) in sl.snapshots[k].values.iter().zip(&sh.snapshots[k].values) {
                assert!(
                    *x <= y + 1e-10,
                    "comparison principle violated in case {case}: {x} > {y}"
                );
            }
        }
    }
    let dt = start.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "simulator suite took {dt:?}");
    println!("acceptance 6 (simulator: regression, order, mass, comparison): PASS ({dt:?})");
}

#[test]
fn criterion_7_verification_suites() {
    let scenario = Scenario {
        d: 3,
        m: 5.0 / 6.0,
        grid: GridSpec { r_max: 10.0, n: 201 },
        times: vec![0.05, 0.1, 0.15],
        initial: InitialData::Bump { radius: 1.0, height: 1.0, power: 2.0 },
        dt_policy: Some(DtPolicy::Fixed { dt: 2.5e-3 }),
    };
    let verdicts = run_suite("all", &scenario).unwrap();
    let count = |prefix: &str| verdicts.iter().filter(|v| v.name.starts_with(prefix)).count();
    assert!(count("mass-displacement") >= 12, "mass-displacement tuples");
    assert!(count("local-upper") >= 8, "upper-bound tuples");
    assert!(count("local-lower") >= 8, "lower-bound tuples");
    assert!(count("reflection-mean-value") >= 4, "reflection tuples");
    assert!(count("truncation-bounds") >= 1, "truncation verdicts");
    for v in &verdicts {
        assert!(v.pass, "verdict failed: {v:?}");
        assert!(
            v.slack >= -v.error_bar,
            "slack {} below -error bar {} in {}",
            v.slack,
            v.error_bar,
            v.name
        );
    }
    println!(
        "acceptance 7 (verification suites, {} verdicts all nonnegative slack): PASS",
        verdicts.len()
    );
}

#[test]
fn criterion_8_entropy_functionals() {
    let p = p3();
    let grid = reference_grid(&p, 0.005).unwrap();
    let b = RadialField::from_fn(p.d, grid.clone(), |r| barenblatt_static(r, &p)).unwrap();

    // Both functionals vanish identically on the stationary profile.
    assert_eq!(free_energy(&b, &p).unwrap().value, 0.0);
    assert_eq!(fisher_information(&b, &p).unwrap().value, 0.0);

    // Ratio >= 4 on >= 10 tube perturbations, and >= 4 + eta inside the
    // admissible tube width.
    let eps = 0.4 * p.chi * p.eta;
    for k in 1..=10u32 {
        let freq = k as f64;
        let v = RadialField::from_fn(p.d, grid.clone(), |r| {
            barenblatt_static(r, &p) * (1.0 + 0.5 * eps * (freq * r).cos() * (-r).exp())
        })
        .unwrap();
        let out = eep_check(&v, eps, &p).unwrap();
        let ratio = out.ratio.expect("non-vacuous perturbation");
        assert!(ratio >= 4.0, "mode {k}: ratio {ratio} below 4");
        assert!(
            out.pass,
            "mode {k}: ratio {ratio} below threshold {}",
            out.threshold
        );
        assert!(out.entropy_sandwich_pass && out.fisher_sandwich_pass);
    }

    // Quadratization drift is O(eps): each decade of eps cuts the relative
    // gap between F/eps^2 and the quadratic form by about 10x.
    let g_shape = |r: f64| (2.0 * r).cos() * (-r * r / 2.0).exp();
    let g = RadialField::from_fn(p.d, grid.clone(), |r| g_shape(r)).unwrap();
    let (f_lin, _) = linearized_functionals(&g, &p).unwrap();
    let mut errs = Vec::new();
    for &e in &[1e-2, 1e-3, 1e-4] {
        let v = RadialField::from_fn(p.d, grid.clone(), |r| {
            let b = barenblatt_static(r, &p);
            b + e * b.powf(2.0 - p.m) * g_shape(r)
        })
        .unwrap();
        let fe = free_energy(&v, &p).unwrap();
        errs.push((fe.value / (e * e) - f_lin.value).abs() / f_lin.value);
    }
    assert!(errs[1] / errs[0] < 0.3, "drift not first order: {errs:?}");
    assert!(errs[2] / errs[1] < 0.3, "drift not first order: {errs:?}");

    // Improvement function stays at or above eta on (0, chi*eta) for three
    // admissible (d, m) pairs, on a 1000-point grid each.
    for &(d, m) in &[(1u32, 0.6), (2, 0.7), (3, 5.0 / 6.0)] {
        let pp = ParamSet::derive(d, m, UsageProfile::Entropy).unwrap();
        for k in 1..=1000 {
            let e = pp.chi * pp.eta * k as f64 / 1001.0;
            let f = improvement_functions(e, &pp).unwrap().f;
            assert!(
                f >= pp.eta,
                "improvement f({e}) = {f} below eta = {} at (d, m) = ({d}, {m})",
                pp.eta
            );
        }
    }

    // Weighted spectral inequality I >= 4 alpha F on >= 10 mean-zero
    // radial directions (projected cosine modes), within quadrature bars.
    for k in 1..=10u32 {
        let freq = 0.5 * k as f64;
        let raw = RadialField::from_fn(p.d, grid.clone(), |r| {
            (freq * r).cos() * (1.0 + r * r).recip()
        })
        .unwrap();
        let num = weighted_mean_moment(&raw, &p);
        let den = raw.integrate_with(|_, r| barenblatt_static(r, &p).powf(2.0 - p.m));
        let c = num / den;
        let g = RadialField {
            d: raw.d,
            grid: raw.grid.clone(),
            values: raw.values.iter().map(|x| x - c).collect(),
        };
        let (f_lin, i_lin, ratio) = hardy_poincare_check(&g, &p, 1e-8).unwrap();
        assert!(
            i_lin.value + i_lin.error >= 4.0 * p.alpha * (f_lin.value - f_lin.error),
            "mode {k}: spectral inequality violated, ratio {ratio}"
        );
    }
    println!("acceptance 8 (entropy functionals, tube, drift, spectral gap): PASS");
}

#[test]
fn criterion_9_scalar_tower() {
    // 1e5 randomized cases: round trip, ordering, and mul/div inversion.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100_000 {
        let e: f64 = rng.gen_range(-600.0..600.0);
        let x = if rng.gen::<bool>() { e.exp() } else { -e.exp() };
        let y_e: f64 = rng.gen_range(-600.0..600.0);
        let y = if rng.gen::<bool>() { y_e.exp() } else { -y_e.exp() };
        let tx = TowerScalar::from_f64(x).unwrap();
        let ty = TowerScalar::from_f64(y).unwrap();
        assert!((tx.to_f64() - x).abs() <= 1e-12 * x.abs());
        assert_eq!(tx.compare(&ty), x.partial_cmp(&y).unwrap());
        let back = tx.mul(&ty).unwrap().div(&ty).unwrap().to_f64();
        assert!((back - x).abs() <= 1e-10 * x.abs(), "{x} -> {back}");
    }

    // Double-exponential power: (e-notation 1e300 at log level 1) raised
    // to the 690th-exponential power lands at log level 2 with magnitude
    // 690 + 300 ln 10.
    let base = TowerScalar::normalize(1, 1, 1e300).unwrap();
    let exponent = TowerScalar::normalize(1, 1, 690.0).unwrap();
    let powed = base.pow(&exponent).unwrap();
    assert_eq!(powed.level(), 2);
    let want = 690.0 + 300.0 * 10f64.ln();
    assert!(
        (powed.mag() - want).abs() <= 1e-6,
        "power magnitude {} vs {want}",
        powed.mag()
    );
    // Cross-level ordering: e^{e^{10}} is far below e^{1e300}.
    let small = TowerScalar::normalize(1, 2, 10.0).unwrap();
    assert_eq!(small.compare(&base), std::cmp::Ordering::Less);
    println!("acceptance 9 (scalar tower randomized properties + power example): PASS");
}
