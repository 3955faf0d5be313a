//! Command-line surface: constant reports, the threshold pipeline, the
//! series sum, the disk shooting solver, simulations, and verification
//! suites. Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::entropy::{barenblatt_static, eep_check, improvement_functions, reference_grid};
use crate::fde_bounds::{positivity_constants, smoothing_kappa_bar};
use crate::gn_disk::{find_a_star, optimal_constant, shoot, write_sweep_csv};
use crate::harnack::HarnackConstants;
use crate::params::{ParamSet, UsageProfile};
use crate::radial::RadialField;
use crate::report::ConstantReport;
use crate::sim::{
    verify_aleksandrov, verify_herrero_pierre, verify_local_lower, verify_local_upper,
    verify_truncation_bounds, Scenario, Verdict,
};
use crate::threshold::{pipeline, ThresholdInputs};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "fdt", about = "Fast-diffusion constants and verification toolkit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the full constant report for (d, m).
    Constants {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full threshold-time pipeline.
    Tstar {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, short = 'A', default_value_t = 0.0)]
        a_tail: f64,
        #[arg(long, short = 'G', default_value_t = 0.0)]
        g_energy: f64,
        #[arg(long = "M-over", default_value_t = 1.0)]
        m_over: f64,
        #[arg(long = "C-dnu1", default_value_t = 1.0)]
        c_dnu1: f64,
        #[arg(long = "C-over", default_value_t = 1.0)]
        c_over: f64,
        #[arg(long = "C-under", default_value_t = 1.0)]
        c_under: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the geometric-envelope series sum.
    Sigma {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Locate the disk shooting parameter and optimal constant, or sweep.
    GnDisk {
        /// Sweep mode: a_lo a_hi n (CSV of the shooting map).
        #[arg(long, num_args = 3)]
        sweep: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario file and export snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run a verification suite against a scenario file.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct Payload<T: Serialize> {
    /// Embedded record of how this output was produced.
    invocation: Vec<String>,
    #[serde(flatten)]
    body: T,
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
        }
        None => {
            println!("{content}");
        }
    }
    Ok(())
}

fn constants_report(d: u32, m: f64) -> Result<ConstantReport> {
    let p = ParamSet::derive(d, m, UsageProfile::FdeBounds)?;
    let mut rep = ConstantReport::new();
    rep.input("d", d)?;
    rep.input("m", m)?;
    let hc = HarnackConstants::compute(&p, 1e-12)?;
    rep.push_f64(
        "sigma",
        "series sum with geometric tail bound",
        hc.sigma.value,
        &["d"],
        Some(format!("tail bound {:.3e}", hc.sigma.tail_bound)),
    )?;
    rep.push(
        "c1_moser",
        "iteration constant",
        crate::lognum::TowerScalar::from_ln(hc.c1_moser_ln)?,
        &["d", "m"],
        None,
    )?;
    rep.push_f64("c2_log", "logarithmic-estimate constant", hc.c2_log, &["d"], None)?;
    rep.push("c0", "simplified front constant", hc.c0, &["d", "m"], None)?;
    rep.push("log_h", "log of the intrinsic Harnack constant", hc.log_h, &["c0", "sigma"], None)?;
    rep.push("kappa0_over", "upper regularity constant", hc.kappa0_over, &["c0"], None)?;
    rep.push("kappa0_under", "lower regularity constant", hc.kappa0_under, &["c0"], None)?;
    let sc = smoothing_kappa_bar(&p)?;
    rep.push("kbar", "smoothing constant (two routes cross-checked)", sc.kbar, &["d", "m"], None)?;
    rep.push_f64("a_d", "reflection annulus constant", sc.a_d, &["d"], None)?;
    let pos = positivity_constants(&p, &sc.kbar)?;
    rep.push_f64("kappa_star", "outer positivity constant", pos.kappa_star, &["d", "m"], None)?;
    rep.push(
        "kappa",
        "inner positivity constant",
        crate::lognum::TowerScalar::from_ln(pos.ln_kappa)?,
        &["kbar"],
        None,
    )?;
    Ok(rep)
}

fn report_output(rep: &ConstantReport, format: OutputFormat, invocation: &[String]) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let payload = Payload { invocation: invocation.to_vec(), body: rep };
            Ok(serde_json::to_string_pretty(&payload)?)
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# invocation: {}", invocation.join(" "))?;
            rep.write_csv(&mut buf)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
    }
}

/// Deterministic verification suites. Returns all verdicts.
pub fn run_suite(suite: &str, scenario: &Scenario) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();
    let wants = |name: &str| suite == name || suite == "all";
    if !["herrero-pierre", "bounds", "aleksandrov", "entropy", "truncation", "all"]
        .contains(&suite)
    {
        return Err(Error::Usage(format!("unknown suite '{suite}'")));
    }

    let needs_sim = wants("herrero-pierre") || wants("bounds") || wants("aleksandrov");
    let profile = if wants("entropy") { UsageProfile::Entropy } else { UsageProfile::FdeBounds };
    let p = ParamSet::derive(scenario.d, scenario.m, profile)?;
    let sol = if needs_sim { Some(scenario.run(&p)?) } else { None };

    if wants("herrero-pierre") {
        let sol = sol.as_ref().unwrap();
        let times = &sol.times[1..];
        // >= 12 parameter tuples.
        for &big_r in &[0.5, 1.0] {
            for &r in &[3.0, 4.0] {
                for k in 0..3 {
                    let t = times[k % times.len()];
                    let tau = times[(k + 1) % times.len()];
                    verdicts.push(verify_herrero_pierre(sol, &p, big_r, r, t, tau, 1.0)?);
                }
            }
        }
    }
    if wants("bounds") {
        let sol = sol.as_ref().unwrap();
        let sc = smoothing_kappa_bar(&p)?;
        let pos = positivity_constants(&p, &sc.kbar)?;
        let times = &sol.times[1..];
        // >= 8 upper-bound tuples.
        for &big_r in &[1.0, 2.0, 3.0, 4.0] {
            for k in 0..2 {
                let t = times[k % times.len()];
                verdicts.push(verify_local_upper(sol, &p, big_r, t, &sc.kbar)?);
            }
        }
        // >= 8 lower-bound tuples inside the admissible window.
        for &big_r in &[1.0, 1.5, 2.0, 3.0] {
            for k in 0..2 {
                let t = times[k % times.len()];
                verdicts.push(verify_local_lower(sol, &p, big_r, t, pos.ln_kappa, pos.kappa_star)?);
            }
        }
    }
    if wants("aleksandrov") {
        let sol = sol.as_ref().unwrap();
        let times = &sol.times[1..];
        let support_r = match &scenario.initial {
            crate::sim::InitialData::Bump { radius, .. } => *radius,
            _ => {
                return Err(Error::Usage(
                    "reflection suite needs compactly supported bump data".into(),
                ))
            }
        };
        // >= 4 tuples.
        for &lambda in &[2.5, 3.0, 4.0, 5.0] {
            let t = times[times.len() / 2];
            verdicts.push(verify_aleksandrov(sol, support_r, lambda, t)?);
        }
    }
    if wants("entropy") {
        let pe = ParamSet::derive(scenario.d, scenario.m, UsageProfile::Entropy)?;
        let eps = 0.4 * pe.chi * pe.eta;
        let grid = reference_grid(&pe, 0.005)?;
        // >= 10 deterministic tube perturbations (cosine modes).
        for k in 1..=10u32 {
            let freq = k as f64;
            let v = RadialField::from_fn(pe.d, grid.clone(), |r| {
                barenblatt_static(r, &pe)
                    * (1.0 + 0.5 * eps * (freq * r).cos() * (-r).exp())
            })?;
            let out = eep_check(&v, eps, &pe)?;
            let ratio = out.ratio.unwrap_or(out.threshold);
            verdicts.push(Verdict {
                name: format!("entropy-production-mode-{k}"),
                lhs: out.threshold,
                rhs: ratio,
                slack: ratio - out.threshold,
                error_bar: (out.fisher.error + out.free_energy.error)
                    / out.free_energy.value.max(f64::MIN_POSITIVE),
                pass: out.pass && out.entropy_sandwich_pass && out.fisher_sandwich_pass,
                notes: vec![format!("eps_effective = {:.3e}", out.eps_effective)],
            });
        }
        // Improvement function stays above eta on (0, chi*eta).
        let mut min_f = f64::INFINITY;
        for k in 1..=1000 {
            let e = pe.chi * pe.eta * k as f64 / 1001.0;
            min_f = min_f.min(improvement_functions(e, &pe)?.f);
        }
        verdicts.push(Verdict {
            name: "entropy-improvement-floor".into(),
            lhs: pe.eta,
            rhs: min_f,
            slack: min_f - pe.eta,
            error_bar: 0.0,
            pass: min_f >= pe.eta,
            notes: vec!["min of f over the admissible accuracy interval".into()],
        });
    }
    if wants("truncation") {
        for &(r1, r0) in &[(1.0, 2.0), (0.5, 3.0), (2.0, 2.5)] {
            verdicts.push(verify_truncation_bounds(r1, r0, scenario.d, 10_000)?);
        }
    }
    Ok(verdicts)
}

#[derive(Debug, Serialize)]
struct SuiteReport<'a> {
    suite: &'a str,
    all_pass: bool,
    verdicts: &'a [Verdict],
}

/// Executes a parsed command. Returns the process exit code.
pub fn execute(cli: Cli, invocation: Vec<String>) -> i32 {
    match try_execute(cli, invocation) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn try_execute(cli: Cli, invocation: Vec<String>) -> Result<i32> {
    match cli.command {
        Command::Constants { d, m, format, out } => {
            let rep = constants_report(d, m)?;
            emit(&out, &report_output(&rep, format, &invocation)?)?;
            Ok(0)
        }
        Command::Tstar {
            d,
            m,
            eps,
            a_tail,
            g_energy,
            m_over,
            c_dnu1,
            c_over,
            c_under,
            format,
            out,
        } => {
            let p = ParamSet::derive(d, m, UsageProfile::Threshold)?;
            let mut inputs = ThresholdInputs::new(p, eps, a_tail, g_energy);
            inputs.m_over = m_over;
            inputs.c_dnu1 = c_dnu1;
            inputs.c_over = c_over;
            inputs.c_under = c_under;
            let output = pipeline(&inputs)?;
            emit(&out, &report_output(&output.report, format, &invocation)?)?;
            Ok(0)
        }
        Command::Sigma { d, tol } => {
            let s = crate::harnack::sigma_series(d, tol)?;
            let payload = Payload { invocation, body: s };
            println!("{}", serde_json::to_string_pretty(&payload)?);
            Ok(0)
        }
        Command::GnDisk { sweep, out } => {
            if let Some(sweep) = sweep {
                let (a_lo, a_hi, n) = (sweep[0], sweep[1], sweep[2] as usize);
                let mut buf = Vec::new();
                write_sweep_csv(&mut buf, a_lo, a_hi, n.max(2), 1e-9)?;
                emit(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            } else {
                let a_star = find_a_star((5.0, 10.0), 1e-10)?;
                let shot = shoot(a_star, 1e-11)?;
                let (constant, residual) = optimal_constant(&shot);
                #[derive(Serialize)]
                struct GnOut {
                    a_star: f64,
                    optimal_constant: f64,
                    energy_identity_residual: f64,
                    sign_changes: u32,
                }
                let payload = Payload {
                    invocation,
                    body: GnOut {
                        a_star,
                        optimal_constant: constant,
                        energy_identity_residual: residual,
                        sign_changes: shot.sign_changes,
                    },
                };
                emit(&out, &serde_json::to_string_pretty(&payload)?)?;
            }
            Ok(0)
        }
        Command::Simulate { config, out_dir } => {
            let text = std::fs::read_to_string(&config)?;
            let scenario: Scenario = serde_json::from_str(&text)?;
            let p = ParamSet::derive(scenario.d, scenario.m, UsageProfile::FdeBounds)?;
            let sol = scenario.run(&p)?;
            std::fs::create_dir_all(&out_dir)?;
            for (t, snap) in sol.times.iter().zip(&sol.snapshots) {
                let path = out_dir.join(format!("snapshot_t{t:.6}.csv"));
                let mut f = std::fs::File::create(path)?;
                snap.write_csv(&mut f)?;
            }
            #[derive(Serialize)]
            struct SimOut<'a> {
                times: &'a [f64],
                mass_series: &'a [f64],
            }
            let payload = Payload {
                invocation,
                body: SimOut { times: &sol.times, mass_series: &sol.mass_series },
            };
            let summary = serde_json::to_string_pretty(&payload)?;
            std::fs::write(out_dir.join("summary.json"), &summary)?;
            println!("{summary}");
            Ok(0)
        }
        Command::Verify { suite, config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let scenario: Scenario = serde_json::from_str(&text)?;
            let verdicts = run_suite(&suite, &scenario)?;
            let all_pass = verdicts.iter().all(|v| v.pass);
            let payload = Payload {
                invocation,
                body: SuiteReport { suite: &suite, all_pass, verdicts: &verdicts },
            };
            emit(&out, &serde_json::to_string_pretty(&payload)?)?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

/// Entry point shared by the binary: parses `args`, runs, returns exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<String> = args
        .into_iter()
        .map(|a| a.clone().into().to_string_lossy().into_owned())
        .collect();
    match Cli::try_parse_from(argv.iter()) {
        Ok(cli) => execute(cli, argv),
        Err(e) => {
            // clap help/version are successes; parse errors are usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            code
        }
    }
}
