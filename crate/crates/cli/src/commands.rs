//! Subcommand implementations.

use crate::report::*;
use crate::RunSpec;
use anyhow::{anyhow, bail, Context};
use toda_transport_core::asymptotics::{self, chi_recurrence_residuals};
use toda_transport_core::cumulants::{
    self, conductance_cumulants_extended, joint_cumulants, k_l_1, k_l_2, shot_cumulants_symmetric,
    shot_limit,
};
use toda_transport_core::ensemble::{thermo_factor, Eta, LeadConfig};
use toda_transport_core::montecarlo::{self, estimate_cumulants, jmgf, McConfig};
use toda_transport_core::nonideal::{
    gauss_2f1_direct_series, gauss_2f1_transport, jpdf_reflection, mgf_nonideal, toda2d_residual,
    TunnelConfig,
};
use toda_transport_core::painleve::{integrate_chazy, jmo_residual};
use toda_transport_core::rational::{format_ratio, to_decimal_string, to_f64};
use toda_transport_core::symbolic::{density_from_mgf, mgf_hankel};

const DECIMAL_DIGITS: usize = 20;

pub fn cmd_cumulants(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let order = spec.orders_l as usize;
    let seq = conductance_cumulants_extended(&cfg, order)?;
    let note = match cumulants::singular_order(&cfg) {
        Some(s) if (s as usize) < order => Some(format!(
            "recurrence-singular order at l = {s}; higher orders from the exact MGF series"
        )),
        _ => None,
    };
    let mc = if spec.samples > 0 {
        let run = montecarlo::run_cue(
            &cfg,
            spec.samples,
            &McConfig { seed: spec.seed, workers: spec.workers },
        );
        Some(estimate_cumulants(&run.g, order.min(6))?)
    } else {
        None
    };
    let rows: Vec<CumulantRow> = (1..=order as u32)
        .map(|l| {
            let exact = seq.kappa(l as usize);
            let est = mc.as_ref().and_then(|v| v.get(l as usize - 1));
            CumulantRow {
                order: l,
                exact: format_ratio(exact),
                decimal: to_decimal_string(exact, DECIMAL_DIGITS),
                asymptotic: spec.asymptotic.then(|| asymptotics::kappa_asymptotic(l, &cfg)),
                mc_estimate: est.map(|e| e.estimate),
                mc_std_error: est.map(|e| e.std_error),
            }
        })
        .collect();
    let report = CumulantReport { n_left: spec.nl, n_right: spec.nr, rows, note };
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.order.to_string(),
                        r.exact.clone(),
                        r.decimal.clone(),
                        r.asymptotic.map_or(String::new(), |v| format!("{v:.17e}")),
                        r.mc_estimate.map_or(String::new(), |v| format!("{v:.17e}")),
                        r.mc_std_error.map_or(String::new(), |v| format!("{v:.17e}")),
                    ]
                })
                .collect();
            Ok(to_csv(
                &["order", "exact", "decimal", "asymptotic", "mc_estimate", "mc_std_error"],
                &rows,
            ))
        }
    }
}

pub fn cmd_distribution(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let f = mgf_hankel(&cfg)?;
    let density = density_from_mgf(&f, &cfg)?;
    let points = spec.grid_points.max(2);
    let grid: Vec<DensityPoint> = (0..=points)
        .map(|i| {
            let g = cfg.n as f64 * i as f64 / points as f64;
            DensityPoint { g, density: density.eval_f64(g) }
        })
        .collect();
    let ser = |polys: &[toda_transport_core::symbolic::Poly]| -> Vec<Vec<String>> {
        polys
            .iter()
            .map(|p| p.coeffs().iter().map(format_ratio).collect())
            .collect()
    };
    let report = DistributionReport {
        n: density.n,
        nu: density.nu,
        sgn_polys: ser(&density.sgn),
        heaviside_polys: ser(&density.heaviside),
        grid,
    };
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .grid
                .iter()
                .map(|p| vec![format!("{:.12}", p.g), format!("{:.17e}", p.density)])
                .collect();
            Ok(to_csv(&["g", "density"], &rows))
        }
    }
}

pub fn cmd_noise(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let eta = Eta::parse(&spec.eta)?;
    let table = joint_cumulants(&cfg, spec.orders_l, spec.orders_m)?;
    let shot = shot_limit(&table);
    let f_eta = match eta {
        Eta::Finite(e) => Some(thermo_factor(e)?.f_eta),
        Eta::Shot => None,
    };
    let mut entries = Vec::new();
    for (&(l, m), poly) in table.entries() {
        if l > spec.orders_l || m > spec.orders_m || (l, m) == (0, 0) {
            continue;
        }
        entries.push(JointCumulantEntry {
            l,
            m,
            poly: poly.coeffs().iter().map(format_ratio).collect(),
            at_eta: f_eta.map(|f| {
                to_f64(&poly.eval(&toda_transport_core::rational::from_f64(f)))
            }),
            shot_limit: shot.get(&(l, m)).map(format_ratio),
        });
    }
    let report = NoiseReport {
        n_left: spec.nl,
        n_right: spec.nr,
        eta: spec.eta.clone(),
        f_eta,
        entries,
    };
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.l.to_string(),
                        e.m.to_string(),
                        format!("\"{}\"", e.poly.join(";")),
                        e.at_eta.map_or(String::new(), |v| format!("{v:.17e}")),
                        e.shot_limit.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(to_csv(&["l", "m", "poly", "at_eta", "shot_limit"], &rows))
        }
    }
}

pub fn cmd_painleve(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let sol = integrate_chazy(&cfg, spec.z0, spec.z1, spec.tol)?;
    let points = sol.sample_uniform(spec.grid_points.max(2) as usize + 1);
    let trajectory: Vec<TrajectoryPoint> = points
        .iter()
        .map(|&(z, s, d1, d2)| TrajectoryPoint {
            z,
            sigma: s,
            dsigma: d1,
            jmo_residual: jmo_residual(&cfg, z, s, d1, d2),
        })
        .collect();
    let max_dev = if spec.compare_exact && cfg.nu_integer().is_some() {
        let f = mgf_hankel(&cfg)?;
        let mut max_dev: f64 = 0.0;
        for p in &trajectory {
            let exact = f.eval(p.z)?.ln();
            let got = sol.log_mgf_at(p.z)?;
            max_dev = max_dev.max((got - exact).abs());
        }
        Some(max_dev)
    } else {
        None
    };
    let report = PainleveReport {
        n_left: spec.nl,
        n_right: spec.nr,
        z0: spec.z0,
        z1: spec.z1,
        tol: spec.tol,
        jmo_residual_sup: sol.jmo_residual_sup(),
        max_log_mgf_deviation: max_dev,
        trajectory,
    };
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .trajectory
                .iter()
                .map(|p| {
                    vec![
                        format!("{:.12}", p.z),
                        format!("{:.17e}", p.sigma),
                        format!("{:.17e}", p.dsigma),
                        format!("{:.3e}", p.jmo_residual),
                    ]
                })
                .collect();
            Ok(to_csv(&["z", "sigma", "dsigma", "jmo_residual"], &rows))
        }
    }
}

pub fn cmd_nonideal(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = TunnelConfig::new(spec.nl, spec.nr, spec.gamma2)?;
    let zs: Vec<f64> = if spec.z1 > spec.z0 {
        let m = spec.grid_points.max(1);
        (0..=m).map(|i| spec.z0 + (spec.z1 - spec.z0) * i as f64 / m as f64).collect()
    } else {
        vec![spec.z0]
    };
    let mut points = Vec::new();
    for &z in &zs {
        let m = mgf_nonideal(&cfg, z)?;
        points.push(NonidealPoint {
            n_left: spec.nl,
            n_right: spec.nr,
            gamma2: spec.gamma2,
            z,
            mgf: m.value,
        });
    }
    let density = if spec.nl == 1 {
        let m = spec.grid_points.max(2);
        Some(
            (1..m)
                .map(|i| {
                    let r = i as f64 / m as f64;
                    Ok(DensityPoint { g: r, density: jpdf_reflection(&[r], &cfg)? })
                })
                .collect::<Result<Vec<_>, toda_transport_core::Error>>()?,
        )
    } else {
        None
    };
    let report = NonidealReport { points, density };
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            // CSV carries the density table (R, pdf) when present, else the
            // MGF records.
            if let Some(d) = &report.density {
                let rows: Vec<Vec<String>> = d
                    .iter()
                    .map(|p| vec![format!("{:.12}", p.g), format!("{:.17e}", p.density)])
                    .collect();
                Ok(to_csv(&["R", "pdf"], &rows))
            } else {
                let rows: Vec<Vec<String>> = report
                    .points
                    .iter()
                    .map(|p| {
                        vec![
                            p.n_left.to_string(),
                            p.n_right.to_string(),
                            format!("{:.12}", p.gamma2),
                            format!("{:.12}", p.z),
                            format!("{:.17e}", p.mgf),
                        ]
                    })
                    .collect();
                Ok(to_csv(&["NL", "NR", "gamma2", "z", "mgf"], &rows))
            }
        }
    }
}

pub fn cmd_montecarlo(spec: &RunSpec) -> anyhow::Result<String> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let eta = Eta::parse(&spec.eta)?;
    let mc = McConfig { seed: spec.seed, workers: spec.workers };
    let run = montecarlo::run_cue(&cfg, spec.samples, &mc);
    let order = (spec.orders_l as usize).min(6);
    let exact = conductance_cumulants_extended(&cfg, order)?;
    let mut reports = Vec::new();
    let g_est = estimate_cumulants(&run.g, order)?;
    for e in &g_est {
        reports.push(McReport {
            observable: "G".into(),
            order: e.order as u32,
            estimate: e.estimate,
            stderr: e.std_error,
            n_samples: e.n_samples,
            seed: spec.seed,
            exact: Some(format_ratio(exact.kappa(e.order))),
        });
    }
    let shot_exact = shot_limit(&joint_cumulants(&cfg, 0, order as u32)?);
    for e in &estimate_cumulants(&run.p_shot, order)? {
        reports.push(McReport {
            observable: "P_shot".into(),
            order: e.order as u32,
            estimate: e.estimate,
            stderr: e.std_error,
            n_samples: e.n_samples,
            seed: spec.seed,
            exact: shot_exact.get(&(0, e.order as u32)).map(format_ratio),
        });
    }
    if let Eta::Finite(ev) = eta {
        let f = thermo_factor(ev)?.f_eta;
        let p: Vec<f64> = run.g.iter().zip(&run.p_shot).map(|(g, ps)| g + f * ps).collect();
        for e in &estimate_cumulants(&p, order)? {
            reports.push(McReport {
                observable: "P".into(),
                order: e.order as u32,
                estimate: e.estimate,
                stderr: e.std_error,
                n_samples: e.n_samples,
                seed: spec.seed,
                exact: None,
            });
        }
    }
    if let Some(path) = &spec.dump_samples {
        write_samples_le(path.as_ref(), &run.g).context("writing raw sample dump")?;
    }
    match spec.format {
        Format::Json => Ok(serde_json::to_string_pretty(&reports)?),
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.observable.clone(),
                        r.order.to_string(),
                        format!("{:.17e}", r.estimate),
                        format!("{:.17e}", r.stderr),
                        r.n_samples.to_string(),
                        r.seed.to_string(),
                        r.exact.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(to_csv(
                &["observable", "order", "estimate", "stderr", "n_samples", "seed", "exact"],
                &rows,
            ))
        }
    }
}

fn check(lines: &mut Vec<VerifyLine>, suite: &str, name: &str, measured: f64, tolerance: f64) {
    lines.push(VerifyLine {
        suite: suite.into(),
        name: name.into(),
        passed: measured.abs() <= tolerance,
        measured,
        tolerance,
    });
}

pub fn cmd_verify(spec: &RunSpec) -> anyhow::Result<(String, bool)> {
    let mut lines = Vec::new();
    let suites: Vec<&str> = match spec.suite.as_str() {
        "all" => vec!["ideal", "nonideal", "montecarlo"],
        s => vec![s],
    };
    for suite in suites {
        match suite {
            "ideal" => verify_ideal(spec, &mut lines)?,
            "nonideal" => verify_nonideal(spec, &mut lines)?,
            "montecarlo" => verify_montecarlo(spec, &mut lines)?,
            other => bail!("unknown suite {other:?} (expected ideal|nonideal|montecarlo|all)"),
        }
    }
    let passed = lines.iter().all(|l| l.passed);
    let report = VerifyReport { lines, passed };
    let text = match spec.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => {
            let mut s = String::new();
            for l in &report.lines {
                s.push_str(&format!(
                    "[{}] {}/{}: measured {:.3e}, tolerance {:.3e}\n",
                    if l.passed { "PASS" } else { "FAIL" },
                    l.suite,
                    l.name,
                    l.measured,
                    l.tolerance
                ));
            }
            s
        }
    };
    Ok((text, passed))
}

fn verify_ideal(spec: &RunSpec, lines: &mut Vec<VerifyLine>) -> anyhow::Result<()> {
    let nmax = spec.nl.clamp(1, 3);
    for n in 1..=nmax {
        let cfg = LeadConfig::new(n, n)?;
        // Symbolic Toda residual, optionally perturbed through the hook.
        let residual_zero = if spec.inject_perturbation {
            use toda_transport_core::symbolic::{mgf_hankel_indices, toda_residual_with_var};
            let f0 = mgf_hankel_indices(n - 1, 0)?;
            let f1 = mgf_hankel_indices(n, 0)?;
            let f2 = mgf_hankel_indices(n + 1, 0)?;
            let var = cfg.conductance_variance() * toda_transport_core::rational::rat_i64(101, 100);
            toda_residual_with_var(&f0, &f1, &f2, &var).is_zero()
        } else {
            toda_transport_core::symbolic::toda_check(&cfg)?
        };
        check(lines, "ideal", &format!("toda_residual_zero_n{n}"), f64::from(!residual_zero), 0.0);
        // Closed forms against the recurrence engine.
        let seq = conductance_cumulants_extended(&cfg, 3)?;
        let k3 = cumulants::kappa3_closed(&cfg);
        check(
            lines,
            "ideal",
            &format!("kappa3_closed_form_n{n}"),
            f64::from(seq.kappa(3) != &k3),
            0.0,
        );
        // Joint closed forms.
        let kap = conductance_cumulants_extended(&cfg, 8)?;
        let table = joint_cumulants(&cfg, 4, 2)?;
        let mut bad = 0.0;
        for l in 0..=4u32 {
            if table.get(l, 1) != Some(&k_l_1(&cfg, &kap, l)) {
                bad += 1.0;
            }
            if table.get(l, 2) != Some(&k_l_2(&cfg, &kap, l)) {
                bad += 1.0;
            }
        }
        check(lines, "ideal", &format!("joint_closed_forms_n{n}"), bad, 0.0);
        // Shot two-path agreement.
        let shot = shot_limit(&joint_cumulants(&cfg, 0, 3)?);
        let sym = shot_cumulants_symmetric(n, 3)?;
        let agree = (1..=3usize).all(|l| shot[&(0, l as u32)] == sym[l - 1]);
        check(lines, "ideal", &format!("shot_two_path_n{n}"), f64::from(!agree), 0.0);
        // Chi-form residuals.
        let zero = toda_transport_core::rational::rat_int(0);
        let chi = chi_recurrence_residuals(&cfg, 4)?;
        let chi_bad = chi.iter().filter(|r| **r != zero).count();
        check(lines, "ideal", &format!("chi_recurrence_n{n}"), chi_bad as f64, 0.0);
    }
    // Painleve reconciliation on a quick configuration.
    let cfg = LeadConfig::new(2, 2)?;
    let sol = integrate_chazy(&cfg, 0.05, 5.0, 1e-11)?;
    check(lines, "ideal", "jmo_residual_sup", sol.jmo_residual_sup(), 1e-6);
    let f = mgf_hankel(&cfg)?;
    let mut dev: f64 = 0.0;
    for i in 1..=10 {
        let z = 0.5 * i as f64;
        dev = dev.max((sol.log_mgf_at(z)? - f.eval(z)?.ln()).abs());
    }
    check(lines, "ideal", "painleve_log_mgf_deviation", dev, 1e-7);
    Ok(())
}

fn verify_nonideal(spec: &RunSpec, lines: &mut Vec<VerifyLine>) -> anyhow::Result<()> {
    let cfg = TunnelConfig::new(spec.nl.min(2), spec.nr.max(spec.nl.min(2)), spec.gamma2)?;
    // Normalization of the single-channel JPDF marginal / full density.
    if cfg.n_left == 1 {
        let total = toda_transport_core::quadrature::adaptive_quad(
            &|r: f64| jpdf_reflection(&[r], &cfg).unwrap_or(f64::NAN),
            1e-12,
            1.0 - 1e-12,
            1e-11,
        )?;
        check(lines, "nonideal", "jpdf_normalization", total - 1.0, 1e-8);
    }
    let m0 = mgf_nonideal(&cfg, 0.0)?;
    let offset = if spec.inject_perturbation { 1e-3 } else { 0.0 };
    check(lines, "nonideal", "mgf_at_zero", m0.value - 1.0 + offset, 1e-10);
    // Two-method hypergeometric agreement.
    let mut worst: f64 = 0.0;
    for k in 1..=3u32 {
        for &x in &[0.1, 0.45, 0.8] {
            let a = gauss_2f1_transport(cfg.n_right, k, x)?;
            let b = gauss_2f1_direct_series(
                (cfg.n_right + k) as f64,
                (cfg.n_right + k) as f64,
                k as f64,
                x,
                1e-16,
            );
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    check(lines, "nonideal", "hypergeometric_two_methods", worst, 1e-12);
    // 2D Toda residual at two steps: second-order decay.
    let g2 = spec.gamma2.clamp(0.05, 0.9);
    let c = TunnelConfig::new(cfg.n_left, cfg.n_right, g2)?;
    let r1 = toda2d_residual(&c, 0.5, c.n_left, 2e-2)?;
    let r2 = toda2d_residual(&c, 0.5, c.n_left, 1e-2)?;
    let order = (r1 / r2).log2();
    check(lines, "nonideal", "toda2d_decay_order_minus_2", order - 2.0, 0.5);
    Ok(())
}

fn verify_montecarlo(spec: &RunSpec, lines: &mut Vec<VerifyLine>) -> anyhow::Result<()> {
    let cfg = LeadConfig::new(spec.nl, spec.nr)?;
    let samples = if spec.samples > 0 { spec.samples } else { 100_000 };
    let mc = McConfig { seed: spec.seed, workers: spec.workers };
    let run = montecarlo::run_cue(&cfg, samples, &mc);
    let est = estimate_cumulants(&run.g, 2)?;
    let exact = conductance_cumulants_extended(&cfg, 2)?;
    for e in &est {
        let target = to_f64(exact.kappa(e.order));
        let name = format!("cue_kappa{}_within_5se", e.order);
        check(lines, "montecarlo", &name, e.estimate - target, 5.0 * e.std_error);
    }
    if cfg.n == 1 && cfg.nu_integer() == Some(0) {
        let mut t = run.g.clone();
        let (_, p) = montecarlo::stats::ks_test(&mut t, |x| x.clamp(0.0, 1.0));
        // Encoded as measured = 1 - p against tolerance 1 - 0.001.
        check(lines, "montecarlo", "uniform_ks_p_value", 1.0 - p, 1.0 - 0.001);
    }
    // Joint Toda identity on quadrature values.
    let f_eta = thermo_factor(1.0)?.f_eta;
    let small = LeadConfig::new(1, 1)?;
    let res = jmgf::toda_joint_residual(&small, f_eta, 0.5, 0.3, 1e-3)?;
    check(lines, "montecarlo", "joint_toda_residual", res, 1e-6);
    Ok(())
}

pub fn run(spec: &RunSpec) -> anyhow::Result<(String, i32)> {
    match spec.command.as_str() {
        "cumulants" => Ok((cmd_cumulants(spec)?, 0)),
        "distribution" => Ok((cmd_distribution(spec)?, 0)),
        "noise" => Ok((cmd_noise(spec)?, 0)),
        "painleve" => Ok((cmd_painleve(spec)?, 0)),
        "nonideal" => Ok((cmd_nonideal(spec)?, 0)),
        "montecarlo" => Ok((cmd_montecarlo(spec)?, 0)),
        "verify" => {
            let (text, passed) = cmd_verify(spec)?;
            Ok((text, if passed { 0 } else { 2 }))
        }
        other => Err(anyhow!("unknown subcommand {other:?}")),
    }
}
