//! The eight subcommands: each resolves the configuration, runs the
//! computation, and emits one CSV plus one manifest into the output
//! directory.

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{emit, Cell, CheckRecord, CsvTable, RunManifest};
use maryland::cocycle::{
    avg_log_ptilde, d_sequence, lyapunov_birkhoff, lyapunov_closed_form, transfer_product,
    x2_root, StepKind,
};
use maryland::determinants::{
    p_sequence, ptilde_eval_shifted, ptilde_sequence, solution_sequence, ModelParams,
};
use maryland::interpolation::{check_3eps_uniform, interval_scheme, lana_deviation, CaseTag};
use maryland::localization::{
    decay_pipeline, expand_identity_check, find_i2_large, green_cramer, green_direct,
    verify_i1_small, verify_regular,
};
use maryland::math::{cos_pi, SignedLog};
use maryland::torus::{singular_phase_distance, SINGULAR_PHASE_GUARD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::f64::consts::LN_2;
use std::time::Instant;

pub enum CliError {
    Config(ConfigError),
    Model(maryland::Error),
    Io(std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<maryland::Error> for CliError {
    fn from(e: maryland::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn resolved_params(cfg: &ExperimentConfig) -> CliResult<ModelParams> {
    let freq = cfg.alpha.resolve()?;
    ModelParams::new(cfg.lambda, freq, cfg.theta, cfg.energy).map_err(CliError::Model)
}

fn base_resolved(cfg: &ExperimentConfig, params: &ModelParams, epsilon: f64) -> serde_json::Value {
    let l = lyapunov_closed_form(params.energy, params.lambda).value;
    let coeff_prefix: Vec<u64> = params.freq.cf_coeffs().iter().take(12).copied().collect();
    json!({
        "lambda": params.lambda,
        "alpha": params.freq.value(),
        "alpha_coeff_prefix": coeff_prefix,
        "alpha_convergents": params.freq.convergents().len(),
        "theta": params.theta,
        "energy": params.energy,
        "lyapunov": l,
        "lyapunov_tilde": l - LN_2,
        "epsilon": epsilon,
        "grid": cfg.grid,
    })
}

fn energy_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    let (lo, hi, n) = cfg.energy_grid;
    if n == 1 {
        return vec![lo];
    }
    // convex combination keeps the endpoints exact and mirrors a symmetric
    // window bit-for-bit
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| (lo * (last - i as f64) + hi * i as f64) / last)
        .collect()
}

/// `lyapunov`: the four Lyapunov routes across the energy grid.
pub fn cmd_lyapunov(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let mut table = CsvTable::new(&[
        "E",
        "L_closed",
        "L_birkhoff_D",
        "L_birkhoff_F_plus_ln2",
        "ln_abs_x2",
        "k_used",
    ]);
    let rows: Vec<(f64, f64, f64, f64, f64)> = energy_grid(cfg)
        .par_iter()
        .map(|&e| {
            let at = params.with_energy(e);
            let closed = lyapunov_closed_form(e, cfg.lambda).value;
            let d = lyapunov_birkhoff(&at, cfg.k, cfg.birkhoff_grid, StepKind::D)
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
            let f = lyapunov_birkhoff(&at, cfg.k, cfg.birkhoff_grid, StepKind::F)
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
            let x2 = x2_root(e, cfg.lambda).map(|r| r.1).unwrap_or(f64::NAN);
            (e, closed, d, f, x2)
        })
        .collect();
    let mut worst_gap = 0.0f64;
    for (e, closed, d, f, x2) in rows {
        worst_gap = worst_gap.max((closed - x2).abs());
        table.push(vec![
            Cell::Float(e),
            Cell::Float(closed),
            Cell::Float(d),
            Cell::Float(f),
            Cell::Float(x2),
            Cell::Int(cfg.k as i64),
        ]);
    }
    let mut manifest = RunManifest::new("lyapunov", base_resolved(cfg, &params, eps));
    manifest
        .checks
        .push(CheckRecord::upper("closed_form_vs_x2_root", worst_gap, 1e-12));
    emit(&cfg.out_dir, "lyapunov", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `detgrowth`: θ-averaged and maximal growth of ln|P̃_k| against the
/// asymptotic bounds, per k.
pub fn cmd_detgrowth(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let mut table = CsvTable::new(&[
        "k",
        "avg_log_ptilde",
        "lower_bound",
        "upper_envelope",
        "max_over_theta",
    ]);
    for &k in &cfg.k_list {
        if k < 1 {
            return Err(CliError::Config(ConfigError(format!(
                "detgrowth needs positive k, got {k}"
            ))));
        }
        let r = avg_log_ptilde(&params, k as usize, cfg.grid, eps);
        table.push(vec![
            Cell::Int(k),
            Cell::Float(r.value),
            Cell::Float(r.lower_bound),
            Cell::Float(r.upper_envelope),
            Cell::Float(r.max_value),
        ]);
    }
    let manifest = RunManifest::new("detgrowth", base_resolved(cfg, &params, eps));
    emit(&cfg.out_dir, "detgrowth", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `uniformity`: the 3ε-uniformity measure of the scheme nodes, per k.
pub fn cmd_uniformity(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let mut table = CsvTable::new(&[
        "k",
        "case_tag",
        "q_n",
        "s",
        "h",
        "epsilon_effective",
        "threshold",
        "pass",
    ]);
    for &k in &cfg.k_list {
        let scheme = interval_scheme(k, &params.freq)?;
        let r = check_3eps_uniform(&params, k, eps, cfg.theta_grid)?;
        table.push(vec![
            Cell::Int(k),
            Cell::Str(case_name(scheme.case_tag).into()),
            Cell::Uint(scheme.q_n),
            Cell::Uint(scheme.s),
            Cell::Uint(scheme.h),
            Cell::Float(r.epsilon_effective),
            Cell::Float(3.0 * eps),
            Cell::Bool(r.pass == Some(true)),
        ]);
    }
    let manifest = RunManifest::new("uniformity", base_resolved(cfg, &params, eps));
    emit(&cfg.out_dir, "uniformity", cfg.format, &table, manifest, started)?;
    Ok(0)
}

fn case_name(tag: CaseTag) -> &'static str {
    match tag {
        CaseTag::Case1 => "case1",
        CaseTag::Case2 => "case2",
    }
}

/// `scheme`: the raw interval arithmetic, per k.
pub fn cmd_scheme(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let mut table = CsvTable::new(&[
        "k", "case_tag", "q_n", "s", "h", "i1_lo", "i1_hi", "i2_lo", "i2_hi",
    ]);
    for &k in &cfg.k_list {
        let s = interval_scheme(k, &params.freq)?;
        table.push(vec![
            Cell::Int(k),
            Cell::Str(case_name(s.case_tag).into()),
            Cell::Uint(s.q_n),
            Cell::Uint(s.s),
            Cell::Uint(s.h),
            Cell::Int(s.i1.0),
            Cell::Int(s.i1.1),
            Cell::Int(s.i2.0),
            Cell::Int(s.i2.1),
        ]);
    }
    let manifest = RunManifest::new("scheme", base_resolved(cfg, &params, eps));
    emit(&cfg.out_dir, "scheme", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `green`: both edge Green's values across the box, determinant-ratio and
/// direct routes side by side.
pub fn cmd_green(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let (x1, x2) = (cfg.x1, cfg.x2);
    if x1 > x2 {
        return Err(CliError::Config(ConfigError(format!(
            "green needs x1 ≤ x2, got {x1} > {x2}"
        ))));
    }
    let mut table = CsvTable::new(&[
        "y",
        "log_abs_g_left",
        "log_abs_g_right",
        "sign_left",
        "sign_right",
        "rel_diff_left",
        "rel_diff_right",
    ]);
    let mut worst = 0.0f64;
    for y in x1..=x2 {
        let (cl, cr) = green_cramer(&params, x1, x2, y)?;
        let (dl, dr) = green_direct(&params, x1, x2, y)?;
        let rel = |a: SignedLog, b: SignedLog| ((a.log_mag() - b.log_mag()).exp() - 1.0).abs();
        let (el, er) = (rel(cl.value, dl.value), rel(cr.value, dr.value));
        worst = worst.max(el).max(er);
        table.push(vec![
            Cell::Int(y),
            Cell::Float(cl.value.log_mag()),
            Cell::Float(cr.value.log_mag()),
            Cell::Int(cl.value.sign() as i64),
            Cell::Int(cr.value.sign() as i64),
            Cell::Float(el),
            Cell::Float(er),
        ]);
    }
    let mut manifest = RunManifest::new("green", base_resolved(cfg, &params, eps));
    manifest
        .checks
        .push(CheckRecord::upper("cramer_vs_direct", worst, 1e-6));
    emit(&cfg.out_dir, "green", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `localize`: the decay pipeline; per-k verdicts in the CSV, the fit in
/// the manifest.
pub fn cmd_localize(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let report = decay_pipeline(
        &params,
        cfg.n_box,
        cfg.energy_window,
        cfg.which_eigenvalue,
        cfg.k_range,
        eps,
    )?;
    let mut table = CsvTable::new(&["k", "log_abs_phi", "regular", "witness_x1", "h"]);
    for p in &report.points {
        table.push(vec![
            Cell::Int(p.k),
            Cell::Float(p.log_abs_phi),
            Cell::Bool(p.regular),
            match p.witness_x1 {
                Some(x) => Cell::Int(x),
                None => Cell::Str(String::new()),
            },
            match p.h {
                Some(h) => Cell::Uint(h),
                None => Cell::Str(String::new()),
            },
        ]);
    }
    let l = lyapunov_closed_form(report.energy, cfg.lambda).value;
    let mut resolved = base_resolved(cfg, &params, eps);
    resolved["decay"] = json!({
        "box_energy": report.energy,
        "center": report.center,
        "regular_fraction": report.regular_fraction,
        "slope": report.fit.slope,
        "intercept": report.fit.intercept,
        "r_squared": report.fit.r_squared,
        "k_range": [report.fit.window.0, report.fit.window.1],
        "theorem_bound_pass": report.fit.theorem_bound_pass,
        "lyapunov_at_energy": l,
    });
    let mut manifest = RunManifest::new("localize", resolved);
    manifest.checks.push(CheckRecord::lower(
        "regular_fraction",
        report.regular_fraction,
        0.95,
    ));
    manifest.checks.push(CheckRecord::upper(
        "slope_ratio_gap",
        (report.fit.slope / -l - 1.0).abs(),
        0.15,
    ));
    manifest
        .checks
        .push(CheckRecord::lower("r_squared", report.fit.r_squared, 0.98));
    manifest.checks.push(CheckRecord::boolean(
        "sitewise_theorem_bound",
        report.fit.theorem_bound_pass,
    ));
    emit(&cfg.out_dir, "localize", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `sweep`: closed-form, root, and Birkhoff Lyapunov values over the
/// (λ, E) product grid, in parallel with deterministic output order.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    let energies = energy_grid(cfg);
    let points: Vec<(f64, f64)> = cfg
        .lambda_list
        .iter()
        .flat_map(|&l| energies.iter().map(move |&e| (l, e)))
        .collect();
    let rows: Vec<(f64, f64, f64, f64, f64)> = points
        .par_iter()
        .map(|&(lambda, e)| {
            let closed = lyapunov_closed_form(e, lambda).value;
            let x2 = x2_root(e, lambda).map(|r| r.1).unwrap_or(f64::NAN);
            let at = ModelParams::new(lambda, params.freq.clone(), cfg.theta, e)
                .expect("validated coupling");
            let d = lyapunov_birkhoff(&at, cfg.k.min(20_000), cfg.birkhoff_grid, StepKind::D)
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
            (lambda, e, closed, x2, d)
        })
        .collect();
    let mut table = CsvTable::new(&["lambda", "E", "L_closed", "ln_abs_x2", "L_birkhoff_D", "k_used"]);
    for (lambda, e, closed, x2, d) in rows {
        table.push(vec![
            Cell::Float(lambda),
            Cell::Float(e),
            Cell::Float(closed),
            Cell::Float(x2),
            Cell::Float(d),
            Cell::Int(cfg.k.min(20_000) as i64),
        ]);
    }
    let manifest = RunManifest::new("sweep", base_resolved(cfg, &params, eps));
    emit(&cfg.out_dir, "sweep", cfg.format, &table, manifest, started)?;
    Ok(0)
}

/// `lemma-suite`: every lemma-level check in one batch; exit 4 on any
/// failed assertion.
pub fn cmd_lemma_suite(cfg: &ExperimentConfig) -> CliResult<i32> {
    let started = Instant::now();
    let params = resolved_params(cfg)?;
    let eps = cfg.epsilon_at(cfg.energy, cfg.lambda)?;
    // surface a singular phase before any long computation
    let guard_window = (-(cfg.n_box as i64), cfg.n_box as i64);
    let dist = singular_phase_distance(cfg.theta, &params.freq, guard_window);
    if dist <= SINGULAR_PHASE_GUARD {
        let site = (guard_window.0..=guard_window.1)
            .find(|&n| params.pole_distance(n) <= SINGULAR_PHASE_GUARD)
            .unwrap_or(0);
        return Err(CliError::Model(maryland::Error::SingularPhase {
            site,
            dist,
            guard: SINGULAR_PHASE_GUARD,
        }));
    }
    let l = lyapunov_closed_form(params.energy, params.lambda).value;
    let l_tilde = l - LN_2;
    let mut checks: Vec<CheckRecord> = Vec::new();

    // constant-cocycle identities: closed form vs ln(abs(x2)) on a grid, d_k rate, f_2(0)
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.5, 3.0] {
        for i in 0..=20 {
            let e = -3.0 + 0.3 * i as f64;
            let gap = (lyapunov_closed_form(e, lambda).value
                - x2_root(e, lambda).map(|r| r.1).unwrap_or(f64::NAN))
            .abs();
            worst = worst.max(gap);
        }
    }
    checks.push(CheckRecord::upper("x2_identity_max_gap", worst, 1e-12));
    let d = d_sequence(0.0, 1.5, 200);
    checks.push(CheckRecord::upper(
        "dk_rate_gap",
        (d.ratio_growth(200) - 2.0).abs(),
        1e-6,
    ));
    checks.push(CheckRecord::boolean(
        "f2_exact",
        d.f0_complex(2) == num_complex::Complex64::new(-0.8125, 0.0),
    ));

    // transfer-matrix identities
    {
        let k = 12usize;
        let shifted = params.with_theta(params.theta + params.freq.value());
        let pk = p_sequence(&params, k)?;
        let pk_s = p_sequence(&shifted, k)?;
        let m = transfer_product(&params, k as i64, StepKind::D)?;
        let assembled = [
            [pk.value(k), -pk_s.value(k - 1)],
            [pk.value(k - 1), -pk_s.value(k - 2)],
        ];
        let mut gap = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                gap = gap.max(((m.entry(i, j).log_mag() - assembled[i][j].log_mag()).exp() - 1.0).abs());
            }
        }
        checks.push(CheckRecord::upper("d_matrix_assembly", gap, 1e-8));
    }
    {
        let k = 500usize;
        let shifted = params.with_theta(params.theta + params.freq.value());
        let pt = ptilde_sequence(&params, k);
        let pt_s = ptilde_sequence(&shifted, k);
        let c0 = SignedLog::from_f64(cos_pi(params.theta));
        let ck1 = SignedLog::from_f64(cos_pi(params.site_phase(k as i64 - 1)));
        let assembled = [
            [pt.value(k), -(pt_s.value(k - 1) * c0)],
            [pt.value(k - 1) * ck1, -(pt_s.value(k - 2) * c0 * ck1)],
        ];
        let m = transfer_product(&params, k as i64, StepKind::F)?;
        let mut gap = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                gap = gap.max(((m.entry(i, j).log_mag() - assembled[i][j].log_mag()).exp() - 1.0).abs());
            }
        }
        checks.push(CheckRecord::upper("f_matrix_assembly", gap, 1e-8));
    }

    // upper envelope (k = 500) and average lower bound (k = 200)
    let stats = avg_log_ptilde(&params, 500, cfg.grid.min(2048), eps);
    checks.push(CheckRecord::upper(
        "envelope_max_minus_bound",
        stats.max_value - (l_tilde + 0.05),
        0.0,
    ));
    let avg = avg_log_ptilde(&params, 200, cfg.grid, eps);
    checks.push(CheckRecord::lower(
        "average_lower_bound_gap",
        avg.value - (l - LN_2 - 0.05),
        0.0,
    ));
    checks.push(CheckRecord::upper(
        "average_below_envelope",
        avg.value - (l_tilde + 0.05),
        0.0,
    ));

    // trigonometric product deviation stability
    {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let mut per_n: Vec<f64> = Vec::new();
        for q in [55u64, 89, 144, 233, 377] {
            if let Some(n) = params.freq.convergents().iter().position(|c| c.q == q) {
                let mut max_ratio = 0.0f64;
                for _ in 0..100 {
                    let theta: f64 = rng.gen_range(0.0..1.0);
                    let (dev, _) = lana_deviation(theta, &params.freq, n)?;
                    max_ratio = max_ratio.max(dev.abs() / (q as f64).ln());
                }
                per_n.push(max_ratio);
            }
        }
        if per_n.len() >= 2 {
            let hi = per_n.iter().cloned().fold(f64::MIN, f64::max);
            let lo = per_n.iter().cloned().fold(f64::MAX, f64::min);
            checks.push(CheckRecord::upper("lana_stability_factor", hi / lo, 2.0));
        }
    }

    // 3ε-uniformity of the scheme nodes
    for k in [34i64, 55, 89] {
        let r = check_3eps_uniform(&params, k, eps, cfg.theta_grid)?;
        checks.push(CheckRecord::upper(
            &format!("uniformity_k{k}"),
            r.epsilon_effective,
            3.0 * eps,
        ));
    }

    // recentered interval replays and regularity at a box eigenvalue
    {
        let report = decay_pipeline(&params, cfg.n_box, cfg.energy_window, 0, (30, 60), eps)?;
        let centered = params
            .with_theta(params.theta + report.center as f64 * params.freq.value())
            .with_energy(report.energy);
        let eps_c = cfg.epsilon_at(report.energy, params.lambda)?;
        let i1 = verify_i1_small(&centered, 89, eps_c)?;
        checks.push(CheckRecord::upper(
            "i1_smallness_margin",
            i1.extreme_log - i1.threshold_log,
            0.0,
        ));
        let i2 = find_i2_large(&centered, 89, eps_c)?;
        checks.push(CheckRecord::lower(
            "i2_witness_margin",
            i2.extreme_log - i2.threshold_log,
            0.0,
        ));
        for k in [55i64, 89, 144] {
            let v = verify_regular(&centered, k, eps_c)?;
            checks.push(CheckRecord::boolean(&format!("regular_k{k}"), v.regular));
        }
        // the contradiction chain on computed numbers: if everything on
        // I₁ ∪ I₂ sat below the threshold, the Lagrange bound would push the
        // average below its lower bound
        let lag_cap = (i1.h as f64).ln() + i1.extreme_log.max(i2.extreme_log) + 3.0 * eps_c * (i1.h - 1) as f64;
        let avg_floor = ((i1.h - 1) as f64) * (l - LN_2 - 0.05);
        checks.push(CheckRecord::lower(
            "lagrange_vs_average_chain",
            lag_cap - avg_floor,
            0.0,
        ));
    }

    // Green's-function routes and the expand identity
    {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let mut worst_green = 0.0f64;
        let mut tested = 0;
        while tested < 40 {
            let theta: f64 = rng.gen_range(0.0..1.0);
            let p = match ModelParams::new(
                rng.gen_range(0.5..3.0),
                params.freq.clone(),
                theta,
                rng.gen_range(-2.0..2.0),
            ) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let x1 = rng.gen_range(-50i64..50);
            let x2 = x1 + rng.gen_range(2i64..=100) - 1;
            let y = rng.gen_range(x1..=x2);
            if ptilde_eval_shifted(&p, x1, (x2 - x1 + 1) as usize).log_mag() <= -20.0 {
                continue;
            }
            match (green_cramer(&p, x1, x2, y), green_direct(&p, x1, x2, y)) {
                (Ok((cl, cr)), Ok((dl, dr))) => {
                    if dl.value.log_mag() < -300.0 || dr.value.log_mag() < -300.0 {
                        continue;
                    }
                    let rel = |a: SignedLog, b: SignedLog| {
                        ((a.log_mag() - b.log_mag()).exp() - 1.0).abs()
                    };
                    worst_green = worst_green
                        .max(rel(cl.value, dl.value))
                        .max(rel(cr.value, dr.value));
                    tested += 1;
                }
                _ => continue,
            }
        }
        checks.push(CheckRecord::upper("green_cramer_vs_direct", worst_green, 1e-6));

        let mut worst_expand = 0.0f64;
        let mut done = 0;
        while done < 25 {
            let theta: f64 = rng.gen_range(0.0..1.0);
            let p = match ModelParams::new(
                rng.gen_range(0.5..3.0),
                params.freq.clone(),
                theta,
                rng.gen_range(-2.0..2.0),
            ) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let x1 = rng.gen_range(-20i64..0);
            let x2 = x1 + rng.gen_range(5i64..=40) - 1;
            let y = rng.gen_range(x1..=x2);
            let sol = match solution_sequence(
                &p,
                (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                (x1 - 1, x2 + 1),
            ) {
                Ok(s) => s,
                Err(_) => continue,
            };
            match expand_identity_check(&p, &sol, x1, x2, y) {
                Ok(r) => {
                    worst_expand = worst_expand.max(r);
                    done += 1;
                }
                Err(_) => continue,
            }
        }
        checks.push(CheckRecord::upper("expand_identity_residual", worst_expand, 1e-8));
    }

    let mut table = CsvTable::new(&["check_id", "value", "bound", "pass"]);
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        table.push(vec![
            Cell::Str(c.name.clone()),
            Cell::Float(c.value),
            Cell::Float(c.bound),
            Cell::Bool(c.pass),
        ]);
    }
    let mut manifest = RunManifest::new("lemma-suite", base_resolved(cfg, &params, eps));
    manifest.checks = checks.clone();
    emit(&cfg.out_dir, "lemma_suite", cfg.format, &table, manifest, started)?;
    for c in &checks {
        println!(
            "{} {}: value {} bound {}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    Ok(if all_pass { 0 } else { 4 })
}
