use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use log::{info, warn};
use qpbbm::bounds::{b_frak, exp_sum_1d, h_partial, horizon, inequality_probes, zeta_partial, HorizonReport, ProbeReport};
use qpbbm::combinatorics::{
    critical_weight, diamond_sum, diamond_sum_recursive, enumerate_tree, node_count, stats, TreeExpansion,
};
use qpbbm::io::{field_from_csv, solution_from_csv, solution_to_csv};
use qpbbm::lattice::FrequencyVector;
use qpbbm::oracle::rk4_integrate;
use qpbbm::picard::{self, Diagnostics, PicardIteration, SolverConfig, TimeGridField};
use qpbbm::spectral::{evaluate_u, make_initial, tail_mass, CoeffField, DecayProfile, Envelope};
use serde::Serialize;

use crate::args::{CompareArgs, EvaluateArgs, HorizonArgs, RunFlags, SolveArgs, VerifyBoundsArgs, VerifyTreeArgs};
use crate::config::{default_rate, make_profile, parse_config};
use crate::error::{CliError, CliResult};
use crate::manifest::{now_ms, sibling, to_json, write_output, RunManifest};

/// Picard comparison in `verify-tree` is limited to trees this large.
const PICARD_NODE_LIMIT: u128 = 1000;
const TREE_ABS_FLOOR: f64 = 1e-9;
const ZETA_GRID: usize = 100;
const ZETA_TOL: f64 = 1e-12;
const EXP_SUM_GRID: usize = 1000;
const PROBE_REL_TOL: f64 = 1e-12;

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_output(path, text.as_bytes()).map(|_| ()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail_unless(pass: bool, what: &str) -> CliResult<()> {
    if pass {
        Ok(())
    } else {
        Err(CliError::validation(format!("check failed: {what}")))
    }
}

fn initial_field(flags: &RunFlags, cfg: &SolverConfig) -> CliResult<CoeffField> {
    let Some(path) = &flags.init else {
        return Ok(make_initial(&cfg.profile, cfg.p, cfg.trunc(), cfg.seed)?);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let field = field_from_csv(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    if field.nu() != cfg.nu {
        return Err(CliError::validation(format!(
            "{} has nu = {} index columns but the config has nu = {}",
            path.display(),
            field.nu(),
            cfg.nu
        )));
    }
    let (field, dropped) = field.restrict(cfg.trunc());
    if dropped > 0.0 {
        warn!("initial data outside |n| <= {} dropped (l1 mass {dropped:.3e})", cfg.radius);
    }
    Ok(field)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a SolverConfig,
    init_source: &'static str,
    truncation_modes: u64,
    truncation_tail_mass: f64,
    diagnostics: &'a Diagnostics,
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    let started = now_ms();
    let cfg = parse_config(&args.run)?;
    let init = initial_field(&args.run, &cfg)?;
    info!("solving p = {}, nu = {}, N = {}, T = {}, M = {}", cfg.p, cfg.nu, cfg.radius, cfg.time_horizon, cfg.time_steps);
    let sol = picard::solve(&cfg, &init)?;
    let report = SolveReport {
        config: &cfg,
        init_source: if args.run.init.is_some() { "file" } else { "generated" },
        truncation_modes: cfg.trunc().count(),
        truncation_tail_mass: tail_mass(&cfg.profile, cfg.p, cfg.nu, cfg.radius),
        diagnostics: &sol.diagnostics,
    };
    let mut outputs = vec![write_output(&args.out, solution_to_csv(&sol.solution).as_bytes())?];
    outputs.push(write_output(&sibling(&args.out, "diagnostics.json"), to_json(&report)?.as_bytes())?);
    let manifest_path = sibling(&args.out, "manifest.json");
    RunManifest {
        tool: "qpbbm",
        version: env!("CARGO_PKG_VERSION"),
        command: "solve".into(),
        config: serde_json::to_value(&cfg).map_err(|e| CliError::runtime(e.to_string()))?,
        seed: cfg.seed,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        outputs,
    }
    .write(&manifest_path)?;
    let d = &sol.diagnostics;
    println!(
        "converged after {} iterations; residual {:.3e}; manifest {}",
        d.iterations.len(),
        d.residual,
        manifest_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct IdentityChecks {
    trees_enumerated: usize,
    count_matches_recurrence: Option<bool>,
    sigma_ell_and_index_length: Option<bool>,
    well_formed: Option<bool>,
}

#[derive(Serialize)]
struct TreeReport {
    k: u32,
    p: u32,
    node_count: Option<u128>,
    identity_checks: IdentityChecks,
    flat: f64,
    critical_weight: f64,
    diamond_value: f64,
    diamond_bound: Option<f64>,
    max_abs_deviation_vs_picard: Option<f64>,
    picard_tolerance: Option<f64>,
    pass: bool,
}

fn tree_vs_picard(args: &VerifyTreeArgs) -> CliResult<(f64, f64)> {
    let mut cfg = SolverConfig::new(args.p, args.nu, args.radius, DecayProfile::Exponential { amp: 1.0, rate: 1.0 })?;
    cfg.time_steps = args.steps;
    cfg.seed = args.seed;
    cfg.validate()?;
    let init = make_initial(&cfg.profile, cfg.p, cfg.trunc(), cfg.seed)?;
    let mut it = PicardIteration::new(&cfg, &init)?;
    for _ in 0..args.k {
        it.step()?;
    }
    let tree = TreeExpansion::build(args.k, args.p, &init, &cfg.omega, cfg.trunc(), args.budget)?;
    let mut worst: f64 = 0.0;
    let cur = it.current();
    for (t, f) in cur.times.iter().zip(&cur.frames) {
        for (n, v) in f.iter() {
            worst = worst.max((tree.eval(n, *t) - v).norm());
        }
    }
    let h = cfg.time_horizon / cfg.time_steps as f64;
    Ok((worst, TREE_ABS_FLOOR.max(h * h)))
}

pub fn verify_tree(args: &VerifyTreeArgs) -> CliResult<()> {
    if args.k == 0 {
        return Err(CliError::validation("tree depth requires k >= 1"));
    }
    if args.p < 2 {
        return Err(CliError::validation(format!("nonlinearity degree requires p >= 2 (got {})", args.p)));
    }
    let crit = critical_weight(args.p);
    let flat = args.flat.unwrap_or(crit);
    let count = node_count(args.k, args.p);
    let enumerable = count.is_some_and(|n| n <= u128::from(args.budget));
    let mut checks = IdentityChecks {
        trees_enumerated: 0,
        count_matches_recurrence: None,
        sigma_ell_and_index_length: None,
        well_formed: None,
    };
    let diamond_value = if enumerable {
        let trees = enumerate_tree(args.k, args.p, args.budget)?;
        checks.trees_enumerated = trees.len();
        checks.count_matches_recurrence = Some(count == Some(trees.len() as u128));
        checks.sigma_ell_and_index_length = Some(trees.iter().all(|t| stats(t, args.p).identities_hold(t, args.p)));
        checks.well_formed = Some(trees.iter().all(|t| t.well_formed(args.p)));
        diamond_sum(args.k, args.p, flat, args.budget)?
    } else {
        warn!("N_{} exceeds the budget {}; identities skipped, weighted sum by recursion", args.k, args.budget);
        diamond_sum_recursive(args.k, args.p, flat)?
    };
    let q = f64::from(args.p - 1);
    let diamond_bound = (flat <= crit).then_some(f64::from(args.p) / q);
    let (deviation, tolerance) = if !args.skip_picard && count.is_some_and(|n| n <= PICARD_NODE_LIMIT) {
        let (d, tol) = tree_vs_picard(args)?;
        (Some(d), Some(tol))
    } else {
        (None, None)
    };
    let pass = [checks.count_matches_recurrence, checks.sigma_ell_and_index_length, checks.well_formed]
        .iter()
        .all(|c| c.unwrap_or(true))
        && diamond_bound.is_none_or(|b| diamond_value <= b)
        && deviation.zip(tolerance).is_none_or(|(d, tol)| d <= tol);
    let report = TreeReport {
        k: args.k,
        p: args.p,
        node_count: count,
        identity_checks: checks,
        flat,
        critical_weight: crit,
        diamond_value,
        diamond_bound,
        max_abs_deviation_vs_picard: deviation,
        picard_tolerance: tolerance,
        pass,
    };
    emit(args.out.as_deref(), &to_json(&report)?)?;
    fail_unless(pass, "tree identities, weighted-sum bound or tree/Picard agreement")
}

#[derive(Serialize)]
struct PartialSumRow {
    nu: usize,
    s: f64,
    b_frak: f64,
    max_partial: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BoundsReport {
    zeta_grid: usize,
    zeta_max_excess: f64,
    zeta_pass: bool,
    exp_sum_grid: usize,
    exp_sum_max_rho_times_sum: f64,
    exp_sum_pass: bool,
    partial_sums: Vec<PartialSumRow>,
    probes: ProbeReport,
    probes_pass: bool,
    pass: bool,
}

pub fn verify_bounds(args: &VerifyBoundsArgs) -> CliResult<()> {
    if args.samples == 0 {
        return Err(CliError::validation("probes require samples >= 1"));
    }
    let mut zeta_max = f64::NEG_INFINITY;
    for i in 0..ZETA_GRID {
        let s = 1.01 + (50.0 - 1.01) * (i as f64 + 1.0) / ZETA_GRID as f64;
        zeta_max = zeta_max.max(zeta_partial(s, ZETA_TOL)? - (1.0 + 1.0 / (s - 1.0)));
    }
    let mut exp_max: f64 = 0.0;
    for i in 1..=EXP_SUM_GRID {
        let rho = i as f64 / EXP_SUM_GRID as f64;
        exp_max = exp_max.max(exp_sum_1d(rho)? * rho);
    }
    let mut rows = Vec::new();
    for nu in 1..=3 {
        for s in [8.0, 12.0, 16.0] {
            let b = b_frak(s, nu)?;
            let max_partial = (0..=args.max_radius).map(|r| h_partial(s, nu, r)).fold(0.0, f64::max);
            rows.push(PartialSumRow { nu, s, b_frak: b, max_partial, pass: max_partial <= b });
        }
    }
    let probes = inequality_probes(args.samples, args.seed);
    let probes_pass = probes.pass(PROBE_REL_TOL);
    let zeta_pass = zeta_max <= 0.0;
    let exp_sum_pass = exp_max <= 3.0;
    let pass = zeta_pass && exp_sum_pass && probes_pass && rows.iter().all(|r| r.pass);
    let report = BoundsReport {
        zeta_grid: ZETA_GRID,
        zeta_max_excess: zeta_max,
        zeta_pass,
        exp_sum_grid: EXP_SUM_GRID,
        exp_sum_max_rho_times_sum: exp_max,
        exp_sum_pass,
        partial_sums: rows,
        probes,
        probes_pass,
        pass,
    };
    emit(args.out.as_deref(), &to_json(&report)?)?;
    fail_unless(pass, "analytic bounds or inequality probes")
}

#[derive(Serialize)]
struct HorizonOutput {
    #[serde(flatten)]
    report: HorizonReport,
    decay_envelope: Envelope,
    target_t: Option<f64>,
    max_amp_for_target: Option<f64>,
}

pub fn horizon_cmd(args: &HorizonArgs) -> CliResult<()> {
    let rate = args.rate.unwrap_or_else(|| default_rate(args.profile));
    let profile = make_profile(args.profile, args.amp, rate);
    let report = horizon(args.p, &profile, args.nu)?;
    let max_amp = args.target_t.map(|t| report.max_amp_for_target(t)).transpose()?;
    let out = HorizonOutput { decay_envelope: report.decay_envelope(), report, target_t: args.target_t, max_amp_for_target: max_amp };
    emit(args.out.as_deref(), &to_json(&out)?)
}

#[derive(Serialize)]
struct OracleReport {
    picard_steps: usize,
    rk_steps: usize,
    sup_distance: f64,
    per_time_distance: Vec<f64>,
    rk_self_refinement: f64,
    picard_residual: f64,
}

fn subsample(g: &TimeGridField, every: usize) -> TimeGridField {
    TimeGridField {
        times: g.times.iter().step_by(every).copied().collect(),
        frames: g.frames.iter().step_by(every).cloned().collect(),
    }
}

pub fn compare_oracle(args: &CompareArgs) -> CliResult<()> {
    let started = now_ms();
    let cfg = parse_config(&args.run)?;
    let rk_steps = args.rk_steps.unwrap_or(cfg.time_steps);
    if rk_steps == 0 || !rk_steps.is_multiple_of(cfg.time_steps) {
        return Err(CliError::validation(format!(
            "RK4 steps must be a positive multiple of the Picard steps M = {} (got {rk_steps})",
            cfg.time_steps
        )));
    }
    let init = initial_field(&args.run, &cfg)?;
    let pic = picard::solve(&cfg, &init)?;
    let every = rk_steps / cfg.time_steps;
    let rk = rk4_integrate(&init, cfg.time_horizon, rk_steps, &cfg.omega, cfg.p, cfg.trunc())?;
    let rk_fine = rk4_integrate(&init, cfg.time_horizon, 2 * rk_steps, &cfg.omega, cfg.p, cfg.trunc())?;
    let per_time = pic.solution.frame_distances(&subsample(&rk, every))?;
    let report = OracleReport {
        picard_steps: cfg.time_steps,
        rk_steps,
        sup_distance: per_time.iter().copied().fold(0.0, f64::max),
        per_time_distance: per_time,
        rk_self_refinement: rk.sup_distance(&subsample(&rk_fine, 2))?,
        picard_residual: pic.diagnostics.residual,
    };
    let text = to_json(&report)?;
    if let Some(out) = &args.out {
        let outputs = vec![write_output(out, text.as_bytes())?];
        RunManifest {
            tool: "qpbbm",
            version: env!("CARGO_PKG_VERSION"),
            command: "compare-oracle".into(),
            config: serde_json::to_value(&cfg).map_err(|e| CliError::runtime(e.to_string()))?,
            seed: cfg.seed,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            outputs,
        }
        .write(&sibling(out, "manifest.json"))?;
    } else {
        print!("{text}");
    }
    match args.max_distance {
        Some(limit) => fail_unless(
            report.sup_distance <= limit,
            &format!("sup |picard - rk4| = {:.3e} exceeds {limit:.3e}", report.sup_distance),
        ),
        None => Ok(()),
    }
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.solution)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", args.solution.display())))?;
    let sol = solution_from_csv(&text).map_err(|e| CliError::validation(format!("{}: {e}", args.solution.display())))?;
    let frames = sol.frames.len();
    let Some(field) = sol.frames.get(args.t_index) else {
        return Err(CliError::validation(format!(
            "t-index {} out of range: the solution has {frames} frames (valid 0..={})",
            args.t_index,
            frames - 1
        )));
    };
    let nu = field.nu();
    let omega = match &args.omega {
        Some(s) => FrequencyVector::parse_list(s)?,
        None => FrequencyVector::default_for(nu)?,
    };
    if omega.nu() != nu {
        return Err(CliError::validation(format!("the wave vector has {} entries but the solution has nu = {nu}", omega.nu())));
    }
    if args.x_samples == 0 {
        return Err(CliError::validation("x grid requires x-samples >= 1"));
    }
    let x_max = args.x_max.unwrap_or(2.0 * PI);
    if !(args.x_min.is_finite() && x_max.is_finite() && x_max > args.x_min) {
        return Err(CliError::validation(format!("x range requires x-min < x-max (got {} and {x_max})", args.x_min)));
    }
    let dx = (x_max - args.x_min) / args.x_samples as f64;
    let mut out = String::from("x,re,im\n");
    for j in 0..args.x_samples {
        let x = args.x_min + j as f64 * dx;
        let u = evaluate_u(field, &omega, x)?;
        let _ = writeln!(out, "{x:.16e},{:.16e},{:.16e}", u.re, u.im);
    }
    emit(args.out.as_deref(), &out)
}
