//! Browser bindings: three operations, each taking plain numbers and
//! returning a JSON string for the page script to draw.

use std::f64::consts::PI;

use qpbbm::bounds::horizon;
use qpbbm::combinatorics::{critical_weight, diamond_majorant, diamond_sum, diamond_sum_recursive, node_count};
use qpbbm::picard::{solve, SolverConfig};
use qpbbm::spectral::{evaluate_u, make_initial, DecayProfile};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Demo runs stay small enough for the main thread.
const MAX_RADIUS: u32 = 8;
const MAX_STEPS: usize = 1024;
const MAX_X_SAMPLES: usize = 2000;
const MAX_TREE_DEPTH: u32 = 40;
const ENUMERATION_BUDGET: u64 = 1000;

fn profile_of(kind: &str, amp: f64, rate: f64) -> Result<DecayProfile, String> {
    match kind {
        "exp" => Ok(DecayProfile::Exponential { amp, rate }),
        "poly" => Ok(DecayProfile::Polynomial { amp, rate }),
        other => Err(format!("unknown profile {other:?} (expected exp or poly)")),
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Mode {
    n: Vec<i64>,
    l1: u64,
    abs_initial: f64,
    abs_final: f64,
    envelope: f64,
}

#[derive(Serialize)]
struct ProfileView {
    horizon: f64,
    constant_b: f64,
    x: Vec<f64>,
    u_initial: Vec<f64>,
    u_final: Vec<f64>,
    max_imag: f64,
    modes: Vec<Mode>,
    sup_differences: Vec<f64>,
    difference_bounds: Vec<f64>,
    residual: f64,
}

/// Solves to the guaranteed horizon and samples `Re u(0, x)` and `Re u(T, x)`
/// on `[0, x_max)`, with the coefficient moduli against the decay envelope.
#[allow(clippy::too_many_arguments)]
pub fn solve_profile_json(
    p: u32,
    nu: usize,
    radius: u32,
    kind: &str,
    amp: f64,
    rate: f64,
    steps: usize,
    seed: u64,
    x_max: f64,
    x_samples: usize,
) -> Result<String, String> {
    if radius > MAX_RADIUS || steps > MAX_STEPS || x_samples > MAX_X_SAMPLES {
        return Err(format!(
            "demo limits: radius <= {MAX_RADIUS}, steps <= {MAX_STEPS}, x samples <= {MAX_X_SAMPLES}"
        ));
    }
    if x_samples == 0 || !(x_max > 0.0 && x_max.is_finite()) {
        return Err("x grid requires samples >= 1 and x_max > 0".into());
    }
    let profile = profile_of(kind, amp, rate)?;
    profile.validate(nu).map_err(|e| e.to_string())?;
    let mut cfg = SolverConfig::new(p, nu, radius, profile).map_err(|e| e.to_string())?;
    cfg.time_steps = steps;
    cfg.seed = seed;
    let rep = cfg.validate().map_err(|e| e.to_string())?;
    let init = make_initial(&cfg.profile, p, cfg.trunc(), seed).map_err(|e| e.to_string())?;
    let sol = solve(&cfg, &init).map_err(|e| e.to_string())?;
    let last = sol.solution.last();
    let env = rep.decay_envelope();
    let x: Vec<f64> = (0..x_samples).map(|j| x_max * j as f64 / x_samples as f64).collect();
    let mut u_initial = Vec::with_capacity(x.len());
    let mut u_final = Vec::with_capacity(x.len());
    let mut max_imag: f64 = 0.0;
    for &xj in &x {
        let a = evaluate_u(&init, &cfg.omega, xj).map_err(|e| e.to_string())?;
        let b = evaluate_u(last, &cfg.omega, xj).map_err(|e| e.to_string())?;
        max_imag = max_imag.max(a.im.abs()).max(b.im.abs());
        u_initial.push(a.re);
        u_final.push(b.re);
    }
    let modes = cfg
        .trunc()
        .enumerate()
        .into_iter()
        .map(|n| Mode {
            l1: n.l1(),
            abs_initial: init.get(&n).norm(),
            abs_final: last.get(&n).norm(),
            envelope: env.at(n.l1()),
            n: n.coords().to_vec(),
        })
        .collect();
    let d = &sol.diagnostics;
    json(&ProfileView {
        horizon: d.horizon,
        constant_b: d.constant_b,
        x,
        u_initial,
        u_final,
        max_imag,
        modes,
        sup_differences: d.history(),
        difference_bounds: d.iterations.iter().map(|r| r.bound_sup).collect(),
        residual: d.residual,
    })
}

#[derive(Serialize)]
struct DiamondView {
    p: u32,
    flat: f64,
    critical_weight: f64,
    bound: f64,
    k: Vec<u32>,
    node_count: Vec<Option<u128>>,
    sums: Vec<f64>,
    enumerated: Vec<Option<f64>>,
    majorant: Vec<f64>,
}

/// Weighted tree sums `W_k(flat)` for `k = 1..=k_max` next to the induction
/// majorant; trees are also enumerated while they fit the budget.
pub fn diamond_curves_json(p: u32, flat: f64, k_max: u32) -> Result<String, String> {
    if k_max == 0 || k_max > MAX_TREE_DEPTH {
        return Err(format!("depth requires 1 <= k <= {MAX_TREE_DEPTH}"));
    }
    let ks: Vec<u32> = (1..=k_max).collect();
    let mut sums = Vec::new();
    let mut enumerated = Vec::new();
    let mut majorant = Vec::new();
    for &k in &ks {
        sums.push(diamond_sum_recursive(k, p, flat).map_err(|e| e.to_string())?);
        majorant.push(diamond_majorant(k, p, flat).map_err(|e| e.to_string())?);
        enumerated.push(diamond_sum(k, p, flat, ENUMERATION_BUDGET).ok());
    }
    json(&DiamondView {
        p,
        flat,
        critical_weight: critical_weight(p),
        bound: f64::from(p) / f64::from(p - 1),
        node_count: ks.iter().map(|&k| node_count(k, p)).collect(),
        k: ks,
        sums,
        enumerated,
        majorant,
    })
}

#[derive(Serialize)]
struct HorizonView {
    horizon: f64,
    constant_b: f64,
    envelope_amp: f64,
    envelope_rate: f64,
    target_t: f64,
    max_amp_for_target: Option<f64>,
    amp_curve: Vec<(f64, f64)>,
}

/// Horizon and bound constant for one profile, the largest amplitude reaching
/// `target_t` (when positive) and the horizon over a log-spaced amplitude sweep.
pub fn horizon_json(p: u32, nu: usize, kind: &str, amp: f64, rate: f64, target_t: f64) -> Result<String, String> {
    let profile = profile_of(kind, amp, rate)?;
    let rep = horizon(p, &profile, nu).map_err(|e| e.to_string())?;
    let max_amp = if target_t > 0.0 { Some(rep.max_amp_for_target(target_t).map_err(|e| e.to_string())?) } else { None };
    let mut amp_curve = Vec::new();
    for i in 0..=40 {
        let a = 10f64.powf(-2.0 + 4.0 * f64::from(i) / 40.0);
        let prof = profile_of(kind, a, rate)?;
        amp_curve.push((a, horizon(p, &prof, nu).map_err(|e| e.to_string())?.horizon));
    }
    let env = rep.decay_envelope();
    json(&HorizonView {
        horizon: rep.horizon,
        constant_b: rep.constant_b,
        envelope_amp: env.amp,
        envelope_rate: env.rate,
        target_t,
        max_amp_for_target: max_amp,
        amp_curve,
    })
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = solveProfile)]
pub fn solve_profile(
    p: u32,
    nu: usize,
    radius: u32,
    kind: &str,
    amp: f64,
    rate: f64,
    steps: usize,
    seed: u32,
    x_samples: usize,
) -> Result<String, JsValue> {
    solve_profile_json(p, nu, radius, kind, amp, rate, steps, u64::from(seed), 4.0 * PI, x_samples)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = diamondCurves)]
pub fn diamond_curves(p: u32, flat: f64, k_max: u32) -> Result<String, JsValue> {
    diamond_curves_json(p, flat, k_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = horizonExplorer)]
pub fn horizon_explorer(p: u32, nu: usize, kind: &str, amp: f64, rate: f64, target_t: f64) -> Result<String, JsValue> {
    horizon_json(p, nu, kind, amp, rate, target_t).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn profile_view_stays_real_and_inside_envelope() {
        let v = parse(solve_profile_json(2, 1, 3, "exp", 1.0, 1.0, 128, 1, 4.0 * PI, 64));
        assert_eq!(v["horizon"], 1.0 / 12.0);
        assert_eq!(v["x"].as_array().unwrap().len(), 64);
        assert!(v["max_imag"].as_f64().unwrap() < 1e-10);
        for m in v["modes"].as_array().unwrap() {
            assert!(m["abs_final"].as_f64().unwrap() <= m["envelope"].as_f64().unwrap());
        }
        let diffs = v["sup_differences"].as_array().unwrap();
        let bounds = v["difference_bounds"].as_array().unwrap();
        assert!(diffs.iter().zip(bounds).all(|(d, b)| d.as_f64() <= b.as_f64()));
    }

    #[test]
    fn profile_rejections() {
        let e = solve_profile_json(2, 1, 3, "exp", 1.0, 1.5, 128, 1, 1.0, 8).unwrap_err();
        assert!(e.contains("rho <= 1"), "{e}");
        let e = solve_profile_json(2, 2, 3, "poly", 1.0, 10.0, 128, 1, 1.0, 8).unwrap_err();
        assert!(e.contains("nu < r/4 - 2"), "{e}");
        assert!(solve_profile_json(2, 1, 30, "exp", 1.0, 1.0, 128, 1, 1.0, 8).unwrap_err().contains("demo limits"));
        assert!(solve_profile_json(2, 1, 3, "gauss", 1.0, 1.0, 128, 1, 1.0, 8).is_err());
    }

    #[test]
    fn diamond_view() {
        let v = parse(diamond_curves_json(2, 0.25, 6));
        assert_eq!(v["critical_weight"], 0.25);
        assert_eq!(v["bound"], 2.0);
        let sums: Vec<f64> = v["sums"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(sums[0], 1.25);
        assert!(sums.windows(2).all(|w| w[0] <= w[1]) && sums.iter().all(|s| *s <= 2.0));
        let en = v["enumerated"].as_array().unwrap();
        assert!((en[3].as_f64().unwrap() - sums[3]).abs() < 1e-13);
        assert!(en[4].is_null());
        assert!(diamond_curves_json(2, 0.25, 0).is_err());
    }

    #[test]
    fn horizon_view() {
        let v = parse(horizon_json(2, 1, "exp", 1.0, 1.0, 1.0 / 24.0));
        assert_eq!(v["horizon"], 1.0 / 12.0);
        assert!((v["max_amp_for_target"].as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(v["amp_curve"].as_array().unwrap().len(), 41);
        let v = parse(horizon_json(3, 1, "exp", 1.0, 1.0, 0.0));
        assert_eq!(v["horizon"], 1.0 / 81.0);
        assert!(v["max_amp_for_target"].is_null());
        assert!(horizon_json(2, 2, "poly", 1.0, 10.0, 0.0).is_err());
    }
}
