//! Browser bindings. Each export returns a JSON string; the plain `*_json`
//! functions behind them are ordinary Rust and are tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use slipstab::closed_forms::{spring_block_critical, SpringBlockParams, SpringBlockVerdict};
use slipstab::friction::{EvolutionLaw, RateState};
use slipstab::material::{effective_medium, make_bimaterial, BiMaterial, EffectiveMedium, ShearStiffness};
use slipstab::neutral::{critical_mode_nondim, intersonic_threshold, q_grid, sweep_q, Branch};
use slipstab::simulate::{simulate_with, BlockState, SimOptions, Termination};

const MAX_POINTS: usize = 4000;
const MAX_SWEEP_POINTS: usize = 2000;

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct Point {
    q: f64,
    c_over_c1: f64,
    k_hat: f64,
}

#[derive(Serialize)]
struct Curves {
    subsonic: Vec<Point>,
    intersonic: Vec<Point>,
    critical: Vec<Point>,
    /// Smallest q with intersonic neutral modes, when the interval exists.
    intersonic_from: Option<f64>,
    speed_ratio: f64,
}

pub fn neutral_curves_json(
    mu_ratio: f64,
    speed_ratio: f64,
    b_over_a: f64,
    q_min: f64,
    q_max: f64,
    points: usize,
) -> Result<String, String> {
    if points > MAX_SWEEP_POINTS {
        return Err(format!("points: at most {MAX_SWEEP_POINTS}"));
    }
    let bm = BiMaterial::from_ratios(mu_ratio, speed_ratio).map_err(err)?;
    let grid = q_grid(q_min, q_max, points, true).map_err(err)?;
    let rows = sweep_q(&grid, b_over_a, &bm).map_err(err)?;
    let point = |q, c_over_c1, k_hat| Point { q, c_over_c1, k_hat };
    let mut curves = Curves {
        subsonic: Vec::new(),
        intersonic: Vec::new(),
        critical: Vec::new(),
        intersonic_from: None,
        speed_ratio: bm.speed_ratio,
    };
    for r in rows {
        let p = point(r.q, r.c_over_c1, r.k_hat);
        match r.branch {
            Branch::Subsonic => curves.subsonic.push(p),
            Branch::Intersonic => curves.intersonic.push(p),
        }
    }
    for &q in &grid {
        if let Some(m) = critical_mode_nondim(q, b_over_a, &bm).map_err(err)?.mode() {
            curves.critical.push(point(q, m.c_over_c1, m.k_hat));
        }
    }
    if bm.has_intersonic_interval() {
        curves.intersonic_from = Some(intersonic_threshold(b_over_a, &bm).map_err(err)?.q_min);
    }
    Ok(json(&curves))
}

#[derive(Serialize)]
struct Media {
    first: EffectiveMedium,
    second: EffectiveMedium,
    mu_ratio: f64,
    speed_ratio: f64,
    /// True when the second solid is the slower one.
    swapped: bool,
    static_transfer: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn effective_media_json(
    c44: f64,
    c45: f64,
    c55: f64,
    rho: f64,
    c44_prime: f64,
    c45_prime: f64,
    c55_prime: f64,
    rho_prime: f64,
) -> Result<String, String> {
    let first = effective_medium(&ShearStiffness::new(c44, c45, c55, rho)).map_err(err)?;
    let second = effective_medium(&ShearStiffness::new(c44_prime, c45_prime, c55_prime, rho_prime)).map_err(err)?;
    let bm = make_bimaterial(first, second);
    Ok(json(&Media {
        first,
        second,
        mu_ratio: bm.mu_ratio,
        speed_ratio: bm.speed_ratio,
        swapped: bm.swapped,
        static_transfer: bm.static_transfer(),
    }))
}

#[derive(Serialize)]
struct Trajectory {
    /// Time in units of L/V_o.
    t: Vec<f64>,
    /// V/V_o
    v: Vec<f64>,
    /// theta V_o/L
    theta: Vec<f64>,
    /// (tau - tau_o)/sigma_o
    tau: Vec<f64>,
    /// K_cr in units of sigma_o/L.
    k_cr: f64,
    blew_up: bool,
}

/// Spring-block run in reduced units (`V_o = L = sigma_o = 1`). The spring is
/// `k_over_kcr` times critical, the mass is given as `m V_o^2/(a sigma_o L)`.
pub fn spring_block_json(
    a: f64,
    b: f64,
    k_over_kcr: f64,
    mass_ratio: f64,
    slip_law: bool,
    perturbation: f64,
    duration: f64,
) -> Result<String, String> {
    let p = RateState::new(a, b, 1.0, 1.0, 1.0).map_err(err)?;
    if !(b > a) {
        return Err("b: must exceed a for a critical stiffness".into());
    }
    if !(mass_ratio >= 0.0) {
        return Err("mass_ratio: must be non-negative".into());
    }
    if !(duration > 0.0 && duration <= 5000.0) {
        return Err("duration: must lie in (0, 5000]".into());
    }
    let m = mass_ratio * a;
    let k_cr = match spring_block_critical(&SpringBlockParams::new(1.0, m, p).map_err(err)?) {
        SpringBlockVerdict::Critical { k_cr, .. } => k_cr,
        SpringBlockVerdict::AlwaysStable => unreachable!("b > a checked"),
    };
    let params = SpringBlockParams::new(k_over_kcr * k_cr, m, p).map_err(err)?;
    let law = if slip_law { EvolutionLaw::Slip } else { EvolutionLaw::Ageing };
    let init = BlockState {
        v: 1.0 + perturbation,
        ..BlockState::steady(&p)
    };
    let mut opts = SimOptions::new(duration, 1e-9);
    opts.output_interval = Some(duration / MAX_POINTS as f64);
    let tr = simulate_with(&params, law, &init, &opts).map_err(err)?;
    let tau_o = p.tau_o();
    Ok(json(&Trajectory {
        t: tr.times.clone(),
        v: tr.states.iter().map(|s| s.v).collect(),
        theta: tr.states.iter().map(|s| s.theta).collect(),
        tau: tr.states.iter().map(|s| s.tau - tau_o).collect(),
        k_cr,
        blew_up: tr.meta.termination == Termination::BlowUp,
    }))
}

/// Neutral-mode curves over a log-spaced q grid.
#[wasm_bindgen]
pub fn neutral_curves(
    mu_ratio: f64,
    speed_ratio: f64,
    b_over_a: f64,
    q_min: f64,
    q_max: f64,
    points: usize,
) -> Result<String, JsError> {
    neutral_curves_json(mu_ratio, speed_ratio, b_over_a, q_min, q_max, points).map_err(|e| JsError::new(&e))
}

/// Effective moduli and speeds of two anisotropic solids.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn effective_media(
    c44: f64,
    c45: f64,
    c55: f64,
    rho: f64,
    c44_prime: f64,
    c45_prime: f64,
    c55_prime: f64,
    rho_prime: f64,
) -> Result<String, JsError> {
    effective_media_json(c44, c45, c55, rho, c44_prime, c45_prime, c55_prime, rho_prime).map_err(|e| JsError::new(&e))
}

/// Spring-block slider trajectory in reduced units.
#[wasm_bindgen]
pub fn spring_block(
    a: f64,
    b: f64,
    k_over_kcr: f64,
    mass_ratio: f64,
    slip_law: bool,
    perturbation: f64,
    duration: f64,
) -> Result<String, JsError> {
    spring_block_json(a, b, k_over_kcr, mass_ratio, slip_law, perturbation, duration).map_err(|e| JsError::new(&e))
}
