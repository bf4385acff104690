//! Nonlinear spring-block slider with rate-and-state friction.
//!
//! The block is loaded through a spring moving at `V_o`. Without inertia the
//! spring stress equals the friction stress at every instant; with a mass the
//! spring stress is carried as a separate state and the block accelerates
//! under the stress difference.
//!
//! Integration is in reduced variables `x = ln(V/V_o)`, `y = ln(theta V_o/L)`,
//! `s = (tau_spring - tau_o)/sigma_o` and time `t V_o/L`, with an adaptive
//! Dormand-Prince 5(4) pair.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::closed_forms::{spring_block_critical, SpringBlockParams, SpringBlockVerdict};
use crate::error::{Error, Result};
use crate::friction::{EvolutionLaw, RateState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockState {
    /// Slip velocity (m/s).
    pub v: f64,
    /// State variable (s).
    pub theta: f64,
    /// Shear stress (Pa). For a massless block this is the friction stress
    /// and is fixed by `v` and `theta`; with a mass it is the spring stress.
    pub tau: f64,
}

impl BlockState {
    pub fn steady(p: &RateState) -> Self {
        Self {
            v: p.v_o,
            theta: p.l / p.v_o,
            tau: p.tau_o(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    BlowUp,
    /// Stopped early once `|V/V_o - 1|` passed a caller-supplied bound.
    AmplitudeGuard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub params: SpringBlockParams,
    pub law: EvolutionLaw,
    pub rtol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlockState>,
    pub meta: TrajectoryMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Duration (s).
    pub duration: f64,
    pub rtol: f64,
    /// Halt when `V > blowup_factor V_o`.
    pub blowup_factor: f64,
    /// Halt when `|V/V_o - 1|` exceeds this.
    pub amplitude_guard: Option<f64>,
    pub max_steps: usize,
    /// Record only at multiples of this interval (s) instead of every step.
    pub output_interval: Option<f64>,
}

impl SimOptions {
    pub fn new(duration: f64, rtol: f64) -> Self {
        Self {
            duration,
            rtol,
            blowup_factor: 1e6,
            amplitude_guard: None,
            max_steps: 5_000_000,
            output_interval: None,
        }
    }

    /// 200 state-relaxation times at `rtol = 1e-10`.
    pub fn default_for(p: &RateState) -> Self {
        Self::new(200.0 * p.l / p.v_o, 1e-10)
    }
}

#[derive(Clone, Copy)]
struct Model {
    a: f64,
    b: f64,
    /// K L / sigma_o
    stiffness: f64,
    /// m V_o^2 / (sigma_o L); zero for a massless block
    inertia: f64,
    law: EvolutionLaw,
}

type State = [f64; 3];

impl Model {
    fn new(p: &SpringBlockParams, law: EvolutionLaw) -> Self {
        let f = &p.friction;
        Self {
            a: f.a,
            b: f.b,
            stiffness: p.k * f.l / f.sigma_o,
            inertia: p.m * f.v_o * f.v_o / (f.sigma_o * f.l),
            law,
        }
    }

    /// d(ln theta)/dt in reduced time.
    fn state_log_rate(&self, x: f64, y: f64) -> f64 {
        match self.law {
            EvolutionLaw::Ageing => (-y).exp() - x.exp(),
            EvolutionLaw::Slip => -x.exp() * (x + y),
        }
    }

    fn rhs(&self, u: &State) -> State {
        let [x, y, s] = *u;
        let ev = x.exp();
        let psi = self.state_log_rate(x, y);
        let ds = self.stiffness * (1.0 - ev);
        let dx = if self.inertia > 0.0 {
            (s - self.a * x - self.b * y) / (self.inertia * ev)
        } else {
            (-self.stiffness * (ev - 1.0) - self.b * psi) / self.a
        };
        [dx, psi, ds]
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step; returns the fifth-order solution and the scaled error norm.
fn dopri_step(model: &Model, u: &State, h: f64, rtol: f64) -> (State, f64) {
    let _ = C;
    let mut k = [[0.0; 3]; 7];
    k[0] = model.rhs(u);
    for i in 1..7 {
        let mut ui = *u;
        for (j, kj) in k.iter().enumerate().take(i) {
            for d in 0..3 {
                ui[d] += h * A[i][j] * kj[d];
            }
        }
        k[i] = model.rhs(&ui);
    }
    let mut next = *u;
    let mut err: f64 = 0.0;
    for d in 0..3 {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for i in 0..7 {
            hi += B5[i] * k[i][d];
            lo += B4[i] * k[i][d];
        }
        next[d] += h * hi;
        let scale = rtol * (1.0 + u[d].abs().max(next[d].abs()));
        err = err.max((h * (hi - lo)).abs() / scale);
    }
    (next, err)
}

fn to_state(p: &SpringBlockParams, model: &Model, u: &State) -> BlockState {
    let f = &p.friction;
    let [x, y, s] = *u;
    let tau = if model.inertia > 0.0 {
        f.tau_o() + f.sigma_o * s
    } else {
        f.tau_o() + f.sigma_o * (f.a * x + f.b * y)
    };
    BlockState {
        v: f.v_o * x.exp(),
        theta: f.l / f.v_o * y.exp(),
        tau,
    }
}

/// Integrates the slider and returns the trajectory whatever the outcome;
/// `meta.termination` records whether it ran to completion.
pub fn simulate_with(
    p: &SpringBlockParams,
    law: EvolutionLaw,
    init: &BlockState,
    opts: &SimOptions,
) -> Result<BlockTrajectory> {
    let f = &p.friction;
    if !(init.v > 0.0 && init.theta > 0.0) {
        return Err(Error::Domain(format!(
            "initial V and theta must be positive (V = {}, theta = {})",
            init.v, init.theta
        )));
    }
    if !(opts.duration > 0.0 && opts.rtol > 0.0) {
        return Err(Error::Domain("duration and tolerance must be positive".into()));
    }
    if matches!(opts.output_interval, Some(dt) if !(dt > 0.0)) {
        return Err(Error::Domain("output interval must be positive".into()));
    }
    let model = Model::new(p, law);
    let time_unit = f.l / f.v_o;
    let end = opts.duration / time_unit;
    let x0 = (init.v / f.v_o).ln();
    let y0 = (init.theta * f.v_o / f.l).ln();
    let s0 = if model.inertia > 0.0 {
        (init.tau - f.tau_o()) / f.sigma_o
    } else {
        f.a * x0 + f.b * y0
    };
    let mut u: State = [x0, y0, s0];

    // at least 64 samples per linear oscillation period
    let omega = ((f.b - f.a).abs() / f.a).sqrt().max(1e-3);
    let h_max = (2.0 * PI / omega / 64.0).min(end / 100.0);
    let x_blowup = opts.blowup_factor.ln();

    let mut t = 0.0;
    let mut h = h_max.min(1e-3);
    let mut times = vec![0.0];
    let mut states = vec![to_state(p, &model, &u)];
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut termination = Termination::Completed;
    let out_dt = opts.output_interval.map(|dt| dt / time_unit);
    let mut n_out = 1u64;

    while t < end {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::StepFailure {
                t: t * time_unit,
                v: f.v_o * u[0].exp(),
                theta: time_unit * u[1].exp(),
            });
        }
        let target = match out_dt {
            Some(dt) if end - n_out as f64 * dt > 1e-9 * dt => n_out as f64 * dt,
            _ => end,
        };
        let step = h.min(target - t);
        let (next, err) = dopri_step(&model, &u, step, opts.rtol);
        if err <= 1.0 && next.iter().all(|v| v.is_finite()) {
            let hit = target - t <= step;
            t = if hit { target } else { t + step };
            u = next;
            accepted += 1;
            if out_dt.is_none() || hit {
                times.push(t * time_unit);
                states.push(to_state(p, &model, &u));
                n_out += 1;
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // a step shortened to land on an output time says little about the next one
            let proposal = step * grow;
            h = if hit && step < h { proposal.max(h) } else { proposal }.min(h_max);
            if u[0] > x_blowup {
                termination = Termination::BlowUp;
            } else if matches!(opts.amplitude_guard, Some(g) if (u[0].exp() - 1.0).abs() > g) {
                termination = Termination::AmplitudeGuard;
            }
            if termination != Termination::Completed {
                if times.last() != Some(&(t * time_unit)) {
                    times.push(t * time_unit);
                    states.push(to_state(p, &model, &u));
                }
                break;
            }
        } else {
            rejected += 1;
            let shrink = if err.is_finite() { (0.9 * err.powf(-0.25)).clamp(0.1, 0.9) } else { 0.1 };
            h = step * shrink;
            if h < 1e-14 * t.max(1.0) {
                return Err(Error::StepFailure {
                    t: t * time_unit,
                    v: f.v_o * u[0].exp(),
                    theta: time_unit * u[1].exp(),
                });
            }
        }
    }

    Ok(BlockTrajectory {
        times,
        states,
        meta: TrajectoryMeta {
            params: *p,
            law,
            rtol: opts.rtol,
            accepted_steps: accepted,
            rejected_steps: rejected,
            termination,
        },
    })
}

/// Integrates for `duration` seconds at relative tolerance `rtol`.
/// A run whose slip rate passes `1e6 V_o` ends in [`Error::BlowUp`].
pub fn simulate_spring_block(
    p: &SpringBlockParams,
    law: EvolutionLaw,
    init: &BlockState,
    duration: f64,
    rtol: f64,
) -> Result<BlockTrajectory> {
    let traj = simulate_with(p, law, init, &SimOptions::new(duration, rtol))?;
    if traj.meta.termination == Termination::BlowUp {
        let (t, s) = (traj.times[traj.times.len() - 1], traj.states[traj.states.len() - 1]);
        return Err(Error::BlowUp { t, v: s.v });
    }
    Ok(traj)
}

/// Local maxima of `|V/V_o - 1|`, refined by a parabola through the three
/// samples around each one.
pub fn deviation_peaks(traj: &BlockTrajectory, v_o: f64) -> Vec<(f64, f64)> {
    let dev: Vec<f64> = traj.states.iter().map(|s| (s.v / v_o - 1.0).abs()).collect();
    local_maxima(&traj.times, &dev)
}

fn local_maxima(t: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let (t0, t1, t2) = (t[i - 1], t[i], t[i + 1]);
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            // vertex of the interpolating parabola
            let d01 = (y1 - y0) / (t1 - t0);
            let d12 = (y2 - y1) / (t2 - t1);
            let curv = (d12 - d01) / (t2 - t0);
            if curv < 0.0 {
                let tv = 0.5 * (t0 + t1) - d01 / (2.0 * curv);
                let tv = tv.clamp(t0, t2);
                let yv = y1 + d01 * (tv - t1) + curv * (tv - t0) * (tv - t1);
                peaks.push((tv, yv.max(y1)));
            } else {
                peaks.push((t1, y1));
            }
        }
    }
    peaks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeTrend {
    Growing,
    Decaying,
    Neutral,
}

/// Least-squares slope (1/s) of `ln(peak)` against time.
pub fn envelope_slope(peaks: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = peaks.iter().filter(|p| p.1 > 0.0).map(|&(t, a)| (t, a.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Initial slip-rate perturbation as a fraction of `V_o`.
    pub perturbation: f64,
    pub sim: SimOptions,
    /// Growth rates within `dead_band V_o/L` of zero count as neutral.
    pub dead_band: f64,
    pub max_bisections: usize,
}

impl EstimateOptions {
    pub fn default_for(p: &RateState) -> Self {
        let mut sim = SimOptions::default_for(p);
        sim.rtol = 1e-9;
        Self {
            perturbation: 1e-3,
            sim,
            dead_band: 1e-4,
            max_bisections: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessEstimate {
    pub k_cr: f64,
    pub omega: f64,
    /// Linear-theory value the bisection was centred on.
    pub k_cr_analytic: f64,
    pub bisections: usize,
}

fn classify(
    p: &RateState,
    law: EvolutionLaw,
    k: f64,
    m: f64,
    opts: &EstimateOptions,
) -> Result<(EnvelopeTrend, BlockTrajectory)> {
    let params = SpringBlockParams::new(k, m, *p)?;
    let init = BlockState {
        v: p.v_o * (1.0 + opts.perturbation),
        ..BlockState::steady(p)
    };
    let sim = SimOptions {
        amplitude_guard: Some(100.0 * opts.perturbation),
        ..opts.sim
    };
    let traj = simulate_with(&params, law, &init, &sim)?;
    if traj.meta.termination != Termination::Completed {
        return Ok((EnvelopeTrend::Growing, traj));
    }
    // skip the first fifth of the run so the start-up transient has settled
    let t_skip = 0.2 * sim.duration;
    // peaks this far below the perturbation are dominated by integration error
    let floor = 1e-3 * opts.perturbation;
    let peaks: Vec<_> = deviation_peaks(&traj, p.v_o)
        .into_iter()
        .filter(|pk| pk.0 > t_skip && pk.1 > floor)
        .collect();
    let Some(slope) = envelope_slope(&peaks) else {
        // no oscillation left: compare the ends of the window
        let late: Vec<f64> = traj
            .times
            .iter()
            .zip(&traj.states)
            .filter(|(t, _)| **t > t_skip)
            .map(|(_, s)| (s.v / p.v_o - 1.0).abs())
            .collect();
        let (Some(&first), Some(&last)) = (late.first(), late.last()) else {
            return Err(Error::Inconclusive(format!("no samples to classify at K = {k}")));
        };
        let trend = if last < floor || last < first {
            EnvelopeTrend::Decaying
        } else {
            EnvelopeTrend::Growing
        };
        return Ok((trend, traj));
    };
    let band = opts.dead_band * p.relax_rate();
    let trend = if slope > band {
        EnvelopeTrend::Growing
    } else if slope < -band {
        EnvelopeTrend::Decaying
    } else {
        EnvelopeTrend::Neutral
    };
    Ok((trend, traj))
}

/// Mean period between successive maxima of `V`.
fn mean_period(traj: &BlockTrajectory) -> Option<f64> {
    let v: Vec<f64> = traj.states.iter().map(|s| s.v).collect();
    let start = traj.times.len() / 5;
    let peaks = local_maxima(&traj.times[start..], &v[start..]);
    if peaks.len() < 2 {
        return None;
    }
    Some((peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64)
}

/// Critical stiffness found by bisecting on the stiffness between 0.1 and 10
/// times the linear prediction, classifying each run by whether its
/// oscillation envelope grows or decays. The frequency is measured from the
/// oscillation period at the final stiffness.
pub fn estimate_critical_stiffness(
    p: &RateState,
    law: EvolutionLaw,
    m: f64,
    opts: &EstimateOptions,
) -> Result<StiffnessEstimate> {
    if !p.is_velocity_weakening() {
        return Err(Error::VelocityStrengthening(p.b - p.a));
    }
    let analytic = match spring_block_critical(&SpringBlockParams::new(1.0, m, *p)?) {
        SpringBlockVerdict::Critical { k_cr, .. } => k_cr,
        SpringBlockVerdict::AlwaysStable => unreachable!("weakening checked above"),
    };
    let (mut lo, mut hi) = (0.1 * analytic, 10.0 * analytic);
    if classify(p, law, lo, m, opts)?.0 != EnvelopeTrend::Growing {
        return Err(Error::Inconclusive(format!("K = {lo} did not destabilize")));
    }
    if classify(p, law, hi, m, opts)?.0 != EnvelopeTrend::Decaying {
        return Err(Error::Inconclusive(format!("K = {hi} did not stabilize")));
    }
    let mut bisections = 0;
    let mut neutral = None;
    while bisections < opts.max_bisections && hi / lo - 1.0 > 1e-6 {
        let mid = 0.5 * (lo + hi);
        bisections += 1;
        let (trend, traj) = classify(p, law, mid, m, opts)?;
        match trend {
            EnvelopeTrend::Growing => lo = mid,
            EnvelopeTrend::Decaying => hi = mid,
            EnvelopeTrend::Neutral => {
                neutral = Some((mid, traj));
                break;
            }
        }
    }
    let (k_cr, traj) = match neutral {
        Some(found) => found,
        None => {
            let mid = 0.5 * (lo + hi);
            (mid, classify(p, law, mid, m, opts)?.1)
        }
    };
    let period = mean_period(&traj)
        .ok_or_else(|| Error::Inconclusive("no oscillation at the critical stiffness".into()))?;
    Ok(StiffnessEstimate {
        k_cr,
        omega: 2.0 * PI / period,
        k_cr_analytic: analytic,
        bisections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn friction() -> RateState {
        RateState::new(0.01, 0.015, 1e-5, 1e6, 1e-3).unwrap()
    }

    fn k_cr(p: &RateState) -> f64 {
        p.sigma_o * (p.b - p.a) / p.l
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let p = friction();
        for (law, m) in [(EvolutionLaw::Ageing, 0.0), (EvolutionLaw::Slip, 0.0), (EvolutionLaw::Ageing, 1.0)] {
            let params = SpringBlockParams::new(2.0 * k_cr(&p), m, p).unwrap();
            let init = BlockState::steady(&p);
            let traj = simulate_spring_block(&params, law, &init, 50.0 * p.l / p.v_o, 1e-10).unwrap();
            for s in &traj.states {
                assert!((s.v / p.v_o - 1.0).abs() < 1e-10);
                assert!((s.theta * p.v_o / p.l - 1.0).abs() < 1e-10);
                assert!((s.tau - p.tau_o()).abs() < 1e-10 * p.sigma_o);
            }
            assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn stiff_spring_decays() {
        let p = friction();
        let params = SpringBlockParams::new(2.0 * k_cr(&p), 0.0, p).unwrap();
        let init = BlockState { v: 1.01 * p.v_o, ..BlockState::steady(&p) };
        let traj = simulate_spring_block(&params, EvolutionLaw::Ageing, &init, 100.0 * p.l / p.v_o, 1e-10).unwrap();
        let peaks: Vec<f64> = deviation_peaks(&traj, p.v_o).iter().map(|p| p.1).collect();
        assert!(peaks.len() > 5);
        // past the first oscillation the envelope only shrinks
        assert!(peaks[1..].windows(2).all(|w| w[1] < w[0]));
        assert!(peaks[peaks.len() - 1] < 1e-3 * peaks[0]);
    }

    #[test]
    fn soft_spring_grows_until_guard() {
        let p = friction();
        let params = SpringBlockParams::new(0.5 * k_cr(&p), 0.0, p).unwrap();
        let init = BlockState { v: 1.001 * p.v_o, ..BlockState::steady(&p) };
        for law in [EvolutionLaw::Ageing, EvolutionLaw::Slip] {
            match simulate_spring_block(&params, law, &init, 400.0 * p.l / p.v_o, 1e-10) {
                Err(Error::BlowUp { v, .. }) => assert!(v > 1e6 * p.v_o),
                other => {
                    let traj = other.unwrap();
                    let peaks = deviation_peaks(&traj, p.v_o);
                    let max = peaks.iter().map(|p| p.1).fold(0.0, f64::max);
                    assert!(max > 1.0, "{law:?}: peak deviation {max}");
                }
            }
        }
    }

    #[test]
    fn invalid_initial_state() {
        let p = friction();
        let params = SpringBlockParams::new(k_cr(&p), 0.0, p).unwrap();
        let init = BlockState { v: 0.0, ..BlockState::steady(&p) };
        assert!(simulate_spring_block(&params, EvolutionLaw::Ageing, &init, 1.0, 1e-8).is_err());
    }

    #[test]
    fn envelope_fit_recovers_rate() {
        let peaks: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (-0.3 * i as f64).exp())).collect();
        assert!((envelope_slope(&peaks).unwrap() + 0.3).abs() < 1e-12);
        assert!(envelope_slope(&peaks[..2]).is_none());
    }

    #[test]
    fn parabolic_peak_refinement() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|&t| (2.0 * t).cos()).collect();
        let peaks = local_maxima(&t, &y);
        assert!((peaks[0].0 - PI).abs() < 1e-3);
        assert!((peaks[0].1 - 1.0).abs() < 1e-4);
    }
}
