//! Neutral (Hopf) modes of steady sliding.
//!
//! At a Hopf point the characteristic equation has a root `p = i|k|c`. For
//! `0 < c < c1` the transfer function is real and the two real conditions
//! reduce to `(c/c1)/F(c) = q`, with every such mode oscillating at
//! `|k|c = sqrt((b-a)/a) V_o/L`. For `c1 < c < c1'` the transfer function is
//! complex, `F1 + i F2`, and both the frequency and the `q` relation pick up
//! `b/a` through the ratio `F2/F1`.
//!
//! Wavenumbers are reported as `k_hat = |k| L mu mu' / ((b-a) sigma_o (mu + mu'))`,
//! which is 1 in the quasi-static limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::{nondim_q, RateState};
use crate::material::BiMaterial;
use crate::transfer::f_intersonic_unchecked;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Subsonic,
    Intersonic,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Subsonic => "subsonic",
            Branch::Intersonic => "intersonic",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralMode {
    pub branch: Branch,
    pub c_over_c1: f64,
    pub k_hat: f64,
    /// |k| in 1/m, dimensional runs only.
    pub k_mag: Option<f64>,
    /// |k| c in 1/s, dimensional runs only.
    pub omega: Option<f64>,
    /// Relative residual of the `q` relation at the returned root.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StabilityVerdict {
    AlwaysStable,
    CriticalMode(NeutralMode),
    IllDefined(String),
}

impl StabilityVerdict {
    pub fn mode(&self) -> Option<&NeutralMode> {
        match self {
            StabilityVerdict::CriticalMode(m) => Some(m),
            _ => None,
        }
    }
}

const MAX_BISECTIONS: usize = 200;
const SUBSONIC_REL_TOL: f64 = 1e-13;
const INTERSONIC_SCAN_POINTS: usize = 2048;
const INTERSONIC_EDGE: f64 = 1e-9;

fn require_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must be positive, got {q}")))
    }
}

fn require_weakening(b_over_a: f64) -> Result<()> {
    if b_over_a > 1.0 && b_over_a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("b/a must exceed 1, got {b_over_a}")))
    }
}

/// Subsonic `F` from `x = c/c1` and its complement `u = 1 - x`, both supplied
/// so that neither end of the interval loses digits.
fn subsonic_transfer(x: f64, u: f64, bm: &BiMaterial) -> f64 {
    let m = bm.mu_ratio;
    let r = bm.speed_ratio;
    let beta = (u * (1.0 + x)).sqrt();
    let beta_fast = (((r - 1.0) + u) * (r + x)).sqrt() / r;
    2.0 * m * beta_fast * beta / (beta + m * beta_fast)
}

/// Bisection for an increasing function of `t` on `[lo, hi]`, stopping at
/// relative width `rel_tol` or when the midpoint no longer moves.
fn bisect(mut lo: f64, mut hi: f64, rel_tol: f64, increasing: bool, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * mid.abs() {
            break;
        }
        let above = f(mid) > 0.0;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The unique subsonic neutral mode for a given `q`.
pub fn solve_subsonic(q: f64, bm: &BiMaterial) -> Result<NeutralMode> {
    require_q(q)?;
    let f0 = bm.static_transfer();
    let g = |x: f64, u: f64| x / subsonic_transfer(x, u, bm);
    // Solve in x on the lower half and in u = 1 - x on the upper half.
    let (x, u) = if g(0.5, 0.5) >= q {
        let x = bisect(0.0, 0.5, SUBSONIC_REL_TOL, true, |x| g(x, 1.0 - x) - q);
        (x, 1.0 - x)
    } else {
        let u = bisect(0.0, 0.5, SUBSONIC_REL_TOL, false, |u| g(1.0 - u, u) - q);
        (1.0 - u, u)
    };
    let f = subsonic_transfer(x, u, bm);
    Ok(NeutralMode {
        branch: Branch::Subsonic,
        c_over_c1: x,
        k_hat: f0 / f,
        k_mag: None,
        omega: None,
        residual: ((x / f - q) / q).abs(),
    })
}

/// Intersonic quantities at `x = c/c1`: reduced frequency `w = |k|c L/V_o`
/// and the combination `w F1 + F2`.
fn intersonic_terms(x: f64, b_over_a: f64, bm: &BiMaterial) -> (f64, f64) {
    let f = f_intersonic_unchecked(x, bm);
    let (f1, f2) = (f.re, f.im);
    let half = 0.5 * b_over_a * f2;
    let root = (half * half + (b_over_a - 1.0) * f1 * f1).sqrt();
    // rationalized forms of -half + root avoid cancellation when F2 >> F1
    let w_f1 = (b_over_a - 1.0) * f1 * f1 / (half + root);
    let w = (b_over_a - 1.0) * f1 / (half + root);
    (w, w_f1 + f2)
}

/// Left-hand side of the intersonic `q` relation.
pub fn intersonic_q(c_over_c1: f64, b_over_a: f64, bm: &BiMaterial) -> Result<f64> {
    require_weakening(b_over_a)?;
    if !bm.has_intersonic_interval() {
        return Err(Error::EmptyInterval);
    }
    if !(c_over_c1 > 1.0 && c_over_c1 < bm.speed_ratio) {
        return Err(Error::Domain(format!(
            "intersonic phase velocity ratio must lie in (1, {}), got {c_over_c1}",
            bm.speed_ratio
        )));
    }
    Ok(intersonic_q_unchecked(c_over_c1, b_over_a, bm))
}

fn intersonic_q_unchecked(x: f64, b_over_a: f64, bm: &BiMaterial) -> f64 {
    let (_, denom) = intersonic_terms(x, b_over_a, bm);
    (b_over_a - 1.0).sqrt() * x / denom
}

fn intersonic_mode(x: f64, q: f64, b_over_a: f64, bm: &BiMaterial) -> NeutralMode {
    let (w, denom) = intersonic_terms(x, b_over_a, bm);
    let lhs = (b_over_a - 1.0).sqrt() * x / denom;
    NeutralMode {
        branch: Branch::Intersonic,
        c_over_c1: x,
        k_hat: bm.static_transfer() * w / denom,
        k_mag: None,
        omega: None,
        residual: ((lhs - q) / q).abs(),
    }
}

fn intersonic_grid(bm: &BiMaterial) -> Vec<f64> {
    let lo = 1.0 + INTERSONIC_EDGE;
    let hi = bm.speed_ratio * (1.0 - INTERSONIC_EDGE);
    let n = INTERSONIC_SCAN_POINTS;
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// All intersonic neutral modes for `q`, ascending in `c`. The list is empty
/// below the threshold `q_min`; [`Error::EmptyInterval`] when `c1' = c1`.
pub fn solve_intersonic(q: f64, b_over_a: f64, bm: &BiMaterial) -> Result<Vec<NeutralMode>> {
    require_q(q)?;
    require_weakening(b_over_a)?;
    if !bm.has_intersonic_interval() {
        return Err(Error::EmptyInterval);
    }
    let grid = intersonic_grid(bm);
    let values: Vec<f64> = grid
        .iter()
        .map(|&x| intersonic_q_unchecked(x, b_over_a, bm) - q)
        .collect();
    let mut modes = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            modes.push(intersonic_mode(grid[i], q, b_over_a, bm));
            continue;
        }
        if fa.signum() != fb.signum() && fb != 0.0 {
            let x = bisect(grid[i], grid[i + 1], 1e-15, fb > fa, |x| {
                intersonic_q_unchecked(x, b_over_a, bm) - q
            });
            modes.push(intersonic_mode(x, q, b_over_a, bm));
        }
    }
    Ok(modes)
}

/// Smallest `q` admitting intersonic modes, with the phase velocity at which
/// the pair is born.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersonicThreshold {
    pub q_min: f64,
    pub c_over_c1: f64,
}

pub fn intersonic_threshold(b_over_a: f64, bm: &BiMaterial) -> Result<IntersonicThreshold> {
    require_weakening(b_over_a)?;
    if !bm.has_intersonic_interval() {
        return Err(Error::EmptyInterval);
    }
    let grid = intersonic_grid(bm);
    let lhs = |x: f64| intersonic_q_unchecked(x, b_over_a, bm);
    let (imin, _) = grid
        .iter()
        .map(|&x| lhs(x))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    // golden-section polish inside the neighbouring cells
    let mut a = grid[imin.saturating_sub(1)];
    let mut b = grid[(imin + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (lhs(x1), lhs(x2));
    for _ in 0..100 {
        if b - a <= 1e-14 * b {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = lhs(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = lhs(x2);
        }
    }
    let x = 0.5 * (a + b);
    Ok(IntersonicThreshold {
        q_min: lhs(x),
        c_over_c1: x,
    })
}

/// Fills in `|k|` and `omega` for a mode computed at the `q` of `p` on `bm`.
pub fn attach_dimensions(mode: &NeutralMode, p: &RateState, bm: &BiMaterial) -> Result<NeutralMode> {
    let b_over_a = p.b_over_a();
    require_weakening(b_over_a)?;
    let w = match mode.branch {
        Branch::Subsonic => (b_over_a - 1.0).sqrt(),
        Branch::Intersonic => intersonic_terms(mode.c_over_c1, b_over_a, bm).0,
    };
    let omega = w * p.relax_rate();
    let c = mode.c_over_c1 * bm.slow.c1;
    Ok(NeutralMode {
        k_mag: Some(omega / c),
        omega: Some(omega),
        ..*mode
    })
}

/// Converts a normalized wavenumber to 1/m.
pub fn k_from_hat(k_hat: f64, p: &RateState, bm: &BiMaterial) -> f64 {
    k_hat * (p.b - p.a).abs() * p.sigma_o / (p.l * bm.series_modulus())
}

fn select_critical(q: f64, b_over_a: f64, bm: &BiMaterial) -> Result<StabilityVerdict> {
    let mut best = solve_subsonic(q, bm)?;
    match solve_intersonic(q, b_over_a, bm) {
        Ok(modes) => {
            for m in modes {
                if m.k_hat > best.k_hat {
                    best = m;
                }
            }
        }
        Err(Error::EmptyInterval) => {}
        Err(e) => return Err(e),
    }
    if best.c_over_c1 >= 1.0 {
        return Ok(StabilityVerdict::IllDefined(format!(
            "critical mode at c/c1 = {} is not slower than both media",
            best.c_over_c1
        )));
    }
    Ok(StabilityVerdict::CriticalMode(best))
}

/// Critical neutral mode in nondimensional form.
pub fn critical_mode_nondim(q: f64, b_over_a: f64, bm: &BiMaterial) -> Result<StabilityVerdict> {
    if b_over_a <= 1.0 {
        return Ok(StabilityVerdict::AlwaysStable);
    }
    require_q(q)?;
    select_critical(q, b_over_a, bm)
}

/// The neutral mode with the largest `|k|` over both branches, or
/// `AlwaysStable` for velocity-strengthening friction.
pub fn critical_mode(p: &RateState, bm: &BiMaterial) -> Result<StabilityVerdict> {
    if !p.is_velocity_weakening() {
        return Ok(StabilityVerdict::AlwaysStable);
    }
    let q = nondim_q(p, &bm.slow)?;
    match select_critical(q, p.b_over_a(), bm)? {
        StabilityVerdict::CriticalMode(m) => Ok(StabilityVerdict::CriticalMode(attach_dimensions(&m, p, bm)?)),
        other => Ok(other),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub branch: Branch,
    pub c_over_c1: f64,
    pub k_hat: f64,
}

fn rows_at(q: f64, b_over_a: f64, bm: &BiMaterial) -> Result<Vec<SweepRow>> {
    let row = |m: NeutralMode| SweepRow {
        q,
        branch: m.branch,
        c_over_c1: m.c_over_c1,
        k_hat: m.k_hat,
    };
    let mut rows = vec![row(solve_subsonic(q, bm)?)];
    match solve_intersonic(q, b_over_a, bm) {
        Ok(modes) => rows.extend(modes.into_iter().map(row)),
        Err(Error::EmptyInterval) => {}
        Err(e) => return Err(e),
    }
    Ok(rows)
}

/// One subsonic row per `q` followed by any intersonic rows, in grid order.
pub fn sweep_q(q_grid: &[f64], b_over_a: f64, bm: &BiMaterial) -> Result<Vec<SweepRow>> {
    require_weakening(b_over_a)?;
    for &q in q_grid {
        require_q(q)?;
    }
    if q_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("q grid must be sorted ascending".into()));
    }
    #[cfg(feature = "parallel")]
    let per_q: Vec<Result<Vec<SweepRow>>> = {
        use rayon::prelude::*;
        q_grid.par_iter().map(|&q| rows_at(q, b_over_a, bm)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_q: Vec<Result<Vec<SweepRow>>> = q_grid.iter().map(|&q| rows_at(q, b_over_a, bm)).collect();
    let mut out = Vec::with_capacity(q_grid.len());
    for rows in per_q {
        out.extend(rows?);
    }
    Ok(out)
}

/// `n` points from `min` to `max`, geometric when `log` is set.
pub fn q_grid(min: f64, max: f64, n: usize, log: bool) -> Result<Vec<f64>> {
    if !(min < max) || n < 2 || (log && min <= 0.0) {
        return Err(Error::Domain(format!(
            "invalid grid: min={min}, max={max}, points={n}, log={log}"
        )));
    }
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else if log {
                (min.ln() + (max.ln() - min.ln()) * t(i)).exp()
            } else {
                min + (max - min) * t(i)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{make_bimaterial, EffectiveMedium};

    fn fig1() -> BiMaterial {
        BiMaterial::from_ratios(1.0, 1.2).unwrap()
    }

    fn identical() -> BiMaterial {
        BiMaterial::from_ratios(1.0, 1.0).unwrap()
    }

    #[test]
    fn identical_media_at_unit_q() {
        let m = solve_subsonic(1.0, &identical()).unwrap();
        assert!((m.c_over_c1 - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((m.k_hat - 2f64.sqrt()).abs() < 1e-13);
        assert!(m.residual < 1e-12);
    }

    #[test]
    fn quasi_static_limit() {
        let bm = BiMaterial::from_ratios(10.0, 5.0).unwrap();
        let q = 1e-8;
        let m = solve_subsonic(q, &bm).unwrap();
        assert!((m.c_over_c1 / (q * bm.static_transfer()) - 1.0).abs() < 1e-12);
        assert!((m.k_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_contrast_unit_q() {
        // mpmath findroot: c/c1 = 0.732350989066999964776842800465,
        // k_hat = 1.36546548708014902463883409504
        let m = solve_subsonic(1.0, &fig1()).unwrap();
        assert!((m.c_over_c1 - 0.732_350_989_067_000_0).abs() < 1e-13);
        assert!((m.k_hat - 1.365_465_487_080_149).abs() < 1e-12);
    }

    #[test]
    fn large_q_keeps_precision() {
        for q in [1e2, 1e3, 1e5] {
            let m = solve_subsonic(q, &identical()).unwrap();
            let k = (1.0 + q * q).sqrt();
            assert!(((m.k_hat - k) / k).abs() < 1e-12, "q = {q}");
            assert!(m.residual < 1e-12);
        }
    }

    #[test]
    fn subsonic_rejects_nonpositive_q() {
        assert!(solve_subsonic(0.0, &fig1()).is_err());
        assert!(solve_subsonic(-1.0, &fig1()).is_err());
    }

    #[test]
    fn intersonic_absent_at_small_q() {
        assert!(solve_intersonic(0.01, 1.2, &fig1()).unwrap().is_empty());
    }

    #[test]
    fn intersonic_pair_at_large_q() {
        let modes = solve_intersonic(10.0, 1.2, &fig1()).unwrap();
        assert_eq!(modes.len(), 2);
        let sub = solve_subsonic(10.0, &fig1()).unwrap();
        for m in &modes {
            assert!(m.c_over_c1 > 1.0 && m.c_over_c1 < 1.2);
            assert!(m.k_hat < sub.k_hat);
            assert!(m.residual < 1e-10);
        }
        assert!(modes[0].c_over_c1 < modes[1].c_over_c1);
    }

    #[test]
    fn intersonic_threshold_brackets_birth_of_pair() {
        let t = intersonic_threshold(1.2, &fig1()).unwrap();
        // mpmath grid scan: minimum 0.96669 near c/c1 = 1.065
        assert!((t.q_min - 0.966_685).abs() < 1e-5);
        assert!((t.c_over_c1 - 1.065).abs() < 2e-3);
        assert!(solve_intersonic(0.99 * t.q_min, 1.2, &fig1()).unwrap().is_empty());
        assert_eq!(solve_intersonic(1.05 * t.q_min, 1.2, &fig1()).unwrap().len(), 2);
    }

    #[test]
    fn intersonic_frequency_tends_to_subsonic_value() {
        let bm = fig1();
        let ba = 1.2;
        // F2/F1 = mu' beta' / (mu s) vanishes at the fast end of the interval
        let x = bm.speed_ratio * (1.0 - 1e-12);
        let f = crate::transfer::f_intersonic(x, &bm).unwrap();
        assert!(f.im / f.re < 1e-5);
        let (w, _) = intersonic_terms(x, ba, &bm);
        assert!((w - (ba - 1.0f64).sqrt()).abs() < 1e-5);
        // and diverges at the slow end, where the frequency drops to zero
        let (w_slow, _) = intersonic_terms(1.0 + 1e-12, ba, &bm);
        assert!(w_slow < 1e-5);
    }

    #[test]
    fn equal_speeds_have_no_intersonic_interval() {
        let bm = make_bimaterial(
            EffectiveMedium { mu: 1.0, c1: 1.0 },
            EffectiveMedium { mu: 2.0, c1: 1.0 },
        );
        assert!(matches!(solve_intersonic(1.0, 1.2, &bm), Err(Error::EmptyInterval)));
        assert_eq!(sweep_q(&[1.0], 1.2, &bm).unwrap().len(), 1);
    }

    #[test]
    fn critical_mode_is_subsonic() {
        for q in [0.1, 1.0, 10.0, 100.0] {
            let v = critical_mode_nondim(q, 1.2, &fig1()).unwrap();
            let m = v.mode().unwrap();
            assert_eq!(m.branch, Branch::Subsonic);
        }
        assert_eq!(
            critical_mode_nondim(1.0, 0.8, &fig1()).unwrap(),
            StabilityVerdict::AlwaysStable
        );
    }

    #[test]
    fn critical_mode_dimensional() {
        let medium = EffectiveMedium { mu: 30e9, c1: 3000.0 };
        let bm = BiMaterial::identical(medium);
        let strengthening = RateState::new(0.01, 0.008, 1e-5, 1e8, 1e-3).unwrap();
        assert_eq!(critical_mode(&strengthening, &bm).unwrap(), StabilityVerdict::AlwaysStable);

        // choose V_o so that q = 1
        let (a, b, l, s) = (0.01, 0.015, 1e-5, 1e8);
        let v_o = 2.0 * (a * (b - a) as f64).sqrt() * s * medium.c1 / medium.mu;
        let p = RateState::new(a, b, l, s, v_o).unwrap();
        let m = *critical_mode(&p, &bm).unwrap().mode().unwrap();
        assert!((m.k_hat - 2f64.sqrt()).abs() < 1e-12);
        let k_expected = 2.0 * (b - a) * s / (medium.mu * l) * 2f64.sqrt();
        assert!((m.k_mag.unwrap() / k_expected - 1.0).abs() < 1e-12);
        assert!((m.omega.unwrap() - 0.5f64.sqrt() * v_o / l).abs() < 1e-12 * m.omega.unwrap());
    }

    #[test]
    fn sweep_shape_and_validation() {
        let grid = q_grid(1e-2, 1e2, 200, true).unwrap();
        let rows = sweep_q(&grid, 1.2, &fig1()).unwrap();
        let sub: Vec<_> = rows.iter().filter(|r| r.branch == Branch::Subsonic).collect();
        assert_eq!(sub.len(), 200);
        assert!(sub.windows(2).all(|w| w[1].k_hat >= w[0].k_hat));
        assert!(sweep_q(&[0.0], 1.2, &fig1()).is_err());
        assert!(sweep_q(&[2.0, 1.0], 1.2, &fig1()).is_err());
        let counts_ok = grid.iter().all(|&q| {
            let n = rows.iter().filter(|r| r.q == q && r.branch == Branch::Intersonic).count();
            n == 0 || n == 2
        });
        assert!(counts_ok);
    }

    #[test]
    fn identical_sweep_matches_closed_form() {
        let grid = q_grid(1e-3, 1e3, 50, true).unwrap();
        for r in sweep_q(&grid, 1.5, &identical()).unwrap() {
            let k = (1.0 + r.q * r.q).sqrt();
            assert!(((r.k_hat - k) / k).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_construction() {
        let g = q_grid(1.0, 100.0, 3, true).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
        assert_eq!(q_grid(0.0, 1.0, 3, false).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(q_grid(1.0, 1.0, 3, false).is_err());
        assert!(q_grid(0.0, 1.0, 3, true).is_err());
        assert!(q_grid(0.0, 1.0, 1, false).is_err());
    }
}
