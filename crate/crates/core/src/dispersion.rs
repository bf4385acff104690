//! Characteristic equation of a single Fourier mode `exp(i k x1)` and
//! right-half-plane root counting by the argument principle.
//!
//! Work is done in the reduced rate `P = p L / V_o`, where the residual reads
//!
//! ```text
//! R(P) = kappa (1 + P) F(P / lambda) + P (P - (b - a)/a)
//! kappa = mu |k| L / (2 a sigma_o),   lambda = |k| c1 L / V_o
//! ```
//!
//! and the dimensional residual is `a sigma_o V_o / L^2` times `R`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::RateState;
use crate::material::BiMaterial;
use crate::neutral::{NeutralMode, StabilityVerdict};
use crate::transfer::f_reduced;

/// Parameters of the characteristic equation for one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharParams {
    kappa: f64,
    lambda: f64,
    weakening: f64,
    bm: BiMaterial,
    /// `V_o / L`; 1 for nondimensional parameters.
    relax: f64,
    /// `a sigma_o V_o / L^2`; 1 for nondimensional parameters.
    residual_unit: f64,
}

impl CharParams {
    pub fn new(k: f64, p: &RateState, bm: &BiMaterial) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Domain(format!("wavenumber must be nonzero, got {k}")));
        }
        p.validate()?;
        let k = k.abs();
        Ok(Self {
            kappa: bm.slow.mu * k * p.l / (2.0 * p.a * p.sigma_o),
            lambda: k * bm.slow.c1 * p.l / p.v_o,
            weakening: (p.b - p.a) / p.a,
            bm: *bm,
            relax: p.relax_rate(),
            residual_unit: p.a * p.sigma_o * p.v_o / (p.l * p.l),
        })
    }

    /// Parameters from the normalized wavenumber, `q` and `b/a > 1`.
    pub fn nondimensional(k_hat: f64, q: f64, b_over_a: f64, bm: &BiMaterial) -> Result<Self> {
        if !(k_hat > 0.0 && q > 0.0 && b_over_a > 1.0) {
            return Err(Error::Domain(format!(
                "need k_hat > 0, q > 0, b/a > 1 (got {k_hat}, {q}, {b_over_a})"
            )));
        }
        let weakening = b_over_a - 1.0;
        let series = 1.0 + 1.0 / bm.mu_ratio;
        Ok(Self {
            kappa: 0.5 * k_hat * weakening * series,
            lambda: 0.5 * k_hat * weakening.sqrt() * series / q,
            weakening,
            bm: *bm,
            relax: 1.0,
            residual_unit: 1.0,
        })
    }

    /// Same material and friction at `factor` times the wavenumber.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kappa: self.kappa * factor,
            lambda: self.lambda * factor,
            ..*self
        }
    }

    pub fn bimaterial(&self) -> &BiMaterial {
        &self.bm
    }

    /// `V_o/L`, the unit of `p` in the reduced variable.
    pub fn rate_unit(&self) -> f64 {
        self.relax
    }

    /// `a sigma_o V_o/L^2`, the unit of the residual in the reduced variable.
    pub fn residual_unit(&self) -> f64 {
        self.residual_unit
    }

    fn reduced_residual(&self, big_p: Complex64) -> Result<Complex64> {
        let f = f_reduced(big_p / self.lambda, &self.bm)?;
        Ok(self.kappa * (1.0 + big_p) * f + big_p * (big_p - self.weakening))
    }
}

/// Residual of the characteristic equation at the rate `p` (1/s, or reduced
/// for nondimensional parameters).
pub fn characteristic_residual(cp: &CharParams, p: Complex64) -> Result<Complex64> {
    if p.re < 0.0 {
        return Err(Error::Domain(format!(
            "characteristic equation is evaluated for Re(p) >= 0, got {p}"
        )));
    }
    Ok(cp.residual_unit * cp.reduced_residual(p / cp.relax)?)
}

/// Rectangle `[re_min, re_max] x [-im_max, im_max]` in the reduced rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Contour {
    fn for_params(cp: &CharParams) -> Self {
        let wave = cp.lambda * cp.bm.speed_ratio;
        let static_root = cp.kappa * cp.bm.static_transfer();
        Contour {
            re_min: 1e-9,
            re_max: 10.0 * wave.max(1.0).max(cp.weakening.abs()).max(static_root),
            im_max: 4.0 * wave.max(1.0),
        }
    }

    fn dilated(&self, factor: f64) -> Self {
        Contour {
            re_min: self.re_min * factor,
            re_max: self.re_max * factor,
            im_max: self.im_max * factor,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, -self.im_max),
            Complex64::new(self.re_max, -self.im_max),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCount {
    pub n_unstable: usize,
    pub contour: Contour,
    /// Accumulated phase over `2 pi`; integral up to rounding.
    pub winding: f64,
    /// Base samples per circuit at which the count stabilized.
    pub samples: usize,
}

const BASE_SAMPLES: usize = 4096;
const MAX_SAMPLES: usize = 1 << 20;
const MAX_PHASE_STEP: f64 = 0.25;
const MAX_SPLIT_DEPTH: u32 = 60;
const MAX_DILATIONS: usize = 5;

struct PhaseTracker<'a> {
    cp: &'a CharParams,
    min_ratio: f64,
}

impl PhaseTracker<'_> {
    fn eval(&mut self, z: Complex64) -> Result<Complex64> {
        let v = self.cp.reduced_residual(z)?;
        let scale = 1.0 + self.cp.kappa + z.norm_sqr();
        self.min_ratio = self.min_ratio.min(v.norm() / scale);
        Ok(v)
    }

    /// Phase change of the residual from `za` to `zb`, splitting the segment
    /// until every step turns by less than `MAX_PHASE_STEP`.
    fn segment(&mut self, za: Complex64, fa: Complex64, zb: Complex64, fb: Complex64, depth: u32) -> Result<f64> {
        let d = (fb / fa).arg();
        if d.abs() <= MAX_PHASE_STEP || depth >= MAX_SPLIT_DEPTH {
            return Ok(d);
        }
        let zm = 0.5 * (za + zb);
        let fm = self.eval(zm)?;
        Ok(self.segment(za, fa, zm, fm, depth + 1)? + self.segment(zm, fm, zb, fb, depth + 1)?)
    }

    fn circuit(&mut self, contour: &Contour, samples: usize) -> Result<f64> {
        let corners = contour.corners();
        let lengths: Vec<f64> = (0..4).map(|i| (corners[(i + 1) % 4] - corners[i]).norm()).collect();
        let perimeter: f64 = lengths.iter().sum();
        let mut total = 0.0;
        for i in 0..4 {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            let n = ((samples as f64 * lengths[i] / perimeter).ceil() as usize).max(64);
            let mut z_prev = a;
            let mut f_prev = self.eval(a)?;
            for j in 1..=n {
                let z = a + (b - a) * (j as f64 / n as f64);
                let f = self.eval(z)?;
                total += self.segment(z_prev, f_prev, z, f, 0)?;
                z_prev = z;
                f_prev = f;
            }
        }
        Ok(total / (2.0 * PI))
    }
}

fn count_on(cp: &CharParams, contour: &Contour) -> Result<(RootCount, f64)> {
    let mut tracker = PhaseTracker { cp, min_ratio: f64::INFINITY };
    let mut samples = BASE_SAMPLES;
    let mut previous = tracker.circuit(contour, samples)?;
    loop {
        samples *= 2;
        let current = tracker.circuit(contour, samples)?;
        if current.round() == previous.round() || samples >= MAX_SAMPLES {
            let n = current.round();
            return Ok((
                RootCount {
                    n_unstable: n.max(0.0) as usize,
                    contour: *contour,
                    winding: current,
                    samples,
                },
                tracker.min_ratio,
            ));
        }
        previous = current;
    }
}

/// Number of roots of the characteristic equation with positive real part.
pub fn count_unstable(cp: &CharParams) -> Result<RootCount> {
    let mut contour = Contour::for_params(cp);
    for _ in 0..=MAX_DILATIONS {
        let (count, min_ratio) = count_on(cp, &contour)?;
        if min_ratio >= 1e-12 {
            return Ok(count);
        }
        contour = contour.dilated(1.01);
    }
    Err(Error::ContourThroughZero {
        attempts: MAX_DILATIONS,
    })
}

/// Right-half-plane roots located by Newton iteration from seeds along the
/// imaginary and positive real axes. Diagnostic only; [`count_unstable`] is
/// the authority on how many there are. Rates are in the units of `cp`.
pub fn unstable_roots(cp: &CharParams) -> Vec<Complex64> {
    let contour = Contour::for_params(cp);
    let mut seeds = Vec::new();
    let n = 200;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        seeds.push(Complex64::new(1e-3, t * contour.im_max));
        seeds.push(Complex64::new(t * contour.re_max, 0.0));
        seeds.push(Complex64::new(0.1 * t * contour.re_max, 0.5 * t * contour.im_max));
    }
    let mut roots: Vec<Complex64> = Vec::new();
    for seed in seeds {
        let Some(z) = newton(cp, seed) else { continue };
        if z.re <= 0.0 || z.re > contour.re_max || z.im.abs() > contour.im_max {
            continue;
        }
        let z = if z.im.abs() < 1e-10 * z.norm() { Complex64::new(z.re, 0.0) } else { z };
        for cand in [z, z.conj()] {
            if roots.iter().all(|r| (r - cand).norm() > 1e-7 * (1.0 + cand.norm())) {
                roots.push(cand);
            }
        }
    }
    roots.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    roots.into_iter().map(|z| z * cp.relax).collect()
}

fn newton(cp: &CharParams, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..100 {
        if z.re <= 0.0 {
            return None;
        }
        let f = cp.reduced_residual(z).ok()?;
        let h = 1e-7 * (1.0 + z.norm());
        let back = if z.re > h { z - h } else { z };
        let df = (cp.reduced_residual(z + h).ok()? - cp.reduced_residual(back).ok()?) / (z + h - back);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        z -= step;
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            let scale = 1.0 + cp.kappa + z.norm_sqr();
            return (cp.reduced_residual(z).ok()?.norm() < 1e-9 * scale).then_some(z);
        }
    }
    None
}

/// Scale of the friction law used to place a critical mode on the
/// characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelScale {
    Nondimensional { q: f64, b_over_a: f64 },
    Dimensional(RateState),
}

impl ModelScale {
    pub fn char_params(&self, mode: &NeutralMode, bm: &BiMaterial) -> Result<CharParams> {
        match self {
            ModelScale::Nondimensional { q, b_over_a } => CharParams::nondimensional(mode.k_hat, *q, *b_over_a, bm),
            ModelScale::Dimensional(p) => {
                let k = mode
                    .k_mag
                    .unwrap_or_else(|| crate::neutral::k_from_hat(mode.k_hat, p, bm));
                CharParams::new(k, p, bm)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub passed: bool,
    /// Roots counted at 1.05 |k|cr and 0.95 |k|cr; `None` when no critical
    /// mode exists.
    pub above: Option<RootCount>,
    pub below: Option<RootCount>,
    pub note: String,
}

/// Checks that the chosen critical wavenumber separates stability (just
/// above) from instability (just below).
pub fn certify_crossing(verdict: &StabilityVerdict, scale: &ModelScale, bm: &BiMaterial) -> Result<Certification> {
    let mode = match verdict {
        StabilityVerdict::AlwaysStable => {
            return Ok(Certification {
                passed: true,
                above: None,
                below: None,
                note: "always stable".into(),
            })
        }
        StabilityVerdict::IllDefined(why) => {
            return Ok(Certification {
                passed: false,
                above: None,
                below: None,
                note: why.clone(),
            })
        }
        StabilityVerdict::CriticalMode(m) => m,
    };
    let cp = scale.char_params(mode, bm)?;
    let above = count_unstable(&cp.scaled(1.05))?;
    let below = count_unstable(&cp.scaled(0.95))?;
    let passed = above.n_unstable == 0 && below.n_unstable >= 2;
    Ok(Certification {
        passed,
        note: format!("{} unstable above, {} below", above.n_unstable, below.n_unstable),
        above: Some(above),
        below: Some(below),
    })
}
