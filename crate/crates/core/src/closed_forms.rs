//! Closed-form stability results for the spring-block slider and for the
//! quasi-static and identical-solid continuum problems.
//!
//! Nothing here calls into the general solvers; the formulas are written out
//! on their own so they can be used to check them.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::friction::RateState;

/// Spring of stiffness `k` (Pa/m) dragging a block of mass `m` (kg/m^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringBlockParams {
    pub k: f64,
    pub m: f64,
    pub friction: RateState,
}

impl SpringBlockParams {
    pub fn new(k: f64, m: f64, friction: RateState) -> Result<Self> {
        require_positive("K", k)?;
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "must be non-negative",
            });
        }
        friction.validate()?;
        Ok(Self { k, m, friction })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpringBlockVerdict {
    AlwaysStable,
    Critical { k_cr: f64, omega: f64 },
}

/// Critical stiffness of the slider, including the inertial correction, and
/// the oscillation frequency at neutral stability (mass independent).
pub fn spring_block_critical(p: &SpringBlockParams) -> SpringBlockVerdict {
    let f = &p.friction;
    if f.b <= f.a {
        return SpringBlockVerdict::AlwaysStable;
    }
    let inertia = p.m * f.v_o * f.v_o / (f.a * f.sigma_o * f.l);
    let k_cr = f.sigma_o * (f.b - f.a) / f.l * (1.0 + inertia);
    let omega = ((f.b - f.a) / f.a).sqrt() * f.v_o / f.l;
    SpringBlockVerdict::Critical { k_cr, omega }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuasiStaticCase {
    /// Identical isotropic solids of shear modulus `mu`.
    Identical { mu: f64 },
    /// Dissimilar solids with effective moduli `mu` and `mu_prime`.
    Dissimilar { mu: f64, mu_prime: f64 },
    /// Orthotropic solid (C44, C55 with C45 = 0) on an isotropic solid of
    /// shear modulus `mu`.
    OrthotropicOnIsotropic { c44: f64, c55: f64, mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumCritical {
    /// 1/m
    pub k_cr: f64,
    /// m/s
    pub c: f64,
    /// 1/s
    pub omega: f64,
}

/// Quasi-static anti-plane critical wavenumber and neutral-mode phase velocity.
///
/// For the dissimilar cases the phase velocity uses the modulus of the
/// equivalent identical pair, `2 mu mu' / (mu + mu')`, which keeps
/// `k_cr c` equal to `sqrt((b-a)/a) V_o/L`.
pub fn quasistatic_continuum(p: &RateState, case: QuasiStaticCase) -> Result<ContinuumCritical> {
    let weakening = p.b - p.a;
    if weakening <= 0.0 {
        return Err(Error::VelocityStrengthening(weakening));
    }
    let phase = |mu_eq: f64| mu_eq * p.v_o / (2.0 * (p.a * weakening).sqrt() * p.sigma_o);
    let (k_cr, c) = match case {
        QuasiStaticCase::Identical { mu } => {
            require_positive("mu", mu)?;
            (2.0 * weakening * p.sigma_o / (mu * p.l), phase(mu))
        }
        QuasiStaticCase::Dissimilar { mu, mu_prime } => {
            require_positive("mu", mu)?;
            require_positive("mu_prime", mu_prime)?;
            let k = weakening * p.sigma_o * (mu + mu_prime) / (p.l * mu * mu_prime);
            (k, phase(2.0 * mu * mu_prime / (mu + mu_prime)))
        }
        QuasiStaticCase::OrthotropicOnIsotropic { c44, c55, mu } => {
            require_positive("c44", c44)?;
            require_positive("c55", c55)?;
            require_positive("mu", mu)?;
            let ortho = (c55 * c44).sqrt();
            let k = p.sigma_o * weakening / p.l * (1.0 + mu / ortho) / mu;
            (k, phase(2.0 * mu * ortho / (mu + ortho)))
        }
    };
    Ok(ContinuumCritical {
        k_cr,
        c,
        omega: k_cr * c,
    })
}

/// Identical isotropic half-spaces with radiation damping:
/// `k_cr = 2(b-a) sigma_o / (mu L) sqrt(1 + q^2)`, `c = q c_s / sqrt(1 + q^2)`.
pub fn identical_isotropic_dynamic(p: &RateState, mu: f64, c_s: f64) -> Result<ContinuumCritical> {
    let weakening = p.b - p.a;
    if weakening <= 0.0 {
        return Err(Error::VelocityStrengthening(weakening));
    }
    require_positive("mu", mu)?;
    require_positive("c_s", c_s)?;
    let q = mu * p.v_o / (2.0 * (weakening * p.a).sqrt() * p.sigma_o * c_s);
    Ok(identical_isotropic_dynamic_q(q, 2.0 * weakening * p.sigma_o / (mu * p.l), c_s))
}

/// Same result from `q` directly; `k_static` is the quasi-static critical
/// wavenumber that the radiation term inflates.
pub fn identical_isotropic_dynamic_q(q: f64, k_static: f64, c_s: f64) -> ContinuumCritical {
    let factor = (1.0 + q * q).sqrt();
    let k_cr = k_static * factor;
    let c = q * c_s / factor;
    ContinuumCritical {
        k_cr,
        c,
        omega: k_cr * c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateOnlyVerdict {
    Stable,
    /// `marginal` is set when the slope is exactly zero.
    Unstable { marginal: bool },
}

/// Stability of a purely rate-dependent surface from `dtau/dV` at `V_o`.
pub fn rate_only_verdict(tau_slope_at_vo: f64) -> RateOnlyVerdict {
    if tau_slope_at_vo > 0.0 {
        RateOnlyVerdict::Stable
    } else {
        RateOnlyVerdict::Unstable {
            marginal: tau_slope_at_vo == 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn block(m: f64, b: f64) -> SpringBlockParams {
        let f = RateState::new(0.01, b, 1e-4, 1e6, 1e-3).unwrap();
        SpringBlockParams::new(1e8, m, f).unwrap()
    }

    #[test]
    fn massless_block() {
        match spring_block_critical(&block(0.0, 0.02)) {
            SpringBlockVerdict::Critical { k_cr, omega } => {
                assert!(rel(k_cr, 1e8) < 1e-14);
                assert!(rel(omega, 1e-3 / 1e-4) < 1e-14);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn inertial_correction() {
        match spring_block_critical(&block(1.0, 0.02)) {
            SpringBlockVerdict::Critical { k_cr, omega } => {
                assert!(rel(k_cr, 1e8 * (1.0 + 1e-6)) < 1e-14);
                assert!(rel(omega, 10.0) < 1e-14);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn strengthening_block() {
        assert_eq!(spring_block_critical(&block(0.0, 0.005)), SpringBlockVerdict::AlwaysStable);
        assert!(SpringBlockParams::new(0.0, 0.0, block(0.0, 0.02).friction).is_err());
        assert!(SpringBlockParams::new(1.0, -1.0, block(0.0, 0.02).friction).is_err());
    }

    #[test]
    fn quasistatic_identical() {
        let p = RateState::new(0.01, 0.015, 1e-4, 1e8, 1e-3).unwrap();
        let r = quasistatic_continuum(&p, QuasiStaticCase::Identical { mu: 30e9 }).unwrap();
        assert!(rel(r.k_cr, 1.0 / 3.0) < 1e-14);
        // 30e9 * 1e-3 / (2 sqrt(0.01 * 0.005) 1e8) = 21.2132034355964...
        assert!(rel(r.c, 21.213_203_435_596_43) < 1e-14);
        assert!(rel(r.omega, 0.5f64.sqrt() * 10.0) < 1e-14);
    }

    #[test]
    fn orthotropic_reduces_to_identical() {
        let p = RateState::new(0.01, 0.015, 1e-4, 1e8, 1e-3).unwrap();
        let mu = 30e9;
        let ortho = quasistatic_continuum(
            &p,
            QuasiStaticCase::OrthotropicOnIsotropic { c44: 20e9, c55: 45e9, mu },
        )
        .unwrap();
        let iso = quasistatic_continuum(&p, QuasiStaticCase::Identical { mu }).unwrap();
        assert!(rel(ortho.k_cr, iso.k_cr) < 1e-14);
        assert!(rel(ortho.c, iso.c) < 1e-14);
    }

    #[test]
    fn velocity_strengthening_rejected() {
        let p = RateState::new(0.01, 0.008, 1e-4, 1e8, 1e-3).unwrap();
        assert!(matches!(
            quasistatic_continuum(&p, QuasiStaticCase::Identical { mu: 1.0 }),
            Err(Error::VelocityStrengthening(_))
        ));
        assert!(identical_isotropic_dynamic(&p, 1.0, 1.0).is_err());
    }

    #[test]
    fn dynamic_identical_values() {
        let k0 = 2.5;
        let r = identical_isotropic_dynamic_q(1e-12, k0, 3000.0);
        assert!(rel(r.k_cr, k0) < 1e-15 && r.c < 1e-8);
        let r = identical_isotropic_dynamic_q(1.0, k0, 3000.0);
        assert!(rel(r.c, 3000.0 / 2f64.sqrt()) < 1e-15);
        assert!(rel(r.k_cr, k0 * 2f64.sqrt()) < 1e-15);
        let r = identical_isotropic_dynamic_q(3f64.sqrt(), k0, 3000.0);
        assert!(rel(r.c, 3000.0 * 3f64.sqrt() / 2.0) < 1e-15);
        assert!(rel(r.k_cr, 2.0 * k0) < 1e-15);
    }

    #[test]
    fn dynamic_quasi_static_agreement() {
        let p = RateState::new(0.01, 0.015, 1e-4, 1e8, 1e-9).unwrap();
        let dynamic = identical_isotropic_dynamic(&p, 30e9, 3000.0).unwrap();
        let qs = quasistatic_continuum(&p, QuasiStaticCase::Identical { mu: 30e9 }).unwrap();
        assert!(rel(dynamic.k_cr, qs.k_cr) < 1e-12);
        assert!(rel(dynamic.c, qs.c) < 1e-9);
    }

    #[test]
    fn rate_only() {
        assert_eq!(rate_only_verdict(5.0), RateOnlyVerdict::Stable);
        assert_eq!(rate_only_verdict(-5.0), RateOnlyVerdict::Unstable { marginal: false });
        assert_eq!(rate_only_verdict(0.0), RateOnlyVerdict::Unstable { marginal: true });
    }

    proptest! {
        #[test]
        fn frequencies_agree(a in 0.001f64..0.02, extra in 1e-4f64..0.02, mu in 1e9f64..1e11, m in 0.0f64..10.0) {
            let p = RateState::new(a, a + extra, 1e-4, 1e7, 1e-3).unwrap();
            let expect = (extra / a).sqrt() * p.v_o / p.l;
            let qs = quasistatic_continuum(&p, QuasiStaticCase::Identical { mu }).unwrap();
            prop_assert!(rel(qs.omega, expect) < 1e-12);
            let dis = quasistatic_continuum(&p, QuasiStaticCase::Dissimilar { mu, mu_prime: 3.0 * mu }).unwrap();
            prop_assert!(rel(dis.omega, expect) < 1e-12);
            let dynamic = identical_isotropic_dynamic(&p, mu, 3000.0).unwrap();
            prop_assert!(rel(dynamic.omega, expect) < 1e-12);
            let block = SpringBlockParams::new(1e8, m, p).unwrap();
            match spring_block_critical(&block) {
                SpringBlockVerdict::Critical { omega, .. } => prop_assert!(rel(omega, expect) < 1e-12),
                _ => prop_assert!(false),
            }
        }

        #[test]
        fn dissimilar_symmetric(mu in 1e9f64..1e11, mu2 in 1e9f64..1e11) {
            let p = RateState::new(0.01, 0.015, 1e-4, 1e8, 1e-3).unwrap();
            let a = quasistatic_continuum(&p, QuasiStaticCase::Dissimilar { mu, mu_prime: mu2 }).unwrap();
            let b = quasistatic_continuum(&p, QuasiStaticCase::Dissimilar { mu: mu2, mu_prime: mu }).unwrap();
            prop_assert!(rel(a.k_cr, b.k_cr) < 1e-14);
            prop_assert!(rel(a.c, b.c) < 1e-14);
        }
    }
}
