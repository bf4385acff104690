//! Effective anti-plane constants of an anisotropic half-space.
//!
//! A solid with the 1-2 plane as a plane of elastic symmetry has three
//! anti-plane stiffnesses (C44, C45, C55). For the interface problem they
//! collapse into an effective shear modulus `mu = sqrt(C44 C55 - C45^2)` and
//! a characteristic speed `c1 = mu / sqrt(C44 rho)`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Raw anti-plane stiffnesses (Pa) and density (kg/m^3) of one half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearStiffness {
    pub c44: f64,
    pub c45: f64,
    pub c55: f64,
    pub rho: f64,
}

impl ShearStiffness {
    pub fn new(c44: f64, c45: f64, c55: f64, rho: f64) -> Self {
        Self { c44, c45, c55, rho }
    }

    pub fn isotropic(shear_modulus: f64, rho: f64) -> Self {
        Self::new(shear_modulus, 0.0, shear_modulus, rho)
    }

    fn determinant(&self) -> f64 {
        self.c44 * self.c55 - self.c45 * self.c45
    }
}

/// Effective shear modulus `mu` (Pa) and characteristic wave speed `c1` (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveMedium {
    pub mu: f64,
    pub c1: f64,
}

impl EffectiveMedium {
    pub fn new(mu: f64, c1: f64) -> Result<Self> {
        require_positive("mu", mu)?;
        require_positive("c1", c1)?;
        Ok(Self { mu, c1 })
    }
}

pub fn effective_medium(s: &ShearStiffness) -> Result<EffectiveMedium> {
    let det = s.determinant();
    let invalid = !(s.c44 > 0.0 && s.c55 > 0.0 && s.rho > 0.0 && det > 0.0)
        || !(s.c44.is_finite() && s.c45.is_finite() && s.c55.is_finite() && s.rho.is_finite());
    if invalid {
        return Err(Error::NotPositiveDefinite {
            c44: s.c44,
            c45: s.c45,
            c55: s.c55,
            rho: s.rho,
        });
    }
    let mu = det.sqrt();
    let c1 = mu / (s.c44 * s.rho).sqrt();
    Ok(EffectiveMedium { mu, c1 })
}

/// An ordered pair of half-spaces. The `slow` side is always the unprimed
/// material (`c1 <= c1'`); `swapped` records whether the caller's order was
/// reversed to get there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiMaterial {
    pub slow: EffectiveMedium,
    pub fast: EffectiveMedium,
    /// mu' / mu
    pub mu_ratio: f64,
    /// c1' / c1, never below 1
    pub speed_ratio: f64,
    pub swapped: bool,
}

pub fn make_bimaterial(m1: EffectiveMedium, m2: EffectiveMedium) -> BiMaterial {
    let swapped = m2.c1 < m1.c1;
    let (slow, fast) = if swapped { (m2, m1) } else { (m1, m2) };
    BiMaterial {
        slow,
        fast,
        mu_ratio: fast.mu / slow.mu,
        speed_ratio: fast.c1 / slow.c1,
        swapped,
    }
}

impl BiMaterial {
    /// Nondimensional pair with a unit slow side.
    ///
    /// A `speed_ratio` below one is accepted and reordered, so the stored
    /// ratios always satisfy `speed_ratio >= 1`.
    pub fn from_ratios(mu_ratio: f64, speed_ratio: f64) -> Result<Self> {
        require_positive("mu_ratio", mu_ratio)?;
        require_positive("speed_ratio", speed_ratio)?;
        let unit = EffectiveMedium { mu: 1.0, c1: 1.0 };
        let other = EffectiveMedium {
            mu: mu_ratio,
            c1: speed_ratio,
        };
        Ok(make_bimaterial(unit, other))
    }

    pub fn identical(medium: EffectiveMedium) -> Self {
        make_bimaterial(medium, medium)
    }

    /// `F(0) = 2 mu' / (mu + mu')`, the static value of the transfer function.
    pub fn static_transfer(&self) -> f64 {
        2.0 * self.mu_ratio / (1.0 + self.mu_ratio)
    }

    /// Harmonic-mean stiffness `mu mu' / (mu + mu')` of the quasi-static
    /// interface relation.
    pub fn series_modulus(&self) -> f64 {
        self.slow.mu * self.fast.mu / (self.slow.mu + self.fast.mu)
    }

    pub fn has_intersonic_interval(&self) -> bool {
        self.speed_ratio > 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isotropic_granite_like() {
        let m = effective_medium(&ShearStiffness::new(30e9, 0.0, 30e9, 3000.0)).unwrap();
        assert_eq!(m.mu, 30e9);
        assert!((m.c1 - 1e7f64.sqrt()).abs() < 1e-9);
        assert!((m.c1 - 3162.28).abs() < 1e-2);
    }

    #[test]
    fn orthotropic_substitution() {
        let m = effective_medium(&ShearStiffness::new(4.0, 0.0, 9.0, 1.0)).unwrap();
        assert_eq!(m.mu, 6.0);
        assert_eq!(m.c1, 3.0);
    }

    #[test]
    fn degenerate_stiffness_rejected() {
        let err = effective_medium(&ShearStiffness::new(1.0, 1.0, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
        assert!(effective_medium(&ShearStiffness::new(-1.0, 0.0, -1.0, 1.0)).is_err());
        assert!(effective_medium(&ShearStiffness::new(1.0, 0.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn ordering_convention() {
        let a = EffectiveMedium { mu: 1.0, c1: 3.0 };
        let b = EffectiveMedium { mu: 1.0, c1: 2.0 };
        let bm = make_bimaterial(a, b);
        assert_eq!(bm.slow.c1, 2.0);
        assert!(bm.swapped);
        assert!((bm.speed_ratio - 1.5).abs() < 1e-15);

        let same = make_bimaterial(a, a);
        assert_eq!(same.mu_ratio, 1.0);
        assert_eq!(same.speed_ratio, 1.0);
        assert!(!same.swapped);
    }

    #[test]
    fn ties_keep_input_order() {
        let a = EffectiveMedium { mu: 1.0, c1: 2.0 };
        let b = EffectiveMedium { mu: 5.0, c1: 2.0 };
        let bm = make_bimaterial(a, b);
        assert!(!bm.swapped);
        assert_eq!(bm.mu_ratio, 5.0);
        assert!(!bm.has_intersonic_interval());
    }

    #[test]
    fn low_contrast_fault_ratios() {
        let bm = make_bimaterial(
            EffectiveMedium { mu: 1.0, c1: 1.0 },
            EffectiveMedium { mu: 1.0, c1: 1.2 },
        );
        assert_eq!((bm.speed_ratio, bm.mu_ratio), (1.2, 1.0));
        let r = BiMaterial::from_ratios(1.0, 1.2).unwrap();
        assert_eq!((r.speed_ratio, r.mu_ratio), (1.2, 1.0));
    }

    fn stiffness() -> impl Strategy<Value = ShearStiffness> {
        (0.1f64..100.0, 0.1f64..100.0, -0.99f64..0.99, 0.1f64..10.0).prop_map(
            |(c44, c55, frac, rho)| ShearStiffness::new(c44, frac * (c44 * c55).sqrt(), c55, rho),
        )
    }

    proptest! {
        #[test]
        fn c45_sign_is_irrelevant(s in stiffness()) {
            let m = effective_medium(&s).unwrap();
            let flipped = effective_medium(&ShearStiffness { c45: -s.c45, ..s }).unwrap();
            prop_assert_eq!(m, flipped);
        }

        #[test]
        fn stiffness_scaling(s in stiffness(), lambda in 0.01f64..100.0) {
            let m = effective_medium(&s).unwrap();
            let scaled = effective_medium(&ShearStiffness::new(
                lambda * s.c44, lambda * s.c45, lambda * s.c55, s.rho)).unwrap();
            prop_assert!((scaled.mu / m.mu - lambda).abs() < 1e-12 * lambda);
            prop_assert!((scaled.c1 / m.c1 - lambda.sqrt()).abs() < 1e-12 * lambda.sqrt());
        }

        #[test]
        fn reordering_is_idempotent(s1 in stiffness(), s2 in stiffness()) {
            let bm = make_bimaterial(effective_medium(&s1).unwrap(), effective_medium(&s2).unwrap());
            prop_assert!(bm.speed_ratio >= 1.0);
            let again = make_bimaterial(bm.slow, bm.fast);
            prop_assert!(!again.swapped);
            prop_assert_eq!(again.mu_ratio, bm.mu_ratio);
            prop_assert_eq!(again.speed_ratio, bm.speed_ratio);
        }
    }
}
