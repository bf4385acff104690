//! Bi-material transfer function `F` relating interface traction to slip,
//! `T(k, p) = -(mu |k| / 2) F(k, p) D(k, p)` in the Laplace domain.
//!
//! `F` depends on `(k, p)` only through `z = p / (|k| c1)`:
//!
//! ```text
//! F = 2 m sqrt(1 + z^2/r^2) sqrt(1 + z^2) / (sqrt(1 + z^2) + m sqrt(1 + z^2/r^2))
//! ```
//!
//! with `m = mu'/mu` and `r = c1'/c1`. Square roots take the principal branch
//! (nonnegative real part). For `Re z > 0` neither radicand reaches the
//! negative real axis, so `F` is analytic in the open right half-plane; values
//! on the imaginary axis are the limits taken from the right.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::material::BiMaterial;

/// Complex transfer value `F1 + i F2`.
pub type TransferValue = Complex64;

/// `sqrt(w)` where `w = 1 + z^2 / s^2` and `z` is approached from `Re z > 0`.
fn radical(w: Complex64, z: Complex64) -> Complex64 {
    if z.re == 0.0 && w.re < 0.0 {
        // On the axis the radicand sits on the cut; the right half-plane
        // limit gives +0i for Im z > 0 and -0i below.
        let s = (-w.re).sqrt();
        return Complex64::new(0.0, s.copysign(z.im));
    }
    w.sqrt()
}

/// `F` as a function of the reduced rate `z = p / (|k| c1)`.
pub fn f_reduced(z: Complex64, bm: &BiMaterial) -> Result<TransferValue> {
    let m = bm.mu_ratio;
    let r = bm.speed_ratio;
    let z2 = z * z;
    let slow = radical(Complex64::new(1.0, 0.0) + z2, z);
    let fast = radical(Complex64::new(1.0, 0.0) + z2 / (r * r), z);
    let denom = slow + m * fast;
    if denom.norm() < 1e-300 {
        return Err(Error::BranchPole { re: z.re, im: z.im });
    }
    Ok(2.0 * m * fast * slow / denom)
}

pub fn f_laplace(k: f64, p: Complex64, bm: &BiMaterial) -> Result<TransferValue> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be nonzero, got {k}")));
    }
    if p.re < 0.0 {
        return Err(Error::Domain(format!(
            "transfer function is defined for Re(p) >= 0, got {p}"
        )));
    }
    f_reduced(p / (k.abs() * bm.slow.c1), bm)
}

/// `F(c)` for a neutral mode moving slower than both characteristic speeds.
pub fn f_subsonic(c_over_c1: f64, bm: &BiMaterial) -> Result<f64> {
    if !(0.0..1.0).contains(&c_over_c1) {
        return Err(Error::Domain(format!(
            "subsonic phase velocity ratio must lie in [0, 1), got {c_over_c1}"
        )));
    }
    Ok(f_subsonic_unchecked(c_over_c1, bm))
}

/// Bound on `|d ln F / d ln x|` for the subsonic branch; multiplied by the
/// rounding of `x` it bounds the error any evaluation of `F(c)` inherits.
pub fn subsonic_sensitivity(c_over_c1: f64, bm: &BiMaterial) -> f64 {
    let x2 = c_over_c1 * c_over_c1;
    let r2 = bm.speed_ratio * bm.speed_ratio;
    x2 / (1.0 - x2) + x2 / (r2 - x2)
}

pub(crate) fn f_subsonic_unchecked(x: f64, bm: &BiMaterial) -> f64 {
    let m = bm.mu_ratio;
    let r = bm.speed_ratio;
    // factored radicands avoid cancellation as x approaches 1 or r
    let beta = ((1.0 - x) * (1.0 + x)).sqrt();
    let y = x / r;
    let beta_fast = ((1.0 - y) * (1.0 + y)).sqrt();
    2.0 * m * beta_fast * beta / (beta + m * beta_fast)
}

/// `F1 + i F2` for `c1 < c < c1'`, the right half-plane limit at `p = i|k|c`.
pub fn f_intersonic(c_over_c1: f64, bm: &BiMaterial) -> Result<TransferValue> {
    if !bm.has_intersonic_interval() {
        return Err(Error::EmptyInterval);
    }
    if !(c_over_c1 > 1.0 && c_over_c1 < bm.speed_ratio) {
        return Err(Error::Domain(format!(
            "intersonic phase velocity ratio must lie in (1, {}), got {c_over_c1}",
            bm.speed_ratio
        )));
    }
    Ok(f_intersonic_unchecked(c_over_c1, bm))
}

pub(crate) fn f_intersonic_unchecked(x: f64, bm: &BiMaterial) -> Complex64 {
    let m = bm.mu_ratio;
    let r = bm.speed_ratio;
    let s = (x * x - 1.0).sqrt();
    let beta_fast = (1.0 - x * x / (r * r)).sqrt();
    let mb = m * beta_fast;
    let d = mb * mb + s * s;
    Complex64::new(2.0 * mb * s * s / d, 2.0 * mb * mb * s / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{make_bimaterial, EffectiveMedium};
    use proptest::prelude::*;

    fn fig1() -> BiMaterial {
        BiMaterial::from_ratios(1.0, 1.2).unwrap()
    }

    fn presets() -> Vec<BiMaterial> {
        [(1.2, 1.0), (5.0, 1.0), (5.0, 10.0), (5.0, 0.1)]
            .iter()
            .map(|&(r, m)| BiMaterial::from_ratios(m, r).unwrap())
            .collect()
    }

    #[test]
    fn static_limit() {
        for bm in presets() {
            let f = f_laplace(3.0, Complex64::new(0.0, 0.0), &bm).unwrap();
            assert!((f.re - bm.static_transfer()).abs() < 1e-15);
            assert_eq!(f.im, 0.0);
        }
    }

    #[test]
    fn identical_media_reduce_to_single_radical() {
        let bm = BiMaterial::identical(EffectiveMedium { mu: 2.0, c1: 3.0 });
        let k = 0.7;
        for p in [Complex64::new(0.5, 1.0), Complex64::new(2.0, -4.0), Complex64::new(1e-3, 2.5)] {
            let f = f_laplace(k, p, &bm).unwrap();
            let expected = (1.0 + p * p / (k * k * 9.0)).sqrt();
            assert!((f - expected).norm() < 1e-14 * expected.norm().max(1.0));
        }
        assert!((f_subsonic(0.6, &bm).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(f_subsonic(0.0, &fig1()).unwrap(), 1.0);
    }

    #[test]
    fn subsonic_low_contrast() {
        // mpmath: 0.760036055744546926822190113599
        let f = f_subsonic(0.7, &fig1()).unwrap();
        assert!((f - 0.760_036_055_744_546_9).abs() < 1e-14);
        let axis = f_laplace(2.0, Complex64::new(0.0, 2.0 * 0.7), &fig1()).unwrap();
        assert!((axis.re - f).abs() < 1e-14 && axis.im == 0.0);
        assert!(f_subsonic(1.0, &fig1()).is_err());
        assert!(f_subsonic(-0.1, &fig1()).is_err());
    }

    #[test]
    fn intersonic_low_contrast() {
        // mpmath: 0.454000579967995989662867915916, 0.395940048775297972019252762794
        let f = f_intersonic(1.1, &fig1()).unwrap();
        assert!((f.re - 0.454_000_579_967_996).abs() < 1e-14);
        assert!((f.im - 0.395_940_048_775_298).abs() < 1e-14);
        let near_slow = f_intersonic(1.0 + 1e-12, &fig1()).unwrap();
        let near_fast = f_intersonic(1.2 - 1e-12, &fig1()).unwrap();
        assert!(near_slow.norm() < 1e-5 && near_fast.norm() < 1e-5);
    }

    #[test]
    fn intersonic_errors() {
        assert!(matches!(f_intersonic(1.3, &fig1()), Err(Error::Domain(_))));
        assert!(matches!(f_intersonic(1.0, &fig1()), Err(Error::Domain(_))));
        let equal_speed = make_bimaterial(
            EffectiveMedium { mu: 1.0, c1: 1.0 },
            EffectiveMedium { mu: 3.0, c1: 1.0 },
        );
        assert!(matches!(f_intersonic(1.0, &equal_speed), Err(Error::EmptyInterval)));
    }

    #[test]
    fn axis_limit_matches_offset_evaluation() {
        for bm in presets() {
            let r = bm.speed_ratio;
            for i in 1..=100 {
                let x = 1.0 + (r - 1.0) * i as f64 / 101.0;
                let exact = f_intersonic(x, &bm).unwrap();
                let eps = 1e-8;
                let f1 = f_reduced(Complex64::new(eps, x), &bm).unwrap();
                let f2 = f_reduced(Complex64::new(2.0 * eps, x), &bm).unwrap();
                assert!((exact - f1).norm() < 1e-6, "x = {x}");
                let limit = 2.0 * f1 - f2;
                assert!((exact.re - limit.re).abs() < 1e-10, "x = {x}");
                assert!((exact.im - limit.im).abs() < 1e-10, "x = {x}");
                let on_axis = f_reduced(Complex64::new(0.0, x), &bm).unwrap();
                assert!((exact - on_axis).norm() < 1e-14);
                // lower half of the axis carries the conjugate
                let below = f_reduced(Complex64::new(0.0, -x), &bm).unwrap();
                assert!((exact.conj() - below).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn subsonic_decreasing_and_g_increasing() {
        for bm in presets() {
            let n = 10_000;
            let mut prev_f = f64::INFINITY;
            let mut prev_g = 0.0;
            for i in 0..n {
                let x = i as f64 / n as f64;
                let f = f_subsonic(x, &bm).unwrap();
                assert!(f > 0.0 && f < prev_f);
                let g = x / f;
                assert!(i == 0 || g > prev_g);
                prev_f = f;
                prev_g = g;
            }
        }
    }

    #[test]
    fn rejects_left_half_plane_and_zero_k() {
        let bm = fig1();
        assert!(f_laplace(0.0, Complex64::new(1.0, 0.0), &bm).is_err());
        assert!(f_laplace(1.0, Complex64::new(-1.0, 0.0), &bm).is_err());
    }

    #[test]
    fn pole_detected_for_equal_speeds_at_characteristic_speed() {
        let bm = BiMaterial::from_ratios(2.0, 1.0).unwrap();
        assert!(matches!(
            f_reduced(Complex64::new(0.0, 1.0), &bm),
            Err(Error::BranchPole { .. })
        ));
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in 1e-6f64..10.0, im in -10.0f64..10.0, idx in 0usize..4) {
            let bm = presets()[idx];
            let p = Complex64::new(re, im);
            let f = f_laplace(1.3, p, &bm).unwrap();
            let fc = f_laplace(1.3, p.conj(), &bm).unwrap();
            prop_assert!((f.conj() - fc).norm() < 1e-14 * f.norm().max(1.0));
        }

        #[test]
        fn scale_invariance(re in 1e-6f64..10.0, im in -10.0f64..10.0, s in 0.01f64..100.0, k in 0.1f64..10.0) {
            let bm = make_bimaterial(
                EffectiveMedium { mu: 3.0e9, c1: 2000.0 },
                EffectiveMedium { mu: 1.5e9, c1: 2600.0 },
            );
            let p = Complex64::new(re, im) * 1000.0;
            let f = f_laplace(k, p, &bm).unwrap();
            let g = f_laplace(-s * k, s * p, &bm).unwrap();
            prop_assert!((f - g).norm() < 1e-12 * f.norm().max(1.0));
        }

        #[test]
        fn analytic_in_right_half_plane(re in 0.05f64..5.0, im in -5.0f64..5.0, idx in 0usize..4) {
            // Cauchy-Riemann via central differences
            let bm = presets()[idx];
            let z = Complex64::new(re, im);
            let h = 1e-5;
            let dx = (f_reduced(z + h, &bm).unwrap() - f_reduced(z - h, &bm).unwrap()) / (2.0 * h);
            let i = Complex64::new(0.0, h);
            let dy = (f_reduced(z + i, &bm).unwrap() - f_reduced(z - i, &bm).unwrap()) / (2.0 * h);
            let cr = dx - dy / Complex64::new(0.0, 1.0);
            prop_assert!(cr.norm() < 1e-5 * dx.norm().max(1.0), "cr residual {}", cr);
        }
    }
}
