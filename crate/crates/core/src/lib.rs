//! Stability of steady rate-and-state frictional sliding.
//!
//! The crate covers the spring-block slider and dynamic anti-plane sliding
//! between two anisotropic half-spaces that share a plane of symmetry normal
//! to the slip direction:
//!
//! - [`material`]: effective shear modulus and characteristic speed per side
//! - [`friction`]: the rate-and-state law and its linearization
//! - [`transfer`]: the bi-material traction/slip transfer function
//! - [`neutral`]: Hopf (neutral) modes, critical wavenumber and `q` sweeps
//! - [`closed_forms`]: classical closed-form results used as references
//! - [`dispersion`]: the full characteristic equation and root counting
//! - [`simulate`]: nonlinear spring-block integration
//!
//! ```
//! use slipstab::material::BiMaterial;
//! use slipstab::neutral::{critical_mode_nondim, Branch};
//!
//! let bm = BiMaterial::from_ratios(1.0, 1.2).unwrap();
//! let verdict = critical_mode_nondim(1.0, 1.2, &bm).unwrap();
//! let mode = verdict.mode().unwrap();
//! assert_eq!(mode.branch, Branch::Subsonic);
//! assert!(mode.c_over_c1 < 1.0 && mode.k_hat > 1.0);
//! ```

pub mod closed_forms;
pub mod dispersion;
pub mod error;
pub mod friction;
pub mod material;
pub mod neutral;
pub mod presets;
pub mod simulate;
pub mod transfer;

pub use error::{Error, Result};
