//! Rate-and-state friction: constitutive law, steady state, state evolution
//! and the coefficient groups of the linearized law.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::material::EffectiveMedium;

pub const DEFAULT_FRICTION_COEFFICIENT: f64 = 0.6;

/// Friction parameters about a steady sliding state at `v_o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateState {
    pub a: f64,
    pub b: f64,
    /// State-evolution slip distance (m).
    pub l: f64,
    pub sigma_o: f64,
    pub v_o: f64,
    pub f: f64,
}

impl RateState {
    pub fn new(a: f64, b: f64, l: f64, sigma_o: f64, v_o: f64) -> Result<Self> {
        Self::with_friction_coefficient(a, b, l, sigma_o, v_o, DEFAULT_FRICTION_COEFFICIENT)
    }

    pub fn with_friction_coefficient(
        a: f64,
        b: f64,
        l: f64,
        sigma_o: f64,
        v_o: f64,
        f: f64,
    ) -> Result<Self> {
        let p = Self {
            a,
            b,
            l,
            sigma_o,
            v_o,
            f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a", self.a)?;
        require_positive("L", self.l)?;
        require_positive("sigma_o", self.sigma_o)?;
        require_positive("V_o", self.v_o)?;
        if !self.b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                value: self.b,
                reason: "must be finite",
            });
        }
        if !(self.f >= 0.0 && self.f.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "f",
                value: self.f,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Shear stress of the unperturbed sliding state, `f sigma_o`.
    pub fn tau_o(&self) -> f64 {
        self.f * self.sigma_o
    }

    pub fn is_velocity_weakening(&self) -> bool {
        self.b > self.a
    }

    pub fn b_over_a(&self) -> f64 {
        self.b / self.a
    }

    /// `V_o / L`, the inverse state-relaxation time.
    pub fn relax_rate(&self) -> f64 {
        self.v_o / self.l
    }

    /// Frequency `sqrt((b-a)/a) V_o/L` every neutral mode shares.
    pub fn neutral_frequency(&self) -> Result<f64> {
        if !self.is_velocity_weakening() {
            return Err(Error::VelocityStrengthening(self.b - self.a));
        }
        Ok(((self.b - self.a) / self.a).sqrt() * self.relax_rate())
    }

    /// Friction stress from the constitutive law at slip rate `v` and state `theta`.
    pub fn stress(&self, v: f64, theta: f64) -> f64 {
        self.tau_o()
            + self.a * self.sigma_o * (v / self.v_o).ln()
            + self.b * self.sigma_o * (self.v_o * theta / self.l).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionLaw {
    /// `dtheta/dt = 1 - V theta / L`
    Ageing,
    /// `dtheta/dt = -(V theta / L) ln(V theta / L)`
    Slip,
}

impl std::str::FromStr for EvolutionLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ageing" | "aging" => Ok(Self::Ageing),
            "slip" => Ok(Self::Slip),
            other => Err(Error::Domain(format!("unknown evolution law `{other}`"))),
        }
    }
}

pub fn steady_state_stress(p: &RateState, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::NonpositiveVelocity(v));
    }
    Ok(p.tau_o() - p.sigma_o * (p.b - p.a) * (v / p.v_o).ln())
}

pub fn state_rate(law: EvolutionLaw, v: f64, theta: f64, l: f64) -> Result<f64> {
    let omega = v * theta / l;
    match law {
        EvolutionLaw::Ageing => Ok(1.0 - omega),
        EvolutionLaw::Slip => {
            if !(omega > 0.0) {
                return Err(Error::Domain(format!(
                    "slip law needs V theta / L > 0, got {omega}"
                )));
            }
            Ok(-omega * omega.ln())
        }
    }
}

/// `q = mu V_o / (2 sqrt(a (b - a)) sigma_o c1)` for the slow side `m`.
pub fn nondim_q(p: &RateState, m: &EffectiveMedium) -> Result<f64> {
    if !p.is_velocity_weakening() {
        return Err(Error::VelocityStrengthening(p.b - p.a));
    }
    Ok(m.mu * p.v_o / (2.0 * (p.a * (p.b - p.a)).sqrt() * p.sigma_o * m.c1))
}

/// Coefficient groups of the linearized law
/// `dtau/dt = direct dV/dt - relax [tau - tau_o + weaken (V - V_o)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoefficients {
    /// `a sigma_o / V_o`
    pub direct: f64,
    /// `V_o / L`
    pub relax: f64,
    /// `(b - a) sigma_o / V_o`
    pub weaken: f64,
}

pub fn linearized_coefficients(p: &RateState) -> LinearizedCoefficients {
    LinearizedCoefficients {
        direct: p.a * p.sigma_o / p.v_o,
        relax: p.v_o / p.l,
        weaken: (p.b - p.a) * p.sigma_o / p.v_o,
    }
}
