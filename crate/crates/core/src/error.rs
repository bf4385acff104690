use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("anti-plane stiffness is not positive definite (c44={c44}, c45={c45}, c55={c55}, rho={rho})")]
    NotPositiveDefinite {
        c44: f64,
        c45: f64,
        c55: f64,
        rho: f64,
    },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("slip velocity must be positive, got {0}")]
    NonpositiveVelocity(f64),
    #[error("{0}")]
    Domain(String),
    #[error("friction is velocity strengthening (b - a = {0} <= 0); sliding is always stable")]
    VelocityStrengthening(f64),
    #[error("transfer function denominator vanishes at p/(|k| c1) = {re} + {im}i")]
    BranchPole { re: f64, im: f64 },
    #[error("intersonic interval is empty (c1' = c1)")]
    EmptyInterval,
    #[error("root on the counting contour after {attempts} dilations")]
    ContourThroughZero { attempts: usize },
    #[error("step size underflow at t = {t} (V = {v}, theta = {theta})")]
    StepFailure { t: f64, v: f64, theta: f64 },
    #[error("slip velocity blew up at t = {t} (V = {v})")]
    BlowUp { t: f64, v: f64 },
    #[error("stiffness bisection inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
