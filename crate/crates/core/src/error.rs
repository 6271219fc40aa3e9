use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate detuning: |delta_c^2 - omega_b^2| = {denominator:e} is too small")]
    DegenerateDetuning { denominator: f64 },

    #[error("unstable parametric drive: 2*Omega_b/Delta_b = {ratio} lies outside (-1, 1)")]
    UnstableParametricDrive { ratio: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} is not a point of the grid (dt = {dt})")]
    OffGrid { t: f64, dt: f64 },

    #[error("integration diverged at t = {t} (|entry| = {magnitude:e}); retry with dt <= {suggested_dt}")]
    Diverged {
        t: f64,
        magnitude: f64,
        suggested_dt: f64,
    },

    #[error("grid too coarse: solution changed by {change:e} under dt halving (tolerance {tolerance:e}); refine dt below {dt}")]
    UnderResolved {
        change: f64,
        tolerance: f64,
        dt: f64,
    },

    #[error("eigenvalue branches not resolvable on the detuning grid: {0}")]
    UnresolvedBranches(String),

    #[error("mixing angle undefined: g_eff = 0 and kappa_a = kappa_c")]
    UndefinedAngle,

    #[error("covariance matrix lacks the two-mode squeezing structure (deviation {deviation:e})")]
    BrokenStructure { deviation: f64 },

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
}

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    reason: impl FnOnce() -> String,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason(),
        })
    }
}
