use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Δ² − 4g² is negative beyond tolerance, so the symplectic spectrum is not real.
    #[error("malformed covariance matrix: symplectic discriminant {discriminant:e} < 0")]
    MalformedCovariance { discriminant: f64 },

    #[error("covariance block of the steering mode is singular")]
    DegenerateBlock,

    #[error("covariance matrix violates the uncertainty principle")]
    UnphysicalState,

    #[error("Renyi-2 formula undefined: g = {g} below the squeezed-thermal bound {bound}")]
    OutsideFormulaDomain { g: f64, bound: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no stationary state: kappa + A*eta = {kappa} + {gain}*{eta} <= 0")]
    NoStationaryState { gain: f64, kappa: f64, eta: f64 },

    #[error("time step {dt} exceeds the stability limit {max_dt}")]
    StepTooLarge { dt: f64, max_dt: f64 },

    #[error("moment integration diverged at t = {t} ms")]
    Diverged { t: f64 },

    #[error("negative photon number at t = {t} ms")]
    NegativeOccupation { t: f64 },

    #[error("stationary linear system is singular")]
    SingularSystem,

    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),

    #[error("no bracketed steering transition in the search interval")]
    NotFound,
}
