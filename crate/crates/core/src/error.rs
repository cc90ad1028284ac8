use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("m = {m} lies outside the ladder of spin S = {s}")]
    Domain { s: f64, m: f64 },

    #[error("dimension mismatch: state has {found} levels, parameters require {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integrator failed to converge (step size underflow); last good time t = {last_good_time}")]
    NonConvergence { last_good_time: f64 },

    #[error("steady state is not unique: null space has dimension > 1")]
    DegenerateNullSpace,

    #[error("steady-state residual {residual:e} exceeds {tolerance:e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error("correlation undefined: <S+S-> = {denominator:e}")]
    UndefinedCorrelation { denominator: f64 },

    #[error("quadrature did not converge: estimate {value} with error {achieved:e} (requested {requested:e})")]
    Quadrature { value: f64, achieved: f64, requested: f64 },

    #[error("fit did not converge after {iterations} iterations (best omega = {best_omega}, decay = {best_decay})")]
    FitNonConvergence { iterations: usize, best_omega: f64, best_decay: f64 },

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid time trace: {0}")]
    InvalidTrace(String),
}
