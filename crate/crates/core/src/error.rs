use thiserror::Error;

use crate::picard::SolveFailure;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("C0 compatibility violated: max |u1+u2+u3| on the spine = {max_sum:e} (tolerance {tol:e})")]
    CompatibilityViolation { max_sum: f64, tol: f64 },

    #[error("degenerate induced metric on sheet {sheet}: det g = {det:e} at x = {x}, y = {y}")]
    DegenerateMetric { sheet: usize, det: f64, x: f64, y: f64 },

    #[error("no convergence after {} iterations (last update {:e})", .0.report.iterations, .0.report.last_update())]
    NoConvergence(Box<SolveFailure>),

    #[error("iterate left the guard ball: proxy {proxy:e} > r_guard {r_guard:e} at iteration {iteration}", proxy = .0.report.guards.norm_proxy, r_guard = .0.report.guards.r_guard, iteration = .0.report.iterations)]
    GuardViolation(Box<SolveFailure>),

    #[error("magnitude guard: {0}")]
    Magnitude(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error in {file}: {msg}")]
    Parse { file: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
