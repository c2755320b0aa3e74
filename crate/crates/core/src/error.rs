use thiserror::Error;

/// Errors raised by the model, simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unphysical configuration: {0}")]
    Unphysical(String),

    #[error("Mathieu parameter q = {q:.4} outside the lowest stability region (limit {limit})")]
    MathieuUnstable { q: f64, limit: f64 },

    #[error("point {point:?} coincides with a charge (distance {distance:e} m)")]
    SingularPoint { point: [f64; 3], distance: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("stationary configuration is a saddle (lowest Hessian eigenvalue {lowest_eigenvalue:e})")]
    Saddle { lowest_eigenvalue: f64 },

    #[error("time step {dt:e} s exceeds limit {limit:e} s ({reason})")]
    StepSize { dt: f64, limit: f64, reason: &'static str },

    #[error("ions {i} and {j} collided at t = {time:e} s (distance {distance:e} m)")]
    Collision {
        i: usize,
        j: usize,
        time: f64,
        distance: f64,
    },

    #[error("averaging window {window:e} s is shorter than one RF period {period:e} s")]
    WindowTooShort { window: f64, period: f64 },

    #[error("zig-zag bound violated: frequency ratio {ratio:.4} below critical {critical:.4} for {n_ions} ions")]
    ZigZag { ratio: f64, critical: f64, n_ions: usize },

    #[error("ions left the region of validity at t = {time:e} s: {detail}")]
    MinimumLost { time: f64, detail: String },

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error("table schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
