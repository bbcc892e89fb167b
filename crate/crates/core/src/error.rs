use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("right-hand side is singular at abscissa x = {x} (requires x > 0)")]
    SingularAbscissa { x: f64 },

    #[error("right-hand side is singular at slope s = {s} (3s^2 - 1 vanishes or s = 0)")]
    SingularSlope { s: f64 },

    #[error("kernel phi is undefined at (p, q) = ({p}, {q})")]
    PhiDomain { p: f64, q: f64 },

    #[error("stop condition not met within {max_steps} steps")]
    MaxStepsExceeded { max_steps: usize },

    #[error("end condition y*(x*) = h (x*/r)^(1/delta) not reached within {max_steps} steps")]
    EventNotReached { max_steps: usize },

    #[error("cannot locate event on a flat chord (y_curr - y_prev = {dy})")]
    DegenerateChord { dy: f64 },

    #[error("nose cone geometry requires r > 0 and h > 0, got r = {r}, h = {h}")]
    InvalidGeometry { r: f64, h: f64 },

    #[error("hemisphere requires r = h, got r = {r}, h = {h}")]
    GeometryMismatch { r: f64, h: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("residual has the same sign at both bracket ends: F({a_lo}) = {f_lo}, F({a_hi}) = {f_hi}")]
    NoBracket {
        a_lo: f64,
        a_hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("secant update breaks down: |F(a_k) - F(a_k-1)| = {df}")]
    SecantBreakdown { df: f64 },

    #[error("root finder did not converge within {max_iterations} iterations")]
    MaxIterationsExceeded { max_iterations: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
