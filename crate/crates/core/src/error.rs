use std::fmt;

use thiserror::Error;

pub type Result<T, E = KhoError> = std::result::Result<T, E>;

/// Which representation of the wave function tripped the boundary guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Position => f.write_str("position"),
            Representation::Momentum => f.write_str("momentum"),
        }
    }
}

#[derive(Debug, Error)]
pub enum KhoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "grid overflow in {module}: {representation} boundary mass {mass:e} exceeds {threshold:e}{}",
        step.map(|s| format!(" at step {s}")).unwrap_or_default()
    )]
    GridOverflow {
        module: &'static str,
        representation: Representation,
        mass: f64,
        threshold: f64,
        step: Option<usize>,
    },

    #[error("grid mismatch: states live on different grids")]
    GridMismatch,

    #[error("hbar_eff mismatch: state has {state}, parameters have {params}")]
    HbarMismatch { state: f64, params: f64 },

    #[error("state not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("number-basis truncation: population {population:e} above level {level} of {dim}")]
    Truncation {
        population: f64,
        level: usize,
        dim: usize,
    },

    #[error("manifold point budget exceeded at step {step}: {points} points > cap {cap}")]
    PointBudget {
        step: usize,
        points: usize,
        cap: usize,
    },

    #[error("singular matrix (determinant {det:e})")]
    SingularMatrix { det: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl KhoError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        KhoError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Attach a step index to a grid-overflow error; other variants pass through.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            KhoError::GridOverflow {
                module,
                representation,
                mass,
                threshold,
                ..
            } => KhoError::GridOverflow {
                module,
                representation,
                mass,
                threshold,
                step: Some(step),
            },
            other => other,
        }
    }

    /// True for failures of a numerical guard (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            KhoError::GridOverflow { .. }
                | KhoError::NotNormalized { .. }
                | KhoError::Truncation { .. }
                | KhoError::PointBudget { .. }
                | KhoError::SingularMatrix { .. }
        )
    }
}
