use thiserror::Error;

/// Errors shared across the solver, measurement, and estimator modules.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A constructor or operation was handed a parameter outside its
    /// documented domain.
    #[error("invalid {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A pipeline operation was applied to a state in the wrong stage.
    #[error("operation requires a state in stage {expected}, got {found}")]
    StageMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// A density matrix stopped being Hermitian, unit-trace, or
    /// positive semidefinite.
    #[error("density matrix invariant violated: {0}")]
    MatrixInvariant(String),

    /// A grid step produced probability mass below the clipping floor.
    #[error("grid step produced mass {min_mass:.3e} in cell {cell}, below the {floor:.1e} floor")]
    NegativeMass {
        cell: usize,
        min_mass: f64,
        floor: f64,
    },

    /// Probability reached the edge of the velocity grid; the grid no
    /// longer contains the distribution and the run cannot continue.
    #[error("boundary cells hold mass {mass:.3e} at t = {time:.6e} (limit {limit:.1e}); widen the grid")]
    BoundaryMass { time: f64, mass: f64, limit: f64 },

    /// Total probability drifted away from one by more than the
    /// conservation tolerance in a single step.
    #[error("total mass {total:.17e} at t = {time:.6e} violates conservation tolerance {tolerance:.1e}")]
    MassNotConserved {
        time: f64,
        total: f64,
        tolerance: f64,
    },

    /// An ensemble sample reached the validity ceiling `|v| >= c (1 - eps)`,
    /// where the linear diffusion model stops making sense.
    #[error("sample velocity {velocity:.6e} reached the validity ceiling {ceiling:.6e} at t = {time:.6e}")]
    SampleOutOfRange {
        time: f64,
        velocity: f64,
        ceiling: f64,
    },

    /// Two diffusion models were combined but disagree on the signal
    /// speed, so their drifts are not commensurable.
    #[error("diffusion models disagree on signal speed: {c_a} vs {c_b}")]
    MismatchedSignalSpeed { c_a: f64, c_b: f64 },

    /// The mutual-update constraint on a split-object increment record
    /// does not hold.
    #[error("mutual increments must cancel exactly: delta2_v_a1 + delta1_v_a2 = {sum:e}")]
    MutualIncrementsUnbalanced { sum: f64 },

    /// An estimator needs an object property that was not provided.
    #[error("object is missing required property {0}")]
    MissingProperty(&'static str),

    /// A body pair is too close for retardation to be negligible at the
    /// heavier body's fluctuation time.
    #[error("separation {r:.3e} is within {ratio:.1} light-crossings of the fluctuation time; need > {required:.1}")]
    SeparationTooSmall { r: f64, ratio: f64, required: f64 },
}

impl CoreError {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
