use thiserror::Error;

pub type Result<T> = std::result::Result<T, GeoError>;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("point {point:?} lies outside the chart domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("finite-difference stencil leaves the chart domain at {point:?} along axis {axis}")]
    StencilOutOfDomain { point: Vec<f64>, axis: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("input vectors are linearly dependent (relative residual {residual:e})")]
    RankDeficient { residual: f64 },

    #[error("frame is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("unknown model `{0}`; available models: torus, sphere, ellipsoid, warped, random-trig")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("vectors do not span a plane")]
    DegeneratePlane,

    #[error("operator is not self-adjoint (residual {residual:e})")]
    NotSelfAdjoint { residual: f64 },

    #[error("region is empty")]
    EmptyRegion,

    #[error("deformation loses positive definiteness at s = {s:e}; largest validated amplitude is {max_valid:e}")]
    AmplitudeTooLarge { s: f64, max_valid: f64 },

    #[error("could not satisfy the f-pair bounds after {attempts} halvings")]
    FPairConstruction { attempts: usize },

    #[error("no amplitude in the schedule passed the local verification")]
    NoValidAmplitude,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GeoError {
    /// Configuration-type errors (as opposed to numerical failures).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            GeoError::UnknownModel(_)
                | GeoError::InvalidParameter(_)
                | GeoError::DimensionMismatch { .. }
                | GeoError::EmptyRegion
                | GeoError::Json(_)
        )
    }
}
