use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: missing field `{0}`")]
    MissingField(&'static str),

    #[error("config: {0}")]
    Config(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("perturbative treatment requires Gamma/m < 1e-2, got {ratio:e}")]
    NotPerturbative { ratio: f64 },

    #[error("operation requires the evanescent regime (Delta < -J0), got Delta/J0 = {delta_over_j0}")]
    NotEvanescent { delta_over_j0: f64 },

    #[error("potential is not mirror symmetric: |V(y) - V(-y)| = {deviation:e} at index {index}")]
    AsymmetricPotential { index: usize, deviation: f64 },

    #[error("double-well geometry: {0}")]
    Geometry(String),

    #[error("eigensolver: {0}")]
    Eigensolver(String),

    #[error("mode basis: {0}")]
    ModeStructure(String),

    #[error("hybridized modes poorly localized: main-guide fraction {fraction:.4} < 0.9")]
    Delocalized { fraction: f64 },

    #[error("calibration of J0 failed: {0}")]
    Calibration(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("nodal point at ({x}, {y}): |psi|^2 below floor")]
    Nodal { x: f64, y: f64 },

    #[error("integration step too large: |v| dt = {displacement:e} exceeds {limit:e}; reduce dt")]
    StepTooLarge { displacement: f64, limit: f64 },

    #[error("fit window: {0}")]
    FitWindow(String),

    #[error("TDSE propagation: {0}")]
    Tdse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
