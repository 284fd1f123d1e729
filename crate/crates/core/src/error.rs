use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The wavefunction would reach the edge of the computational box.
    #[error(
        "grid overflow: predicted extent {predicted:.6} exceeds the allowed {allowed:.6} \
         (half extent {half_extent:.6})"
    )]
    GridOverflow {
        predicted: f64,
        allowed: f64,
        half_extent: f64,
    },

    /// The kicked state needs a wider momentum window than the grid has.
    #[error("momentum overflow: kicked state needs |p| up to {required:.6}, grid covers {available:.6}")]
    MomentumOverflow { required: f64, available: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("degenerate lens: {0}")]
    DegenerateLens(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scale factor collapsed to b = {b:e} at t = {t}")]
    Singularity { t: f64, b: f64 },

    #[error("optimization failed at kappa = {kappa:?}: {source}")]
    Optimization {
        kappa: Vec<f64>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable short name, used for process diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Precondition(_) => "precondition",
            Error::GridOverflow { .. } | Error::MomentumOverflow { .. } => "grid-overflow",
            Error::Resource(_) => "resource",
            Error::DegenerateLens(_) => "degenerate-lens",
            Error::Domain(_) => "domain",
            Error::Singularity { .. } => "singularity",
            Error::Optimization { .. } => "optimization",
        }
    }
}
