use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angular frequency {omega:.6e} rad/s outside valid range [{min:.6e}, {max:.6e}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dispersion model: {0}")]
    InvalidModel(String),

    #[error("frequency grids do not match")]
    GridMismatch,

    #[error("transfer matrix is singular (zero through transmission) at grid index {0}")]
    Singular(usize),

    #[error("malformed netlist: {0}")]
    MalformedNetlist(String),

    #[error("no resonances found in spectrum")]
    NoResonances,

    #[error("every resonance fit diverged")]
    AllFitsDiverged,

    #[error(
        "coupling is ambiguous without a known loss or reflectivity \
         (undercoupled: sigma={under_sigma:.6}, eta={under_eta:.6}; \
         overcoupled: sigma={over_sigma:.6}, eta={over_eta:.6})"
    )]
    Ambiguous {
        under_sigma: f64,
        under_eta: f64,
        over_sigma: f64,
        over_eta: f64,
    },

    #[error("joint spectral amplitude grid is identically zero")]
    ZeroGrid,

    #[error("island window {0} lies outside the grid")]
    WindowOutOfGrid(usize),

    #[error("island window {0} has no mirror image about the diagonal")]
    AsymmetricWindows(usize),

    #[error("singular value decomposition failed")]
    Svd,

    #[error("invalid value at `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("bad grid container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage} stage: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

impl Error {
    /// The innermost error, past any stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage { stage, source: Box::new(e) }
    }

    pub(crate) fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }
}
