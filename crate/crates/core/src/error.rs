use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid local dimension d={0}; need d >= 2")]
    InvalidDimension(u32),
    #[error("site {site} out of range for a {num_sites}-site system")]
    SiteOutOfRange { site: usize, num_sites: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("invalid lattice size L={0}; need an even L >= 2")]
    InvalidLatticeSize(usize),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("perturbative order {requested} exceeds the cap {cap}")]
    OrderCapExceeded { requested: usize, cap: usize },
    #[error("missing clusters for order {0}")]
    MissingClusters(usize),
    #[error("operation requires the small-coupling regime")]
    RegimeMismatch,
    #[error("series too short: need order {needed}, have {have}")]
    SeriesTooShort { needed: usize, have: usize },
    #[error("defective Padé approximant [{l}/{m}]: {reason}")]
    DefectivePade { l: usize, m: usize, reason: String },
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("no crossing found in window [{0}, {1}]")]
    NoCrossing(f64, f64),
    #[error("no derivative jump found in window")]
    NoJump,
    #[error("grid too coarse: finite-difference mismatch {mismatch:e} exceeds {tolerance:e}")]
    GridTooCoarse { mismatch: f64, tolerance: f64 },
    #[error("Hilbert dimension {dim} exceeds the {method} limit {limit}")]
    DimensionTooLarge {
        dim: usize,
        limit: usize,
        method: &'static str,
    },
    #[error("operator is not Hermitian")]
    NonHermitian,
    #[error("eigensolver did not converge: residual {0:e}")]
    NotConverged(f64),
    #[error("fit window is degenerate")]
    DegenerateFit,
    #[error("too few sites: n={n}, need n >= {min}")]
    TooFewSites { n: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
