use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target range {range_m} m does not exceed front-end path length {path_m} m")]
    TargetTooClose { range_m: f64, path_m: f64 },

    #[error("time {t} s lies outside the chirp [0, {period}] s")]
    OutsideChirp { t: f64, period: f64 },

    #[error("angular resolution needs at least 2 virtual elements, got {0}")]
    TooFewElements(usize),

    #[error("no active channel to synthesize")]
    NoActiveChannels,

    #[error("beat cube dimensions overflow ({0})")]
    DimensionOverflow(String),

    #[error("zero-pad factor must be at least 1, got {0}")]
    InvalidPadFactor(usize),

    #[error("Doppler processing needs at least 2 chirps, got {0}")]
    TooFewChirps(usize),

    #[error("angle grid is empty")]
    EmptyGrid,

    #[error("spectrum has no detectable peak")]
    NoPeak,

    #[error("set-point {alpha_deg:.4} deg lies outside the pair interval [{lo_deg:.4}, {hi_deg:.4}] deg")]
    SetPointOutside {
        alpha_deg: f64,
        lo_deg: f64,
        hi_deg: f64,
    },

    #[error(
        "amplitude ratio {0} is not positive; the set-point cannot be realized by attenuation"
    )]
    NonPositiveRatio(f64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("range-bin alignment is unreachable: {0}")]
    AlignmentUnreachable(String),

    #[error("channel {0} has zero measured power")]
    ZeroPower(usize),

    #[error("malformed spectrum dump: {0}")]
    BadDump(String),

    #[error("scenario {path}: {message}")]
    Scenario { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
