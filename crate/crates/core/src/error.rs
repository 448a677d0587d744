use thiserror::Error;

/// Errors raised by the field constructions and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("two-form vanishes (norm below floor)")]
    ZeroForm,
    #[error("two-form is not simple (|Phi| = {phi:e})")]
    NonSimple { phi: f64 },
    #[error("Jacobian of the map has rank {rank} < 3")]
    RankDeficient { rank: usize },
    #[error("point lies on a chart singularity: {0}")]
    ChartSingularity(&'static str),
    #[error("field evaluated on its singular set: {0}")]
    Singularity(&'static str),
    #[error("homotopy segment meets the singular set")]
    SingularPath,
    #[error("field magnitude {magnitude:e} at seed is below the floor")]
    DegenerateField { magnitude: f64 },
    #[error("Poynting vector vanishes")]
    ZeroPoynting,
    #[error("kernel basis could not be continued (angular jump {angle:.3} rad)")]
    KernelFlip { angle: f64 },
    #[error("field line is not closed")]
    NotClosed,
    #[error("curves are too close (min distance {distance:e})")]
    CurvesTooClose { distance: f64 },
    #[error("solution `{0}` does not decay; helicity integrals diverge")]
    NonDecaying(String),
    #[error("helicity channel {channel} changed by {delta:e} on doubling the nodes")]
    NotConverged { channel: &'static str, delta: f64 },
    #[error("forward-mode derivatives are unavailable for this field")]
    AdUnavailable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
