use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate ellipsoid: b1 = b2")]
    DegenerateEllipsoid,

    #[error("singular contact: s = 0 at gamma = {0:?}")]
    SingularContact([f64; 3]),

    #[error("degenerate mass operator: |det U| = {det:e} below threshold {threshold:e}")]
    DegenerateMass { det: f64, threshold: f64 },

    #[error("resonant parameters: theta_d = 0")]
    Resonant,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String, last_state: Vec<f64> },

    #[error("numerical quality: {0}")]
    NumericalQuality(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Innermost error, with stage tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidParameter(_) | Error::DegenerateEllipsoid | Error::Resonant | Error::Domain(_)
        )
    }
}
