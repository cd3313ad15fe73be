use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("spin harmonic undefined: l = {l} < |s| = {s}")]
    UndefinedHarmonic { s: i32, l: u32 },

    #[error("harmonic evaluation at a coordinate pole (theta = {theta})")]
    PoleEvaluation { theta: f64 },

    #[error("point lies at a pole of the requested chart")]
    PoleInChart,

    #[error("band limit exceeded: {0}")]
    BandLimitExceeded(String),

    #[error("scale too coarse: b*a^j = {tau} exceeds pi")]
    ScaleTooCoarse { tau: f64 },

    #[error("degenerate filter: lower Daubechies bound is not positive (A = {a_bound})")]
    DegenerateFilter { a_bound: f64 },

    #[error("scale j = {j} is not part of the frame")]
    ScaleMissing { j: i32 },

    #[error("model variance is zero; statistic undefined")]
    DegenerateModel,

    #[error("spectral exponent alpha = {alpha} <= 2: moments exist but the limit theorems do not apply")]
    InvalidExponent { alpha: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
