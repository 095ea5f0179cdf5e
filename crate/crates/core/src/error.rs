use thiserror::Error;

/// Everything that can go wrong while building a map or evaluating one of
/// the thermodynamic / zeta quantities on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a cookie-cutter map needs at least two branches, got {0}")]
    TooFewBranches(usize),
    #[error("OverlappingBranches: images of branches {first} and {second} share interior points")]
    OverlappingBranches { first: usize, second: usize },
    #[error("UnorderedBranches: branch images must be ordered left to right (branch {0})")]
    UnorderedBranches(usize),
    #[error("NotContracting: branch {branch} has sup|g'| = {sup_derivative} >= 1")]
    NotContracting { branch: usize, sup_derivative: f64 },
    #[error("NonMonotone: branch {0} is not strictly monotone on [0,1]")]
    NonMonotone(usize),
    #[error("branch {branch} image [{lo}, {hi}] leaves [0,1]")]
    ImageOutsideUnit { branch: usize, lo: f64, hi: f64 },
    #[error("branch {branch}: declared image does not match g([0,1]) = [{lo}, {hi}]")]
    ImageMismatch { branch: usize, lo: f64, hi: f64 },
    #[error("symbol {symbol} out of range for a map with {k} branches")]
    SymbolOutOfRange { symbol: usize, k: usize },
    #[error("empty word")]
    EmptyWord,
    #[error("potential expects {expected} branch values, got {got}")]
    PotentialArity { expected: usize, got: usize },
    #[error("point {0} does not lie in any first-level interval")]
    PointOutsideRepeller(f64),
    #[error("LevelTooLarge: level {level} exceeds the limit {max}")]
    LevelTooLarge { level: usize, max: usize },
    #[error("DepthTooLarge: depth {depth} exceeds the limit {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error("NoConvergence: {what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    #[error("BracketFailure: {0}")]
    BracketFailure(String),
    #[error("NotNormalized: potential has pressure {pressure}, expected 0")]
    NotNormalized { pressure: f64 },
    #[error("ZeroMeasureInterval: regularity needs a positive weight and a length below 1")]
    ZeroMeasureInterval,
    #[error("ZeroNotInterior: 0 is not interior to I_alpha = [{lo}, {hi}] at alpha = {alpha}")]
    ZeroNotInterior { alpha: f64, lo: f64, hi: f64 },
    #[error("ConditionAViolated: psi - alpha*phi is numerically a coboundary at alpha = {alpha}")]
    ConditionAViolated { alpha: f64 },
    #[error("criticality check failed: |delta_alpha'(xi)| = {derivative}")]
    CriticalityCheckFailed { derivative: f64 },
    #[error("NonCenteredObservable: mean {mean} is not zero")]
    NonCenteredObservable { mean: f64 },
    #[error("NoSignChange: growth rate has the same sign at both ends of [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("TailNotConverged at sigma = {sigma}: tail {tail} vs partial sum {partial}")]
    TailNotConverged { sigma: f64, tail: f64, partial: f64 },
    #[error(
        "WindowDegenerate: window width {width} does not exceed twice the inflation {inflation}"
    )]
    WindowDegenerate { width: f64, inflation: f64 },
    #[error("AlphaOutOfRange: alpha = {alpha} outside ({lo}, {hi})")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("DegenerateVariance: observable is a coboundary, variance is zero")]
    DegenerateVariance,
    #[error("AtOrBelowAbscissa: sigma = {sigma} is not above the abscissa {abscissa}")]
    AtOrBelowAbscissa { sigma: f64, abscissa: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TooFewBranches(_) => "TooFewBranches",
            Error::OverlappingBranches { .. } => "OverlappingBranches",
            Error::UnorderedBranches(_) => "UnorderedBranches",
            Error::NotContracting { .. } => "NotContracting",
            Error::NonMonotone(_) => "NonMonotone",
            Error::ImageOutsideUnit { .. } => "ImageOutsideUnit",
            Error::ImageMismatch { .. } => "ImageMismatch",
            Error::SymbolOutOfRange { .. } => "SymbolOutOfRange",
            Error::EmptyWord => "EmptyWord",
            Error::PotentialArity { .. } => "PotentialArity",
            Error::PointOutsideRepeller(_) => "PointOutsideRepeller",
            Error::LevelTooLarge { .. } => "LevelTooLarge",
            Error::DepthTooLarge { .. } => "DepthTooLarge",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::BracketFailure(_) => "BracketFailure",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::ZeroMeasureInterval => "ZeroMeasureInterval",
            Error::ZeroNotInterior { .. } => "ZeroNotInterior",
            Error::ConditionAViolated { .. } => "ConditionAViolated",
            Error::CriticalityCheckFailed { .. } => "CriticalityCheckFailed",
            Error::NonCenteredObservable { .. } => "NonCenteredObservable",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::WindowDegenerate { .. } => "WindowDegenerate",
            Error::AlphaOutOfRange { .. } => "AlphaOutOfRange",
            Error::DegenerateVariance => "DegenerateVariance",
            Error::AtOrBelowAbscissa { .. } => "AtOrBelowAbscissa",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }

    /// Whether the error comes from input validation rather than from a
    /// numerical procedure failing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::TooFewBranches(_)
                | Error::OverlappingBranches { .. }
                | Error::UnorderedBranches(_)
                | Error::NotContracting { .. }
                | Error::NonMonotone(_)
                | Error::ImageOutsideUnit { .. }
                | Error::ImageMismatch { .. }
                | Error::SymbolOutOfRange { .. }
                | Error::EmptyWord
                | Error::PotentialArity { .. }
                | Error::LevelTooLarge { .. }
                | Error::DepthTooLarge { .. }
                | Error::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
