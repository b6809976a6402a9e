//! Crate-wide error type.
//!
//! Errors fall into three broad classes, which callers (notably the CLI) may
//! want to distinguish:
//!
//! * **I/O** — reading or writing series files ([`Error::Io`],
//!   [`Error::Parse`]);
//! * **precondition** — a request that is malformed before any numerics run
//!   (bad split, window outside the observed range, unknown model label, …);
//! * **numerical** — the computation itself degenerated (singular windows,
//!   explosive simulations, unstable tangent processes, …).
//!
//! [`Error::kind`] exposes a stable machine-readable tag for each variant and
//! [`Error::class`] the coarse class, so downstream tooling does not have to
//! match on variants.

use thiserror::Error;

/// Convenient result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classification, mainly for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Reading or writing files failed.
    Io,
    /// Inputs violated a documented precondition; nothing was computed.
    Precondition,
    /// The computation ran but degenerated numerically.
    Numerical,
}

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Underlying file I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An input file does not exist.
    #[error("input file not found: {path}")]
    InputNotFound { path: String },

    /// A value in a series file could not be parsed as a number.
    #[error("line {line}: cannot parse {text:?} as a number")]
    Parse { line: usize, text: String },

    /// Series values must be finite.
    #[error("non-finite value at position {position} of the input series")]
    NonFinite { position: usize },

    /// Series must contain at least one observation.
    #[error("series must contain at least one value")]
    EmptySeries,

    /// Model specification rejected (e.g. order zero).
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    /// No catalog model with this label.
    #[error("unknown model label {label:?}")]
    UnknownModel { label: String },

    /// The simulated recursion produced a non-finite value.
    #[error("simulation diverged: non-finite value at index {index}")]
    SimulationDiverged { index: usize },

    /// An estimation window does not lie inside the observed index range.
    #[error(
        "window out of range: anchor {t} with window length {n_window} \
         needs indices {needed_first}..={t}, but the series covers \
         {first}..={last}"
    )]
    WindowOutOfRange {
        t: usize,
        n_window: usize,
        needed_first: i64,
        first: usize,
        last: usize,
    },

    /// A lag exceeding the window length was requested.
    #[error("lag {k} too large for window length {n_window} (need |k| <= N-1)")]
    LagTooLarge { k: usize, n_window: usize },

    /// The localized Yule-Walker system is numerically singular.
    #[error(
        "singular window: localized Yule-Walker system at anchor {t} \
         (window {n_window}, order {p}) is numerically singular"
    )]
    SingularWindow { t: usize, n_window: usize, p: usize },

    /// An MSPE was requested over an empty segment.
    #[error("empty evaluation segment")]
    EmptySegment,

    /// A segment index is not covered by the provided series.
    #[error("segment index {t} lies outside the provided series")]
    SegmentOutOfRange { t: usize },

    /// The training length cannot be split as requested.
    #[error("invalid split: need T > 2m and m >= 1, got T = {t_train}, m = {m}")]
    InvalidSplit { t_train: usize, m: usize },

    /// Selection configuration rejected at construction.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The data is too short for the requested computation.
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Every candidate model was numerically infeasible.
    #[error("all candidate models are infeasible at horizon {h}")]
    AllCandidatesInfeasible { h: usize },

    /// The tangent AR process at rescaled time `u` is not stable.
    #[error("unstable tangent process at u = {u} (spectral radius {radius})")]
    UnstableTangent { u: f64, radius: f64 },

    /// The averaged covariance matrix cannot be inverted.
    #[error(
        "singular averaged covariance matrix at u = {u}, delta = {delta}, \
         order {p}"
    )]
    SingularAveragedMatrix { u: f64, delta: f64, p: usize },

    /// The decision-margin threshold formulas require the lag-1
    /// autocorrelation bound sup_u |gamma_1(u)/gamma_0(u)| to stay below 1.
    #[error("delta thresholds inapplicable: autocorrelation bound rho = {rho} >= 1")]
    ThresholdsInapplicable { rho: f64 },
}

impl Error {
    /// Stable machine-readable tag identifying the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::InputNotFound { .. } => "input-not-found",
            Error::Parse { .. } => "parse",
            Error::NonFinite { .. } => "non-finite-value",
            Error::EmptySeries => "empty-series",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::UnknownModel { .. } => "unknown-model",
            Error::SimulationDiverged { .. } => "simulation-diverged",
            Error::WindowOutOfRange { .. } => "window-out-of-range",
            Error::LagTooLarge { .. } => "lag-too-large",
            Error::SingularWindow { .. } => "singular-window",
            Error::EmptySegment => "empty-segment",
            Error::SegmentOutOfRange { .. } => "segment-out-of-range",
            Error::InvalidSplit { .. } => "invalid-split",
            Error::InvalidConfig(_) => "invalid-config",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::AllCandidatesInfeasible { .. } => "all-candidates-infeasible",
            Error::UnstableTangent { .. } => "unstable-tangent",
            Error::SingularAveragedMatrix { .. } => "singular-averaged-matrix",
            Error::ThresholdsInapplicable { .. } => "thresholds-inapplicable",
        }
    }

    /// Coarse class of the error (I/O, precondition, or numerical).
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::InputNotFound { .. } | Error::Parse { .. } => ErrorClass::Io,
            Error::NonFinite { .. }
            | Error::EmptySeries
            | Error::InvalidSpec(_)
            | Error::UnknownModel { .. }
            | Error::WindowOutOfRange { .. }
            | Error::LagTooLarge { .. }
            | Error::EmptySegment
            | Error::SegmentOutOfRange { .. }
            | Error::InvalidSplit { .. }
            | Error::InvalidConfig(_)
            | Error::InsufficientData { .. } => ErrorClass::Precondition,
            Error::SimulationDiverged { .. }
            | Error::SingularWindow { .. }
            | Error::AllCandidatesInfeasible { .. }
            | Error::UnstableTangent { .. }
            | Error::SingularAveragedMatrix { .. }
            | Error::ThresholdsInapplicable { .. } => ErrorClass::Numerical,
        }
    }
}
