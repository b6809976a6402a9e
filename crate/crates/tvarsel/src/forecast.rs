//! Plug-in forecasters and empirical MSPE evaluation.
//!
//! Two linear forecasters share the same construction — fit one-step
//! Yule-Walker coefficients on data up to the anchor `t`, iterate them to the
//! horizon `h`, and take the dot product with the most recent `p`
//! observations:
//!
//! * [`forecast_ls`] fits on the **window** of the last `n_window` points
//!   (the locally stationary forecaster);
//! * [`forecast_s`] fits on the **full past** `x_1..x_t` (the stationary
//!   forecaster) — by definition the same computation with `n_window = t`.
//!
//! Order `p = 0` is the trivial forecaster that always predicts zero.
//!
//! [`empirical_mspe`] averages squared forecast errors over a segment of
//! target indices. It is deliberately generic over the forecaster so that
//! tests can plug in reference implementations; the selection layer uses a
//! much faster incremental evaluation but is required (and tested) to agree
//! with the composition of the public functions here.

use crate::error::{Error, Result};
use crate::local::{hstep_coeffs, yule_walker, CoeffVector};
use crate::series::Series;

/// Which forecaster class a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ModelClass {
    /// Stationary: coefficients fitted on the full past.
    #[serde(rename = "s")]
    Stationary,
    /// Locally stationary: coefficients fitted on a trailing window.
    #[serde(rename = "ls")]
    LocallyStationary,
}

impl ModelClass {
    /// Short tag used in tables and file names ("s" / "ls").
    pub fn tag(self) -> &'static str {
        match self {
            ModelClass::Stationary => "s",
            ModelClass::LocallyStationary => "ls",
        }
    }
}

impl std::fmt::Display for ModelClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Evaluation segment identifier: `M1` (selection), `M2` (validation),
/// `M3` (test).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SegmentId {
    M1,
    M2,
    M3,
}

impl SegmentId {
    /// The segment's conventional number `j ∈ {1,2,3}`.
    pub fn j(self) -> u8 {
        match self {
            SegmentId::M1 => 1,
            SegmentId::M2 => 2,
            SegmentId::M3 => 3,
        }
    }
}

/// A labelled empirical MSPE value, as recorded in reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SegmentMspe {
    pub segment: SegmentId,
    pub h: usize,
    pub class: ModelClass,
    /// Fitted order.
    pub p: usize,
    /// Window length (0 encodes the full past, i.e. the stationary class).
    pub n_window: usize,
    pub value: f64,
}

/// Mean squared prediction error over a segment, with the per-point errors
/// kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MspeResult {
    /// Mean of squared errors.
    pub mean: f64,
    /// Signed forecast errors `x_τ − f_τ`, one per segment index in order.
    pub errors: Vec<f64>,
}

/// Dot product of h-step coefficients with the latest observations:
/// `Σ_i v_i · x_{t-i+1}`.
pub(crate) fn predict_at(v: &CoeffVector, x: &Series, t: usize) -> f64 {
    let pos_t = x.position(t);
    let vals = x.values();
    let mut acc = 0.0;
    for (i, c) in v.coeffs.iter().enumerate() {
        acc += c * vals[pos_t - i];
    }
    acc
}

/// Locally stationary plug-in forecast of `x_{t+h}` from anchor `t`, fitting
/// order `p` on the window of length `n_window` ending at `t`.
///
/// Returns 0 for `p = 0`. Errors propagate from the windowed fit
/// ([`crate::local::yule_walker`]); in particular a numerically singular
/// window reports [`Error::SingularWindow`].
pub fn forecast_ls(x: &Series, t: usize, h: usize, p: usize, n_window: usize) -> Result<f64> {
    assert!(h >= 1, "horizon must be at least 1");
    let a = yule_walker(x, t, n_window, p)?;
    if p == 0 {
        return Ok(0.0);
    }
    let v = hstep_coeffs(&a, h);
    Ok(predict_at(&v, x, t))
}

/// Stationary plug-in forecast of `x_{t+h}` from anchor `t`: identical to
/// [`forecast_ls`] with the window covering the full available past.
pub fn forecast_s(x: &Series, t: usize, h: usize, p: usize) -> Result<f64> {
    let full = t
        .checked_sub(x.first_index())
        .map(|d| d + 1)
        .unwrap_or(0);
    forecast_ls(x, t, h, p, full)
}

/// Mean squared prediction error of `forecaster` over a segment of target
/// indices.
///
/// `segment` lists the target times `τ = t + h`; for each, the forecaster is
/// invoked with the anchor `t = τ − h` and the squared error against the
/// observed `x_τ` is accumulated. The forecaster never receives the target —
/// look-ahead is the caller's responsibility to avoid inside the closure, and
/// the built-in forecasters cannot read past their anchor by construction.
///
/// # Errors
/// [`Error::EmptySegment`] when `segment` is empty;
/// [`Error::SegmentOutOfRange`] when a target (or its anchor) lies outside
/// the series; forecaster errors propagate.
pub fn empirical_mspe<I, F>(x: &Series, h: usize, segment: I, mut forecaster: F) -> Result<MspeResult>
where
    I: IntoIterator<Item = usize>,
    F: FnMut(usize) -> Result<f64>,
{
    assert!(h >= 1, "horizon must be at least 1");
    let mut errors = Vec::new();
    let mut sum = 0.0;
    for target in segment {
        if target < x.first_index() + h || target > x.last_index() {
            return Err(Error::SegmentOutOfRange { t: target });
        }
        let anchor = target - h;
        let forecast = forecaster(anchor)?;
        let e = x.value(target) - forecast;
        sum += e * e;
        errors.push(e);
    }
    if errors.is_empty() {
        return Err(Error::EmptySegment);
    }
    Ok(MspeResult {
        mean: sum / errors.len() as f64,
        errors,
    })
}
