//! The built-in catalog of 15 benchmark tvAR specifications.
//!
//! These are the standard test processes used throughout this crate's
//! experiments and demos: two with periodically varying AR(1) coefficients,
//! six with linearly increasing and two with linearly decreasing
//! coefficients, a fixed AR(1), independent noise with and without a
//! time-varying scale, and a tvAR(2) pair (a cosine-modulated model and its
//! stationary tangent). All use unit innovation scale unless stated
//! otherwise, and every tangent process is stable on the whole of `[0, 1]`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tvar::{CoeffFn, TvarSpec};

/// Labels of the 15 catalog models, in catalog order.
pub const MODEL_LABELS: [&str; 15] = [
    "periodic1",
    "periodic2",
    "increasing1",
    "increasing2",
    "increasing3",
    "increasing4",
    "increasing5",
    "increasing6",
    "stationaryAR",
    "indepNonHetero",
    "indepHetero",
    "mdl11",
    "mdl12",
    "decreasing1",
    "decreasing2",
];

fn ar1(label: &str, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> TvarSpec {
    TvarSpec::new(label, vec![Arc::new(a) as CoeffFn], Arc::new(|_| 1.0))
        .expect("catalog specs are valid by construction")
}

fn build(label: &str) -> Option<TvarSpec> {
    let spec = match label {
        "periodic1" => ar1(label, |u| 0.8 + 0.19 * (4.0 * PI * u).sin()),
        "periodic2" => ar1(label, |u| 0.3 + 0.19 * (4.0 * PI * u).sin()),
        "increasing1" => ar1(label, |u| 0.8 + 0.19 * u),
        "increasing2" => ar1(label, |u| 0.5 + 0.19 * u),
        "increasing3" => ar1(label, |u| 0.9 + 0.09 * u),
        "increasing4" => ar1(label, |u| 0.5 + 0.09 * u),
        "increasing5" => ar1(label, |u| 0.5 + 0.49 * u),
        "increasing6" => ar1(label, |u| 0.5 + 0.4 * u),
        "stationaryAR" => ar1(label, |_| -0.6),
        // Independent observations, encoded as order 1 with a_1 = 0.
        "indepNonHetero" => ar1(label, |_| 0.0),
        "indepHetero" => TvarSpec::new(
            label,
            vec![Arc::new(|_| 0.0) as CoeffFn],
            Arc::new(|u: f64| 5.0 - 16.0 * (u - 0.5).abs().powi(2)),
        )
        .expect("catalog specs are valid by construction"),
        "mdl11" => TvarSpec::new(
            label,
            vec![
                Arc::new(|u: f64| 1.8 * (1.5 - (4.0 * PI * u).cos()).cos()) as CoeffFn,
                Arc::new(|_| -0.81) as CoeffFn,
            ],
            Arc::new(|_| 1.0),
        )
        .expect("catalog specs are valid by construction"),
        "mdl12" => TvarSpec::constant(label, &[1.0, -0.81], 1.0)
            .expect("catalog specs are valid by construction"),
        "decreasing1" => ar1(label, |u| 0.99 - 0.49 * u),
        "decreasing2" => ar1(label, |u| 0.5 - u),
        _ => return None,
    };
    Some(spec)
}

/// Looks up a catalog model by label.
pub fn model_by_label(label: &str) -> Result<TvarSpec> {
    build(label).ok_or_else(|| Error::UnknownModel {
        label: label.to_owned(),
    })
}

/// Builds the full catalog in [`MODEL_LABELS`] order.
pub fn catalog() -> Vec<TvarSpec> {
    MODEL_LABELS
        .iter()
        .map(|l| build(l).expect("every listed label has a builder"))
        .collect()
}

/// The three catalog models whose coefficient *and* scale functions are
/// constant in time (the truly stationary entries).
pub const STATIONARY_LABELS: [&str; 3] = ["stationaryAR", "indepNonHetero", "mdl12"];
