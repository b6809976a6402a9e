//! Browser bindings for the forecaster-selection engine.
//!
//! Three operations back the demo page in `www/index.html`:
//!
//! 1. [`simulate`] draws a series from one of the built-in benchmark models;
//! 2. [`run_selection`] runs the full two-stage procedure on a series and
//!    returns the per-horizon report as JSON;
//! 3. [`window_error_curve`] returns every candidate's held-out MSPE at one
//!    horizon — the data behind the MSPE-versus-window-length diagnostic
//!    plots.
//!
//! Results cross the boundary as JSON strings (`JSON.parse` on the JS side),
//! which keeps the interface dependency-free on both ends. All functions are
//! plain Rust functions on native targets, so the same API is exercised by
//! ordinary `cargo test`.

use wasm_bindgen::prelude::*;

use tvarsel::catalog::{model_by_label, MODEL_LABELS};
use tvarsel::select::{candidate_selection_mspe, run_procedure, SelectionConfig};
use tvarsel::{simulate_tvar, Series};

/// Labels of the built-in benchmark models, as a JSON array of strings.
#[wasm_bindgen]
pub fn model_labels() -> String {
    serde_json::to_string(&MODEL_LABELS).expect("static list serializes")
}

/// Simulates `n` observations of the named benchmark model.
#[wasm_bindgen]
pub fn simulate(model: &str, n: usize, seed: u32) -> Result<Vec<f64>, String> {
    let spec = model_by_label(model).map_err(to_js)?;
    let x = simulate_tvar(&spec, n, u64::from(seed)).map_err(to_js)?;
    Ok(x.values().to_vec())
}

fn config_for(
    len: usize,
    m: usize,
    p_max: usize,
    n_min: usize,
    n_max: usize,
    n_step: usize,
    h_max: usize,
    delta: f64,
) -> Result<SelectionConfig, String> {
    if len <= m {
        return Err(format!(
            "series of length {len} leaves no test segment of length {m}"
        ));
    }
    if n_step == 0 || n_max < n_min {
        return Err("window grid needs n_min <= n_max and a positive step".into());
    }
    let grid: Vec<usize> = (n_min..=n_max).step_by(n_step).collect();
    SelectionConfig::new(len - m, m, p_max, grid, h_max, delta).map_err(to_js)
}

/// Runs the two-stage selection procedure and returns the report as JSON.
///
/// The last `m` values are held out as the test segment, mirroring the CLI's
/// treatment of an input series.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn run_selection(
    values: &[f64],
    m: usize,
    p_max: usize,
    n_min: usize,
    n_max: usize,
    n_step: usize,
    h_max: usize,
    delta: f64,
) -> Result<String, String> {
    let config = config_for(values.len(), m, p_max, n_min, n_max, n_step, h_max, delta)?;
    let x = Series::new(values.to_vec()).map_err(to_js)?;
    let report = run_procedure(&x, &config).map_err(to_js)?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// Held-out MSPE of every candidate (order × window) at horizon `h`, as
/// JSON: `{h, orders, windows, mspe_s, mspe_ls}` with `mspe_ls` row-major
/// over `orders × windows`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn window_error_curve(
    values: &[f64],
    m: usize,
    p_max: usize,
    n_min: usize,
    n_max: usize,
    n_step: usize,
    h: usize,
) -> Result<String, String> {
    let config = config_for(values.len(), m, p_max, n_min, n_max, n_step, h.max(1), 0.0)?;
    let x = Series::new(values.to_vec()).map_err(to_js)?;
    let curve = candidate_selection_mspe(&x, &config, h).map_err(to_js)?;
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

fn to_js(e: tvarsel::Error) -> String {
    e.to_string()
}
