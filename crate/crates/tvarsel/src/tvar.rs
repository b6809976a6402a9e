//! Time-varying AR model specifications and seeded path simulation.
//!
//! A tvAR(p) process on a stretch of length `T` evolves as
//!
//! ```text
//! X_t = a_1(t/T) X_{t-1} + … + a_p(t/T) X_{t-p} + sigma(t/T) Z_t,
//! ```
//!
//! with coefficient functions `a_j` and noise scale `sigma` defined on
//! rescaled time `u = t/T ∈ [0, 1]` and `Z_t` i.i.d. standard Gaussian.
//! Freezing the coefficients at a fixed `u` yields the *tangent process*, an
//! ordinary stationary AR(p); the theory module builds its population
//! quantities from exactly these tangents.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::series::Series;

/// A coefficient (or noise-scale) function of rescaled time `u ∈ [0, 1]`.
pub type CoeffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Specification of a tvAR(p) model: coefficient functions, noise scale, and
/// a label used for catalog lookup and reporting.
#[derive(Clone)]
pub struct TvarSpec {
    label: String,
    coeff_fns: Vec<CoeffFn>,
    sigma_fn: CoeffFn,
}

impl TvarSpec {
    /// Builds a specification from `p >= 1` coefficient functions and a noise
    /// scale function (use [`TvarSpec::constant`] for ordinary AR models).
    pub fn new(
        label: impl Into<String>,
        coeff_fns: Vec<CoeffFn>,
        sigma_fn: CoeffFn,
    ) -> Result<Self> {
        if coeff_fns.is_empty() {
            return Err(Error::InvalidSpec(
                "a tvAR specification needs order p >= 1 \
                 (encode white noise as order 1 with a_1 = 0)"
                    .into(),
            ));
        }
        Ok(TvarSpec {
            label: label.into(),
            coeff_fns,
            sigma_fn,
        })
    }

    /// Builds a stationary AR(p) specification with constant coefficients and
    /// constant noise scale `sigma > 0`.
    pub fn constant(label: impl Into<String>, coeffs: &[f64], sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "noise scale must be a positive finite number, got {sigma}"
            )));
        }
        let coeff_fns = coeffs
            .iter()
            .map(|&a| -> CoeffFn { Arc::new(move |_| a) })
            .collect::<Vec<_>>();
        Self::new(label, coeff_fns, Arc::new(move |_| sigma))
    }

    /// Model order `p`.
    pub fn order(&self) -> usize {
        self.coeff_fns.len()
    }

    /// Label used in catalogs, reports, and file manifests.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates the coefficient function `a_j` (1-based `j`) at rescaled
    /// time `u`, clamping `u` into `[0, 1]` so that presample times and
    /// roundoff excursions stay well-defined.
    pub fn coeff(&self, j: usize, u: f64) -> f64 {
        (self.coeff_fns[j - 1])(u.clamp(0.0, 1.0))
    }

    /// Evaluates the noise scale at rescaled time `u`, clamped into `[0, 1]`.
    pub fn sigma(&self, u: f64) -> f64 {
        (self.sigma_fn)(u.clamp(0.0, 1.0))
    }

    /// All coefficients `a_1(u), …, a_p(u)` at a fixed rescaled time.
    pub fn coeffs_at(&self, u: f64) -> Vec<f64> {
        (1..=self.order()).map(|j| self.coeff(j, u)).collect()
    }
}

impl fmt::Debug for TvarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TvarSpec")
            .field("label", &self.label)
            .field("order", &self.order())
            .finish()
    }
}

/// Number of presample steps simulated (and discarded) before the path
/// proper: `max(200, 10 p)`, with coefficients frozen at `u = 0` and a zero
/// initial state. This washes out the arbitrary initialization for every
/// model whose tangent process at `u = 0` is stable.
pub fn burn_in_len(p: usize) -> usize {
    200.max(10 * p)
}

/// Derives a child seed from a base seed and a stream index.
///
/// This is the splitmix64 output function applied to
/// `base + (stream + 1) · golden_gamma`; distinct stream indices give
/// decorrelated, order-independent seeds, which keeps parallel Monte Carlo
/// replications deterministic regardless of scheduling.
pub fn mix_seed(base: u64, stream: u64) -> u64 {
    const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut z = base.wrapping_add(GAMMA.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Internal stream tag separating burn-in noise from the path's own noise.
const BURN_IN_STREAM: u64 = 0x6275_726e_2d69_6e00; // "burn-in"

/// Simulates a tvAR path `X_1, …, X_T` from a deterministic Gaussian stream
/// keyed by `seed`.
///
/// The recursion uses `u = t/T` (clamped to `[0, 1]`); the initial state
/// comes from a discarded burn-in of [`burn_in_len`] steps with coefficients
/// frozen at `u = 0`. Burn-in noise is drawn from a separate derived stream,
/// so the path innovations are exactly the first `T` draws of the stream
/// keyed by `seed` — simulating with `a ≡ 0, sigma ≡ 1` returns that raw
/// Gaussian stream.
///
/// Identical `(spec, t_len, seed)` always produce bitwise-identical output.
///
/// # Errors
/// [`Error::SimulationDiverged`] if the recursion produces a non-finite
/// value (explosive tangent process), naming the first offending index.
pub fn simulate_tvar(spec: &TvarSpec, t_len: usize, seed: u64) -> Result<Series> {
    if t_len == 0 {
        return Err(Error::EmptySeries);
    }
    let p = spec.order();

    // State holds the most recent p values, state[0] being X_{t-1}.
    let mut state = vec![0.0f64; p];
    let coeffs_at_zero = spec.coeffs_at(0.0);
    let sigma_at_zero = spec.sigma(0.0);

    let mut burn_rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, BURN_IN_STREAM));
    for _ in 0..burn_in_len(p) {
        let z: f64 = burn_rng.sample(StandardNormal);
        let mut x = sigma_at_zero * z;
        for (a, s) in coeffs_at_zero.iter().zip(&state) {
            x += a * s;
        }
        shift_in(&mut state, x);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(t_len);
    for t in 1..=t_len {
        let u = t as f64 / t_len as f64;
        let z: f64 = rng.sample(StandardNormal);
        let mut x = spec.sigma(u) * z;
        for j in 1..=p {
            x += spec.coeff(j, u) * state[j - 1];
        }
        if !x.is_finite() {
            return Err(Error::SimulationDiverged { index: t });
        }
        values.push(x);
        shift_in(&mut state, x);
    }
    Series::new(values)
}

fn shift_in(state: &mut [f64], x: f64) {
    if state.is_empty() {
        return;
    }
    state.rotate_right(1);
    state[0] = x;
}
