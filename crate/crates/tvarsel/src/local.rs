//! Localized autocovariance estimation and windowed Yule-Walker fits.
//!
//! All estimators here look only **backwards** from an anchor time `t`: the
//! window of length `N` covers the observations `x_{t-N+1}, …, x_t`. The
//! localized autocovariance at lag `k` is
//!
//! ```text
//! acov_k(t, N) = 1/(N-|k|) · Σ_{ℓ = t-N+|k|+1}^{t} x_{ℓ-|k|} x_ℓ ,
//! ```
//!
//! i.e. every product uses only indices inside the window, and each lag has
//! its own divisor `N-|k|`. No mean is subtracted (callers centre the series
//! beforehand when appropriate) and no taper is applied.
//!
//! One-step prediction coefficients come from the Yule-Walker system built
//! from these quantities. Because of the per-lag divisors the system matrix
//! is symmetric but not necessarily positive semi-definite, so it is solved
//! directly (Cholesky with LU fallback) instead of via Levinson-Durbin; a
//! numerically singular window is reported as an error and treated as an
//! infeasible candidate by the selection layer.
//!
//! Multi-step ("plug-in") prediction coefficients are obtained by iterating
//! the fitted one-step model: [`hstep_coeffs`] implements the standard
//! recursion, which equals the first row of the h-th power of the companion
//! matrix (the property tests check exactly that identity).

use crate::error::{Error, Result};
use crate::linalg::SymSolver;
use crate::series::Series;

/// Localized autocovariances `acov_0, …, acov_kmax` at a single anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAcov {
    /// Anchor time (logical index of the window's last observation).
    pub t: usize,
    /// Window length.
    pub n_window: usize,
    values: Vec<f64>,
}

impl LocalAcov {
    /// Computes all lags `0..=k_max` of the localized autocovariance in one
    /// pass over the window.
    pub fn upto(x: &Series, t: usize, n_window: usize, k_max: usize) -> Result<Self> {
        check_window(x, t, n_window)?;
        check_lag(k_max, n_window)?;
        let pos_t = x.position(t);
        let v = x.values();
        let values = (0..=k_max)
            .map(|k| raw_lag_sum(v, pos_t, n_window, k) / (n_window - k) as f64)
            .collect();
        Ok(LocalAcov {
            t,
            n_window,
            values,
        })
    }

    /// Largest available lag.
    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// The estimate at lag `|k|` (the estimator is symmetric in `k ↔ -k`).
    pub fn value(&self, k: i64) -> f64 {
        self.values[k.unsigned_abs() as usize]
    }

    /// All lags `0..=k_max` in order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Localized autocovariance of `x` at lag `k` for the window of length
/// `n_window` ending at anchor `t`.
///
/// # Errors
/// * [`Error::LagTooLarge`] unless `|k| <= n_window - 1`;
/// * [`Error::WindowOutOfRange`] unless the window (and thus every index the
///   sum touches) lies inside the observed range — look-ahead is impossible
///   by construction.
pub fn local_acov(x: &Series, t: usize, n_window: usize, k: i64) -> Result<f64> {
    check_window(x, t, n_window)?;
    check_lag(k.unsigned_abs() as usize, n_window)?;
    let k_abs = k.unsigned_abs() as usize;
    let sum = raw_lag_sum(x.values(), x.position(t), n_window, k_abs);
    Ok(sum / (n_window - k_abs) as f64)
}

/// `Σ x_{ℓ-k} x_ℓ` over the window's valid range, on physical positions.
#[inline]
fn raw_lag_sum(v: &[f64], pos_t: usize, n_window: usize, k: usize) -> f64 {
    let first = pos_t + 1 + k - n_window; // position of ℓ = t-N+k+1
    let mut acc = 0.0;
    for pos in first..=pos_t {
        acc += v[pos - k] * v[pos];
    }
    acc
}

fn check_window(x: &Series, t: usize, n_window: usize) -> Result<()> {
    let needed_first = t as i64 - n_window as i64 + 1;
    if n_window == 0
        || t > x.last_index()
        || t < x.first_index()
        || needed_first < x.first_index() as i64
    {
        return Err(Error::WindowOutOfRange {
            t,
            n_window,
            needed_first,
            first: x.first_index(),
            last: x.last_index(),
        });
    }
    Ok(())
}

fn check_lag(k_abs: usize, n_window: usize) -> Result<()> {
    if k_abs + 1 > n_window {
        return Err(Error::LagTooLarge {
            k: k_abs,
            n_window,
        });
    }
    Ok(())
}

/// Prediction coefficients of order `p` for forecasting `h` steps ahead,
/// estimated from the window of length `n_window` ending at its anchor.
///
/// `n_window == 0` encodes "the full available past" in reports (the
/// estimators themselves always receive the window length explicitly).
/// `p == 0` is the trivial forecaster: an empty vector predicting zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    /// Model order (= number of coefficients).
    pub p: usize,
    /// Forecast horizon these coefficients are for.
    pub h: usize,
    /// Window length used for estimation (0 = full past).
    pub n_window: usize,
    /// Coefficients on `x_t, x_{t-1}, …, x_{t-p+1}`.
    pub coeffs: Vec<f64>,
}

/// Solves the localized Yule-Walker system of order `p` on the window of
/// length `n_window` ending at anchor `t`, returning the one-step prediction
/// coefficients.
///
/// # Errors
/// Window/lag errors as in [`local_acov`] (the system needs lags up to `p`,
/// so `n_window >= p + 1`), and [`Error::SingularWindow`] when the system is
/// numerically singular — degenerate data such as a constant window. The
/// selection layer treats that candidate as infeasible.
pub fn yule_walker(x: &Series, t: usize, n_window: usize, p: usize) -> Result<CoeffVector> {
    if p == 0 {
        check_window(x, t, n_window)?;
        return Ok(CoeffVector {
            p: 0,
            h: 1,
            n_window,
            coeffs: Vec::new(),
        });
    }
    let acov = LocalAcov::upto(x, t, n_window, p)?;
    solve_yule_walker(&acov, p).ok_or(Error::SingularWindow { t, n_window, p })
}

/// Yule-Walker solve on precomputed localized autocovariances.
fn solve_yule_walker(acov: &LocalAcov, p: usize) -> Option<CoeffVector> {
    let mut solver = SymSolver::new();
    let mut coeffs = vec![0.0; p];
    solve_yule_walker_with(&mut solver, acov.values(), p, &mut coeffs).then(|| CoeffVector {
        p,
        h: 1,
        n_window: acov.n_window,
        coeffs,
    })
}

/// Allocation-free core of the Yule-Walker solve: `gamma` holds lags
/// `0..=p`, `out` receives the `p` coefficients. Returns `false` when the
/// system is numerically singular.
pub(crate) fn solve_yule_walker_with(
    solver: &mut SymSolver,
    gamma: &[f64],
    p: usize,
    out: &mut [f64],
) -> bool {
    debug_assert!(gamma.len() > p);
    let mut matrix = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            matrix[i * p + j] = gamma[i.abs_diff(j)];
        }
    }
    solver.solve(&matrix, &gamma[1..=p], out)
}

/// Extends one-step prediction coefficients to horizon `h` by iterating the
/// fitted model (the plug-in construction):
///
/// ```text
/// v^(1) = a;    v_i^(η) = a_i · v_1^(η-1) + v_{i+1}^(η-1) · 1{i <= p-1}.
/// ```
///
/// For `p = 0` the result is empty for every `h` (the zero forecaster).
///
/// # Panics
/// If the input does not carry one-step coefficients (`a.h != 1`).
pub fn hstep_coeffs(a: &CoeffVector, h: usize) -> CoeffVector {
    assert!(a.h == 1, "hstep_coeffs expects one-step coefficients");
    assert!(h >= 1, "horizon must be at least 1");
    let mut v = a.coeffs.clone();
    let mut next = vec![0.0; v.len()];
    for _ in 2..=h {
        step_coeffs(&a.coeffs, &mut v, &mut next);
    }
    CoeffVector {
        p: a.p,
        h,
        n_window: a.n_window,
        coeffs: v,
    }
}

/// One recursion step: `next[i] = a[i]·v[0] + v[i+1]`, then `v <- next`.
pub(crate) fn step_coeffs(a: &[f64], v: &mut Vec<f64>, next: &mut Vec<f64>) {
    let p = a.len();
    next.resize(p, 0.0);
    for i in 0..p {
        next[i] = a[i] * v[0] + if i + 1 < p { v[i + 1] } else { 0.0 };
    }
    std::mem::swap(v, next);
}

/// Streaming localized autocovariances: advances an anchor through the
/// series updating every lag sum in O(1) per step. This is the workhorse
/// behind the selection engine, where the same windows are needed at
/// thousands of consecutive anchors.
#[derive(Debug, Clone)]
pub(crate) struct RollingLocalAcov<'a> {
    values: &'a [f64],
    origin: usize,
    /// `Some(n)` keeps a fixed window length; `None` grows the window to
    /// cover the full past of each anchor.
    fixed: Option<usize>,
    t: usize,
    sums: Vec<f64>,
}

impl<'a> RollingLocalAcov<'a> {
    pub(crate) fn new(
        x: &'a Series,
        fixed: Option<usize>,
        k_max: usize,
        t_start: usize,
    ) -> Result<Self> {
        let n_start = match fixed {
            Some(n) => n,
            None => t_start + 1 - x.first_index(),
        };
        check_window(x, t_start, n_start)?;
        check_lag(k_max, n_start)?;
        let pos_t = x.position(t_start);
        let sums = (0..=k_max)
            .map(|k| raw_lag_sum(x.values(), pos_t, n_start, k))
            .collect();
        Ok(RollingLocalAcov {
            values: x.values(),
            origin: x.first_index(),
            fixed,
            t: t_start,
            sums,
        })
    }

    #[cfg(test)]
    pub(crate) fn anchor(&self) -> usize {
        self.t
    }

    /// Current window length.
    pub(crate) fn window_len(&self) -> usize {
        self.fixed.unwrap_or(self.t + 1 - self.origin)
    }

    /// Moves the anchor to `t + 1`.
    pub(crate) fn advance(&mut self) {
        let pos_next = self.t + 1 - self.origin;
        assert!(pos_next < self.values.len(), "advanced past end of series");
        let v = self.values;
        match self.fixed {
            Some(n) => {
                // Window slides: gain the products at the new anchor, lose
                // the ones anchored at the old window start.
                let out_pos = pos_next - n; // position of ℓ = t-N+1
                for (k, s) in self.sums.iter_mut().enumerate() {
                    *s += v[pos_next - k] * v[pos_next];
                    *s -= v[out_pos] * v[out_pos + k];
                }
            }
            None => {
                for (k, s) in self.sums.iter_mut().enumerate() {
                    *s += v[pos_next - k] * v[pos_next];
                }
            }
        }
        self.t += 1;
    }

    /// Divided estimates `acov_0..=acov_kmax` at the current anchor.
    pub(crate) fn gamma_into(&self, out: &mut [f64]) {
        let n = self.window_len();
        debug_assert!(out.len() <= self.sums.len());
        debug_assert!(n > out.len() - 1);
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.sums[k] / (n - k) as f64;
        }
    }
}
