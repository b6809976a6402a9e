//! Minimal dense solver for the small Yule-Walker-style systems.
//!
//! The localized covariance matrices solved here are tiny (order ≤ ~20) but
//! are solved millions of times inside the Monte Carlo harness, so this
//! module keeps everything allocation-free after construction. Because each
//! lag of the localized autocovariance uses its own divisor, the matrices are
//! symmetric but **not** guaranteed positive semi-definite — hence the
//! strategy mandated for every symmetric solve:
//!
//! 1. attempt a Cholesky factorization (fast path, succeeds whenever the
//!    window behaves like honest covariances);
//! 2. on failure, fall back to LU with partial pivoting;
//! 3. in either case estimate the reciprocal condition number in the
//!    infinity norm and declare the system singular when it falls below
//!    `RCOND_MIN`.
//!
//! A second entry point, [`SymSolver::solve_general`], skips the Cholesky
//! attempt (which reads only the lower triangle) and goes straight to LU, so
//! genuinely nonsymmetric systems — such as the stationary variance equations
//! of an AR(p) tangent process — are solved correctly too.
//!
//! Callers translate a `false` result into their own singularity error.

/// Reciprocal condition threshold below which a system counts as singular.
pub(crate) const RCOND_MIN: f64 = 1e-12;

/// Reusable workspace for solving `A x = b` with symmetric `A` (row-major
/// `n × n`). Holds factorization buffers so repeated solves do not allocate.
#[derive(Debug, Default, Clone)]
pub(crate) struct SymSolver {
    factor: Vec<f64>,
    pivots: Vec<usize>,
    work: Vec<f64>,
    scratch: Vec<f64>,
    row_sums: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Factorization {
    Cholesky,
    Lu,
}

impl SymSolver {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Solves `A x = rhs` into `out` for symmetric `A`; returns `false` when
    /// the system is numerically singular (failed factorization or
    /// rcond < RCOND_MIN).
    pub(crate) fn solve(&mut self, a: &[f64], rhs: &[f64], out: &mut [f64]) -> bool {
        self.solve_inner(a, rhs, out, true)
    }

    /// Solves `A x = rhs` for a general square `A` (no symmetry assumed):
    /// straight to LU with partial pivoting, same rcond gate as [`solve`].
    ///
    /// [`solve`]: SymSolver::solve
    pub(crate) fn solve_general(&mut self, a: &[f64], rhs: &[f64], out: &mut [f64]) -> bool {
        self.solve_inner(a, rhs, out, false)
    }

    fn solve_inner(&mut self, a: &[f64], rhs: &[f64], out: &mut [f64], try_cholesky: bool) -> bool {
        let n = rhs.len();
        debug_assert_eq!(a.len(), n * n);
        debug_assert_eq!(out.len(), n);
        if n == 0 {
            return true;
        }

        self.factor.clear();
        self.factor.extend_from_slice(a);
        self.pivots.resize(n, 0);
        self.work.resize(n, 0.0);
        self.scratch.resize(n, 0.0);
        self.row_sums.resize(n, 0.0);

        let kind = if try_cholesky && self.cholesky(n) {
            Factorization::Cholesky
        } else {
            self.factor.clear();
            self.factor.extend_from_slice(a);
            if !self.lu(n) {
                return false;
            }
            Factorization::Lu
        };

        // rcond in the infinity norm: ||A||_inf times the max row sum of
        // |A^{-1}|, the latter accumulated column by column from unit solves.
        let norm_a = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        self.row_sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            self.work.iter_mut().for_each(|w| *w = 0.0);
            self.work[j] = 1.0;
            self.back_substitute(n, kind);
            for i in 0..n {
                self.row_sums[i] += self.work[i].abs();
            }
        }
        let norm_inv = self.row_sums.iter().copied().fold(0.0f64, f64::max);
        let rcond = 1.0 / (norm_a * norm_inv);
        // Negated comparison also rejects NaN.
        if !(rcond >= RCOND_MIN) {
            return false;
        }

        self.work.copy_from_slice(rhs);
        self.back_substitute(n, kind);
        out.copy_from_slice(&self.work);
        out.iter().all(|v| v.is_finite())
    }

    /// In-place lower Cholesky of `factor`; `true` on success (all pivots
    /// strictly positive and finite).
    fn cholesky(&mut self, n: usize) -> bool {
        let f = &mut self.factor;
        for j in 0..n {
            let mut d = f[j * n + j];
            for k in 0..j {
                d -= f[j * n + k] * f[j * n + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return false;
            }
            let ljj = d.sqrt();
            f[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = f[i * n + j];
                for k in 0..j {
                    s -= f[i * n + k] * f[j * n + k];
                }
                f[i * n + j] = s / ljj;
            }
        }
        true
    }

    /// In-place LU with partial pivoting; `true` unless an exact zero (or
    /// non-finite) pivot appears.
    fn lu(&mut self, n: usize) -> bool {
        let f = &mut self.factor;
        for (i, p) in self.pivots.iter_mut().enumerate() {
            *p = i;
        }
        for k in 0..n {
            let mut best = k;
            let mut best_val = f[k * n + k].abs();
            for i in (k + 1)..n {
                let v = f[i * n + k].abs();
                if v > best_val {
                    best = i;
                    best_val = v;
                }
            }
            if !(best_val > 0.0) || !best_val.is_finite() {
                return false;
            }
            if best != k {
                for j in 0..n {
                    f.swap(k * n + j, best * n + j);
                }
                self.pivots.swap(k, best);
            }
            let pivot = f[k * n + k];
            for i in (k + 1)..n {
                let l = f[i * n + k] / pivot;
                f[i * n + k] = l;
                for j in (k + 1)..n {
                    f[i * n + j] -= l * f[k * n + j];
                }
            }
        }
        true
    }

    /// Solves the factorized system for the vector currently in `work`.
    fn back_substitute(&mut self, n: usize, kind: Factorization) {
        let f = &self.factor;
        let w = &mut self.work;
        match kind {
            Factorization::Cholesky => {
                // L y = w, then L' x = y.
                for i in 0..n {
                    let mut s = w[i];
                    for k in 0..i {
                        s -= f[i * n + k] * w[k];
                    }
                    w[i] = s / f[i * n + i];
                }
                for i in (0..n).rev() {
                    let mut s = w[i];
                    for k in (i + 1)..n {
                        s -= f[k * n + i] * w[k];
                    }
                    w[i] = s / f[i * n + i];
                }
            }
            Factorization::Lu => {
                // pivots[i] names the original row now sitting at position i,
                // so P·w is a gather. Then L y = P w (unit diagonal), U x = y.
                for i in 0..n {
                    self.scratch[i] = w[self.pivots[i]];
                }
                w.copy_from_slice(&self.scratch);
                for i in 0..n {
                    let mut s = w[i];
                    for k in 0..i {
                        s -= f[i * n + k] * w[k];
                    }
                    w[i] = s;
                }
                for i in (0..n).rev() {
                    let mut s = w[i];
                    for k in (i + 1)..n {
                        s -= f[i * n + k] * w[k];
                    }
                    w[i] = s / f[i * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(a: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
        let mut out = vec![0.0; rhs.len()];
        SymSolver::new()
            .solve(a, rhs, &mut out)
            .then_some(out)
    }

    #[test]
    fn solves_spd_system() {
        // A = [[4,1],[1,3]], b = (1, 2) -> x = (1/11, 7/11).
        let x = solve(&[4.0, 1.0, 1.0, 3.0], &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn falls_back_to_lu_for_indefinite_systems() {
        // Symmetric but indefinite (eigenvalues ±1): Cholesky must fail,
        // LU must succeed.
        let x = solve(&[0.0, 1.0, 1.0, 0.0], &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn general_solve_handles_nonsymmetric_systems() {
        // A = [[1, 2], [3, 4]], b = (5, 6) -> x = (-4, 4.5). The symmetric
        // path would silently mirror the lower triangle and get this wrong.
        let mut out = vec![0.0; 2];
        assert!(SymSolver::new().solve_general(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0], &mut out));
        assert!((out[0] + 4.0).abs() < 1e-12, "{out:?}");
        assert!((out[1] - 4.5).abs() < 1e-12, "{out:?}");

        // Singular nonsymmetric system is rejected.
        let mut out = vec![0.0; 2];
        assert!(!SymSolver::new().solve_general(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], &mut out));
    }

    #[test]
    fn rejects_singular_and_near_singular_systems() {
        assert!(solve(&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0]).is_none());
        assert!(solve(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0]).is_none());
        // Condition number ~1e16 exceeds the rcond gate.
        assert!(solve(&[1.0, 1.0, 1.0, 1.0 + 1e-16], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn random_spd_systems_have_small_residuals() {
        // Deterministic congruential "random" entries are fine here.
        let mut state = 88172645463325252u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 1..=8usize {
            for _ in 0..20 {
                // A = B B' + I is SPD.
                let b: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut s = if i == j { 1.0 } else { 0.0 };
                        for k in 0..n {
                            s += b[i * n + k] * b[j * n + k];
                        }
                        a[i * n + j] = s;
                    }
                }
                let rhs: Vec<f64> = (0..n).map(|_| next()).collect();
                let x = solve(&a, &rhs).unwrap();
                for i in 0..n {
                    let mut r = -rhs[i];
                    for j in 0..n {
                        r += a[i * n + j] * x[j];
                    }
                    assert!(r.abs() < 1e-10, "residual {r} at n={n}");
                }
            }
        }
    }
}
