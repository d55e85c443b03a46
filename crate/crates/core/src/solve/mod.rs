//! Finite-dimensional solvers for sampled systems.

mod gram;
pub mod l1;
pub mod lp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use gram::{gram_matrix, gram_solve, Functional, GramSolution};

use crate::discretize::SampledSystem;
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use lp::{solve_standard, LpOutcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LsqOptions {
    /// Singular values below `svd_tol * sigma_max` are discarded.
    pub svd_tol: f64,
    pub max_iterations: usize,
    pub lawson_tol: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        LsqOptions {
            svd_tol: 1e-12,
            max_iterations: 200,
            lawson_tol: 1e-10,
        }
    }
}

impl LsqOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.svd_tol > 0.0 && self.svd_tol < 1.0) {
            return Err(Error::invalid(format!(
                "svd_tol must lie in (0, 1), got {}",
                self.svd_tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.lawson_tol > 0.0) {
            return Err(Error::invalid("lawson_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Lsq,
    Lawson,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub coeffs: Vec<f64>,
    /// Singular values discarded by the truncation.
    pub truncated: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimum-norm least-squares solution with relative SVD truncation.
pub fn truncated_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, svd_tol: f64) -> Result<(DVector<f64>, usize)> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return Err(Error::RankZero);
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("least squares data contains non-finite values"));
    }
    let svd = thin_svd(a)?;
    let (u, vt) = (&svd.u, &svd.vt);
    let smax = svd.s.iter().fold(0.0f64, |m, s| m.max(*s));
    let cut = svd_tol * smax;
    if !(smax > 0.0) {
        return Err(Error::RankZero);
    }
    let mut coeffs = DVector::zeros(n);
    let mut truncated = 0;
    for (k, &s) in svd.s.iter().enumerate() {
        if s <= cut {
            truncated += 1;
            continue;
        }
        let proj = u.column(k).dot(b) / s;
        coeffs.axpy(proj, &vt.row(k).transpose(), 1.0);
    }
    // Rows < columns yields fewer singular values than columns.
    truncated += n.saturating_sub(svd.s.len());
    Ok((coeffs, truncated))
}

/// Discrete L2 fit.
pub fn least_squares(system: &SampledSystem, opts: &LsqOptions) -> Result<FitResult> {
    opts.validate()?;
    if system.nrows() < system.ncols() {
        return Err(Error::OversamplingViolation {
            rows: system.nrows(),
            cols: system.ncols(),
            ratio: system.oversampling_ratio(),
            floor: 1.0,
        });
    }
    let (c, truncated) = truncated_lstsq(&system.matrix, &system.rhs, opts.svd_tol)?;
    Ok(FitResult {
        coeffs: c.as_slice().to_vec(),
        truncated,
        converged: true,
        iterations: 1,
    })
}

fn sup_residual(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    (b - a * c).amax()
}

/// Lawson's iteratively reweighted least squares for the discrete Chebyshev
/// fit. The best iterate (smallest sup residual) is returned; the first
/// iterate is the plain least-squares fit, so the result never does worse.
pub fn minimax_lawson(system: &SampledSystem, opts: &LsqOptions) -> Result<FitResult> {
    opts.validate()?;
    let first = least_squares(system, opts)?;
    let (a, b) = (&system.matrix, &system.rhs);
    let n = a.nrows();
    let mut weights = DVector::from_element(n, 1.0 / n as f64);
    let mut best = DVector::from_column_slice(&first.coeffs);
    let mut best_sup = sup_residual(a, b, &best);
    let mut truncated = first.truncated;
    let mut prev_err: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    if best_sup == 0.0 {
        return Ok(FitResult {
            converged: true,
            ..first
        });
    }
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let sw = weights.map(f64::sqrt);
        let wa = DMatrix::from_fn(n, a.ncols(), |i, j| sw[i] * a[(i, j)]);
        let wb = b.component_mul(&sw);
        let (c, tr) = truncated_lstsq(&wa, &wb, opts.svd_tol)?;
        let r = b - a * &c;
        let sup = r.amax();
        if sup < best_sup {
            best_sup = sup;
            best = c.clone();
            truncated = tr;
        }
        let err = r
            .iter()
            .zip(weights.iter())
            .map(|(ri, wi)| wi * ri * ri)
            .sum::<f64>()
            .sqrt();
        if let Some(prev) = prev_err {
            if (err - prev).abs() <= opts.lawson_tol * err.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        prev_err = Some(err);
        let mut total = 0.0;
        for (w, ri) in weights.iter_mut().zip(r.iter()) {
            *w *= ri.abs();
            total += *w;
        }
        if !(total > 0.0) {
            converged = true;
            break;
        }
        weights /= total;
    }
    Ok(FitResult {
        coeffs: best.as_slice().to_vec(),
        truncated,
        converged,
        iterations,
    })
}

#[derive(Clone, Debug)]
pub struct MinimaxSolution {
    pub coeffs: Vec<f64>,
    /// Optimal sup residual `max_i |(A c - b)_i|`.
    pub sup_residual: f64,
}

/// Largest oracle problem `N * M` accepted by [`lp_minimax`].
pub const LP_ORACLE_LIMIT: usize = 100_000;

/// Exact discrete Chebyshev fit via the dual LP
/// `max b^T w  s.t.  A^T w = 0, |w|_1 <= 1`.
pub fn lp_minimax(system: &SampledSystem) -> Result<MinimaxSolution> {
    let (a, b) = (&system.matrix, &system.rhs);
    let (nrows, m) = a.shape();
    if nrows < m {
        return Err(Error::OversamplingViolation {
            rows: nrows,
            cols: m,
            ratio: system.oversampling_ratio(),
            floor: 1.0,
        });
    }
    if nrows * m > LP_ORACLE_LIMIT {
        return Err(Error::invalid(format!(
            "lp_minimax oracle limited to N*M <= {LP_ORACLE_LIMIT}"
        )));
    }
    // columns: u_i = [A_i; 1], v_i = [-A_i; 1], slack = [0; 1]
    let cols = 2 * nrows + 1;
    let mut lp_a = DMatrix::zeros(m + 1, cols);
    let mut cost = vec![0.0; cols];
    for i in 0..nrows {
        for j in 0..m {
            lp_a[(j, i)] = a[(i, j)];
            lp_a[(j, nrows + i)] = -a[(i, j)];
        }
        lp_a[(m, i)] = 1.0;
        lp_a[(m, nrows + i)] = 1.0;
        cost[i] = -b[i];
        cost[nrows + i] = b[i];
    }
    lp_a[(m, 2 * nrows)] = 1.0;
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    match solve_standard(&lp_a, &rhs, &cost)? {
        LpOutcome::Optimal(sol) => {
            let c = DVector::from_iterator(m, sol.y[..m].iter().map(|v| -v));
            let sup = sup_residual(a, b, &c);
            Ok(MinimaxSolution {
                coeffs: c.as_slice().to_vec(),
                sup_residual: sup,
            })
        }
        LpOutcome::Infeasible => Err(Error::LpFailure("minimax dual infeasible".into())),
        LpOutcome::Unbounded => Err(Error::LpFailure("minimax dual unbounded".into())),
    }
}
