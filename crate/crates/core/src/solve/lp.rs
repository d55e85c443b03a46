//! Dense two-phase tableau simplex for `min c^T x  s.t.  A x = b, x >= 0`.
//!
//! Besides the primal solution it returns the simplex multipliers `y`
//! (`A^T y <= c`, `b^T y = c^T x` at the optimum), which the minimax and
//! stability problems need to recover their primal variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

const MAX_RESTARTS: usize = 3;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 30;

struct Tableau {
    m: usize,
    /// structural columns
    n: usize,
    width: usize,
    t: Vec<f64>,
    /// reduced costs over structural and artificial columns
    d: Vec<f64>,
    basis: Vec<usize>,
    piv_tol: f64,
    opt_tol: f64,
}

enum Phase {
    One,
    Two,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, pr) in self.d.iter_mut().zip(pivot_row.iter()) {
                *dj -= f * pr;
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
    }

    /// Runs simplex iterations. Artificial columns never enter in phase two.
    /// Returns `Ok(true)` when optimal, `Ok(false)` when unbounded.
    fn iterate(&mut self, phase: Phase, max_iter: usize) -> Result<bool> {
        let allowed = match phase {
            Phase::One => self.n + self.m,
            Phase::Two => self.n,
        };
        let mut streak = 0usize;
        for _ in 0..max_iter {
            let bland = streak >= DEGENERATE_STREAK;
            let mut q = None;
            let mut best = -self.opt_tol;
            for j in 0..allowed {
                let dj = self.d[j];
                if dj < best {
                    q = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(q) = q else {
                return Ok(true);
            };
            let mut r = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a > self.piv_tol {
                    let t = self.rhs(i).max(0.0) / a;
                    let better = match r {
                        None => true,
                        Some(ri) => {
                            t < ratio - 1e-14 * ratio.abs().max(1.0)
                                || (t <= ratio + 1e-14 * ratio.abs().max(1.0)
                                    && self.basis[i] < self.basis[ri])
                        }
                    };
                    if better {
                        r = Some(i);
                        ratio = t.min(ratio);
                    }
                }
            }
            let Some(r) = r else {
                return Ok(false);
            };
            if ratio <= 1e-14 {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, q);
        }
        Err(Error::LpFailure("iteration limit reached (cycling)".into()))
    }
}

/// Solves the standard-form LP. Rows with negative right-hand side are
/// flipped internally; the returned multipliers refer to the original rows.
pub fn solve_standard(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<LpOutcome> {
    let mut last_err = None;
    for restart in 0..=MAX_RESTARTS {
        let perturb = if restart == 0 {
            0.0
        } else {
            1e-11 * 10f64.powi(restart as i32 - 1)
        };
        match solve_once(a, b, c, perturb) {
            Ok(out) => return Ok(out),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::LpFailure("unknown".into())))
}

fn solve_once(a: &DMatrix<f64>, b: &[f64], c: &[f64], perturb: f64) -> Result<LpOutcome> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let width = n + m + 1;
    let amax = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let bmax = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let cmax = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);

    let mut sign = vec![1.0; m];
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        // deterministic perturbation pattern for restarts
        let bi = b[i] + perturb * bmax * (1.0 + ((i * 7919) % 97) as f64 / 97.0);
        if bi < 0.0 {
            sign[i] = -1.0;
        }
        let s = sign[i];
        let row = &mut t[i * width..(i + 1) * width];
        for j in 0..n {
            row[j] = s * a[(i, j)];
        }
        row[n + i] = 1.0;
        row[width - 1] = s * bi;
    }
    // Phase one: minimize the sum of artificials.
    let mut d = vec![0.0; n + m];
    for i in 0..m {
        for j in 0..n {
            d[j] -= t[i * width + j];
        }
    }
    let mut tab = Tableau {
        m,
        n,
        width,
        t,
        d,
        basis: (n..n + m).collect(),
        piv_tol: 1e-11 * amax,
        opt_tol: 1e-11 * amax.max(cmax),
    };
    let max_iter = 50 * (m + n) + 1000;
    tab.iterate(Phase::One, max_iter)?;
    let infeas: f64 = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.rhs(i))
        .sum();
    if infeas > 1e-9 * bmax * (m as f64).sqrt() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive remaining artificials out where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            let mut best = None;
            let mut bestv = tab.piv_tol * 10.0;
            for j in 0..n {
                let v = tab.at(i, j).abs();
                if v > bestv && !tab.basis.contains(&j) {
                    bestv = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                tab.pivot(i, j);
            }
        }
    }
    // Phase two costs.
    let mut d2 = vec![0.0; n + m];
    d2[..n].copy_from_slice(c);
    for i in 0..m {
        let cb = if tab.basis[i] < n { c[tab.basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for (j, dj) in d2.iter_mut().enumerate() {
                *dj -= cb * tab.at(i, j);
            }
        }
    }
    tab.d = d2;
    if !tab.iterate(Phase::Two, max_iter)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    // Multipliers of the flipped system are minus the reduced costs of the
    // artificial columns.
    let mut y: Vec<f64> = (0..m).map(|i| -sign[i] * tab.d[n + i]).collect();
    refine(a, b, c, &sign, &tab.basis, &mut x, &mut y);
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpOutcome::Optimal(LpSolution { x, y, objective }))
}

/// Recomputes basic primal values and multipliers from the original data
/// with an LU solve of the final basis.
fn refine(
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
    sign: &[f64],
    basis: &[usize],
    x: &mut [f64],
    y: &mut [f64],
) {
    let (m, n) = a.shape();
    let mut bmat = DMatrix::zeros(m, m);
    let mut cb = DVector::zeros(m);
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            bmat.set_column(k, &a.column(j));
            cb[k] = c[j];
        } else {
            bmat[(j - n, k)] = sign[j - n];
        }
    }
    let lu = bmat.clone().lu();
    let Some(xb) = lu.solve(&DVector::from_column_slice(b)) else {
        return;
    };
    let Some(yb) = bmat.transpose().lu().solve(&cb) else {
        return;
    };
    let bscale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if xb.iter().any(|v| !v.is_finite() || *v < -1e-8 * bscale) || yb.iter().any(|v| !v.is_finite())
    {
        return;
    }
    for (k, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = xb[k].max(0.0);
        }
    }
    y.copy_from_slice(yb.as_slice());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(out: LpOutcome) -> LpSolution {
        match out {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_textbook_lp() {
        // min -x1 - 2 x2  s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0]);
        let sol = optimal(solve_standard(&a, &[4.0, 6.0], &[-1.0, -2.0, 0.0, 0.0]).unwrap());
        assert!((sol.objective + 5.0).abs() < 1e-12);
        assert!((sol.x[0] - 3.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
        // strong duality
        let dual: f64 = sol.y[0] * 4.0 + sol.y[1] * 6.0;
        assert!((dual - sol.objective).abs() < 1e-12);
        let aty = a.transpose() * DVector::from_column_slice(&sol.y);
        for (v, c) in aty.iter().zip([-1.0, -2.0, 0.0, 0.0]) {
            assert!(*v <= c + 1e-12);
        }
    }

    #[test]
    fn negative_rhs_and_infeasible() {
        // x1 - x2 = -2 -> x2 = x1 + 2, min x1 + x2 -> 2
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let sol = optimal(solve_standard(&a, &[-2.0], &[1.0, 1.0]).unwrap());
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.y[0] * -2.0 - 2.0).abs() < 1e-12);

        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(
            solve_standard(&a, &[-1.0], &[1.0, 1.0]).unwrap(),
            LpOutcome::Infeasible
        ));
    }

    #[test]
    fn unbounded_detected() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(matches!(
            solve_standard(&a, &[1.0], &[-1.0, 0.0]).unwrap(),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn redundant_rows() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let sol = optimal(solve_standard(&a, &[1.0, 2.0], &[1.0, 3.0]).unwrap());
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
