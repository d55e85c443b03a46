//! Minimum l1-norm representations of point evaluations.
//!
//! For sample rows `A` (`N x M`) and a target row `phi`, solves
//!
//! ```text
//! min ||lambda||_1  subject to  A^T lambda = phi,
//! ```
//!
//! whose dual is `max phi . c` over coefficient vectors with `|A c| <= 1`.
//! The rows are first orthonormalized through a thin SVD, so the exchange
//! works with a well-scaled matrix of rank `r`. Any `r` linearly
//! independent rows, signed by the sign of their multipliers, form a
//! feasible basis. The method therefore needs no phase one, and the
//! optimal basis for one target is a good start for the next.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::thin_svd;

/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;
/// Relative distance from the row space above which a target is not
/// representable.
const SPAN_TOL: f64 = 1e-8;
/// Constraint slack accepted at the optimum.
const OPT_TOL: f64 = 1e-10;
const DEGENERATE_STREAK: usize = 20;
/// Smallest accepted pivot (the rows of `U` have norm at most 1).
const PIVOT_TOL: f64 = 1e-11;
/// Basic values below this fraction of the largest are treated as zero.
const ZERO_TOL: f64 = 1e-12;
/// Relative sizes of the target perturbations.
const COARSE_PERTURBATION: f64 = 1e-7;
const FINE_PERTURBATION: f64 = 1e-11;

/// Optimum for one target row.
#[derive(Clone, Debug)]
pub struct L1Rep {
    /// `min ||lambda||_1`; infinite when `phi` is outside the row space.
    pub value: f64,
    /// Maximizing coefficients `c` in the original basis; empty when the
    /// value is infinite.
    pub coeffs: Vec<f64>,
}

struct Reduced {
    /// Orthonormal rows `U` (`N x r`).
    u: DMatrix<f64>,
    /// Back-transformation `V diag(1/s)` (`M x r`).
    back: DMatrix<f64>,
    /// `V^T` (`r x M`), also used for the span test.
    vt: DMatrix<f64>,
    s: DVector<f64>,
}

impl Reduced {
    fn new(sample: &DMatrix<f64>) -> Result<Self> {
        let svd = thin_svd(sample)?;
        let smax = svd.s.max();
        if !(smax > 0.0) {
            return Err(Error::DegenerateTrialSpace("sample matrix is zero".into()));
        }
        let r = svd.s.iter().take_while(|v| **v > RANK_TOL * smax).count();
        let u = svd.u.columns(0, r).into_owned();
        let vt = svd.vt.rows(0, r).into_owned();
        let s = svd.s.rows(0, r).into_owned();
        let mut back = vt.transpose();
        for k in 0..r {
            back.column_mut(k).scale_mut(1.0 / s[k]);
        }
        Ok(Reduced { u, back, vt, s })
    }

    /// Target in reduced coordinates, or `None` outside the row space.
    fn project(&self, phi: &DVector<f64>) -> Option<DVector<f64>> {
        let coords = &self.vt * phi;
        let resid = (phi - self.vt.transpose() * &coords).norm();
        if resid > SPAN_TOL * phi.norm().max(f64::MIN_POSITIVE) {
            return None;
        }
        Some(coords.component_div(&self.s))
    }

    /// `r` well-separated rows by greedy Gram-Schmidt on `U`.
    fn initial_basis(&self) -> Vec<usize> {
        let (n, r) = self.u.shape();
        let mut rows = self.u.clone();
        let mut basis = Vec::with_capacity(r);
        for _ in 0..r {
            let (best, _) = (0..n)
                .filter(|i| !basis.contains(i))
                .map(|i| (i, rows.row(i).norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            basis.push(best);
            let q = rows.row(best).transpose().normalize();
            for i in 0..n {
                let proj = rows.row(i).transpose().dot(&q);
                for k in 0..r {
                    rows[(i, k)] -= proj * q[k];
                }
            }
        }
        basis
    }

    /// Optimal value and reduced coefficients for one target, starting
    /// from `basis`, which is updated in place.
    ///
    /// The exchange runs on perturbed targets, which removes the massive
    /// degeneracy at targets that coincide with sample rows: first a
    /// coarse perturbation that is safely above roundoff, then a fine one
    /// from the coarse optimum. If the fine pass stalls, the coarse result
    /// stands. Either way the value is the exact target against final
    /// coefficients that satisfy the constraints.
    fn solve(&self, target: &DVector<f64>, basis: &mut Vec<usize>) -> Result<(f64, DVector<f64>)> {
        let coarse = self.exchange(&self.perturbed(target, COARSE_PERTURBATION), basis)?;
        let mut fine_basis = basis.clone();
        let c = match self.exchange(&self.perturbed(target, FINE_PERTURBATION), &mut fine_basis) {
            Ok(c) => {
                *basis = fine_basis;
                c
            }
            Err(_) => coarse,
        };
        Ok((target.dot(&c), c))
    }

    fn perturbed(&self, target: &DVector<f64>, size: f64) -> DVector<f64> {
        let scale = size * target.amax();
        DVector::from_fn(target.len(), |k, _| {
            let h = (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11;
            let unit = h as f64 / (1u64 << 53) as f64 - 0.5;
            target[k] + scale * unit
        })
    }

    /// Primal simplex on `min ||lambda||_1`, `U_B^T lambda = target`.
    /// Returns the dual coefficients of the optimal basis.
    fn exchange(&self, target: &DVector<f64>, basis: &mut Vec<usize>) -> Result<DVector<f64>> {
        let (n, r) = self.u.shape();
        let max_iter = 10 * (n + r) + 100;
        let mut streak = 0usize;
        let mut restarted = false;
        // Signs of the basic columns. They are set from the multipliers
        // when a solve starts and then only change through pivots, which
        // keeps degenerate steps from flipping them through roundoff.
        let mut signs: Option<DVector<f64>> = None;
        for _ in 0..max_iter {
            let ab = self.u.select_rows(basis.iter());
            let lu = ab.clone().lu();
            let lut = ab.transpose().lu();
            let (Some(lambda), true) = (lut.solve(target), lu.is_invertible()) else {
                if restarted {
                    return Err(Error::LpFailure("singular exchange basis".into()));
                }
                restarted = true;
                *basis = self.initial_basis();
                signs = None;
                continue;
            };
            let s = signs.get_or_insert_with(|| lambda.map(|v| if v < 0.0 { -1.0 } else { 1.0 }));
            let Some(c) = lu.solve(s) else {
                return Err(Error::LpFailure("singular exchange basis".into()));
            };
            let p = &self.u * &c;
            let bland = streak >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut worst = 1.0 + OPT_TOL;
            for j in 0..n {
                let v = p[j].abs();
                if v > worst && !basis.contains(&j) {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    worst = v;
                }
            }
            let Some(j) = enter else {
                return Ok(c);
            };
            let sigma = p[j].signum();
            let col = self.u.row(j).transpose() * sigma;
            let Some(w) = lut.solve(&col) else {
                return Err(Error::LpFailure("singular exchange basis".into()));
            };
            // Two-pass ratio test. Basic values within roundoff of zero
            // count as zero so that ties among degenerate rows are exact.
            let scale = lambda.amax().max(f64::MIN_POSITIVE);
            let ratios: Vec<Option<(f64, f64)>> = (0..r)
                .map(|i| {
                    let d = s[i] * w[i];
                    (d > PIVOT_TOL).then(|| {
                        let x = s[i] * lambda[i];
                        let x = if x <= ZERO_TOL * scale { 0.0 } else { x };
                        (x / d, d)
                    })
                })
                .collect();
            let ratio = ratios.iter().flatten().map(|v| v.0).fold(f64::INFINITY, f64::min);
            let cut = ratio + ZERO_TOL * ratio.max(1.0);
            let ties = (0..r).filter(|&i| ratios[i].is_some_and(|(t, _)| t <= cut));
            let leave = if bland {
                ties.min_by_key(|&i| basis[i])
            } else {
                ties.max_by(|&x, &y| ratios[x].unwrap().1.total_cmp(&ratios[y].unwrap().1))
            };
            let Some(l) = leave else {
                return Err(Error::LpFailure("unbounded l1 representation".into()));
            };
            streak = if ratio <= ZERO_TOL * scale { streak + 1 } else { 0 };
            basis[l] = j;
            s[l] = sigma;
        }
        Err(Error::LpFailure("exchange iteration limit reached".into()))
    }
}

/// Minimum l1 representations of every row of `targets` by the rows of
/// `sample`. Work is split into contiguous chunks that each reuse the
/// previous optimal basis.
pub fn min_l1_representations(sample: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<Vec<L1Rep>> {
    if sample.ncols() != targets.ncols() {
        return Err(Error::invalid("sample and target rows differ in length"));
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite target rows"));
    }
    let red = Reduced::new(sample)?;
    let start = red.initial_basis();
    let count = targets.nrows();
    let chunk = count.div_ceil(4 * rayon::current_num_threads()).max(16);
    let ranges: Vec<(usize, usize)> = (0..count)
        .step_by(chunk)
        .map(|a| (a, (a + chunk).min(count)))
        .collect();
    let parts: Vec<Result<Vec<L1Rep>>> = ranges
        .into_par_iter()
        .map(|(a, b)| {
            let mut basis = start.clone();
            (a..b)
                .map(|k| {
                    let phi = targets.row(k).transpose();
                    if phi.iter().all(|v| *v == 0.0) {
                        return Ok(L1Rep {
                            value: 0.0,
                            coeffs: vec![0.0; sample.ncols()],
                        });
                    }
                    let Some(target) = red.project(&phi) else {
                        return Ok(L1Rep {
                            value: f64::INFINITY,
                            coeffs: Vec::new(),
                        });
                    };
                    // A warm start can stall on degenerate vertices; the
                    // cold start basis is the fallback.
                    let (value, c) = match red.solve(&target, &mut basis) {
                        Ok(v) => v,
                        Err(_) => {
                            basis = start.clone();
                            red.solve(&target, &mut basis)?
                        }
                    };
                    Ok(L1Rep {
                        value,
                        coeffs: (&red.back * c).iter().copied().collect(),
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::lp::{solve_standard, LpOutcome};

    #[test]
    fn matches_simplex_on_random_instances() {
        // deterministic pseudo-random matrices
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for (n, m) in [(6, 3), (12, 5), (20, 8)] {
            let a = DMatrix::from_fn(n, m, |_, _| next());
            let targets = DMatrix::from_fn(5, m, |_, _| next());
            let reps = min_l1_representations(&a, &targets).unwrap();
            let mut lp_a = DMatrix::zeros(m, 2 * n);
            for i in 0..n {
                for j in 0..m {
                    lp_a[(j, i)] = a[(i, j)];
                    lp_a[(j, n + i)] = -a[(i, j)];
                }
            }
            for (k, rep) in reps.iter().enumerate() {
                let b: Vec<f64> = targets.row(k).iter().copied().collect();
                let LpOutcome::Optimal(sol) = solve_standard(&lp_a, &b, &vec![1.0; 2 * n]).unwrap() else {
                    panic!("simplex failed");
                };
                assert!((rep.value - sol.objective).abs() < 1e-9 * sol.objective.max(1.0));
                let c = DVector::from_column_slice(&rep.coeffs);
                assert!((&a * &c).amax() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn rank_deficient_samples() {
        // two identical rows in a two-dimensional space
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, 0.5]);
        let t = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let reps = min_l1_representations(&a, &t).unwrap();
        assert!((reps[0].value - 2.0).abs() < 1e-12);
        assert!(reps[1].value.is_infinite());
    }
}
