//! Sampling stability constants.
//!
//! The sup-norm constant of a trial space `U` and sample set `X` on a fine
//! grid `Y` is
//!
//! ```text
//! C = max_{y in Y} max { p(y) : p in U, |p(x)| <= 1 for x in X }.
//! ```
//!
//! Each inner maximum is a linear program. Its dual is the minimum l1-norm
//! representation of the point evaluation at `y` by the sample
//! evaluations, and the dual multipliers are the extremal function.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{check_segment, eval_basis, poly_basis_1d, Evaluator, TrialSpace};
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::geometry::{chebyshev_nodes, equidistant_nodes, NodeFamily, PointSet, POINT_TOL};
use crate::solve::l1::min_l1_representations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMethod {
    LpExact,
    LebesgueClosedForm,
    L2Surrogate,
}

impl fmt::Display for StabilityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityMethod::LpExact => "lp_exact",
            StabilityMethod::LebesgueClosedForm => "lebesgue_closed_form",
            StabilityMethod::L2Surrogate => "l2_surrogate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Trial dimension `M`.
    pub dimension: usize,
    /// Sample count `N`.
    pub samples: usize,
    pub family: String,
    pub oversampling: String,
    pub constant: f64,
    pub method: StabilityMethod,
    pub fine_grid_size: usize,
}

/// Result of the per-point linear programs.
#[derive(Clone, Debug)]
pub struct SupConstant {
    pub value: f64,
    /// Fine-grid index attaining the maximum (lowest index on ties).
    pub argmax: usize,
    /// Coefficients of the extremal function at `argmax`; empty when the
    /// constant is infinite.
    pub extremal: Vec<f64>,
}

/// Index of the maximum, preferring the lowest index among values within a
/// relative `1e-12` of it.
fn argmax_lowest(values: &[f64]) -> usize {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::INFINITY {
        return values.iter().position(|v| *v == f64::INFINITY).unwrap_or(0);
    }
    let cut = max - 1e-12 * max.abs();
    values.iter().position(|v| *v >= cut).unwrap_or(0)
}

/// Sup-norm stability constant from sample rows (`N x M`) and fine rows
/// (`F x M`). Infeasible points give an infinite constant.
pub fn sup_constant(sample: &DMatrix<f64>, fine: &DMatrix<f64>) -> Result<SupConstant> {
    if fine.nrows() == 0 {
        return Err(Error::invalid("empty fine grid"));
    }
    let mut reps = min_l1_representations(sample, fine)?;
    let values: Vec<f64> = reps.iter().map(|r| r.value).collect();
    let argmax = argmax_lowest(&values);
    Ok(SupConstant {
        value: values[argmax],
        argmax,
        extremal: std::mem::take(&mut reps[argmax].coeffs),
    })
}

fn family_label(set: &PointSet) -> String {
    let s = serde_json::to_value(set.generator().family)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned));
    s.unwrap_or_else(|| "custom".into())
}

/// Fine grid joined with the sample points.
fn fine_with_samples(sample_pts: &PointSet, fine_pts: &PointSet) -> PointSet {
    if fine_pts.indices_of(sample_pts).is_some() {
        fine_pts.clone()
    } else {
        fine_pts.union(sample_pts)
    }
}

/// Sup-norm stability constant of `space` sampled on `sample_pts`, measured
/// on `fine_pts` (joined with the sample points when not already included).
/// Falls back to the L2 surrogate when a linear program fails.
pub fn stability_sup(space: &TrialSpace, sample_pts: &PointSet, fine_pts: &PointSet) -> Result<StabilityReport> {
    check_segment(space, sample_pts)?;
    if sample_pts.len() < space.dim() {
        return Err(Error::OversamplingViolation {
            rows: sample_pts.len(),
            cols: space.dim(),
            ratio: sample_pts.len() as f64 / space.dim() as f64,
            floor: 1.0,
        });
    }
    let fine = fine_with_samples(sample_pts, fine_pts);
    let a = eval_basis(space, sample_pts, Evaluator::Value)?;
    let f = eval_basis(space, &fine, Evaluator::Value)?;
    let report = |constant, method| StabilityReport {
        dimension: space.dim(),
        samples: sample_pts.len(),
        family: family_label(sample_pts),
        oversampling: "-".into(),
        constant,
        method,
        fine_grid_size: fine.len(),
    };
    match sup_constant(&a, &f) {
        Ok(sc) => Ok(report(sc.value, StabilityMethod::LpExact)),
        Err(Error::LpFailure(_)) => {
            let c = l2_constant(&a, None, &f, None)?;
            Ok(report(c, StabilityMethod::L2Surrogate))
        }
        Err(e) => Err(e),
    }
}

/// Sup-norm constant for arbitrary sampled functionals given as matrices.
pub fn stability_sup_rows(sample: &DMatrix<f64>, fine: &DMatrix<f64>) -> Result<(f64, StabilityMethod)> {
    match sup_constant(sample, fine) {
        Ok(sc) => Ok((sc.value, StabilityMethod::LpExact)),
        Err(Error::LpFailure(_)) => Ok((l2_constant(sample, None, fine, None)?, StabilityMethod::L2Surrogate)),
        Err(e) => Err(e),
    }
}

/// Scale that keeps node-difference products in floating point range.
fn capacity_scale(nodes: &[f64]) -> f64 {
    let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    4.0 / (hi - lo).max(1.0)
}

/// Barycentric weights for distinct nodes, scaled by [`capacity_scale`].
fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= POINT_TOL) {
        return Err(Error::invalid("lebesgue_constant requires distinct nodes"));
    }
    let cap = capacity_scale(nodes);
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let prod: f64 = nodes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, xj)| cap * (xi - xj))
                .product();
            1.0 / prod
        })
        .collect())
}

/// Lebesgue function `sum_i |l_i(x)|` at `x`, with `weights` from the
/// same nodes.
///
/// Uses the first barycentric form `|w(x)| sum_i |w_i| / |x - x_i|`. Every
/// term is positive, so the sum has none of the cancellation of the
/// quotient form when the constant is large.
pub fn lebesgue_function(nodes: &[f64], weights: &[f64], x: f64) -> f64 {
    let cap = capacity_scale(nodes);
    let mut node_poly = 1.0;
    let mut sum = 0.0;
    for (xi, wi) in nodes.iter().zip(weights) {
        let d = cap * (x - xi);
        if d == 0.0 {
            return 1.0;
        }
        node_poly *= d;
        sum += (wi / d).abs();
    }
    node_poly.abs() * sum
}

/// Maximum of the Lebesgue function over `fine`.
pub fn lebesgue_constant(nodes: &[f64], fine: &[f64]) -> Result<f64> {
    if nodes.is_empty() || fine.is_empty() {
        return Err(Error::invalid("lebesgue_constant needs nodes and a fine grid"));
    }
    let w = barycentric_weights(nodes)?;
    Ok(fine
        .iter()
        .map(|&x| lebesgue_function(nodes, &w, x))
        .fold(0.0, f64::max))
}

/// `1 / sigma_min` of the sample matrix after orthonormalizing the basis in
/// the weighted fine-grid inner product. Uniform weights `1/count` when
/// none are given.
fn l2_constant(
    sample: &DMatrix<f64>,
    sample_w: Option<&[f64]>,
    fine: &DMatrix<f64>,
    fine_w: Option<&[f64]>,
) -> Result<f64> {
    let weighted = |mat: &DMatrix<f64>, w: Option<&[f64]>| {
        let n = mat.nrows();
        DMatrix::from_fn(n, mat.ncols(), |i, j| {
            let wi = w.map_or(1.0 / n as f64, |w| w[i]);
            wi.sqrt() * mat[(i, j)]
        })
    };
    let bf = weighted(fine, fine_w);
    let svd = thin_svd(&bf)?;
    let s = &svd.s;
    let smax = s.max();
    let smin = s.min();
    if s.len() < fine.ncols() || !(smin > 1e-12 * smax) {
        return Err(Error::DegenerateTrialSpace(
            "trial space is rank deficient on the fine grid".into(),
        ));
    }
    let vt = &svd.vt;
    // orthonormal basis coefficients: V * diag(1/s)
    let mut t = vt.transpose();
    for (k, sk) in s.iter().enumerate() {
        t.column_mut(k).scale_mut(1.0 / sk);
    }
    let bs = weighted(sample, sample_w) * t;
    let sv = thin_svd(&bs)?.s;
    if sv.len() < sample.ncols() {
        return Ok(f64::INFINITY);
    }
    let min = sv.min();
    Ok(if min > 0.0 { 1.0 / min } else { f64::INFINITY })
}

/// Weighted discrete-L2 surrogate of the stability constant.
pub fn stability_l2(
    space: &TrialSpace,
    sample_pts: &PointSet,
    sample_weights: &[f64],
    fine_pts: &PointSet,
    fine_weights: &[f64],
) -> Result<StabilityReport> {
    check_segment(space, sample_pts)?;
    if sample_weights.len() != sample_pts.len() || fine_weights.len() != fine_pts.len() {
        return Err(Error::invalid("one weight per point is required"));
    }
    if sample_weights.iter().chain(fine_weights).any(|w| !(*w > 0.0)) {
        return Err(Error::invalid("weights must be positive"));
    }
    if sample_pts.len() < space.dim() {
        return Err(Error::OversamplingViolation {
            rows: sample_pts.len(),
            cols: space.dim(),
            ratio: sample_pts.len() as f64 / space.dim() as f64,
            floor: 1.0,
        });
    }
    let a = eval_basis(space, sample_pts, Evaluator::Value)?;
    let f = eval_basis(space, fine_pts, Evaluator::Value)?;
    let c = l2_constant(&a, Some(sample_weights), &f, Some(fine_weights))?;
    Ok(StabilityReport {
        dimension: space.dim(),
        samples: sample_pts.len(),
        family: family_label(sample_pts),
        oversampling: "-".into(),
        constant: c,
        method: StabilityMethod::L2Surrogate,
        fine_grid_size: fine_pts.len(),
    })
}

#[derive(Clone, Debug)]
pub struct GreedyResult {
    pub points: PointSet,
    /// Candidate indices in selection order.
    pub indices: Vec<usize>,
    pub report: StabilityReport,
    pub target_missed: bool,
}

/// Candidate farthest from the span of the selected rows; used while the
/// selection cannot yet determine every trial function.
fn nullspace_choice(rows: &DMatrix<f64>, cand: &DMatrix<f64>) -> Result<usize> {
    let svd = thin_svd(rows)?;
    let vt = &svd.vt;
    let smax = svd.s.max();
    let keep: Vec<usize> = (0..svd.s.len())
        .filter(|&k| svd.s[k] > 1e-10 * smax)
        .collect();
    let dist: Vec<f64> = (0..cand.nrows())
        .map(|i| {
            let mut r = cand.row(i).transpose();
            for &k in &keep {
                let v = vt.row(k).transpose();
                let proj = v.dot(&r);
                r.axpy(-proj, &v, 1.0);
            }
            r.norm()
        })
        .collect();
    Ok(argmax_lowest(&dist))
}

/// Greedy selection of a norming set from dense candidates. The candidate
/// grid doubles as the fine grid on which the constant is measured.
pub fn greedy_norming_set(
    space: &TrialSpace,
    candidates: &PointSet,
    target_c: f64,
    budget: usize,
) -> Result<GreedyResult> {
    check_segment(space, candidates)?;
    let m = space.dim();
    if candidates.len() < 16 * m {
        return Err(Error::invalid(format!(
            "greedy_norming_set needs at least {} candidates, got {}",
            16 * m,
            candidates.len()
        )));
    }
    if !(target_c >= 1.0) {
        return Err(Error::invalid("target constant must be at least 1"));
    }
    if budget == 0 {
        return Err(Error::invalid("budget must be positive"));
    }
    let cand = eval_basis(space, candidates, Evaluator::Value)?;
    let first: Vec<f64> = cand.column(0).iter().map(|v| v.abs()).collect();
    let mut chosen = vec![argmax_lowest(&first)];
    let (constant, missed) = loop {
        let rows = cand.select_rows(chosen.iter());
        let sc = sup_constant(&rows, &cand)?;
        if sc.value <= target_c {
            break (sc.value, false);
        }
        if chosen.len() >= budget {
            break (sc.value, true);
        }
        let next = if sc.value.is_finite() {
            let p = DVector::from_column_slice(&sc.extremal);
            let vals: Vec<f64> = (&cand * p).iter().map(|v| v.abs()).collect();
            argmax_lowest(&vals)
        } else {
            nullspace_choice(&rows, &cand)?
        };
        if chosen.contains(&next) {
            break (sc.value, true);
        }
        chosen.push(next);
    };
    let points = candidates.subset(&chosen)?;
    let report = StabilityReport {
        dimension: m,
        samples: chosen.len(),
        family: "greedy".into(),
        oversampling: "-".into(),
        constant,
        method: StabilityMethod::LpExact,
        fine_grid_size: candidates.len(),
    };
    Ok(GreedyResult {
        points,
        indices: chosen,
        report,
        target_missed: missed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabFamily {
    Equidistant,
    Chebyshev,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oversampling {
    None,
    /// `N = ceil(pi * M)`
    PiM,
    /// `N = M^2`
    MSquared,
}

impl Oversampling {
    pub fn samples(&self, m: usize) -> usize {
        match self {
            Oversampling::None => m,
            Oversampling::PiM => (std::f64::consts::PI * m as f64).ceil() as usize,
            Oversampling::MSquared => m * m,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Oversampling::None => "none",
            Oversampling::PiM => "pi",
            Oversampling::MSquared => "msquared",
        }
    }
}

impl LabFamily {
    pub fn label(&self) -> &'static str {
        match self {
            LabFamily::Equidistant => "equidistant",
            LabFamily::Chebyshev => "chebyshev",
        }
    }

    pub fn nodes(&self, n: usize) -> Result<PointSet> {
        match self {
            LabFamily::Equidistant => PointSet::segment(&equidistant_nodes(n)?, NodeFamily::Equidistant),
            LabFamily::Chebyshev => PointSet::segment(&chebyshev_nodes(n)?, NodeFamily::ChebyshevMapped),
        }
    }
}

/// Fine-grid density relative to the sample count in lab runs.
pub const LAB_FINE_DENSITY: usize = 16;

/// Uniform segment grid with `density * max(n - 1, 1) + 1` points joined
/// with the sample nodes.
pub fn lab_fine_grid(samples: &PointSet, density: usize) -> Result<PointSet> {
    let k = density * samples.len().saturating_sub(1).max(1) + 1;
    let uniform = PointSet::segment(&equidistant_nodes(k)?, NodeFamily::Equidistant)?;
    Ok(uniform.union(samples))
}

/// Sup-norm constants of the order-`M` polynomials for each order.
pub fn stability_lab(family: LabFamily, orders: &[usize], oversampling: Oversampling) -> Result<Vec<StabilityReport>> {
    if orders.is_empty() {
        return Err(Error::invalid("stability_lab needs at least one order"));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("orders must be strictly ascending"));
    }
    orders
        .iter()
        .map(|&m| {
            let space = poly_basis_1d(m)?;
            let n = oversampling.samples(m);
            let nodes = family.nodes(n)?;
            let fine = lab_fine_grid(&nodes, LAB_FINE_DENSITY)?;
            let mut report = stability_sup(&space, &nodes, &fine)?;
            report.family = family.label().into();
            report.oversampling = oversampling.label().into();
            Ok(report)
        })
        .collect()
}

pub const LAB_CSV_HEADER: &str = "family,M,N,oversampling,C,method,fine_grid_size";

pub fn lab_csv(reports: &[StabilityReport]) -> String {
    let mut out = String::from(LAB_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{:.12e},{},{}\n",
            r.family, r.dimension, r.samples, r.oversampling, r.constant, r.method, r.fine_grid_size
        ));
    }
    out
}
