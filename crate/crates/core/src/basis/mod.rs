//! Trial spaces with analytic values, gradients and Laplacians.

mod radial;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use radial::RadialProfile;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, PointSet, PointTag, POINT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Matern52,
    Matern72,
    Gaussian,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Matern52 => "kernel:matern52",
            KernelFamily::Matern72 => "kernel:matern72",
            KernelFamily::Gaussian => "kernel:gaussian",
        }
    }
}

/// Radial, positive definite kernel `phi(shape * r)` with `phi(0) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub shape: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, shape: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::invalid(format!("kernel shape must be positive, got {shape}")));
        }
        Ok(Kernel { family, shape })
    }

    /// Profile in the unscaled variable.
    fn unit_profile(&self) -> RadialProfile {
        match self.family {
            KernelFamily::Matern52 => {
                let a = 5f64.sqrt();
                RadialProfile::new(vec![1.0, a, 5.0 / 3.0], a, 1)
            }
            KernelFamily::Matern72 => {
                let a = 7f64.sqrt();
                RadialProfile::new(vec![1.0, a, 14.0 / 5.0, 7.0 * a / 15.0], a, 1)
            }
            KernelFamily::Gaussian => RadialProfile::new(vec![1.0], 1.0, 2),
        }
    }

    /// The kernel as a function of the unscaled distance `r`.
    pub fn profile(&self) -> RadialProfile {
        self.unit_profile().with_shape(self.shape)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.profile().eval(r)
    }
}

/// A radial basis function centred at `center`, with precomputed profiles
/// for value, `(1/r) d/dr` (gradient factor) and Laplacian.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    pub center: Point2,
    value: RadialProfile,
    grad: RadialProfile,
    lap: RadialProfile,
}

impl RadialFunction {
    pub fn new(center: Point2, value: RadialProfile) -> Result<Self> {
        let grad = value.radial_d()?;
        let lap = value.laplacian()?;
        Ok(RadialFunction {
            center,
            value,
            grad,
            lap,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.value
    }
}

#[derive(Clone, Debug)]
pub enum TrialSpace {
    /// Chebyshev polynomials `T_0 .. T_{M-1}` in the first coordinate.
    Poly1d { order: usize },
    /// `1, Re z^k, Im z^k` for `k = 1..=K`.
    Harmonic { max_order: usize },
    /// Tensor Chebyshev polynomials of total degree `<= degree` on the
    /// box `[ax, bx] x [ay, by]`.
    Poly2d {
        degree: usize,
        bbox: (f64, f64, f64, f64),
    },
    /// Fundamental solutions `-ln|p - y_j| / (2 pi)`.
    Mfs { charges: Vec<Point2> },
    /// Radial functions; kernel translates, or operator images of kernel
    /// translates for symmetric collocation.
    Radial {
        kernel: Kernel,
        functions: Vec<RadialFunction>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluator {
    Value,
    Laplacian,
}

pub fn poly_basis_1d(order: usize) -> Result<TrialSpace> {
    if order == 0 {
        return Err(Error::invalid("poly_basis_1d requires order >= 1"));
    }
    Ok(TrialSpace::Poly1d { order })
}

pub fn harmonic_basis(max_order: usize) -> TrialSpace {
    TrialSpace::Harmonic { max_order }
}

pub fn poly_basis_2d(degree: usize, domain: &Domain) -> TrialSpace {
    TrialSpace::Poly2d {
        degree,
        bbox: domain.bounding_box(),
    }
}

pub fn mfs_basis(charges: &PointSet, domain: &Domain) -> Result<TrialSpace> {
    if charges.is_empty() {
        return Err(Error::invalid("mfs_basis requires at least one charge"));
    }
    if let Some(p) = charges.points().iter().find(|p| domain.closure_contains(p)) {
        return Err(Error::invalid(format!(
            "charge ({}, {}) lies in the closed domain",
            p.x, p.y
        )));
    }
    Ok(TrialSpace::Mfs {
        charges: charges.points().to_vec(),
    })
}

pub fn kernel_basis(centers: &PointSet, kernel: Kernel) -> Result<TrialSpace> {
    if centers.is_empty() {
        return Err(Error::invalid("kernel_basis requires at least one center"));
    }
    let profile = kernel.profile();
    let functions = centers
        .points()
        .iter()
        .map(|&c| RadialFunction::new(c, profile.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSpace::Radial { kernel, functions })
}

/// Values, first and second derivatives of `T_0 .. T_{n-1}` at `x`.
fn chebyshev_all(n: usize, x: f64, t: &mut [f64], dt: &mut [f64], ddt: &mut [f64]) {
    for k in 0..n {
        match k {
            0 => {
                t[0] = 1.0;
                dt[0] = 0.0;
                ddt[0] = 0.0;
            }
            1 => {
                t[1] = x;
                dt[1] = 1.0;
                ddt[1] = 0.0;
            }
            _ => {
                t[k] = 2.0 * x * t[k - 1] - t[k - 2];
                dt[k] = 2.0 * t[k - 1] + 2.0 * x * dt[k - 1] - dt[k - 2];
                ddt[k] = 4.0 * dt[k - 1] + 2.0 * x * ddt[k - 1] - ddt[k - 2];
            }
        }
    }
}

/// Per-row scratch for [`TrialSpace::eval_into`].
#[derive(Default)]
struct ChebScratch {
    tx: Vec<f64>,
    dtx: Vec<f64>,
    ddtx: Vec<f64>,
    ty: Vec<f64>,
    dty: Vec<f64>,
    ddty: Vec<f64>,
}

impl ChebScratch {
    fn fill(&mut self, n: usize, x: f64, y: f64) {
        for v in [
            &mut self.tx,
            &mut self.dtx,
            &mut self.ddtx,
            &mut self.ty,
            &mut self.dty,
            &mut self.ddty,
        ] {
            v.resize(n, 0.0);
        }
        chebyshev_all(n, x, &mut self.tx, &mut self.dtx, &mut self.ddtx);
        chebyshev_all(n, y, &mut self.ty, &mut self.dty, &mut self.ddty);
    }
}

impl TrialSpace {
    pub fn dim(&self) -> usize {
        match self {
            TrialSpace::Poly1d { order } => *order,
            TrialSpace::Harmonic { max_order } => 2 * max_order + 1,
            TrialSpace::Poly2d { degree, .. } => (degree + 1) * (degree + 2) / 2,
            TrialSpace::Mfs { charges } => charges.len(),
            TrialSpace::Radial { functions, .. } => functions.len(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            TrialSpace::Poly1d { .. } => "poly1d",
            TrialSpace::Harmonic { .. } => "harmonic",
            TrialSpace::Poly2d { .. } => "poly2d",
            TrialSpace::Mfs { .. } => "mfs",
            TrialSpace::Radial { kernel, .. } => kernel.family.name(),
        }
    }

    /// True when every basis function is harmonic, so the `-Laplace` block
    /// vanishes identically.
    pub fn is_harmonic(&self) -> bool {
        matches!(self, TrialSpace::Harmonic { .. } | TrialSpace::Mfs { .. })
    }

    /// Writes `(value, d/dx, d/dy, laplacian)` of basis function `j` at `p`.
    pub fn eval_one(&self, j: usize, p: &Point2) -> Result<[f64; 4]> {
        let mut row = vec![[0.0; 4]; self.dim()];
        self.eval_full(p, &mut row)?;
        Ok(row[j])
    }

    pub fn gradient(&self, j: usize, p: &Point2) -> Result<[f64; 2]> {
        let v = self.eval_one(j, p)?;
        Ok([v[1], v[2]])
    }

    /// Value, gradient and Laplacian of every basis function at `p`.
    pub fn eval_full(&self, p: &Point2, out: &mut [[f64; 4]]) -> Result<()> {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            TrialSpace::Poly1d { order } => {
                let mut s = ChebScratch::default();
                s.fill(*order, p.x, 0.0);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = [s.tx[k], s.dtx[k], 0.0, s.ddtx[k]];
                }
            }
            TrialSpace::Harmonic { max_order } => {
                out[0] = [1.0, 0.0, 0.0, 0.0];
                // z^k and k z^(k-1), built by repeated multiplication
                let (mut zr, mut zi) = (1.0, 0.0);
                for k in 1..=*max_order {
                    let (dr, di) = (k as f64 * zr, k as f64 * zi);
                    let nr = zr * p.x - zi * p.y;
                    let ni = zr * p.y + zi * p.x;
                    zr = nr;
                    zi = ni;
                    out[2 * k - 1] = [zr, dr, -di, 0.0];
                    out[2 * k] = [zi, di, dr, 0.0];
                }
            }
            TrialSpace::Poly2d { degree, bbox } => {
                let (ax, ay, bx, by) = *bbox;
                let (sx, sy) = (2.0 / (bx - ax), 2.0 / (by - ay));
                let u = (p.x - ax) * sx - 1.0;
                let v = (p.y - ay) * sy - 1.0;
                let mut s = ChebScratch::default();
                s.fill(degree + 1, u, v);
                let mut j = 0;
                for total in 0..=*degree {
                    for i in 0..=total {
                        let k = total - i;
                        out[j] = [
                            s.tx[i] * s.ty[k],
                            sx * s.dtx[i] * s.ty[k],
                            sy * s.tx[i] * s.dty[k],
                            sx * sx * s.ddtx[i] * s.ty[k] + sy * sy * s.tx[i] * s.ddty[k],
                        ];
                        j += 1;
                    }
                }
            }
            TrialSpace::Mfs { charges } => {
                let c = -1.0 / (2.0 * std::f64::consts::PI);
                for (o, y) in out.iter_mut().zip(charges) {
                    let (dx, dy) = (p.x - y.x, p.y - y.y);
                    let r2 = dx * dx + dy * dy;
                    if r2.sqrt() <= POINT_TOL {
                        return Err(Error::SingularEvaluation { x: p.x, y: p.y });
                    }
                    *o = [0.5 * c * r2.ln(), c * dx / r2, c * dy / r2, 0.0];
                }
            }
            TrialSpace::Radial { functions, .. } => {
                for (o, f) in out.iter_mut().zip(functions) {
                    let (dx, dy) = (p.x - f.center.x, p.y - f.center.y);
                    let r = dx.hypot(dy);
                    let g = f.grad.eval(r);
                    *o = [f.value.eval(r), g * dx, g * dy, f.lap.eval(r)];
                }
            }
        }
        Ok(())
    }

    /// Requested evaluator of every basis function at `p`.
    pub fn eval_row(&self, p: &Point2, what: Evaluator, out: &mut [f64]) -> Result<()> {
        let mut full = vec![[0.0; 4]; self.dim()];
        self.eval_full(p, &mut full)?;
        let idx = match what {
            Evaluator::Value => 0,
            Evaluator::Laplacian => 3,
        };
        for (o, f) in out.iter_mut().zip(&full) {
            *o = f[idx];
        }
        Ok(())
    }

    /// Linear combination `sum_j coeffs[j] * u_j` evaluated at `p`.
    pub fn combine(&self, coeffs: &[f64], p: &Point2, what: Evaluator) -> Result<f64> {
        let mut row = vec![0.0; self.dim()];
        self.eval_row(p, what, &mut row)?;
        Ok(row.iter().zip(coeffs).map(|(a, c)| a * c).sum())
    }
}

/// `#points x M` matrix of the requested evaluator.
pub fn eval_basis(space: &TrialSpace, points: &PointSet, what: Evaluator) -> Result<DMatrix<f64>> {
    eval_points(space, points.points(), what)
}

pub(crate) fn eval_points(
    space: &TrialSpace,
    points: &[Point2],
    what: Evaluator,
) -> Result<DMatrix<f64>> {
    let m = space.dim();
    let mut mat = DMatrix::zeros(points.len(), m);
    let mut row = vec![0.0; m];
    for (i, p) in points.iter().enumerate() {
        space.eval_row(p, what, &mut row)?;
        for (j, v) in row.iter().enumerate() {
            mat[(i, j)] = *v;
        }
    }
    Ok(mat)
}

/// Segment nodes are the only valid evaluation sites for the 1D basis.
pub(crate) fn check_segment(space: &TrialSpace, points: &PointSet) -> Result<()> {
    if matches!(space, TrialSpace::Poly1d { .. }) && points.tag() != PointTag::Segment {
        return Err(Error::invalid("poly1d spaces are evaluated on segment nodes"));
    }
    Ok(())
}
