//! Data maps `D(u) = (L u |_Omega, u |_Gamma)` and manufactured solutions.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::TrialSpace;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, PointSet, PointTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum InteriorOp {
    /// `-Laplace`
    NegLaplace,
    /// `Id - Laplace`
    IdMinusLaplace,
    /// No interior functionals; the trial space must solve the homogeneous
    /// equation exactly.
    None,
}

impl InteriorOp {
    /// Applies the operator given a value and a Laplacian.
    pub fn apply(&self, value: f64, laplacian: f64) -> f64 {
        match self {
            InteriorOp::NegLaplace => -laplacian,
            InteriorOp::IdMinusLaplace => value - laplacian,
            InteriorOp::None => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataMap {
    pub interior: InteriorOp,
    pub domain: Domain,
}

impl DataMap {
    pub fn new(interior: InteriorOp, domain: Domain) -> Self {
        DataMap { interior, domain }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Interior,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowMeta {
    pub kind: RowKind,
    pub location: Point2,
    pub weight: f64,
}

/// Sampled data-map rows: `L u_j` at interior points stacked over `u_j` at
/// boundary points.
pub fn apply_datamap(
    space: &TrialSpace,
    map: &DataMap,
    interior_pts: &PointSet,
    boundary_pts: &PointSet,
) -> Result<(DMatrix<f64>, Vec<RowMeta>)> {
    if !interior_pts.is_empty() {
        if map.interior == InteriorOp::None {
            return Err(Error::config(
                "interior rows requested for a boundary-only data map",
            ));
        }
        if interior_pts.tag() != PointTag::Interior {
            return Err(Error::invalid("interior rows need an interior point set"));
        }
    }
    if !boundary_pts.is_empty() && boundary_pts.tag() != PointTag::Boundary {
        return Err(Error::invalid("boundary rows need a boundary point set"));
    }
    let m = space.dim();
    let rows = interior_pts.len() + boundary_pts.len();
    let mut mat = DMatrix::zeros(rows, m);
    let mut meta = Vec::with_capacity(rows);
    let mut full = vec![[0.0; 4]; m];
    for (i, p) in interior_pts.points().iter().enumerate() {
        space.eval_full(p, &mut full)?;
        for (j, f) in full.iter().enumerate() {
            mat[(i, j)] = map.interior.apply(f[0], f[3]);
        }
        meta.push(RowMeta {
            kind: RowKind::Interior,
            location: *p,
            weight: 1.0,
        });
    }
    let offset = interior_pts.len();
    for (i, p) in boundary_pts.points().iter().enumerate() {
        space.eval_full(p, &mut full)?;
        for (j, f) in full.iter().enumerate() {
            mat[(offset + i, j)] = f[0];
        }
        meta.push(RowMeta {
            kind: RowKind::Boundary,
            location: *p,
            weight: 1.0,
        });
    }
    Ok((mat, meta))
}

/// Right-hand-side data for a strong-form Dirichlet problem.
pub trait ProblemData: Sync {
    /// `L u*` at an interior point.
    fn interior_rhs(&self, op: InteriorOp, p: &Point2) -> f64;
    /// Dirichlet data `u*` on the boundary.
    fn boundary_rhs(&self, p: &Point2) -> f64;
    /// The exact solution, when known.
    fn exact(&self, p: &Point2) -> Option<f64>;
    /// True when `-Laplace u* = 0`.
    fn is_harmonic(&self) -> bool;
    fn label(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManufacturedCase {
    /// `Re z^3`
    HarmonicCubic,
    /// `Re e^z = e^x cos y`
    ExpHarmonic,
    /// `exp(-x^2 - y^2)`
    GaussianBump,
    /// `exp(a x + b y)`
    ExpLinear { a: f64, b: f64 },
}

impl fmt::Display for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManufacturedCase::HarmonicCubic => write!(f, "harmonic_cubic"),
            ManufacturedCase::ExpHarmonic => write!(f, "exp_harmonic"),
            ManufacturedCase::GaussianBump => write!(f, "gaussian_bump"),
            ManufacturedCase::ExpLinear { a, b } => write!(f, "exp_linear({a},{b})"),
        }
    }
}

impl ManufacturedCase {
    pub fn u(&self, p: &Point2) -> f64 {
        let (x, y) = (p.x, p.y);
        match *self {
            ManufacturedCase::HarmonicCubic => x * x * x - 3.0 * x * y * y,
            ManufacturedCase::ExpHarmonic => x.exp() * y.cos(),
            ManufacturedCase::GaussianBump => (-x * x - y * y).exp(),
            ManufacturedCase::ExpLinear { a, b } => (a * x + b * y).exp(),
        }
    }

    pub fn laplacian(&self, p: &Point2) -> f64 {
        match *self {
            ManufacturedCase::HarmonicCubic | ManufacturedCase::ExpHarmonic => 0.0,
            ManufacturedCase::GaussianBump => {
                let r2 = p.x * p.x + p.y * p.y;
                (4.0 * r2 - 4.0) * (-r2).exp()
            }
            ManufacturedCase::ExpLinear { a, b } => (a * a + b * b) * self.u(p),
        }
    }
}

impl ProblemData for ManufacturedCase {
    fn interior_rhs(&self, op: InteriorOp, p: &Point2) -> f64 {
        op.apply(self.u(p), self.laplacian(p))
    }

    fn boundary_rhs(&self, p: &Point2) -> f64 {
        self.u(p)
    }

    fn exact(&self, p: &Point2) -> Option<f64> {
        Some(self.u(p))
    }

    fn is_harmonic(&self) -> bool {
        match self {
            ManufacturedCase::HarmonicCubic | ManufacturedCase::ExpHarmonic => true,
            ManufacturedCase::ExpLinear { a, b } => *a == 0.0 && *b == 0.0,
            ManufacturedCase::GaussianBump => false,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// Looks up a manufactured case by name. `exp_linear(a,b)` takes numeric
/// parameters; a bare `exp_linear` means `a = b = 1`.
///
/// The analytic Laplacian is spot-checked against a five-point stencil
/// before the case is returned.
pub fn manufactured(name: &str) -> Result<ManufacturedCase> {
    let name = name.trim();
    let case = match name {
        "harmonic_cubic" => ManufacturedCase::HarmonicCubic,
        "exp_harmonic" => ManufacturedCase::ExpHarmonic,
        "gaussian_bump" => ManufacturedCase::GaussianBump,
        "exp_linear" => ManufacturedCase::ExpLinear { a: 1.0, b: 1.0 },
        _ => parse_exp_linear(name)
            .ok_or_else(|| Error::NotFound(format!("manufactured case `{name}`")))?,
    };
    check_consistency(&case)?;
    Ok(case)
}

fn parse_exp_linear(name: &str) -> Option<ManufacturedCase> {
    let args = name.strip_prefix("exp_linear(")?.strip_suffix(')')?;
    let mut parts = args.split(',').map(|s| s.trim().parse::<f64>());
    let a = parts.next()?.ok()?;
    let b = parts.next()?.ok()?;
    if parts.next().is_some() || !a.is_finite() || !b.is_finite() {
        return None;
    }
    Some(ManufacturedCase::ExpLinear { a, b })
}

fn check_consistency(case: &ManufacturedCase) -> Result<()> {
    let h = 1e-3;
    for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3), (0.5, -0.5)] {
        let p = Point2::xy(x, y);
        let fd = five_point_laplacian(|q| case.u(q), &p, h);
        let exact = case.laplacian(&p);
        if (fd - exact).abs() > 1e-5 * exact.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "case {case}: analytic Laplacian {exact} disagrees with stencil {fd}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn five_point_laplacian(f: impl Fn(&Point2) -> f64, p: &Point2, h: f64) -> f64 {
    let c = f(p);
    let e = f(&Point2::xy(p.x + h, p.y));
    let w = f(&Point2::xy(p.x - h, p.y));
    let n = f(&Point2::xy(p.x, p.y + h));
    let s = f(&Point2::xy(p.x, p.y - h));
    (e + w + n + s - 4.0 * c) / (h * h)
}

/// Constant in `|u|_inf,Omega <= |u|_inf,Gamma + C |L u|_inf,Omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WpConstant {
    /// Maximum principle with barrier constant `C` for the interior residual.
    Barrier(f64),
    /// Homogeneous problem: the boundary sup alone bounds the error.
    BoundaryOnly,
}

impl WpConstant {
    /// Weight applied to the interior residual in the data-space norm.
    pub fn interior_weight(&self) -> f64 {
        match self {
            WpConstant::Barrier(c) => *c,
            WpConstant::BoundaryOnly => 0.0,
        }
    }
}

/// Barrier constant for `-Laplace`: with `R` the circumradius about the
/// centroid `c`, the comparison function `(R^2 - |x - c|^2) / 4` has
/// `-Laplace = 1` and is nonnegative on the closed domain, so `C = R^2 / 4`.
pub fn wp_constant(map: &DataMap) -> Result<WpConstant> {
    match map.interior {
        InteriorOp::None => Ok(WpConstant::BoundaryOnly),
        InteriorOp::NegLaplace => {
            let r = map.domain.circumradius();
            Ok(WpConstant::Barrier(r * r / 4.0))
        }
        InteriorOp::IdMinusLaplace => Err(Error::UnsupportedCertificate(
            "no explicit well-posedness constant for Id - Laplace".into(),
        )),
    }
}

/// The comparison function behind [`wp_constant`].
pub fn barrier_function(domain: &Domain, p: &Point2) -> f64 {
    let c = domain.centroid();
    let r = domain.circumradius();
    let d2 = (p.x - c.x).powi(2) + (p.y - c.y).powi(2);
    (r * r - d2) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{harmonic_basis, kernel_basis, Evaluator, Kernel, KernelFamily};
    use crate::geometry::{boundary_points, interior_points, BoundaryFamily, NodeFamily};

    #[test]
    fn registry_examples() {
        let eh = manufactured("exp_harmonic").unwrap();
        let o = Point2::xy(0.0, 0.0);
        assert_eq!(eh.u(&o), 1.0);
        assert_eq!(eh.interior_rhs(InteriorOp::NegLaplace, &o), 0.0);

        let gb = manufactured("gaussian_bump").unwrap();
        assert_eq!(gb.interior_rhs(InteriorOp::IdMinusLaplace, &o), 5.0);
        let fd = five_point_laplacian(|q| gb.u(q), &o, 1e-4);
        assert!((fd + 4.0).abs() < 1e-5);

        let el = manufactured("exp_linear(1,1)").unwrap();
        let p = Point2::xy(0.3, -0.2);
        assert!((el.interior_rhs(InteriorOp::NegLaplace, &p) + 2.0 * el.u(&p)).abs() < 1e-15);
        assert_eq!(manufactured("exp_linear").unwrap(), el);
        assert_eq!(
            manufactured("exp_linear(2, -0.5)").unwrap(),
            ManufacturedCase::ExpLinear { a: 2.0, b: -0.5 }
        );

        assert!(matches!(manufactured("nope"), Err(Error::NotFound(_))));
        assert!(matches!(manufactured("exp_linear(1)"), Err(Error::NotFound(_))));
    }

    #[test]
    fn registry_matches_stencil_on_disk() {
        let disk = Domain::unit_disk();
        let pts = interior_points(&disk, 50).unwrap();
        for name in ["harmonic_cubic", "exp_harmonic", "gaussian_bump", "exp_linear(1,1)"] {
            let case = manufactured(name).unwrap();
            for p in pts.points().iter().take(50) {
                for op in [InteriorOp::NegLaplace, InteriorOp::IdMinusLaplace] {
                    let fd = op.apply(case.u(p), five_point_laplacian(|q| case.u(q), p, 1e-3));
                    assert!((fd - case.interior_rhs(op, p)).abs() < 1e-4, "{name}");
                }
            }
        }
    }

    #[test]
    fn harmonic_interior_block_vanishes() {
        let disk = Domain::unit_disk();
        let map = DataMap::new(InteriorOp::NegLaplace, disk.clone());
        let ip = interior_points(&disk, 30).unwrap();
        let bp = boundary_points(&disk, 12, BoundaryFamily::Equidistant).unwrap();
        let space = harmonic_basis(4);
        let (a, meta) = apply_datamap(&space, &map, &ip, &bp).unwrap();
        assert!(a.rows(0, ip.len()).iter().all(|&v| v == 0.0));
        let value = crate::basis::eval_basis(&space, &bp, Evaluator::Value).unwrap();
        assert_eq!(a.rows(ip.len(), bp.len()).clone_owned(), value);
        assert_eq!(meta.iter().filter(|m| m.kind == RowKind::Boundary).count(), 12);

        let trefftz = DataMap::new(InteriorOp::None, disk);
        assert!(matches!(
            apply_datamap(&space, &trefftz, &ip, &bp),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn kernel_center_entry_is_thirteen_thirds() {
        let disk = Domain::unit_disk();
        let c = PointSet::on_domain(&disk, vec![Point2::xy(0.0, 0.0)], PointTag::Interior, NodeFamily::Custom)
            .unwrap();
        let empty = PointSet::new(vec![], PointTag::Boundary, NodeFamily::Custom).unwrap();
        let space = kernel_basis(&c, Kernel::new(KernelFamily::Matern52, 1.0).unwrap()).unwrap();
        let map = DataMap::new(InteriorOp::IdMinusLaplace, disk);
        let (a, _) = apply_datamap(&space, &map, &c, &empty).unwrap();
        assert!((a[(0, 0)] - 13.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn wp_constants_and_barrier_identity() {
        let disk = Domain::unit_disk();
        let sq = Domain::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
        for (d, expect) in [(disk.clone(), 0.25), (sq, 0.5)] {
            let c = wp_constant(&DataMap::new(InteriorOp::NegLaplace, d.clone())).unwrap();
            assert!((c.interior_weight() - expect).abs() < 1e-15);
            // -Laplace of the barrier is 1; it vanishes at the farthest boundary point
            // and is nonnegative on the boundary.
            for k in 0..64 {
                let p = d.gamma(k as f64 / 64.0);
                assert!(barrier_function(&d, &p) >= -1e-15);
                let q = Point2::xy(0.5 * p.x, 0.5 * p.y);
                let lap = five_point_laplacian(|z| barrier_function(&d, z), &q, 1e-3);
                assert!((lap + 1.0).abs() < 1e-8);
            }
        }
        assert_eq!(
            wp_constant(&DataMap::new(InteriorOp::None, disk.clone())).unwrap(),
            WpConstant::BoundaryOnly
        );
        assert_eq!(WpConstant::BoundaryOnly.interior_weight(), 0.0);
        assert!(matches!(
            wp_constant(&DataMap::new(InteriorOp::IdMinusLaplace, disk)),
            Err(Error::UnsupportedCertificate(_))
        ));
    }
}
