//! Sampled systems and residual evaluation on validation grids.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::TrialSpace;
use crate::error::{Error, Result};
use crate::geometry::{boundary_points, interior_points, BoundaryFamily, Domain, PointSet, PointTag};
use crate::operators::{apply_datamap, DataMap, InteriorOp, ProblemData, RowKind, RowMeta};

/// Fine validation grids default to this multiple of the sampling density.
pub const FINE_FACTOR: usize = 8;
/// Cap on generated fine points per block.
pub const FINE_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct SampledSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub rows: Vec<RowMeta>,
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Weight of the interior block in the combined residual.
    pub interior_weight: f64,
}

impl SampledSystem {
    /// Wraps a raw matrix and right-hand side, treating every row as a
    /// boundary functional. Used for plain discrete fitting problems.
    pub fn from_parts(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != rhs.len() {
            return Err(Error::invalid(format!(
                "matrix has {} rows but rhs has {} entries",
                matrix.nrows(),
                rhs.len()
            )));
        }
        check_ratio(matrix.nrows(), matrix.ncols(), 1.0)?;
        let n = matrix.nrows();
        let rows = (0..n)
            .map(|_| RowMeta {
                kind: RowKind::Boundary,
                location: crate::geometry::Point2::xy(0.0, 0.0),
                weight: 1.0,
            })
            .collect();
        Ok(SampledSystem {
            matrix,
            rhs,
            rows,
            n_interior: 0,
            n_boundary: n,
            interior_weight: 0.0,
        })
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn oversampling_ratio(&self) -> f64 {
        self.nrows() as f64 / self.ncols() as f64
    }

    /// `b - A c`.
    pub fn residual(&self, coeffs: &[f64]) -> DVector<f64> {
        let c = DVector::from_column_slice(coeffs);
        &self.rhs - &self.matrix * c
    }

    /// Block sups `(interior, boundary)` of a residual vector.
    pub fn block_sups(&self, residual: &DVector<f64>) -> (f64, f64) {
        let mut sup = (0.0f64, 0.0f64);
        for (r, meta) in residual.iter().zip(&self.rows) {
            match meta.kind {
                RowKind::Interior => sup.0 = sup.0.max(r.abs()),
                RowKind::Boundary => sup.1 = sup.1.max(r.abs()),
            }
        }
        sup
    }
}

pub(crate) fn check_ratio(rows: usize, cols: usize, floor: f64) -> Result<()> {
    let ratio = rows as f64 / cols.max(1) as f64;
    if cols == 0 || ratio < floor {
        return Err(Error::OversamplingViolation {
            rows,
            cols,
            ratio,
            floor,
        });
    }
    Ok(())
}

/// Assembles `A` from the data map and `b = (f_L at interior points, g at
/// boundary points)`.
pub fn assemble(
    space: &TrialSpace,
    map: &DataMap,
    interior_pts: &PointSet,
    boundary_pts: &PointSet,
    data: &dyn ProblemData,
    interior_weight: f64,
) -> Result<SampledSystem> {
    let rows = interior_pts.len() + boundary_pts.len();
    check_ratio(rows, space.dim(), 1.0)?;
    let (matrix, meta) = apply_datamap(space, map, interior_pts, boundary_pts)?;
    let rhs = DVector::from_iterator(
        rows,
        interior_pts
            .points()
            .iter()
            .map(|p| data.interior_rhs(map.interior, p))
            .chain(boundary_pts.points().iter().map(|p| data.boundary_rhs(p))),
    );
    Ok(SampledSystem {
        matrix,
        rhs,
        rows: meta,
        n_interior: interior_pts.len(),
        n_boundary: boundary_pts.len(),
        interior_weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ResidualSummary {
    pub discrete_sup: f64,
    pub discrete_l2: f64,
    pub fine_sup_interior: f64,
    pub fine_sup_boundary: f64,
    pub combined: f64,
}

/// A linear combination of trial functions, possibly from several spaces.
#[derive(Clone, Debug, Default)]
pub struct Approximant {
    pub parts: Vec<(TrialSpace, Vec<f64>)>,
}

impl Approximant {
    pub fn single(space: TrialSpace, coeffs: Vec<f64>) -> Self {
        Approximant {
            parts: vec![(space, coeffs)],
        }
    }

    pub fn dim(&self) -> usize {
        self.parts.iter().map(|(s, _)| s.dim()).sum()
    }

    /// `(value, laplacian)` at `p`.
    pub fn eval(&self, p: &crate::geometry::Point2) -> Result<(f64, f64)> {
        let mut value = 0.0;
        let mut lap = 0.0;
        for (space, coeffs) in &self.parts {
            let mut full = vec![[0.0; 4]; space.dim()];
            space.eval_full(p, &mut full)?;
            for (f, c) in full.iter().zip(coeffs) {
                value += c * f[0];
                lap += c * f[3];
            }
        }
        Ok((value, lap))
    }

    pub fn value(&self, p: &crate::geometry::Point2) -> Result<f64> {
        Ok(self.eval(p)?.0)
    }
}

/// Fine validation grids: the sampling points joined with denser generated
/// grids (`FINE_FACTOR` times the sampling count, capped at `FINE_CAP`).
#[derive(Clone, Debug)]
pub struct FineGrids {
    pub interior: PointSet,
    pub boundary: PointSet,
}

impl FineGrids {
    pub fn new(domain: &Domain, interior_pts: &PointSet, boundary_pts: &PointSet) -> Result<Self> {
        let base = interior_pts.len().max(boundary_pts.len()).max(16);
        let n_int = (FINE_FACTOR * interior_pts.len().max(base)).min(FINE_CAP);
        let n_bdy = (FINE_FACTOR * boundary_pts.len().max(base)).min(FINE_CAP);
        let gen_int = interior_points(domain, n_int)?;
        let gen_bdy = boundary_points(domain, n_bdy, BoundaryFamily::Equidistant)?;
        let interior = if interior_pts.is_empty() {
            gen_int
        } else {
            interior_pts.union(&gen_int)
        };
        let boundary = if boundary_pts.is_empty() {
            gen_bdy
        } else {
            boundary_pts.union(&gen_bdy)
        };
        debug_assert_eq!(interior.tag(), PointTag::Interior);
        debug_assert_eq!(boundary.tag(), PointTag::Boundary);
        Ok(FineGrids { interior, boundary })
    }
}

/// Block sups of `f - D(u)` on fine grids: `(interior, boundary)`. The
/// interior block is skipped for boundary-only maps.
pub fn fine_residuals(
    approx: &Approximant,
    map: &DataMap,
    data: &dyn ProblemData,
    fine: &FineGrids,
    with_interior: bool,
) -> Result<(f64, f64)> {
    let mut sup_i = 0.0f64;
    if with_interior && map.interior != InteriorOp::None {
        for p in fine.interior.points() {
            let (v, lap) = approx.eval(p)?;
            let r = data.interior_rhs(map.interior, p) - map.interior.apply(v, lap);
            sup_i = sup_i.max(r.abs());
        }
    }
    let mut sup_b = 0.0f64;
    for p in fine.boundary.points() {
        let r = data.boundary_rhs(p) - approx.value(p)?;
        sup_b = sup_b.max(r.abs());
    }
    Ok((sup_i, sup_b))
}

/// Discrete and fine-grid residuals. The combined residual is
/// `sup_boundary + w * sup_interior` with `w` the system's interior weight.
pub fn residual_summary(
    system: &SampledSystem,
    approx: &Approximant,
    map: &DataMap,
    data: &dyn ProblemData,
    coeffs: &[f64],
    fine: &FineGrids,
) -> Result<ResidualSummary> {
    let r = system.residual(coeffs);
    let (disc_i, disc_b) = system.block_sups(&r);
    let w = system.interior_weight;
    let discrete_l2 = (r.norm_squared() / r.len().max(1) as f64).sqrt();
    let has_interior = system.n_interior > 0;
    let has_boundary = system.n_boundary > 0;
    let (fine_i, mut fine_b) = fine_residuals(approx, map, data, fine, has_interior)?;
    if !has_boundary {
        fine_b = 0.0;
    }
    Ok(ResidualSummary {
        discrete_sup: disc_b + w * disc_i,
        discrete_l2,
        fine_sup_interior: fine_i,
        fine_sup_boundary: fine_b,
        combined: fine_b + w * fine_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::harmonic_basis;
    use crate::geometry::NodeFamily;
    use crate::operators::{manufactured, ManufacturedCase};

    fn disk_trefftz() -> (Domain, DataMap, PointSet, PointSet) {
        let disk = Domain::unit_disk();
        let map = DataMap::new(InteriorOp::None, disk.clone());
        let empty = PointSet::new(vec![], PointTag::Interior, NodeFamily::Custom).unwrap();
        let bp = boundary_points(&disk, 8, BoundaryFamily::Equidistant).unwrap();
        (disk, map, empty, bp)
    }

    #[test]
    fn assemble_shape_and_rhs() {
        let (_, map, empty, bp) = disk_trefftz();
        let case = manufactured("harmonic_cubic").unwrap();
        let sys = assemble(&harmonic_basis(1), &map, &empty, &bp, &case, 0.0).unwrap();
        assert_eq!((sys.nrows(), sys.ncols()), (8, 3));
        assert_eq!(sys.rhs[0], 1.0);
        for (i, p) in bp.points().iter().enumerate() {
            assert_eq!(sys.rhs[i], case.u(p));
        }
        assert_eq!(sys.n_boundary + sys.n_interior, sys.nrows());
    }

    #[test]
    fn underdetermined_is_rejected() {
        let (_, map, empty, bp) = disk_trefftz();
        let case = manufactured("harmonic_cubic").unwrap();
        assert!(matches!(
            assemble(&harmonic_basis(5), &map, &empty, &bp, &case, 0.0),
            Err(Error::OversamplingViolation { .. })
        ));
    }

    #[test]
    fn exact_and_zero_coefficients() {
        let (disk, map, empty, _) = disk_trefftz();
        let case = ManufacturedCase::HarmonicCubic;
        let space = harmonic_basis(3);
        let bp = boundary_points(&disk, 16, BoundaryFamily::Equidistant).unwrap();
        let sys = assemble(&space, &map, &empty, &bp, &case, 0.0).unwrap();
        let fine = FineGrids::new(&disk, &empty, &bp).unwrap();
        // Re z^3 is basis function 5
        let mut exact = vec![0.0; 7];
        exact[5] = 1.0;
        let approx = Approximant::single(space.clone(), exact.clone());
        let s = residual_summary(&sys, &approx, &map, &case, &exact, &fine).unwrap();
        assert!(s.combined < 1e-10 && s.discrete_sup < 1e-10 && s.discrete_l2 < 1e-10);

        let zero = vec![0.0; 7];
        let approx = Approximant::single(space, zero.clone());
        let s = residual_summary(&sys, &approx, &map, &case, &zero, &fine).unwrap();
        // brute force over the fine boundary grid
        let brute = fine
            .boundary
            .points()
            .iter()
            .map(|p| case.u(p).abs())
            .fold(0.0, f64::max);
        assert_eq!(s.fine_sup_boundary, brute);
        assert!((s.fine_sup_boundary - 1.0).abs() < 1e-12);
        assert!(s.fine_sup_boundary >= s.discrete_sup);
    }

    #[test]
    fn assembly_is_linear_in_data() {
        struct Scaled(ManufacturedCase, f64);
        impl ProblemData for Scaled {
            fn interior_rhs(&self, op: InteriorOp, p: &crate::geometry::Point2) -> f64 {
                self.1 * self.0.interior_rhs(op, p)
            }
            fn boundary_rhs(&self, p: &crate::geometry::Point2) -> f64 {
                self.1 * self.0.boundary_rhs(p)
            }
            fn exact(&self, _: &crate::geometry::Point2) -> Option<f64> {
                None
            }
            fn is_harmonic(&self) -> bool {
                false
            }
            fn label(&self) -> String {
                "scaled".into()
            }
        }
        let disk = Domain::unit_disk();
        let map = DataMap::new(InteriorOp::NegLaplace, disk.clone());
        let ip = interior_points(&disk, 20).unwrap();
        let bp = boundary_points(&disk, 20, BoundaryFamily::Equidistant).unwrap();
        let space = crate::basis::poly_basis_2d(3, &disk);
        let case = ManufacturedCase::GaussianBump;
        let a = assemble(&space, &map, &ip, &bp, &case, 0.25).unwrap();
        let b = assemble(&space, &map, &ip, &bp, &Scaled(case, -3.5), 0.25).unwrap();
        assert!((a.rhs * -3.5 - b.rhs).norm() < 1e-13);
    }
}
