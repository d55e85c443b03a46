use nalgebra::{Cholesky, DMatrix, DVector};

use crate::basis::{Kernel, KernelFamily, RadialFunction, RadialProfile, TrialSpace};
use crate::error::{Error, Result};
use crate::geometry::{Point2, PointSet};
use crate::operators::{DataMap, InteriorOp, ProblemData};

/// A data functional: the interior operator or the trace at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    Interior(Point2),
    Trace(Point2),
}

impl Functional {
    pub fn location(&self) -> Point2 {
        match self {
            Functional::Interior(p) | Functional::Trace(p) => *p,
        }
    }
}

/// `phi`, `L phi` and `L L phi` as radial profiles.
struct KernelImages {
    value: RadialProfile,
    once: Option<RadialProfile>,
    twice: Option<RadialProfile>,
}

fn apply_op(op: InteriorOp, f: &RadialProfile) -> Result<RadialProfile> {
    let lap = f.laplacian()?;
    Ok(match op {
        InteriorOp::NegLaplace => lap.scaled(-1.0),
        InteriorOp::IdMinusLaplace => f.combine(1.0, &lap, -1.0),
        InteriorOp::None => unreachable!("no interior operator"),
    })
}

fn kernel_images(kernel: &Kernel, op: InteriorOp, need_interior: bool) -> Result<KernelImages> {
    let value = kernel.profile();
    if !need_interior {
        return Ok(KernelImages {
            value,
            once: None,
            twice: None,
        });
    }
    if op == InteriorOp::None {
        return Err(Error::config(
            "interior functionals need an interior operator",
        ));
    }
    let once = apply_op(op, &value)?;
    let twice = apply_op(op, &once)?;
    Ok(KernelImages {
        value,
        once: Some(once),
        twice: Some(twice),
    })
}

impl KernelImages {
    fn entry(&self, a: &Functional, b: &Functional) -> f64 {
        let r = a.location().dist(&b.location());
        match (a, b) {
            (Functional::Trace(_), Functional::Trace(_)) => self.value.eval(r),
            (Functional::Interior(_), Functional::Interior(_)) => {
                self.twice.as_ref().expect("interior images").eval(r)
            }
            _ => self.once.as_ref().expect("interior images").eval(r),
        }
    }
}

/// Gramian `G_ij = lambda_i^x lambda_j^y K(x, y)`.
pub fn gram_matrix(kernel: &Kernel, op: InteriorOp, functionals: &[Functional]) -> Result<DMatrix<f64>> {
    let need = functionals
        .iter()
        .any(|f| matches!(f, Functional::Interior(_)));
    let images = kernel_images(kernel, op, need)?;
    let n = functionals.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = images.entry(&functionals[i], &functionals[j]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct GramSolution {
    pub coeffs: Vec<f64>,
    pub jitter: f64,
    pub gram: DMatrix<f64>,
    pub functionals: Vec<Functional>,
    pub data: Vec<f64>,
    /// Representers `lambda_j^y K(., y)`; `sum_j coeffs[j] * v_j` is the
    /// minimum-norm recovery.
    pub space: TrialSpace,
}

/// Symmetric collocation: solves `G c = data` with escalating jitter.
pub fn gram_solve(
    kernel: &Kernel,
    map: &DataMap,
    interior_pts: &PointSet,
    boundary_pts: &PointSet,
    data: &dyn ProblemData,
) -> Result<GramSolution> {
    if kernel.family == KernelFamily::Matern52 && !interior_pts.is_empty() {
        return Err(Error::config(
            "interior functionals need four kernel derivatives; use matern72 or gaussian",
        ));
    }
    let functionals: Vec<Functional> = interior_pts
        .points()
        .iter()
        .map(|&p| Functional::Interior(p))
        .chain(boundary_pts.points().iter().map(|&p| Functional::Trace(p)))
        .collect();
    if functionals.is_empty() {
        return Err(Error::invalid("gram_solve needs at least one functional"));
    }
    let rhs: Vec<f64> = interior_pts
        .points()
        .iter()
        .map(|p| data.interior_rhs(map.interior, p))
        .chain(boundary_pts.points().iter().map(|p| data.boundary_rhs(p)))
        .collect();
    let gram = gram_matrix(kernel, map.interior, &functionals)?;
    let n = functionals.len();
    let scale = gram.trace() / n as f64;
    let b = DVector::from_column_slice(&rhs);
    let mut solved = None;
    let mut last_jitter = 0.0;
    for jitter in [0.0, 1e-12 * scale, 1e-10 * scale] {
        last_jitter = jitter;
        let mut g = gram.clone();
        for i in 0..n {
            g[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(g) {
            let c = chol.solve(&b);
            if c.iter().all(|v| v.is_finite()) {
                solved = Some((c, jitter));
                break;
            }
        }
    }
    let Some((c, jitter)) = solved else {
        return Err(Error::IllConditionedGram { jitter: last_jitter });
    };
    let images = kernel_images(kernel, map.interior, interior_pts.len() > 0)?;
    let functions = functionals
        .iter()
        .map(|f| match f {
            Functional::Trace(p) => RadialFunction::new(*p, images.value.clone()),
            Functional::Interior(p) => {
                RadialFunction::new(*p, images.once.clone().expect("interior images"))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GramSolution {
        coeffs: c.as_slice().to_vec(),
        jitter,
        gram,
        functionals,
        data: rhs,
        space: TrialSpace::Radial {
            kernel: *kernel,
            functions,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_points, interior_points, BoundaryFamily, Domain, NodeFamily, PointTag};
    use crate::operators::ManufacturedCase;

    #[test]
    fn single_trace_functional_reproduces_value() {
        let disk = Domain::unit_disk();
        let map = DataMap::new(InteriorOp::NegLaplace, disk.clone());
        let empty = PointSet::new(vec![], PointTag::Interior, NodeFamily::Custom).unwrap();
        let bp = PointSet::on_domain(&disk, vec![Point2::xy(0.0, 1.0)], PointTag::Boundary, NodeFamily::Custom)
            .unwrap();
        let case = ManufacturedCase::ExpHarmonic;
        let k = Kernel::new(KernelFamily::Matern72, 1.3).unwrap();
        let sol = gram_solve(&k, &map, &empty, &bp, &case).unwrap();
        let v = sol.space.combine(&sol.coeffs, &Point2::xy(0.0, 1.0), crate::basis::Evaluator::Value).unwrap();
        assert!((v - case.u(&Point2::xy(0.0, 1.0))).abs() < 1e-15);
        assert_eq!(sol.jitter, 0.0);
    }

    #[test]
    fn trace_gram_is_kernel_matrix_and_spd() {
        let disk = Domain::unit_disk();
        let bp = boundary_points(&disk, 12, BoundaryFamily::Equidistant).unwrap();
        let k = Kernel::new(KernelFamily::Gaussian, 1.0).unwrap();
        let f: Vec<Functional> = bp.points().iter().map(|&p| Functional::Trace(p)).collect();
        let g = gram_matrix(&k, InteriorOp::None, &f).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let r = bp.points()[i].dist(&bp.points()[j]);
                assert!((g[(i, j)] - k.eval(r)).abs() < 1e-15);
            }
        }
        let eig = g.symmetric_eigenvalues();
        assert!(eig.min() > 0.0);
    }

    #[test]
    fn matern52_is_rejected() {
        let disk = Domain::unit_disk();
        let map = DataMap::new(InteriorOp::NegLaplace, disk.clone());
        let ip = interior_points(&disk, 5).unwrap();
        let bp = boundary_points(&disk, 8, BoundaryFamily::Equidistant).unwrap();
        let k = Kernel::new(KernelFamily::Matern52, 1.0).unwrap();
        assert!(matches!(
            gram_solve(&k, &map, &ip, &bp, &ManufacturedCase::GaussianBump),
            Err(Error::InvalidConfiguration(_))
        ));
    }
}
