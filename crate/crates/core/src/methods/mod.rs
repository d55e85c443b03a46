//! Solver pipelines and a-posteriori certification.
//!
//! Every pipeline samples a data map on finitely many points, solves the
//! resulting discrete problem, and then measures the data residual on
//! denser validation grids. Under the maximum principle that residual,
//! combined as `sup_boundary + C * sup_interior`, bounds the sup-norm error
//! of the solution regardless of how it was produced.

mod certificate;
pub mod study;

use nalgebra::DVector;

pub use certificate::{
    certificate_schema, flags, Bound, BoundKind, Certificate, StabilityField, Truth,
};

use crate::basis::{
    harmonic_basis, kernel_basis, mfs_basis, poly_basis_2d, Kernel, KernelFamily, TrialSpace,
};
use crate::discretize::{
    assemble, check_ratio, residual_summary, Approximant, FineGrids, ResidualSummary, SampledSystem,
};
use crate::error::{Error, Result};
use crate::geometry::{
    boundary_points, fictitious_boundary, interior_points, BoundaryFamily, Domain, NodeFamily,
    Point2, PointSet, PointTag,
};
use crate::operators::{apply_datamap, wp_constant, DataMap, InteriorOp, ProblemData, WpConstant};
use crate::solve::{gram_solve, least_squares, minimax_lawson, FitResult, LsqOptions, SolverKind};
use crate::stability::stability_sup_rows;

/// Rows-per-column floor applied by every pipeline.
pub const OVERSAMPLING_FLOOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub options: LsqOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: SolverKind::Lsq,
            options: LsqOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn run(&self, system: &SampledSystem) -> Result<FitResult> {
        match self.kind {
            SolverKind::Lsq => least_squares(system, &self.options),
            SolverKind::Lawson => minimax_lawson(system, &self.options),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub report_stability: bool,
    pub oversampling_floor: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            report_stability: false,
            oversampling_floor: OVERSAMPLING_FLOOR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrefftzParams {
    pub max_order: usize,
    pub n_boundary: usize,
    pub family: BoundaryFamily,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfsParams {
    pub n_charges: usize,
    pub factor: f64,
    pub n_boundary: usize,
    pub family: BoundaryFamily,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsParams {
    /// Spacing of the kernel-centre grid.
    pub h: f64,
    pub kernel: Kernel,
    pub operator: InteriorOp,
    /// Interior collocation points per kernel centre.
    pub oversampling: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HomogeneousStep {
    Trefftz(TrefftzParams),
    Mfs(MfsParams),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrmParams {
    pub mps: MpsParams,
    pub boundary: HomogeneousStep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollocationParams {
    pub kernel: Kernel,
    pub operator: InteriorOp,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub family: BoundaryFamily,
}

#[derive(Clone, Debug)]
pub struct MethodOutput {
    pub certificate: Certificate,
    pub approximant: Approximant,
}

fn empty_interior() -> PointSet {
    PointSet::new(Vec::new(), PointTag::Interior, NodeFamily::Custom).expect("empty set")
}

/// Interior weight and bound kind for a data map.
fn weight_and_kind(map: &DataMap) -> (f64, BoundKind) {
    match wp_constant(map) {
        Ok(WpConstant::Barrier(c)) => (c, BoundKind::MaxPrinciple),
        Ok(WpConstant::BoundaryOnly) => (0.0, BoundKind::MaxPrinciple),
        Err(_) => (1.0, BoundKind::ResidualOnly),
    }
}

fn truth(approx: &Approximant, data: &dyn ProblemData, fine: &FineGrids) -> Result<Option<Truth>> {
    let mut sup = 0.0f64;
    for p in fine.interior.points() {
        let Some(u) = data.exact(p) else {
            return Ok(None);
        };
        sup = sup.max((u - approx.value(p)?).abs());
    }
    Ok(Some(Truth { sup_error: sup }))
}

struct Assembled<'a> {
    method: &'static str,
    map: DataMap,
    space: TrialSpace,
    interior: PointSet,
    boundary: PointSet,
    data: &'a dyn ProblemData,
    kind: BoundKind,
    weight: f64,
}

/// Fits, then evaluates residuals on fine grids and fills the certificate.
fn fit_and_certify(
    job: Assembled<'_>,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    let system = assemble(&job.space, &job.map, &job.interior, &job.boundary, job.data, job.weight)?;
    let fit = solver.run(&system)?;
    let approx = Approximant::single(job.space.clone(), fit.coeffs.clone());
    let fine = FineGrids::new(&job.map.domain, &job.interior, &job.boundary)?;
    let residual = residual_summary(&system, &approx, &job.map, job.data, &fit.coeffs, &fine)?;
    let mut flag_list = Vec::new();
    if !fit.converged {
        flag_list.push(flags::UNCONVERGED.to_string());
    }
    if fit.truncated > 0 {
        flag_list.push(flags::SVD_TRUNCATED.to_string());
    }
    let stability = if opts.report_stability {
        single_block_stability(&job, &system, &fine)?
    } else {
        None
    };
    if opts.report_stability && stability.is_none() {
        flag_list.push(flags::STABILITY_UNSUPPORTED.to_string());
    }
    let certificate = Certificate {
        method: job.method.into(),
        m: job.space.dim(),
        n_interior: system.n_interior,
        n_boundary: system.n_boundary,
        oversampling_ratio: system.oversampling_ratio(),
        coefficients: fit.coeffs,
        bound: Bound {
            value: residual.combined,
            kind: job.kind,
        },
        residual,
        stability,
        truth: truth(&approx, job.data, &fine)?,
        flags: flag_list,
        steps: Vec::new(),
        timestamp: None,
    };
    Ok(MethodOutput {
        certificate,
        approximant: approx,
    })
}

/// Sup-norm stability of the sampled block when only one block is active.
fn single_block_stability(
    job: &Assembled<'_>,
    system: &SampledSystem,
    fine: &FineGrids,
) -> Result<Option<StabilityField>> {
    let empty_b = PointSet::new(Vec::new(), PointTag::Boundary, NodeFamily::Custom)?;
    let fine_rows = match (system.n_interior > 0, system.n_boundary > 0) {
        (true, false) => apply_datamap(&job.space, &job.map, &fine.interior, &empty_b)?.0,
        (false, true) => apply_datamap(&job.space, &job.map, &empty_interior(), &fine.boundary)?.0,
        _ => return Ok(None),
    };
    let (c, method) = stability_sup_rows(&system.matrix, &fine_rows)?;
    Ok(Some(StabilityField {
        c: c.is_finite().then_some(c),
        method,
    }))
}

/// Harmonic polynomials fitted to boundary data.
pub fn solve_trefftz(
    domain: &Domain,
    data: &dyn ProblemData,
    params: &TrefftzParams,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    if !data.is_harmonic() {
        return Err(Error::config(format!(
            "Trefftz needs a harmonic solution; `{}` is not",
            data.label()
        )));
    }
    let space = harmonic_basis(params.max_order);
    check_ratio(params.n_boundary, space.dim(), opts.oversampling_floor)?;
    let boundary = boundary_points(domain, params.n_boundary, params.family)?;
    fit_and_certify(
        Assembled {
            method: "trefftz",
            map: DataMap::new(InteriorOp::None, domain.clone()),
            space,
            interior: empty_interior(),
            boundary,
            data,
            kind: BoundKind::MaxPrinciple,
            weight: 0.0,
        },
        solver,
        opts,
    )
}

/// Fundamental solutions on a fictitious circle fitted to boundary data.
pub fn solve_mfs(
    domain: &Domain,
    data: &dyn ProblemData,
    params: &MfsParams,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    if !data.is_harmonic() {
        return Err(Error::config(format!(
            "MFS needs a harmonic solution; `{}` is not",
            data.label()
        )));
    }
    let charges = fictitious_boundary(domain, params.factor, params.n_charges)?;
    let space = mfs_basis(&charges, domain)?;
    check_ratio(params.n_boundary, space.dim(), opts.oversampling_floor)?;
    let boundary = boundary_points(domain, params.n_boundary, params.family)?;
    fit_and_certify(
        Assembled {
            method: "mfs",
            map: DataMap::new(InteriorOp::None, domain.clone()),
            space,
            interior: empty_interior(),
            boundary,
            data,
            kind: BoundKind::MaxPrinciple,
            weight: 0.0,
        },
        solver,
        opts,
    )
}

/// Kernel centres on a grid of spacing `h` covering the domain plus one
/// spacing of margin.
pub fn mps_centers(domain: &Domain, h: f64) -> Result<PointSet> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("centre spacing must be positive, got {h}")));
    }
    let c = domain.centroid();
    let (ax, ay, bx, by) = domain.bounding_box();
    let nx = (((bx - ax) * 0.5 + h) / h).floor() as i64;
    let ny = (((by - ay) * 0.5 + h) / h).floor() as i64;
    let mut pts = Vec::new();
    for j in -ny..=ny {
        for i in -nx..=nx {
            let p = Point2::new(c.x + i as f64 * h, c.y + j as f64 * h)?;
            let dist = if domain.contains(&p) {
                0.0
            } else {
                domain.boundary_distance(&p)
            };
            if dist <= h * (1.0 + 1e-12) {
                pts.push(p);
            }
        }
    }
    PointSet::new(pts, PointTag::Interior, NodeFamily::Grid)
}

/// Method of particular solutions: kernel translates whose operator images
/// are fitted to the interior data. No boundary control.
pub fn solve_mps(
    domain: &Domain,
    data: &dyn ProblemData,
    params: &MpsParams,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    if params.operator == InteriorOp::None {
        return Err(Error::config("MPS needs an interior operator"));
    }
    if params.oversampling < opts.oversampling_floor {
        return Err(Error::OversamplingViolation {
            rows: 0,
            cols: 0,
            ratio: params.oversampling,
            floor: opts.oversampling_floor,
        });
    }
    let centers = mps_centers(domain, params.h)?;
    let space = kernel_basis(&centers, params.kernel)?;
    let target = (params.oversampling * space.dim() as f64).ceil() as usize;
    let interior = interior_points(domain, target)?;
    check_ratio(interior.len(), space.dim(), opts.oversampling_floor)?;
    let map = DataMap::new(params.operator, domain.clone());
    let (weight, _) = weight_and_kind(&map);
    fit_and_certify(
        Assembled {
            method: "mps",
            map,
            space,
            interior,
            boundary: PointSet::new(Vec::new(), PointTag::Boundary, NodeFamily::Custom)?,
            data,
            kind: BoundKind::ResidualOnly,
            weight,
        },
        solver,
        opts,
    )
}

/// Boundary data corrected by a particular solution.
struct Corrected<'a> {
    base: &'a dyn ProblemData,
    particular: &'a Approximant,
}

impl ProblemData for Corrected<'_> {
    fn interior_rhs(&self, _op: InteriorOp, _p: &Point2) -> f64 {
        0.0
    }

    fn boundary_rhs(&self, p: &Point2) -> f64 {
        self.base.boundary_rhs(p) - self.particular.value(p).unwrap_or(f64::NAN)
    }

    fn exact(&self, p: &Point2) -> Option<f64> {
        Some(self.base.exact(p)? - self.particular.value(p).ok()?)
    }

    fn is_harmonic(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        format!("{} (corrected)", self.base.label())
    }
}

/// True when the interior data vanishes on a probe grid.
fn interior_data_vanishes(domain: &Domain, data: &dyn ProblemData, op: InteriorOp) -> Result<bool> {
    let probe = interior_points(domain, 256)?;
    Ok(probe.points().iter().all(|p| data.interior_rhs(op, p) == 0.0))
}

/// Dual reciprocity: MPS for the interior data, then a Trefftz or MFS solve
/// of the homogeneous problem with corrected boundary data. The bound is
/// `eps_T + C * eps_MPS`.
pub fn solve_drm(
    domain: &Domain,
    data: &dyn ProblemData,
    params: &DrmParams,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    let map = DataMap::new(params.mps.operator, domain.clone());
    let (weight, kind) = weight_and_kind(&map);
    let skip = interior_data_vanishes(domain, data, params.mps.operator)?;
    let step1 = if skip {
        None
    } else {
        Some(solve_mps(domain, data, &params.mps, solver, opts).map_err(|e| e.in_step("MPS step"))?)
    };
    let particular = step1
        .as_ref()
        .map(|s| s.approximant.clone())
        .unwrap_or_default();
    let corrected = Corrected {
        base: data,
        particular: &particular,
    };
    let step2 = match &params.boundary {
        HomogeneousStep::Trefftz(p) => solve_trefftz(domain, &corrected, p, solver, opts),
        HomogeneousStep::Mfs(p) => solve_mfs(domain, &corrected, p, solver, opts),
    }
    .map_err(|e| e.in_step("boundary step"))?;

    let mut approximant = particular.clone();
    approximant.parts.extend(step2.approximant.parts.iter().cloned());

    let c2 = &step2.certificate;
    let eps_t = c2.residual.fine_sup_boundary;
    let (eps_mps, step1_bound, disc_i, n_int, l2_sq) = match &step1 {
        Some(s) => {
            let r = &s.certificate.residual;
            let n = s.certificate.n_interior;
            (
                r.fine_sup_interior,
                s.certificate.bound.value,
                r.discrete_sup / weight.max(f64::MIN_POSITIVE),
                n,
                r.discrete_l2 * r.discrete_l2 * n as f64,
            )
        }
        None => (0.0, 0.0, 0.0, 0, 0.0),
    };
    let n_bdy = c2.n_boundary;
    let l2 = ((l2_sq + c2.residual.discrete_l2.powi(2) * n_bdy as f64) / (n_int + n_bdy) as f64).sqrt();
    let bound_value = c2.bound.value + step1_bound;
    let residual = ResidualSummary {
        discrete_sup: c2.residual.discrete_sup + weight * disc_i,
        discrete_l2: l2,
        fine_sup_interior: eps_mps,
        fine_sup_boundary: eps_t,
        combined: bound_value,
    };

    let fine_int = match &step1 {
        Some(_) => {
            let target = (8 * n_int).clamp(256, crate::discretize::FINE_CAP);
            interior_points(domain, target)?
        }
        None => interior_points(domain, 4 * n_bdy.max(64))?,
    };
    let fine = FineGrids {
        interior: fine_int,
        boundary: boundary_points(domain, 16, BoundaryFamily::Equidistant)?,
    };
    let mut flag_list: Vec<String> = Vec::new();
    if skip {
        flag_list.push(flags::MPS_SKIPPED.into());
    }
    for s in step1.iter().chain(std::iter::once(&step2)) {
        for f in &s.certificate.flags {
            if !flag_list.contains(f) {
                flag_list.push(f.clone());
            }
        }
    }
    let mut coefficients = Vec::new();
    for (_, c) in &approximant.parts {
        coefficients.extend_from_slice(c);
    }
    let m = approximant.dim();
    let steps: Vec<Certificate> = step1
        .iter()
        .map(|s| s.certificate.clone())
        .chain(std::iter::once(step2.certificate.clone()))
        .collect();
    let certificate = Certificate {
        method: "drm".into(),
        m,
        n_interior: n_int,
        n_boundary: n_bdy,
        oversampling_ratio: (n_int + n_bdy) as f64 / m as f64,
        coefficients,
        residual,
        bound: Bound {
            value: bound_value,
            kind: if skip { BoundKind::MaxPrinciple } else { kind },
        },
        stability: None,
        truth: truth(&approximant, data, &fine)?,
        flags: flag_list,
        steps,
        timestamp: None,
    };
    Ok(MethodOutput {
        certificate,
        approximant,
    })
}

/// Symmetric collocation: minimum-norm kernel recovery matching the
/// interior operator data and the boundary traces.
pub fn solve_collocation(
    domain: &Domain,
    data: &dyn ProblemData,
    params: &CollocationParams,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    if params.operator == InteriorOp::None {
        return Err(Error::config("collocation needs an interior operator"));
    }
    if params.kernel.family == KernelFamily::Matern52 {
        return Err(Error::config(
            "symmetric collocation needs four kernel derivatives; use matern72 or gaussian",
        ));
    }
    let map = DataMap::new(params.operator, domain.clone());
    let (weight, kind) = weight_and_kind(&map);
    let interior = interior_points(domain, params.n_interior)?;
    let boundary = boundary_points(domain, params.n_boundary, params.family)?;
    let sol = gram_solve(&params.kernel, &map, &interior, &boundary, data)?;
    let system = assemble(&sol.space, &map, &interior, &boundary, data, weight)?;
    let approx = Approximant::single(sol.space.clone(), sol.coeffs.clone());
    let fine = FineGrids::new(domain, &interior, &boundary)?;
    let residual = residual_summary(&system, &approx, &map, data, &sol.coeffs, &fine)?;
    let mut flag_list = Vec::new();
    if sol.jitter > 0.0 {
        flag_list.push(flags::JITTER.to_string());
    }
    if opts.report_stability {
        flag_list.push(flags::STABILITY_UNSUPPORTED.to_string());
    }
    let certificate = Certificate {
        method: "collocation".into(),
        m: sol.space.dim(),
        n_interior: interior.len(),
        n_boundary: boundary.len(),
        oversampling_ratio: 1.0,
        coefficients: sol.coeffs.clone(),
        bound: Bound {
            value: residual.combined,
            kind,
        },
        residual,
        stability: None,
        truth: truth(&approx, data, &fine)?,
        flags: flag_list,
        steps: Vec::new(),
        timestamp: None,
    };
    Ok(MethodOutput {
        certificate,
        approximant: approx,
    })
}

/// Polynomial baseline of the given degree: harmonic polynomials on the
/// boundary for harmonic data, full polynomials with interior and boundary
/// rows otherwise.
pub fn solve_poly_baseline(
    domain: &Domain,
    data: &dyn ProblemData,
    operator: InteriorOp,
    degree: usize,
    solver: &SolverConfig,
    opts: &CertifyOptions,
) -> Result<MethodOutput> {
    if data.is_harmonic() {
        let m = 2 * degree + 1;
        let params = TrefftzParams {
            max_order: degree,
            n_boundary: (opts.oversampling_floor * m as f64).ceil() as usize,
            family: BoundaryFamily::Equidistant,
        };
        let mut out = solve_trefftz(domain, data, &params, solver, opts)?;
        out.certificate.method = "poly_baseline".into();
        return Ok(out);
    }
    if operator == InteriorOp::None {
        return Err(Error::config(
            "a polynomial baseline for non-harmonic data needs an interior operator",
        ));
    }
    let space = poly_basis_2d(degree, domain);
    let per_block = (opts.oversampling_floor * space.dim() as f64).ceil() as usize;
    let map = DataMap::new(operator, domain.clone());
    let (weight, kind) = weight_and_kind(&map);
    fit_and_certify(
        Assembled {
            method: "poly_baseline",
            map,
            space,
            interior: interior_points(domain, per_block)?,
            boundary: boundary_points(domain, per_block, BoundaryFamily::Equidistant)?,
            data,
            kind,
            weight,
        },
        solver,
        opts,
    )
}

/// Fitted values of an approximant on a set of points.
pub fn values_on(approx: &Approximant, points: &[Point2]) -> Result<DVector<f64>> {
    let vals = points
        .iter()
        .map(|p| approx.value(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}
