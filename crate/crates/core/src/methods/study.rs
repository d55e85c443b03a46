//! Convergence studies over a size ladder, with a polynomial baseline.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use super::{
    solve_collocation, solve_drm, solve_mfs, solve_mps, solve_poly_baseline, solve_trefftz,
    Certificate, CertifyOptions, CollocationParams, DrmParams, HomogeneousStep, MfsParams,
    MpsParams, SolverConfig, TrefftzParams,
};
use crate::basis::{Kernel, KernelFamily};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryFamily, Domain};
use crate::operators::{InteriorOp, ManufacturedCase, ProblemData};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyMethod {
    Trefftz,
    Mfs,
    Mps,
    Drm,
    Collocation,
}

impl StudyMethod {
    pub fn name(&self) -> &'static str {
        match self {
            StudyMethod::Trefftz => "trefftz",
            StudyMethod::Mfs => "mfs",
            StudyMethod::Mps => "mps",
            StudyMethod::Drm => "drm",
            StudyMethod::Collocation => "collocation",
        }
    }
}

impl fmt::Display for StudyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trefftz" => StudyMethod::Trefftz,
            "mfs" => StudyMethod::Mfs,
            "mps" => StudyMethod::Mps,
            "drm" => StudyMethod::Drm,
            "collocation" => StudyMethod::Collocation,
            other => return Err(Error::NotFound(format!("method `{other}`"))),
        })
    }
}

/// Settings shared by every ladder entry.
///
/// The ladder value `size` is interpreted per method:
/// Trefftz uses it as the maximal order, MFS as the charge count, MPS as
/// the number of centre spacings across the bounding box, DRM as both
/// the MPS spacing count and the Trefftz order, and collocation as the
/// side of the interior grid (`size^2` interior and `4 size` boundary
/// functionals).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyOptions {
    pub operator: InteriorOp,
    pub kernel: Kernel,
    pub boundary_family: BoundaryFamily,
    /// Boundary points per trial function for boundary fits.
    pub oversampling: f64,
    pub mfs_factor: f64,
    pub solver: SolverConfig,
    pub certify: CertifyOptions,
    pub baseline: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            operator: InteriorOp::NegLaplace,
            kernel: Kernel::new(KernelFamily::Matern72, 1.0).expect("valid kernel"),
            boundary_family: BoundaryFamily::Equidistant,
            oversampling: 2.0,
            mfs_factor: 2.0,
            solver: SolverConfig::default(),
            certify: CertifyOptions::default(),
            baseline: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Baseline {
    pub degree: usize,
    pub certificate: std::result::Result<Certificate, String>,
}

#[derive(Clone, Debug)]
pub struct StudyRow {
    pub size: usize,
    pub certificate: std::result::Result<Certificate, String>,
    pub baseline: Option<Baseline>,
}

#[derive(Clone, Debug)]
pub struct StudyTable {
    pub method: StudyMethod,
    pub case: String,
    pub rows: Vec<StudyRow>,
}

pub const STUDY_CSV_HEADER: &str = "size,M,combined,bound,bound_kind,true_error,decay_ratio,\
baseline_degree,baseline_M,baseline_bound,baseline_true_error,status";

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl StudyTable {
    pub fn succeeded(&self) -> usize {
        self.rows.iter().filter(|r| r.certificate.is_ok()).count()
    }

    /// One CSV line per ladder entry. The decay ratio compares the combined
    /// residual with the previous successful entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(STUDY_CSV_HEADER);
        out.push('\n');
        let mut prev: Option<f64> = None;
        for row in &self.rows {
            let (m, combined, bound, kind, truth, ratio, status) = match &row.certificate {
                Ok(c) => {
                    let ratio = prev.map(|p| c.residual.combined / p);
                    prev = Some(c.residual.combined);
                    let kind = serde_json::to_value(c.bound.kind)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default();
                    let status = if c.flags.is_empty() {
                        "ok".to_string()
                    } else {
                        c.flags.join("|")
                    };
                    (
                        c.m.to_string(),
                        num(Some(c.residual.combined)),
                        num(Some(c.bound.value)),
                        kind,
                        num(c.truth.as_ref().map(|t| t.sup_error)),
                        num(ratio),
                        status,
                    )
                }
                Err(e) => (
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("failed: {}", e.replace([',', '\n'], ";")),
                ),
            };
            let (bd, bm, bb, bt) = match &row.baseline {
                Some(Baseline {
                    degree,
                    certificate: Ok(c),
                }) => (
                    degree.to_string(),
                    c.m.to_string(),
                    num(Some(c.bound.value)),
                    num(c.truth.as_ref().map(|t| t.sup_error)),
                ),
                Some(Baseline { degree, .. }) => {
                    (degree.to_string(), String::new(), String::new(), String::new())
                }
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{m},{combined},{bound},{kind},{truth},{ratio},{bd},{bm},{bb},{bt},{status}",
                row.size
            );
        }
        out
    }
}

const BASELINE_MAX_HARMONIC: usize = 40;
const BASELINE_MAX_DEGREE: usize = 20;

/// Polynomial degree whose space dimension best matches `m` without
/// exceeding it.
fn matched_degree(m: usize, harmonic: bool) -> usize {
    if harmonic {
        (m.saturating_sub(1) / 2).clamp(1, BASELINE_MAX_HARMONIC)
    } else {
        let mut d = 0;
        while (d + 2) * (d + 3) / 2 <= m && d < BASELINE_MAX_DEGREE {
            d += 1;
        }
        d.max(1)
    }
}

fn run_one(
    method: StudyMethod,
    size: usize,
    domain: &Domain,
    case: &ManufacturedCase,
    opts: &StudyOptions,
) -> Result<Certificate> {
    let boundary_count = |m: usize| (opts.oversampling * m as f64).ceil() as usize;
    let (ax, _, bx, _) = domain.bounding_box();
    let width = bx - ax;
    let mps = |size: usize| MpsParams {
        h: width / size as f64,
        kernel: opts.kernel,
        operator: opts.operator,
        oversampling: opts.oversampling,
    };
    let out = match method {
        StudyMethod::Trefftz => solve_trefftz(
            domain,
            case,
            &TrefftzParams {
                max_order: size,
                n_boundary: boundary_count(2 * size + 1),
                family: opts.boundary_family,
            },
            &opts.solver,
            &opts.certify,
        )?,
        StudyMethod::Mfs => solve_mfs(
            domain,
            case,
            &MfsParams {
                n_charges: size,
                factor: opts.mfs_factor,
                n_boundary: boundary_count(size),
                family: opts.boundary_family,
            },
            &opts.solver,
            &opts.certify,
        )?,
        StudyMethod::Mps => solve_mps(domain, case, &mps(size), &opts.solver, &opts.certify)?,
        StudyMethod::Drm => solve_drm(
            domain,
            case,
            &DrmParams {
                mps: mps(size),
                boundary: HomogeneousStep::Trefftz(TrefftzParams {
                    max_order: size,
                    n_boundary: boundary_count(2 * size + 1),
                    family: opts.boundary_family,
                }),
            },
            &opts.solver,
            &opts.certify,
        )?,
        StudyMethod::Collocation => solve_collocation(
            domain,
            case,
            &CollocationParams {
                kernel: opts.kernel,
                operator: opts.operator,
                n_interior: size * size,
                n_boundary: 4 * size,
                family: opts.boundary_family,
            },
            &opts.certify,
        )?,
    };
    Ok(out.certificate)
}

/// Runs `method` at every ladder size. Entries are independent and run in
/// parallel; the table keeps ladder order. A failing entry is recorded in
/// its row and the study continues.
pub fn convergence_study(
    method: StudyMethod,
    ladder: &[usize],
    domain: &Domain,
    case: &ManufacturedCase,
    opts: &StudyOptions,
) -> Result<StudyTable> {
    if ladder.is_empty() {
        return Err(Error::invalid("ladder must not be empty"));
    }
    if ladder.contains(&0) {
        return Err(Error::invalid("ladder sizes must be positive"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ladder must be strictly ascending"));
    }
    // MPS has no boundary control, so a polynomial fit is not comparable.
    let with_baseline = opts.baseline && method != StudyMethod::Mps;
    let rows = ladder
        .par_iter()
        .map(|&size| {
            let certificate = run_one(method, size, domain, case, opts).map_err(|e| e.to_string());
            let baseline = match (&certificate, with_baseline) {
                (Ok(c), true) => {
                    let degree = matched_degree(c.m, case.is_harmonic());
                    let certificate = solve_poly_baseline(
                        domain,
                        case,
                        opts.operator,
                        degree,
                        &opts.solver,
                        &opts.certify,
                    )
                    .map(|o| o.certificate)
                    .map_err(|e| e.to_string());
                    Some(Baseline {
                        degree,
                        certificate,
                    })
                }
                _ => None,
            };
            StudyRow {
                size,
                certificate,
                baseline,
            }
        })
        .collect();
    Ok(StudyTable {
        method,
        case: case.label(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_degrees() {
        assert_eq!(matched_degree(7, true), 3);
        assert_eq!(matched_degree(28, false), 6);
        assert_eq!(matched_degree(27, false), 5);
        assert_eq!(matched_degree(1, false), 1);
    }

    #[test]
    fn ladder_checks() {
        let disk = Domain::unit_disk();
        let case = ManufacturedCase::ExpHarmonic;
        let opts = StudyOptions::default();
        assert!(convergence_study(StudyMethod::Mfs, &[], &disk, &case, &opts).is_err());
        assert!(convergence_study(StudyMethod::Mfs, &[8, 4], &disk, &case, &opts).is_err());
    }

    #[test]
    fn single_entry_gives_single_row() {
        let disk = Domain::unit_disk();
        let case = ManufacturedCase::ExpHarmonic;
        let t = convergence_study(
            StudyMethod::Trefftz,
            &[4],
            &disk,
            &case,
            &StudyOptions::default(),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.to_csv().lines().count(), 2);
    }

    #[test]
    fn failures_are_recorded() {
        let disk = Domain::unit_disk();
        // non-harmonic data makes every Trefftz entry fail
        let case = ManufacturedCase::GaussianBump;
        let t = convergence_study(
            StudyMethod::Trefftz,
            &[2, 3],
            &disk,
            &case,
            &StudyOptions::default(),
        )
        .unwrap();
        assert_eq!(t.succeeded(), 0);
        assert!(t.to_csv().contains("failed"));
    }
}
