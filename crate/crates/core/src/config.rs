//! JSON run configuration for the `solve` subcommand.

use std::path::{Component, Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::basis::{Kernel, KernelFamily};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryFamily, Domain};
use crate::methods::{
    CertifyOptions, CollocationParams, DrmParams, HomogeneousStep, MfsParams, MpsParams,
    SolverConfig, TrefftzParams, OVERSAMPLING_FLOOR,
};
use crate::operators::InteriorOp;
use crate::solve::{LsqOptions, SolverKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    UnitDisk,
    Rectangle {
        /// `[ax, ay, bx, by]`
        bounds: [f64; 4],
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainSpec::UnitDisk => Ok(Domain::unit_disk()),
            DomainSpec::Rectangle { bounds: [ax, ay, bx, by] } => {
                Domain::rectangle(*ax, *ay, *bx, *by)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    #[serde(default = "default_operator")]
    pub operator: InteriorOp,
    /// Manufactured case, e.g. `exp_harmonic` or `exp_linear(1,2)`.
    pub case: String,
}

fn default_operator() -> InteriorOp {
    InteriorOp::NegLaplace
}

/// A kernel named as `kernel:<family>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub enum KernelName {
    #[serde(rename = "kernel:matern52")]
    Matern52,
    #[serde(rename = "kernel:matern72")]
    Matern72,
    #[serde(rename = "kernel:gaussian")]
    Gaussian,
}

impl From<KernelName> for KernelFamily {
    fn from(k: KernelName) -> Self {
        match k {
            KernelName::Matern52 => KernelFamily::Matern52,
            KernelName::Matern72 => KernelFamily::Matern72,
            KernelName::Gaussian => KernelFamily::Gaussian,
        }
    }
}

fn default_shape() -> f64 {
    1.0
}

fn default_factor() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMethod {
    Trefftz,
    Mfs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Trefftz {
        max_order: usize,
    },
    Mfs {
        n_charges: usize,
        #[serde(default = "default_factor")]
        factor: f64,
    },
    Mps {
        h: f64,
        basis: KernelName,
        #[serde(default = "default_shape")]
        shape: f64,
    },
    Drm {
        h: f64,
        basis: KernelName,
        #[serde(default = "default_shape")]
        shape: f64,
        boundary_method: BoundaryMethod,
        /// Trefftz order of the boundary step.
        #[serde(default)]
        max_order: Option<usize>,
        /// Charge count of an MFS boundary step.
        #[serde(default)]
        n_charges: Option<usize>,
        #[serde(default = "default_factor")]
        factor: f64,
    },
    Collocation {
        basis: KernelName,
        #[serde(default = "default_shape")]
        shape: f64,
    },
}

fn default_oversampling() -> f64 {
    OVERSAMPLING_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSpec {
    /// Boundary sample count; defaults to `oversampling` times the number
    /// of boundary trial functions.
    #[serde(default)]
    pub n_boundary: Option<usize>,
    /// Interior functional count for collocation.
    #[serde(default)]
    pub n_interior: Option<usize>,
    #[serde(default = "default_family")]
    pub boundary_family: BoundaryFamily,
    /// Rows per trial function; at least 2.
    #[serde(default = "default_oversampling")]
    pub oversampling: f64,
}

fn default_family() -> BoundaryFamily {
    BoundaryFamily::Equidistant
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec {
            n_boundary: None,
            n_interior: None,
            boundary_family: default_family(),
            oversampling: default_oversampling(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "default_svd_tol")]
    pub svd_tol: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_lawson_tol")]
    pub lawson_tol: f64,
}

fn default_solver() -> SolverKind {
    SolverKind::Lsq
}
fn default_svd_tol() -> f64 {
    LsqOptions::default().svd_tol
}
fn default_max_iterations() -> usize {
    LsqOptions::default().max_iterations
}
fn default_lawson_tol() -> f64 {
    LsqOptions::default().lawson_tol
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            solver: default_solver(),
            svd_tol: default_svd_tol(),
            max_iterations: default_max_iterations(),
            lawson_tol: default_lawson_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; relative paths resolve against the config file.
    pub dir: PathBuf,
    /// Certificate file name inside `dir`.
    #[serde(default = "default_certificate")]
    pub certificate: PathBuf,
}

fn default_certificate() -> PathBuf {
    PathBuf::from("certificate.json")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub method: MethodSpec,
    #[serde(default)]
    pub discretization: DiscretizationSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    pub output: OutputSpec,
    #[serde(default)]
    pub report_stability: bool,
}

pub fn config_schema() -> schemars::Schema {
    schemars::schema_for!(RunConfig)
}

/// Fully resolved parameters for one pipeline.
#[derive(Clone, Debug, PartialEq)]
pub enum MethodPlan {
    Trefftz(TrefftzParams),
    Mfs(MfsParams),
    Mps(MpsParams),
    Drm(DrmParams),
    Collocation(CollocationParams),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let options = LsqOptions {
            svd_tol: self.solver.svd_tol,
            max_iterations: self.solver.max_iterations,
            lawson_tol: self.solver.lawson_tol,
        };
        options
            .validate()
            .map_err(|e| Error::config(e.to_string()))?;
        Ok(SolverConfig {
            kind: self.solver.solver,
            options,
        })
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            report_stability: self.report_stability,
            oversampling_floor: OVERSAMPLING_FLOOR,
        }
    }

    /// Path of the certificate, confined to the output directory.
    pub fn certificate_path(&self, base: &Path) -> Result<PathBuf> {
        let name = &self.output.certificate;
        let confined = name
            .components()
            .all(|c| matches!(c, Component::Normal(_)));
        if !confined || name.as_os_str().is_empty() {
            return Err(Error::config(format!(
                "output.certificate must be a relative path inside output.dir, got {}",
                name.display()
            )));
        }
        Ok(base.join(&self.output.dir).join(name))
    }

    fn kernel(basis: KernelName, shape: f64) -> Result<Kernel> {
        Kernel::new(basis.into(), shape).map_err(|e| Error::config(e.to_string()))
    }

    /// Checks the oversampling floor and builds the method parameters.
    pub fn plan(&self) -> Result<MethodPlan> {
        let d = &self.discretization;
        if !(d.oversampling >= OVERSAMPLING_FLOOR) {
            return Err(Error::OversamplingViolation {
                rows: 0,
                cols: 0,
                ratio: d.oversampling,
                floor: OVERSAMPLING_FLOOR,
            });
        }
        let boundary_count = |m: usize| {
            d.n_boundary
                .unwrap_or_else(|| (d.oversampling * m as f64).ceil() as usize)
        };
        let operator = self.problem.operator;
        Ok(match &self.method {
            MethodSpec::Trefftz { max_order } => MethodPlan::Trefftz(TrefftzParams {
                max_order: *max_order,
                n_boundary: boundary_count(2 * max_order + 1),
                family: d.boundary_family,
            }),
            MethodSpec::Mfs { n_charges, factor } => MethodPlan::Mfs(MfsParams {
                n_charges: *n_charges,
                factor: *factor,
                n_boundary: boundary_count(*n_charges),
                family: d.boundary_family,
            }),
            MethodSpec::Mps { h, basis, shape } => MethodPlan::Mps(MpsParams {
                h: *h,
                kernel: Self::kernel(*basis, *shape)?,
                operator,
                oversampling: d.oversampling,
            }),
            MethodSpec::Drm {
                h,
                basis,
                shape,
                boundary_method,
                max_order,
                n_charges,
                factor,
            } => {
                let boundary = match boundary_method {
                    BoundaryMethod::Trefftz => {
                        let k = max_order.ok_or_else(|| {
                            Error::config("drm with a trefftz boundary step needs max_order")
                        })?;
                        HomogeneousStep::Trefftz(TrefftzParams {
                            max_order: k,
                            n_boundary: boundary_count(2 * k + 1),
                            family: d.boundary_family,
                        })
                    }
                    BoundaryMethod::Mfs => {
                        let n = n_charges.ok_or_else(|| {
                            Error::config("drm with an mfs boundary step needs n_charges")
                        })?;
                        HomogeneousStep::Mfs(MfsParams {
                            n_charges: n,
                            factor: *factor,
                            n_boundary: boundary_count(n),
                            family: d.boundary_family,
                        })
                    }
                };
                MethodPlan::Drm(DrmParams {
                    mps: MpsParams {
                        h: *h,
                        kernel: Self::kernel(*basis, *shape)?,
                        operator,
                        oversampling: d.oversampling,
                    },
                    boundary,
                })
            }
            MethodSpec::Collocation { basis, shape } => {
                let n_interior = d
                    .n_interior
                    .ok_or_else(|| Error::config("collocation needs discretization.n_interior"))?;
                let n_boundary = d
                    .n_boundary
                    .ok_or_else(|| Error::config("collocation needs discretization.n_boundary"))?;
                MethodPlan::Collocation(CollocationParams {
                    kernel: Self::kernel(*basis, *shape)?,
                    operator,
                    n_interior,
                    n_boundary,
                    family: d.boundary_family,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFFTZ: &str = r#"{
        "problem": {"domain": {"kind": "unit_disk"}, "operator": "none", "case": "harmonic_cubic"},
        "method": {"name": "trefftz", "max_order": 3},
        "output": {"dir": "out"}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_json(TREFFTZ).unwrap();
        assert_eq!(cfg.discretization.oversampling, 2.0);
        match cfg.plan().unwrap() {
            MethodPlan::Trefftz(p) => assert_eq!(p.n_boundary, 14),
            other => panic!("unexpected plan {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = TREFFTZ.replace("\"max_order\": 3", "\"max_order\": 3, \"colour\": 1");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn low_oversampling_names_the_floor() {
        let mut cfg = RunConfig::from_json(TREFFTZ).unwrap();
        cfg.discretization.oversampling = 0.5;
        let err = cfg.plan().unwrap_err();
        assert!(err.to_string().contains("floor 2"), "{err}");
    }

    #[test]
    fn escaping_output_paths_are_rejected() {
        let mut cfg = RunConfig::from_json(TREFFTZ).unwrap();
        cfg.output.certificate = PathBuf::from("../x.json");
        assert!(cfg.certificate_path(Path::new("/tmp")).is_err());
        cfg.output.certificate = PathBuf::from("/etc/x.json");
        assert!(cfg.certificate_path(Path::new("/tmp")).is_err());
        cfg.output.certificate = PathBuf::from("sub/x.json");
        assert!(cfg.certificate_path(Path::new("/tmp")).is_ok());
    }

    #[test]
    fn kernel_names_and_rectangles() {
        let text = r#"{
            "problem": {"domain": {"kind": "rectangle", "bounds": [0, 0, 2, 1]}, "operator": "id_minus_laplace", "case": "gaussian_bump"},
            "method": {"name": "mps", "h": 0.25, "basis": "kernel:matern52"},
            "output": {"dir": "out"}
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert!(cfg.problem.domain.build().is_ok());
        match cfg.plan().unwrap() {
            MethodPlan::Mps(p) => assert_eq!(p.kernel.family, KernelFamily::Matern52),
            other => panic!("unexpected plan {other:?}"),
        }
    }
}
