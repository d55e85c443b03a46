//! Command-line front end. `main` only forwards to [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};

use crate::basis::{Kernel, KernelFamily};
use crate::config::{config_schema, MethodPlan, RunConfig};
use crate::error::Error;
use crate::geometry::{BoundaryFamily, Domain};
use crate::methods::study::{convergence_study, StudyMethod, StudyOptions};
use crate::methods::{
    certificate_schema, solve_collocation, solve_drm, solve_mfs, solve_mps, solve_trefftz,
    MethodOutput,
};
use crate::operators::{manufactured, InteriorOp};
use crate::stability::{lab_csv, stability_lab, LabFamily, Oversampling};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Environment variable capping the worker threads (0 = automatic).
pub const THREADS_ENV: &str = "RESKIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reskit", version, about = "Meshfree residual solvers with error certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Equidistant,
    Chebyshev,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OversamplingArg {
    None,
    Pi,
    Msquared,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OperatorArg {
    NegLaplace,
    IdMinusLaplace,
    None,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelArg {
    Matern52,
    Matern72,
    Gaussian,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the method described by a JSON config and write its certificate.
    Solve { config: PathBuf },
    /// Tabulate sup-norm stability constants of 1D polynomial sampling.
    StabilityLab {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "none")]
        oversampling: OversamplingArg,
        /// Comma-separated ascending polynomial orders.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        orders: Vec<usize>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a method over a size ladder and tabulate the certificates.
    Study {
        /// trefftz, mfs, mps, drm or collocation.
        #[arg(long)]
        method: String,
        #[arg(long)]
        case: String,
        /// Comma-separated ascending sizes.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        ladder: Vec<usize>,
        /// `unit_disk` or `rectangle:ax,ay,bx,by`.
        #[arg(long, default_value = "unit_disk")]
        domain: String,
        #[arg(long, value_enum, default_value = "neg-laplace")]
        operator: OperatorArg,
        #[arg(long, value_enum, default_value = "matern72")]
        kernel: KernelArg,
        #[arg(long, default_value_t = 1.0)]
        shape: f64,
        #[arg(long, default_value_t = 2.0)]
        mfs_factor: f64,
        /// Skip the polynomial baseline column.
        #[arg(long)]
        no_baseline: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the JSON schema of the run config (or of certificates).
    Schema {
        #[arg(long)]
        certificate: bool,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

/// Exit code for a library error: configuration problems map to 2, I/O to
/// 4 and everything raised while solving to 3.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InvalidArgument(_)
        | Error::InvalidConfiguration(_)
        | Error::NotFound(_)
        | Error::UnsupportedCertificate(_)
        | Error::OversamplingViolation { .. }
        | Error::Json(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_SOLVER,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

/// Writes through a sibling temporary file and a rename, so readers never
/// observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Failure::config(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::io(path, e));
    }
    Ok(())
}

fn now() -> Option<u64> {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

fn parse_domain(text: &str) -> Result<Domain, Failure> {
    if text == "unit_disk" {
        return Ok(Domain::unit_disk());
    }
    let bounds = text
        .strip_prefix("rectangle:")
        .ok_or_else(|| Failure::config(format!("unknown domain `{text}`")))?;
    let v: Vec<f64> = bounds
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::config(format!("rectangle bounds: {e}")))?;
    let [ax, ay, bx, by] = v[..] else {
        return Err(Failure::config("rectangle needs four bounds ax,ay,bx,by"));
    };
    Ok(Domain::rectangle(ax, ay, bx, by)?)
}

/// Loads a config and runs its method. Exposed for embedding.
pub fn solve_config(cfg: &RunConfig) -> crate::Result<MethodOutput> {
    let domain = cfg.problem.domain.build()?;
    let case = manufactured(&cfg.problem.case)?;
    let solver = cfg.solver_config()?;
    let certify = cfg.certify_options();
    match cfg.plan()? {
        MethodPlan::Trefftz(p) => solve_trefftz(&domain, &case, &p, &solver, &certify),
        MethodPlan::Mfs(p) => solve_mfs(&domain, &case, &p, &solver, &certify),
        MethodPlan::Mps(p) => solve_mps(&domain, &case, &p, &solver, &certify),
        MethodPlan::Drm(p) => solve_drm(&domain, &case, &p, &solver, &certify),
        MethodPlan::Collocation(p) => solve_collocation(&domain, &case, &p, &certify),
    }
}

fn cmd_solve(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let cfg = RunConfig::from_json(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let out_path = cfg.certificate_path(base)?;
    let output = solve_config(&cfg).map_err(|e| {
        let f = Failure::from(e);
        if f.code == EXIT_SOLVER {
            Failure {
                message: format!("solver failure: {}", f.message),
                ..f
            }
        } else {
            f
        }
    })?;
    let mut cert = output.certificate;
    cert.timestamp = now();
    let json = cert.to_json().map_err(Error::from)?;
    write_atomic(&out_path, json.as_bytes())?;
    if !cert.flags.is_empty() {
        eprintln!("flags: {}", cert.flags.join(", "));
    }
    println!(
        "{} M={} N={} combined={:e} bound={:e} ({})",
        cert.method,
        cert.m,
        cert.n_interior + cert.n_boundary,
        cert.residual.combined,
        cert.bound.value,
        serde_json::to_value(cert.bound.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    );
    Ok(())
}

fn cmd_stability_lab(
    family: FamilyArg,
    oversampling: OversamplingArg,
    orders: &[usize],
    out: Option<&Path>,
) -> Result<(), Failure> {
    if orders.is_empty() {
        return Err(Failure::config("--orders needs at least one order"));
    }
    let family = match family {
        FamilyArg::Equidistant => LabFamily::Equidistant,
        FamilyArg::Chebyshev => LabFamily::Chebyshev,
    };
    let oversampling = match oversampling {
        OversamplingArg::None => Oversampling::None,
        OversamplingArg::Pi => Oversampling::PiM,
        OversamplingArg::Msquared => Oversampling::MSquared,
    };
    let reports = stability_lab(family, orders, oversampling)?;
    let csv = lab_csv(&reports);
    match out {
        Some(p) => write_atomic(p, csv.as_bytes()),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_study(
    method: &str,
    case: &str,
    ladder: &[usize],
    domain: &str,
    operator: OperatorArg,
    kernel: KernelArg,
    shape: f64,
    mfs_factor: f64,
    baseline: bool,
    out_dir: &Path,
) -> Result<(), Failure> {
    let method: StudyMethod = method.parse()?;
    let case = manufactured(case)?;
    let domain = parse_domain(domain)?;
    let family = match kernel {
        KernelArg::Matern52 => KernelFamily::Matern52,
        KernelArg::Matern72 => KernelFamily::Matern72,
        KernelArg::Gaussian => KernelFamily::Gaussian,
    };
    let operator = match operator {
        OperatorArg::NegLaplace => InteriorOp::NegLaplace,
        OperatorArg::IdMinusLaplace => InteriorOp::IdMinusLaplace,
        OperatorArg::None => InteriorOp::None,
    };
    let opts = StudyOptions {
        operator,
        kernel: Kernel::new(family, shape)?,
        boundary_family: BoundaryFamily::Equidistant,
        mfs_factor,
        baseline,
        ..StudyOptions::default()
    };
    let table = convergence_study(method, ladder, &domain, &case, &opts)?;
    write_atomic(&out_dir.join("study.csv"), table.to_csv().as_bytes())?;
    let stamp = now();
    for row in &table.rows {
        if let Ok(cert) = &row.certificate {
            let mut cert = cert.clone();
            cert.timestamp = stamp;
            let json = cert.to_json().map_err(Error::from)?;
            let name = format!("{}_{}.json", method.name(), row.size);
            write_atomic(&out_dir.join(name), json.as_bytes())?;
        } else if let Err(e) = &row.certificate {
            eprintln!("size {} failed: {e}", row.size);
        }
    }
    let ok = table.succeeded();
    if ok == 0 {
        return Err(Failure {
            code: EXIT_SOLVER,
            message: "every ladder entry failed".into(),
        });
    }
    if ok < table.rows.len() {
        eprintln!("partial results: {ok} of {} entries succeeded", table.rows.len());
    }
    println!("{} study: {ok}/{} entries", method.name(), table.rows.len());
    Ok(())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("{THREADS_ENV} must be a non-negative integer")))?;
    // A pool that already exists (embedding, tests) is kept as is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.command {
        Command::Solve { config } => cmd_solve(&config),
        Command::StabilityLab {
            family,
            oversampling,
            orders,
            out,
        } => cmd_stability_lab(family, oversampling, &orders, out.as_deref()),
        Command::Study {
            method,
            case,
            ladder,
            domain,
            operator,
            kernel,
            shape,
            mfs_factor,
            no_baseline,
            out_dir,
        } => cmd_study(
            &method,
            &case,
            &ladder,
            &domain,
            operator,
            kernel,
            shape,
            mfs_factor,
            !no_baseline,
            &out_dir,
        ),
        Command::Schema { certificate } => {
            let schema = if certificate {
                certificate_schema()
            } else {
                config_schema()
            };
            let text = serde_json::to_string_pretty(&schema).map_err(Error::from)?;
            println!("{text}");
            Ok(())
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
