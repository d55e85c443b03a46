use reskit::geometry::BoundaryFamily;
use reskit::methods::{solve_trefftz, CertifyOptions, SolverConfig, TrefftzParams};
use reskit::{Domain, ManufacturedCase};

#[test]
fn trefftz_certificate_bounds_the_error() -> reskit::Result<()> {
    let domain = Domain::unit_disk();
    let params = TrefftzParams {
        max_order: 10,
        n_boundary: 42,
        family: BoundaryFamily::Equidistant,
    };
    let out = solve_trefftz(
        &domain,
        &ManufacturedCase::ExpHarmonic,
        &params,
        &SolverConfig::default(),
        &CertifyOptions::default(),
    )?;
    let err = out.certificate.truth.as_ref().unwrap().sup_error;
    assert!(err <= out.certificate.bound.value);
    assert!(out.certificate.bound.value < 1e-6);
    Ok(())
}
