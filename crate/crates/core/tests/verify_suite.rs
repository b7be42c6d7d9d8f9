//! The verification suite end to end.

use cylinder_core::conjugate::Fault;
use cylinder_core::verify::{run, VerifyConfig};

#[test]
fn default_configuration_passes() {
    let report = run(&VerifyConfig::default()).unwrap();
    for c in &report.criteria {
        println!("{} {} {} {:?} {:?}", c.id, c.name, c.pass, c.error, c.metrics);
    }
    assert!(report.all_pass(), "{:?}", report.failures());
}

#[test]
fn perturbed_dynamic_polynomial_fails_conjugate_checks() {
    let report = run(&VerifyConfig { fault: Fault::PerturbDyn, draws: 5, ..VerifyConfig::default() }).unwrap();
    let failed = report.failures();
    for id in [6, 7, 8, 9] {
        assert!(failed.contains(&id), "{failed:?}");
    }
    for id in [1, 2, 3, 5] {
        assert!(!failed.contains(&id), "{failed:?}");
    }
}
