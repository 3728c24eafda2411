//! Implementations of the verification checks.

use super::{CheckResult, SuiteReport};

pub fn prox_properties(_quick: bool) -> SuiteReport {
    let mut report = SuiteReport::default();
    report.push(CheckResult::new("placeholder", false, "not implemented".into()));
    report
}

pub fn scheme_properties(_quick: bool) -> SuiteReport {
    SuiteReport::default()
}

pub fn disk_law(_quick: bool) -> SuiteReport {
    SuiteReport::default()
}

pub fn pcf_equality(_quick: bool) -> SuiteReport {
    SuiteReport::default()
}

pub fn forcing_equivalence(_quick: bool) -> SuiteReport {
    SuiteReport::default()
}

pub fn convergence(_quick: bool) -> SuiteReport {
    SuiteReport::default()
}
