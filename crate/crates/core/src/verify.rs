//! Verification suites: named bundles of executable checks driven by both the
//! CLI (`mcfobs verify <suite>`) and the acceptance test target.

use crate::error::{Error, Result};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult { name: name.to_string(), passed, detail }
    }
}

/// Report of a whole suite.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn print(&self) {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            println!("{status} {}: {}", c.name, c.detail);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ProxProperties,
    SchemeProperties,
    DiskLaw,
    PcfEquality,
    ForcingEquivalence,
    Convergence,
}

impl Suite {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "prox_properties" => Ok(Suite::ProxProperties),
            "scheme_properties" => Ok(Suite::SchemeProperties),
            "disk_law" => Ok(Suite::DiskLaw),
            "pcf_equality" => Ok(Suite::PcfEquality),
            "forcing_equivalence" => Ok(Suite::ForcingEquivalence),
            "convergence" => Ok(Suite::Convergence),
            other => Err(Error::Validation(format!("unknown suite: {other}"))),
        }
    }

    pub fn all() -> [Suite; 6] {
        [
            Suite::ProxProperties,
            Suite::SchemeProperties,
            Suite::DiskLaw,
            Suite::PcfEquality,
            Suite::ForcingEquivalence,
            Suite::Convergence,
        ]
    }
}

/// Run a suite; `quick` shrinks grid sizes and sample counts for smoke runs.
pub fn run_suite(suite: Suite, quick: bool) -> SuiteReport {
    match suite {
        Suite::ProxProperties => checks::prox_properties(quick),
        Suite::SchemeProperties => checks::scheme_properties(quick),
        Suite::DiskLaw => checks::disk_law(quick),
        Suite::PcfEquality => checks::pcf_equality(quick),
        Suite::ForcingEquivalence => checks::forcing_equivalence(quick),
        Suite::Convergence => checks::convergence(quick),
    }
}

/// One row of a run comparison.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub step: usize,
    pub time: f64,
    pub symdiff: f64,
    pub hausdorff: f64,
}

/// Compare two manifests step by step: symmetric-difference areas and front
/// Hausdorff distances, with an optional inclusion assertion
/// (`"a-in-b"` or `"b-in-a"`).
pub fn compare_runs(
    manifest_a: &std::path::Path,
    manifest_b: &std::path::Path,
    assert_inclusion: Option<&str>,
) -> Result<Vec<CompareRow>> {
    let a = crate::scenario::read_manifest(manifest_a)?;
    let b = crate::scenario::read_manifest(manifest_b)?;
    if !a.grid.same_as(&b.grid) {
        return Err(Error::Validation("manifests use different grids".into()));
    }
    if a.steps.len() != b.steps.len() {
        return Err(Error::Validation(format!(
            "step counts differ: {} vs {}",
            a.steps.len(),
            b.steps.len()
        )));
    }
    let dir_a = manifest_a.parent().unwrap_or(std::path::Path::new("."));
    let dir_b = manifest_b.parent().unwrap_or(std::path::Path::new("."));
    let cap = crate::distance::DistanceCap::uncapped(&a.grid);
    let mut rows = Vec::new();
    for (sa, sb) in a.steps.iter().zip(b.steps.iter()) {
        if (sa.time - sb.time).abs() > 1e-12 * (1.0 + sa.time.abs()) {
            return Err(Error::Validation(format!(
                "time grids differ at step {}: {} vs {}",
                sa.step, sa.time, sb.time
            )));
        }
        let mask_a =
            crate::io::read_mask_pgm(&dir_a.join(&sa.mask_file), a.grid.spacing, a.grid.origin)?;
        let mask_b =
            crate::io::read_mask_pgm(&dir_b.join(&sb.mask_file), b.grid.spacing, b.grid.origin)?;
        match assert_inclusion {
            Some("a-in-b") => {
                if !mask_a.subset_of(&mask_b, &[]) {
                    return Err(Error::Validation(format!(
                        "inclusion a-in-b violated at step {}",
                        sa.step
                    )));
                }
            }
            Some("b-in-a") => {
                if !mask_b.subset_of(&mask_a, &[]) {
                    return Err(Error::Validation(format!(
                        "inclusion b-in-a violated at step {}",
                        sa.step
                    )));
                }
            }
            Some(other) => {
                return Err(Error::Validation(format!(
                    "unknown inclusion direction: {other} (use a-in-b or b-in-a)"
                )));
            }
            None => {}
        }
        let symdiff = crate::grid::symmetric_difference_area(&mask_a, &mask_b)?;
        let hd = {
            let da = crate::distance::signed_distance(&mask_a, cap);
            let db = crate::distance::signed_distance(&mask_b, cap);
            let ca = crate::contour::extract_contour(&da, 0.0)?;
            let cb = crate::contour::extract_contour(&db, 0.0)?;
            if ca.is_empty() || cb.is_empty() {
                0.0
            } else {
                crate::contour::hausdorff(&ca, &cb)?
            }
        };
        rows.push(CompareRow { step: sa.step, time: sa.time, symdiff, hausdorff: hd });
    }
    Ok(rows)
}

pub mod checks;
