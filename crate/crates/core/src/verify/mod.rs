//! Configuration-driven experiment harness.

mod config;
mod report;
mod suites;

pub use config::{
    DyadicConfig, ExperimentConfig, FamilyConfig, HGridConfig, KernelConfig, ScanConfig, Suite, Tolerances,
    WeightsConfig,
};
pub use report::{emit_report, Assertion, CaseRecord, RefinementRow, ReportFormat, SuiteRecord, VerificationReport, SCHEMA_VERSION};
pub use suites::{default_family, reverse_holder_grid, run_suite};
