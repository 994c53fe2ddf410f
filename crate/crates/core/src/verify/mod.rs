//! Quantitative verification: decay fits, dichotomy scans, Φ asymptotics
//! and the property suites driven by the `verify` command.

pub mod decay;
pub mod dichotomy;
pub mod ode;
pub mod phi_asym;
pub mod suites;

pub use decay::{dyadic_times, fit_morrey_smoothing, fit_semigroup_decay, DecayFit, FitOptions, FitOutcome};
pub use dichotomy::{log_c_grid, run_dichotomy_scan, DichotomyScan, ScanOptions, ScanRow};
pub use ode::{constant_data_ode_check, ode_reference, OdeCheck};
pub use phi_asym::{phi_asymptotics_report, AsymptoticsOptions, PhiAsymptoticsReport};
pub use suites::{run_suite, run_verify, CheckResult, Suite, SuiteReport, VerifyReport};
