//! Scenario runner and invariant selftest for `qretro-core`.
//!
//! A scenario is one JSON file tagged by `kind`; [`run::run_scenario`] turns
//! it into a [`report::Report`]. [`selftest::run_selftest`] runs the seeded
//! invariant suite in [`sweeps`].

pub mod error;
pub mod json;
pub mod report;
pub mod run;
pub mod scenario;
pub mod selftest;
pub mod sweeps;

pub use error::CliError;
pub use report::{Report, Results, SelftestReport};
pub use run::{run_scenario, RunOptions};
pub use scenario::Scenario;
