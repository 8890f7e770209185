//! Fixed-seed invariant suite run by `qretro selftest`.

use qretro_core::sweep::Execution;

use crate::report::{CheckOutcome, SelftestReport};
use crate::sweeps;

/// Two-mode grid integrals dominate the runtime, so the suite uses fewer of
/// them than the acceptance tests.
pub const TWO_MODE_INSTANCES: usize = 4;

pub fn run_selftest(seed: u64, exec: Execution) -> SelftestReport {
    let mut checks: Vec<CheckOutcome> = Vec::new();
    checks.extend(sweeps::jordan_identities(exec, seed, 200));
    checks.push(sweeps::channel_preservation(exec, seed, 200));
    checks.push(sweeps::cptp_rejection());
    checks.push(sweeps::picture_equivalence(exec, seed, 100));
    checks.extend(sweeps::personick_optimality(exec, seed, 100, 50));
    checks.extend(sweeps::classical_reduction(exec, seed, 100));
    checks.extend(sweeps::weak_values(exec, seed, 200));
    checks.extend(sweeps::qfi_monotonicity(exec, seed, 200));
    checks.extend(sweeps::gaussian_oracle(exec, seed, 50, TWO_MODE_INSTANCES));
    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { seed, checks, passed }
}
