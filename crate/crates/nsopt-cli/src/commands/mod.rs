pub mod arena;
pub mod certify;
pub mod claim1;
pub mod client;
pub mod run;
pub mod scaling;

use nsopt::RunStatus;

/// Process exit codes: 0 for a certified result (or a passing audit), 2 when
/// the oracle budget ran out, 3 when the run finished without a certificate.
/// Usage and configuration errors exit 1 before any of this applies.
pub fn status_exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::CertifiedStationary => 0,
        RunStatus::BudgetExhausted => 2,
        RunStatus::InnerLoopCap | RunStatus::OuterLoopCap => 3,
    }
}
