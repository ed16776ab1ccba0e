//! Scenario runner for the biphoton simulator: loads a JSON scenario,
//! executes named experiments, writes CSV data files and a JSON run summary.

pub mod csvout;
pub mod runners;
pub mod scenario;

use biphoton::Error;

/// Process exit code classes: configuration problems (2) versus numerical
/// failures in an otherwise valid run (3).
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_)
        | Error::OutOfRange(_)
        | Error::DomainMismatch { .. }
        | Error::NonCenteredAxis { .. } => 2,
        Error::SamplingViolation { .. }
        | Error::FitNonConvergence(_)
        | Error::DegenerateInput(_)
        | Error::Saturated { .. }
        | Error::PortLabeling { .. }
        | Error::Factorization(_) => 3,
    }
}
