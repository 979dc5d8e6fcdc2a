//! Traffic, request-rate and cost simulation over any revocation scheme.

pub mod ledger;
pub mod load;
pub mod run;
pub mod scenario;
pub mod schemes;

pub use ledger::{Link, TrafficLedger};
pub use run::{compare, cost_report, run, CostReport, RunResult};
pub use scenario::{Scenario, SchemeKind, VerifierCache};
pub use schemes::{RevocationScheme, ValidityProof, Verdict};
