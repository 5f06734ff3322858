//! Scale sweeps, convergence-order fits and identity suites.

pub mod fit;
pub mod identities;
pub mod maps;
pub mod sampling;
pub mod sweep;

pub use fit::{fit_order, OrderFit, NOISE_FLOOR};
pub use identities::{identity_suite, IdentityReport, IDENTITIES};
pub use maps::MapKind;
pub use sweep::{embedding_defect, judge, run_sweep, Suite, SweepConfig, SweepReport, Verdict};
