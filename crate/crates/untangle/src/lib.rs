//! Statement-level untangling of refactorings from other code changes.
//!
//! The crate takes a version history (a git repository or a self-contained
//! synthetic descriptor), optionally a refactoring report, and produces:
//!
//! * per-line change categories that separate refactored, propagated, moved,
//!   and edited statements ([`categorize`]),
//! * refactoring-aware change metrics per commit ([`metrics`]),
//! * refactoring-aware bug-inducing commit labels ([`szz`]),
//! * a deterministic logistic-regression defect predictor with
//!   classification and effort-aware evaluation ([`predict`]).
//!
//! [`pipeline`] wires the stages together; the `untangle` binary exposes the
//! same flow as subcommands.

pub mod categorize;
pub mod diff;
pub mod error;
pub mod matching;
pub mod metrics;
pub mod pipeline;
pub mod predict;
pub mod propagation;
pub mod refactoring;
pub mod structure;
pub mod szz;
pub mod tokenize;
pub mod vcs;
