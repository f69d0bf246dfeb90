//! Solvers for log-based reconciliation.
//!
//! Given `n` opaque actions, dependency pairs `(i, j)` ("accepting `i`
//! requires accepting `j`") and precedence pairs `(i, j)` ("if both are
//! accepted, `i` comes strictly before `j`"), find an acceptance set of
//! maximum size together with a consistent position for every accepted
//! action.
//!
//! * [`problem`] and [`solution`]: the instance, schedules, validation.
//! * [`cp`]: exact branch-and-bound with interval propagation.
//! * [`ls`]: descent and Tabu local search for precedence-only instances.
//! * [`satenc`]: the reduction from CNF satisfiability.
//! * [`gen`]: seeded random benchmark instances.
//! * [`oracle`]: exhaustive search for small instances.
//! * [`batch`]: order-preserving fan-out over many runs.

pub mod batch;
pub mod cp;
pub mod gen;
pub mod ls;
pub mod oracle;
pub mod problem;
pub mod satenc;
pub mod solution;

pub use problem::{ActionId, Problem, ProblemError};
pub use solution::{check_schedule, feasible_subset, objective, Schedule, SolveStats, Violation};
