//! Exact interval bounds by equation solving.
//!
//! For a single-variable program in a small fragment, the least interval
//! invariant is the least solution of a system of `min`/`max`/`+c` equations
//! over the extended integers. Two solvers compute it: exhaustive case
//! analysis (the reference) and ascending policy iteration.

mod extract;
mod oracle;
mod solve;
mod system;

pub use extract::{extract_upper_bounds, ExtractError, Extracted};
pub use oracle::{bounded_concrete_oracle, concrete_hulls, reachable_values, OracleError, OracleOptions};
pub use solve::{named, solve_exhaustive, solve_policy_iteration, split_count, CapExceeded, PolicyRun, DEFAULT_SPLIT_CAP};
pub use system::{BoundExpr, BoundSystem, SystemError, VarId};
