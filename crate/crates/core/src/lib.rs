//! Small-cell (SC) to networked-flying-platform (NFP) association.
//!
//! The crate covers the whole pipeline from geometry to results:
//!
//! - [`scenario`]: hard-core point placement of SCs and NFPs, coverage radius,
//!   minimum NFP count.
//! - [`channel`]: air-to-ground mean path loss, SINR and demanded bandwidth,
//!   assembled into a [`model::ProblemInstance`].
//! - [`model`]: association matrices, objective, feasibility checking and the
//!   GAP well-posedness report.
//! - [`greedy`]: the distributed three-step heuristic (M(DM)²S) and its
//!   centralized counterpart (CMDMS).
//! - [`gap_bound`]: capacity-relaxed bound U0, knapsack-corrected bound U1 and
//!   the branch-and-bound over the relaxed problem.
//! - [`exact`]: brute force, exact branch-and-bound and the LP relaxation.
//! - [`harness`]: seeded sweep experiments, CSV output and timing tables.

pub mod channel;
pub mod exact;
pub mod gap_bound;
pub mod greedy;
pub mod harness;
pub mod lp;
pub mod model;
pub mod scenario;
mod search;
pub mod synthetic;

pub use channel::ChannelEnv;
pub use model::{AssociationMatrix, Limits, Matrix, ProblemInstance, Solution, SolveStatus};
pub use scenario::{Region, Scenario};
