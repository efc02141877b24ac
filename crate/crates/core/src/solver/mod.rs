//! LP relaxation, branch-and-bound, greedy incumbent and exhaustive oracle.
pub mod bnb;
mod factor;
pub mod greedy;
pub mod lp;
pub mod oracle;

pub use bnb::{solve_ip, solve_ip_with, IpHooks, IpStatus, Limits, SolveResult};
pub use greedy::greedy_partition;
pub use lp::{solve_lp, solve_lp_with, Basis, LpOptions, LpResult, LpSolver, LpStatus};
pub use oracle::{enumerate_partitions, exact_cover_oracle, exact_cover_oracle_capped, ORACLE_CAP};
