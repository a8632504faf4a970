//! Strong structural controllability of zero/nonzero/arbitrary structured
//! systems, and minimal modification of the input pattern to enforce it.
//!
//! The crate provides the pattern-matrix model, the color change rule and
//! zero forcing sets, the two-condition controllability test, a greedy
//! heuristic, an annealed Metropolis chain, an exhaustive oracle for small
//! instances and a seeded benchmark harness.

pub mod bench;
pub mod controllability;
pub mod error;
pub mod greedy;
pub mod instances;
pub mod mcmc;
pub mod oracle;
pub mod pattern;
pub mod realization;
pub mod rowset;
pub mod solution;
pub mod zero_forcing;

pub use controllability::{
    cost, feasibility_report, is_feasible_member, is_ssc, white_index_set, CostBreakdown, Evaluator,
    FeasibilityReport, SscVerdict,
};
pub use error::{Error, Result};
pub use greedy::{greedy_modify, greedy_step, GreedyOutcome, GreedyState};
pub use instances::{erdos_renyi_instance, worst_case_instance, InstanceKind, InstanceSpec};
pub use mcmc::{
    acceptance_probability, mcmc_modify, neighborhood_size, propose, t_stop_bound, transition_matrix, McmcParams,
    McmcTrace,
};
pub use oracle::{brute_force_optimal, kalman_controllable, OracleResult};
pub use pattern::{hamming_dist, hstack, q_transform, PatternEntry, PatternMatrix, StructuredSystem};
pub use realization::{member_check, sample_realization, RealMatrix};
pub use rowset::RowSet;
pub use solution::ModificationResult;
pub use zero_forcing::{
    color_change, diagonal_witness, is_full_row_rank, is_zero_forcing_set, joint_zero_forcing_number,
    zero_forcing_number, ColorChangeResult,
};
