//! Rescaled perceptron solver for linear semi-infinite feasibility problems.
//!
//! Given an oracle for the constraint family `{a_t : t ∈ T}`, the solver either
//! finds `y` with `a_tᵀy > 0` for every `t`, finds positive weights on finitely
//! many `a_t` that sum to zero, or reports that the feasible region is thin
//! relative to the requested `ε`.

pub mod certify;
pub mod cli;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod solver;

pub use certify::{verify_d_solution, verify_p_certificate, VerificationReport};
pub use oracle::{ProblemInstance, Separation, SeparationOracle, Witness};
pub use solver::{main_algorithm, Outcome, SolveOutcome, SolverConfig};
