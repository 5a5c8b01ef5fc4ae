//! PPSZ for unique 3-SAT, the improved one-critical-clause solver, and the
//! tooling around them: exact oracles, numeric constants, instance
//! generators and a Monte Carlo harness.

pub mod analysis;
pub mod cnf;
pub mod generators;
pub mod harness;
pub mod improved;
pub mod mathkit;
pub mod oracle;
pub mod ppsz;
pub mod seed;

pub use cnf::{Assignment, Clause, CnfFormula, Lit, PartialAssignment, Var};
pub use improved::{ppsz_improved, SolverConfig};
pub use ppsz::{ppsz_run, ppsz_solve, Beta, ImplicationBackend, PpszParams};
