//! Tight Lipschitz extensions of vector-valued data on finite weighted graphs,
//! and numerical checks for their continuum counterparts.

pub mod error;
pub mod gadgets;
pub mod graph;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod meb;
pub mod oracle;
mod phar;
pub mod radial;
pub mod scalar;
pub mod selftest;
pub mod smooth;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{
    compare_tighter, edge_lip, local_lip, profile, Comparison, Extension, Graph, LipProfile, ProfileMode,
    Relation,
};
pub use oracle::brute_force_tight;
pub use phar::Stage;
pub use scalar::solve_aml_scalar;
pub use solver::{
    local_infinity_harmonic_step, solve_infinity_harmonic, solve_p_harmonic, solve_tight, SolveConfig, SolveMode,
    TightResult,
};
