//! The non-contextual fraction by exact linear programming.

mod ncf;
pub mod simplex;

pub use ncf::{all_globals, cf, global_mixture, global_section, is_noncontextual, ncf, supported_globals, BellFunctional, LpResult};
pub use simplex::{equality_feasible, simplex_solve, LpSolution};
