//! Exact-arithmetic workbench for the resource theory of contextuality.
//!
//! Empirical models live on measurement scenarios (abstract simplicial
//! complexes with outcome sets). The crate provides the free operations on
//! models, the non-contextual fraction by exact linear programming, a small
//! term language for composed free operations with a normalizer, the
//! measurement-protocols comonad, and simulations between models.

pub mod cli;
pub mod error;
pub mod fraction;
pub mod gen;
pub mod json;
pub mod model;
pub mod props;
pub mod protocols;
pub mod rational;
pub mod scenario;
pub mod simulate;
pub mod terms;

pub use error::{Error, Result};
pub use fraction::{cf, is_noncontextual, ncf, LpResult};
pub use model::{DeterministicMorphism, Distribution, EmpiricalModel};
pub use protocols::{MeasurementProtocol, Run};
pub use rational::Prob;
pub use scenario::{Assignment, Face, Measurement, Outcome, Scenario, SimplicialComplex};
