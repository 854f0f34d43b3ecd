//! Empirical models, the free operations, deterministic morphisms and isomorphism.

mod distribution;
mod empirical;
mod iso;
mod morphism;
pub mod ops;

pub use distribution::Distribution;
pub use empirical::{EmpiricalModel, ModelLike};
pub use iso::{is_isomorphic, Isomorphism};
pub use morphism::DeterministicMorphism;
pub use ops::{OutcomeFamily, OutcomeMap, VertexMap};
