//! Measurement scenarios: measurements, simplicial compatibility complexes,
//! outcome sets and assignments.

mod complex;
mod measurement;
pub mod names;
#[allow(clippy::module_inception)]
mod scenario;

pub use complex::{Face, SimplicialComplex};
pub use measurement::{Conditional, Measurement, Outcome};
pub use scenario::{Assignment, Scenario, ScenarioLike, ValidationReport};

/// Builds a face from measurement names.
pub fn face<I, S>(names: I) -> Face
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names
        .into_iter()
        .map(|n| Measurement::base(n.as_ref()))
        .collect()
}
