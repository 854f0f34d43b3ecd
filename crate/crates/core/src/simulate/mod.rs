//! Simulations `d ⇝ e`: deterministic morphisms `MP(d⊗c) → e` with a
//! noncontextual ancilla `c`.

mod compile;
mod extract;
mod search;

use std::collections::BTreeMap;
use std::fmt;

pub use compile::term_to_simulation;
pub use extract::extract_term;
pub use search::{find_simulation, SearchOutcome};

use crate::error::{Error, Result};
use crate::fraction::{is_noncontextual, ncf};
use crate::model::ops::tensor;
use crate::model::{DeterministicMorphism, EmpiricalModel, OutcomeMap};
use crate::protocols::{MeasurementProtocol, MpModel, MpScenario, Run};
use crate::rational::Prob;
use crate::scenario::names::{assignment_to_string, face_to_string};
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Simulation {
    pub source: EmpiricalModel,
    pub ancilla: EmpiricalModel,
    pub target: EmpiricalModel,
    /// From the protocols over `source ⊗ ancilla` to the target scenario.
    pub morphism: DeterministicMorphism,
    pub depth: usize,
}

impl Simulation {
    /// `d ⊗ c`, whose measurements are `L.y` for the source and `R.m` for the ancilla.
    pub fn resource(&self) -> Result<EmpiricalModel> {
        tensor(&self.source, &self.ancilla)
    }

    /// The longest run of any protocol used by the morphism.
    pub fn used_depth(&self) -> usize {
        self.morphism
            .pi
            .values()
            .filter_map(|m| m.as_protocol().map(MeasurementProtocol::depth))
            .max()
            .unwrap_or(0)
    }
}

/// The verdict of [`check_simulation`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CheckReport {
    Verified,
    ContextualAncilla { ncf: Prob },
    TooDeep { measurement: Measurement, depth: usize },
    Mismatch { facet: Face, assignment: Assignment, expected: Prob, actual: Prob },
}

impl CheckReport {
    pub fn is_verified(&self) -> bool {
        *self == CheckReport::Verified
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckReport::Verified => write!(f, "verified"),
            CheckReport::ContextualAncilla { ncf } => write!(f, "ancilla is contextual (NCF = {ncf})"),
            CheckReport::TooDeep { measurement, depth } => {
                write!(f, "protocol for `{measurement}` has depth {depth}, beyond the bound")
            }
            CheckReport::Mismatch { facet, assignment, expected, actual } => write!(
                f,
                "facet {}: at {} the target has {expected} but the pushforward gives {actual}",
                face_to_string(facet),
                assignment_to_string(assignment)
            ),
        }
    }
}

/// Checks the ancilla, the depth bound, the typing of the morphism, and
/// exact equality of the pushforward with the target, facet by facet.
pub fn check_simulation(sim: &Simulation) -> Result<CheckReport> {
    if !is_noncontextual(&sim.ancilla)? {
        return Ok(CheckReport::ContextualAncilla { ncf: ncf(&sim.ancilla)?.optimum });
    }
    for (x, q) in &sim.morphism.pi {
        let q = q
            .as_protocol()
            .ok_or_else(|| Error::domain(format!("`{x}` is not sent to a protocol")))?;
        if q.depth() > sim.depth {
            return Ok(CheckReport::TooDeep { measurement: x.clone(), depth: q.depth() });
        }
    }
    let resource = sim.resource()?;
    let target = sim.target.scenario();
    sim.morphism.check_typed(&MpScenario::new(&resource), target)?;
    let pushed = sim.morphism.pushforward(&MpModel::new(&resource), target)?;
    for (c, want) in sim.target.facet_distributions() {
        let got = pushed.facet_distribution(c).expect("same scenario");
        let mut keys: Vec<&Assignment> = want.iter().map(|(a, _)| a).collect();
        keys.extend(got.iter().map(|(a, _)| a));
        keys.sort();
        keys.dedup();
        for a in keys {
            let (expected, actual) = (want.get(a), got.get(a));
            if expected != actual {
                return Ok(CheckReport::Mismatch { facet: c.clone(), assignment: a.clone(), expected, actual });
            }
        }
    }
    Ok(CheckReport::Verified)
}

/// `true` when `NCF(d) > NCF(e)`, which rules out any simulation `d ⇝ e`.
pub fn refute_by_fraction(d: &EmpiricalModel, e: &EmpiricalModel) -> Result<bool> {
    Ok(ncf(d)?.optimum > ncf(e)?.optimum)
}

/// Sends each target measurement `x` to the protocol measuring `rename(x)` once.
pub(crate) fn counit_along(target: &Scenario, rename: impl Fn(&Measurement) -> Measurement) -> DeterministicMorphism {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (x, os) in target.outcome_map() {
        let y = rename(x);
        let map = os
            .iter()
            .map(|o| (Outcome::Run(Run::single(y.clone(), o.clone())), o.clone()))
            .collect();
        pi.insert(x.clone(), Measurement::protocol(MeasurementProtocol::single(&y, os)));
        h.insert(x.clone(), OutcomeMap::new(map, os.clone()).expect("counit outcome map"));
    }
    DeterministicMorphism { pi, h }
}

/// `e ⇝ e` through the counit, with the trivial ancilla.
pub fn counit_simulation(e: &EmpiricalModel) -> Simulation {
    Simulation {
        source: e.clone(),
        ancilla: EmpiricalModel::zero_model(),
        target: e.clone(),
        morphism: counit_along(e.scenario(), |x| x.clone().left()),
        depth: 1,
    }
}

/// `e ⇝ e⊗e` using `e` itself as the ancilla; verified exactly when `e` is noncontextual.
pub fn cloning_simulation(e: &EmpiricalModel) -> Result<Simulation> {
    let target = tensor(e, e)?;
    let morphism = counit_along(target.scenario(), Measurement::clone);
    Ok(Simulation { source: e.clone(), ancilla: e.clone(), target, morphism, depth: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn counit_self_simulation() {
        for e in [gen::pr(), gen::mix_demo(), EmpiricalModel::singleton_model()] {
            assert!(check_simulation(&counit_simulation(&e)).unwrap().is_verified());
        }
    }

    #[test]
    fn cloning_needs_a_free_copy() {
        let nc = gen::correlated_box();
        assert!(check_simulation(&cloning_simulation(&nc).unwrap()).unwrap().is_verified());
        let report = check_simulation(&cloning_simulation(&gen::pr()).unwrap()).unwrap();
        assert!(matches!(report, CheckReport::ContextualAncilla { .. }));
    }

    #[test]
    fn wrong_outcome_map_is_reported() {
        let mut sim = counit_simulation(&gen::pr());
        let x1 = Measurement::base("x1");
        let flipped = OutcomeMap::new(
            sim.morphism.h[&x1].entries().iter().map(|(r, o)| {
                let o2 = if o.to_string() == "0" { "1" } else { "0" };
                (r.clone(), Outcome::label(o2))
            }).collect(),
            sim.morphism.h[&x1].codomain().clone(),
        )
        .unwrap();
        sim.morphism.h.insert(x1.clone(), flipped);
        match check_simulation(&sim).unwrap() {
            CheckReport::Mismatch { facet, .. } => assert!(facet.contains(&x1)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn depth_bound_is_enforced() {
        let mut sim = counit_simulation(&gen::pr());
        sim.depth = 0;
        assert!(matches!(check_simulation(&sim).unwrap(), CheckReport::TooDeep { .. }));
    }

    #[test]
    fn ill_typed_morphism_is_an_error() {
        let mut sim = counit_simulation(&gen::pr());
        let x1 = Measurement::base("x1");
        let x2 = Measurement::base("x2");
        let q = sim.morphism.pi[&x2].clone();
        sim.morphism.pi.insert(x1.clone().right(), q);
        sim.morphism.pi.remove(&x1);
        assert!(check_simulation(&sim).is_err());
    }

    #[test]
    fn refutation_by_fraction() {
        assert!(refute_by_fraction(&gen::correlated_box(), &gen::pr()).unwrap());
        assert!(!refute_by_fraction(&gen::pr(), &gen::pr()).unwrap());
        assert!(!refute_by_fraction(&gen::pr(), &tensor(&gen::pr(), &gen::pr()).unwrap()).unwrap());
    }
}
