use std::collections::{BTreeMap, BTreeSet};

use super::Simulation;
use crate::error::{Error, Result};
use crate::model::{OutcomeMap, VertexMap};
use crate::protocols::{MeasurementProtocol, Run};
use crate::scenario::{Face, Measurement, Outcome};
use crate::terms::{noncontextual_to_term, Term};

fn rename(m: &Measurement) -> Result<Measurement> {
    match m {
        Measurement::Left(_) => Ok(m.clone()),
        Measurement::Right(inner) => Ok((**inner).clone().left().right()),
        _ => Err(Error::domain(format!("`{m}` is not a measurement of a resource d⊗c"))),
    }
}

fn unit() -> Measurement {
    Measurement::star().right().right()
}

/// Nested-pair outcome of the conditional measurement realizing the run suffix.
fn encode(steps: &[(Measurement, Outcome)]) -> Outcome {
    match steps.split_first() {
        None => Outcome::star(),
        Some(((_, o), rest)) => Outcome::pair(o.clone(), encode(rest)),
    }
}

struct Builder {
    layers: Vec<(Measurement, BTreeMap<Outcome, Measurement>)>,
    seen: BTreeSet<Measurement>,
}

impl Builder {
    /// The measurement performing `q` from `r` onwards, adding the
    /// conditionals it needs.
    fn realize(&mut self, q: &MeasurementProtocol, r: &Run) -> Result<Measurement> {
        let Some(m) = q.next_measurement(r) else {
            return Ok(unit());
        };
        let first = rename(m)?;
        let mut branches = BTreeMap::new();
        for (o, child) in q.children(r) {
            branches.insert(o, self.realize(q, &child)?);
        }
        let name = Measurement::cond(first.clone(), branches.clone());
        if self.seen.insert(name.clone()) {
            self.layers.push((first, branches));
        }
        Ok(name)
    }
}

/// A term in the variable `v` denoting the target of a simulation:
/// `(f*((v ⊗ (c ⊗ u))[conditionals]))/h`, with `c` the ancilla as a closed
/// mixture of deterministic models and each protocol spelled out as nested
/// conditional measurements ending in `u`.
pub fn extract_term(sim: &Simulation) -> Result<Term> {
    let ancilla = if sim.ancilla.scenario().measurements().is_empty() {
        Term::Zero
    } else {
        noncontextual_to_term(&sim.ancilla)?
    };
    let mut body = Term::tensor(Term::var("v"), Term::tensor(ancilla, Term::One));
    let mut builder = Builder { layers: Vec::new(), seen: BTreeSet::new() };
    let mut map = VertexMap::new();
    let mut family = BTreeMap::new();
    for (x, p) in &sim.morphism.pi {
        let q = p
            .as_protocol()
            .ok_or_else(|| Error::domain(format!("`{x}` is not sent to a protocol")))?;
        if q.depth() > sim.depth {
            return Err(Error::domain(format!("protocol for `{x}` is deeper than {}", sim.depth)));
        }
        map.insert(x.clone(), builder.realize(q, &Run::empty())?);
        let hx = &sim.morphism.h[x];
        let table = q
            .maximal_runs()
            .iter()
            .map(|r| {
                let o = hx
                    .apply(&Outcome::Run(r.clone()))
                    .ok_or_else(|| Error::domain(format!("outcome map for `{x}` misses a run")))?;
                Ok((encode(r.steps()), o.clone()))
            })
            .collect::<Result<_>>()?;
        family.insert(x.clone(), OutcomeMap::new(table, hx.codomain().clone())?);
    }
    for (first, branches) in builder.layers {
        body = Term::cond(body, first, branches);
    }
    let facets: Vec<Face> = sim.target.scenario().facets().iter().cloned().collect();
    Ok(Term::coarse(Term::pullback(map, Some(facets), body), family))
}
