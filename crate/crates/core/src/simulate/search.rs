use std::collections::{BTreeMap, BTreeSet};

use super::{check_simulation, Simulation};
use crate::error::{check_guard, Result};
use crate::gen::uniform_coin;
use crate::model::ops::tensor;
use crate::model::{DeterministicMorphism, Distribution, EmpiricalModel, ModelLike, OutcomeMap};
use crate::protocols::{enumerate_protocols, protocols_compatible, MeasurementProtocol, MpModel};
use crate::scenario::{Face, Measurement, Outcome};

/// The result of [`find_simulation`].
#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<Simulation>),
    /// No simulation with protocols of at most `depth` steps and an ancilla
    /// from the family bounded by `budget`. Says nothing about larger bounds.
    NotFound { depth: usize, budget: usize },
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&Simulation> {
        match self {
            SearchOutcome::Found(sim) => Some(sim),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

/// Ancillas in search order: `z`, then tensors of uniform coins
/// `c_{k1} ⊗ … ⊗ c_{kn}` with `2 ≤ k1 ≤ … ≤ kn` and `k1⋯kn ≤ budget`, by
/// total outcome count and then lexicographically.
pub fn ancilla_family(budget: usize) -> Result<Vec<EmpiricalModel>> {
    fn sizes(min: usize, room: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for k in min..=room {
            acc.push(k);
            out.push(acc.clone());
            sizes(k, room / k, acc, out);
            acc.pop();
        }
    }
    let mut shapes = Vec::new();
    sizes(2, budget, &mut Vec::new(), &mut shapes);
    shapes.sort_by_key(|ks| (ks.iter().product::<usize>(), ks.clone()));
    let mut out = vec![EmpiricalModel::zero_model()];
    for ks in shapes {
        let mut coins = ks.iter().rev().map(|&k| uniform_coin(k));
        let mut acc = coins.next().expect("non-empty shape")?;
        for c in coins {
            acc = tensor(&c?, &acc)?;
        }
        out.push(acc);
    }
    Ok(out)
}

struct Candidate {
    protocol: Measurement,
    map: OutcomeMap,
}

fn outcome_maps(runs: &[Outcome], codomain: &BTreeSet<Outcome>) -> Vec<OutcomeMap> {
    let targets: Vec<&Outcome> = codomain.iter().collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; runs.len()];
    loop {
        let map = runs.iter().zip(&digits).map(|(r, &i)| (r.clone(), targets[i].clone())).collect();
        out.push(OutcomeMap::new(map, codomain.clone()).expect("total map"));
        let mut i = runs.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < targets.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn push(
    mp: &MpModel<'_, EmpiricalModel>,
    chosen: &BTreeMap<&Measurement, &Candidate>,
    tau: &Face,
) -> Result<Distribution> {
    let image: Face = tau.iter().map(|x| chosen[x].protocol.clone()).collect();
    let morphism = DeterministicMorphism {
        pi: tau.iter().map(|x| (x.clone(), chosen[x].protocol.clone())).collect(),
        h: tau.iter().map(|x| (x.clone(), chosen[x].map.clone())).collect(),
    };
    Ok(mp.marginal_on(&image)?.map(tau.clone(), |t| morphism.translate(tau, t)))
}

struct Search<'a> {
    resource: &'a EmpiricalModel,
    mp: MpModel<'a, EmpiricalModel>,
    target: &'a EmpiricalModel,
    order: Vec<&'a Measurement>,
    candidates: &'a [Vec<Candidate>],
}

type Chosen<'a> = BTreeMap<&'a Measurement, &'a Candidate>;

impl<'a> Search<'a> {
    fn consistent(&self, chosen: &Chosen<'a>, x: &Measurement) -> Result<bool> {
        for c in self.target.scenario().facets() {
            if !c.contains(x) {
                continue;
            }
            let tau: Face = c.iter().filter(|y| chosen.contains_key(y)).cloned().collect();
            let qs: Vec<&MeasurementProtocol> = tau
                .iter()
                .map(|y| chosen[y].protocol.as_protocol().expect("candidate protocol"))
                .collect();
            if !protocols_compatible(self.resource.scenario(), &qs)? {
                return Ok(false);
            }
            if push(&self.mp, chosen, &tau)? != self.target.marginal(&tau)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn run(&self, i: usize, chosen: &mut Chosen<'a>) -> Result<bool> {
        if i == self.order.len() {
            return Ok(true);
        }
        let x = self.order[i];
        for cand in &self.candidates[i] {
            chosen.insert(x, cand);
            if self.consistent(chosen, x)? && self.run(i + 1, chosen)? {
                return Ok(true);
            }
            chosen.remove(x);
        }
        Ok(false)
    }
}

fn search_with(d: &EmpiricalModel, c: &EmpiricalModel, e: &EmpiricalModel, depth: usize) -> Result<Option<Simulation>> {
    let resource = tensor(d, c)?;
    let protocols = enumerate_protocols(resource.scenario(), depth)?;
    let mp = MpModel::new(&resource);
    let order: Vec<&Measurement> = e.scenario().measurements().iter().collect();
    let mut candidates = Vec::new();
    let mut space: u128 = 1;
    for x in &order {
        let ox = e.scenario().outcomes(x)?;
        let want = e.marginal(&[(*x).clone()].into_iter().collect())?;
        let mut here = Vec::new();
        for q in &protocols {
            let runs: Vec<Outcome> = q.outcome_set().into_iter().collect();
            check_guard(
                "outcome maps per protocol",
                (ox.len() as u128).saturating_pow(runs.len() as u32),
            )?;
            let protocol = Measurement::protocol(q.clone());
            let single: Face = [protocol.clone()].into_iter().collect();
            let dist = mp.marginal_on(&single)?;
            for map in outcome_maps(&runs, ox) {
                let pushed = dist.map([(*x).clone()].into_iter().collect(), |t| {
                    [((*x).clone(), map.apply(t.get(&protocol).expect("run")).expect("total").clone())]
                        .into_iter()
                        .collect()
                });
                if pushed == want {
                    here.push(Candidate { protocol: protocol.clone(), map });
                }
            }
        }
        space = space.saturating_mul(here.len() as u128);
        candidates.push(here);
    }
    check_guard("simulation candidates", space)?;
    let search = Search { resource: &resource, mp, target: e, order, candidates: &candidates };
    let mut chosen = Chosen::new();
    if !search.run(0, &mut chosen)? {
        return Ok(None);
    }
    let morphism = DeterministicMorphism {
        pi: chosen.iter().map(|(x, k)| ((*x).clone(), k.protocol.clone())).collect(),
        h: chosen.iter().map(|(x, k)| ((*x).clone(), k.map.clone())).collect(),
    };
    Ok(Some(Simulation { source: d.clone(), ancilla: c.clone(), target: e.clone(), morphism, depth }))
}

/// Searches for a simulation `d ⇝ e` within the bounds.
///
/// Ancillas are tried in the order of [`ancilla_family`]. For each one the
/// target measurements are assigned in sorted order, each to a protocol of
/// depth at most `depth` (sorted) and an outcome map (lexicographic in the
/// sorted maximal runs), backtracking as soon as a partial facet is not
/// compatible or its pushforward disagrees with `e`. The first complete
/// assignment is returned.
pub fn find_simulation(d: &EmpiricalModel, e: &EmpiricalModel, depth: usize, budget: usize) -> Result<SearchOutcome> {
    for c in ancilla_family(budget)? {
        if let Some(sim) = search_with(d, &c, e, depth)? {
            debug_assert!(check_simulation(&sim)?.is_verified());
            return Ok(SearchOutcome::Found(Box::new(sim)));
        }
    }
    Ok(SearchOutcome::NotFound { depth, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::model::ops::coarse_grain;
    use crate::simulate::refute_by_fraction;

    #[test]
    fn family_order() {
        let family = ancilla_family(4).unwrap();
        let sizes: Vec<usize> = family.iter().map(|c| c.scenario().measurements().len()).collect();
        assert_eq!(sizes, vec![0, 1, 1, 2, 1]);
        assert_eq!(ancilla_family(1).unwrap().len(), 1);
    }

    #[test]
    fn unit_simulates_itself() {
        let u = EmpiricalModel::singleton_model();
        let sim = find_simulation(&u, &u, 1, 2).unwrap().found().cloned().unwrap();
        assert_eq!(sim.ancilla, EmpiricalModel::zero_model());
        assert!(check_simulation(&sim).unwrap().is_verified());
    }

    #[test]
    fn flipped_pr_is_found() {
        let pr = gen::pr();
        let flip = OutcomeMap::from_map(
            [(Outcome::label("0"), Outcome::label("1")), (Outcome::label("1"), Outcome::label("0"))]
                .into_iter()
                .collect(),
        );
        let family = [(Measurement::base("x1"), flip)].into_iter().collect();
        let e = coarse_grain(&pr, &family).unwrap();
        let sim = find_simulation(&pr, &e, 1, 2).unwrap().found().cloned().unwrap();
        assert!(check_simulation(&sim).unwrap().is_verified());
        assert_eq!(sim.ancilla, EmpiricalModel::zero_model());
    }

    #[test]
    fn noncontextual_cannot_reach_pr() {
        let d = gen::correlated_box();
        let e = gen::pr();
        assert!(refute_by_fraction(&d, &e).unwrap());
        assert!(matches!(
            find_simulation(&d, &e, 1, 2).unwrap(),
            SearchOutcome::NotFound { depth: 1, budget: 2 }
        ));
    }
}
