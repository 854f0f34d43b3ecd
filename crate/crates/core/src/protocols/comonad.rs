use std::collections::BTreeMap;

use super::{enumerate_protocols, MeasurementProtocol, Run};
use crate::error::{Error, Result};
use crate::model::ops::tensor_scenario;
use crate::model::{DeterministicMorphism, OutcomeMap};
use crate::scenario::{Measurement, Outcome, Scenario};

/// The counit `ε_X: MP(X) → X`: each `x` becomes the protocol measuring only
/// `x`, and the run `(x,o)` is read as `o`.
pub fn counit(s: &Scenario) -> DeterministicMorphism {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (x, os) in s.outcome_map() {
        let q = MeasurementProtocol::single(x, os);
        let map = os
            .iter()
            .map(|o| (Outcome::Run(Run::single(x.clone(), o.clone())), o.clone()))
            .collect();
        pi.insert(x.clone(), Measurement::protocol(q));
        h.insert(x.clone(), OutcomeMap::new(map, os.clone()).expect("counit outcome map"));
    }
    DeterministicMorphism { pi, h }
}

/// `π†Q` and `h†_Q` for a morphism `⟨π,h⟩: MP(X) → Y` and a protocol `Q` over `Y`.
///
/// Runs `Q`; each time it calls for `y` the protocol `π(y)` is run instead,
/// reusing outcomes of measurements already performed, and its maximal run
/// is translated by `h_y` to decide how `Q` continues.
pub fn extend_protocol(m: &DeterministicMorphism, q: &MeasurementProtocol) -> Result<(MeasurementProtocol, OutcomeMap)> {
    let mut leaves: Vec<(Run, Run)> = Vec::new();
    walk(m, q, Run::empty(), Run::empty(), &mut leaves)?;
    let protocol = MeasurementProtocol::from_maximal_runs(leaves.iter().map(|(x, _)| x.clone()))?;
    let mut map = BTreeMap::new();
    for (x, y) in leaves {
        if !protocol.is_maximal(&x) {
            return Err(Error::domain(format!("extension of {q} produced a non-maximal leaf `{x}`")));
        }
        if let Some(prev) = map.insert(Outcome::Run(x.clone()), Outcome::Run(y.clone())) {
            if prev != Outcome::Run(y) {
                return Err(Error::domain(format!("extension of {q} reads `{x}` ambiguously")));
            }
        }
    }
    let h = OutcomeMap::new(map, q.outcome_set())?;
    Ok((protocol, h))
}

fn walk(m: &DeterministicMorphism, q: &MeasurementProtocol, xbar: Run, ybar: Run, leaves: &mut Vec<(Run, Run)>) -> Result<()> {
    match q.next_measurement(&ybar) {
        None => {
            leaves.push((xbar, ybar));
            Ok(())
        }
        Some(y) => {
            let target = m
                .pi
                .get(y)
                .ok_or_else(|| Error::domain(format!("morphism does not interpret `{y}`")))?;
            let p = target
                .as_protocol()
                .ok_or_else(|| Error::domain(format!("`{y}` is not sent to a protocol")))?;
            sub(m, q, y, p, Run::empty(), xbar, ybar.clone(), leaves)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sub(
    m: &DeterministicMorphism,
    q: &MeasurementProtocol,
    y: &Measurement,
    p: &MeasurementProtocol,
    r: Run,
    xbar: Run,
    ybar: Run,
    leaves: &mut Vec<(Run, Run)>,
) -> Result<()> {
    match p.next_measurement(&r) {
        None => {
            let out = m.h[y]
                .apply(&Outcome::Run(r.clone()))
                .ok_or_else(|| Error::domain(format!("outcome map of `{y}` is undefined at `{r}`")))?
                .clone();
            walk(m, q, xbar, ybar.then(y.clone(), out), leaves)
        }
        Some(step) => {
            if let Some(o) = xbar.outcome_of(step) {
                let o = o.clone();
                return sub(m, q, y, p, r.then(step.clone(), o), xbar, ybar, leaves);
            }
            for (o, child) in p.children(&r) {
                sub(m, q, y, p, child, xbar.then(step.clone(), o), ybar.clone(), leaves)?;
            }
            Ok(())
        }
    }
}

/// `⟨π†,h†⟩: MP(X) → MP(Y)`, tabulated on the protocols over `y` of depth
/// at most `depth`. Targets of the extension may be deeper.
pub fn extend(m: &DeterministicMorphism, y: &Scenario, depth: usize) -> Result<DeterministicMorphism> {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for q in enumerate_protocols(y, depth)? {
        let (p, hq) = extend_protocol(m, &q)?;
        let name = Measurement::protocol(q);
        pi.insert(name.clone(), Measurement::protocol(p));
        h.insert(name, hq);
    }
    Ok(DeterministicMorphism { pi, h })
}

/// `outer ∘ inner†`, computing `inner†` only where `outer` needs it.
pub fn compose_with_extension(outer: &DeterministicMorphism, inner: &DeterministicMorphism) -> Result<DeterministicMorphism> {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (x, target) in &outer.pi {
        let q = target
            .as_protocol()
            .ok_or_else(|| Error::domain(format!("`{x}` is not sent to a protocol")))?;
        let (p, hp) = extend_protocol(inner, q)?;
        pi.insert(x.clone(), Measurement::protocol(p));
        h.insert(x.clone(), hp.then(&outer.h[x])?);
    }
    Ok(DeterministicMorphism { pi, h })
}

/// The identity on `MP(X)`, tabulated at `depth`.
pub fn mp_identity(s: &Scenario, depth: usize) -> Result<DeterministicMorphism> {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for q in enumerate_protocols(s, depth)? {
        let os = q.outcome_set();
        let name = Measurement::protocol(q);
        pi.insert(name.clone(), name.clone());
        h.insert(name, OutcomeMap::identity(&os));
    }
    Ok(DeterministicMorphism { pi, h })
}

/// Outcome of checking the three co-Kleisli laws for one pair `m, n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub counit_extension_is_identity: bool,
    pub counit_after_extension: bool,
    pub extension_composition: bool,
    pub detail: Vec<String>,
}

impl LawReport {
    pub fn all_hold(&self) -> bool {
        self.counit_extension_is_identity && self.counit_after_extension && self.extension_composition
    }
}

/// Checks `ε† = id`, `ε∘m† = m` and `(m∘n†)† = m†∘n†` for endomorphisms
/// `m, n: MP(X) → X`, as exact equalities on protocols of depth at most `depth`.
pub fn check_laws(s: &Scenario, depth: usize, m: &DeterministicMorphism, n: &DeterministicMorphism) -> Result<LawReport> {
    let mut detail = Vec::new();
    let eps = counit(s);
    let law1 = extend(&eps, s, depth)? == mp_identity(s, depth)?;
    if !law1 {
        detail.push("ε† differs from the identity".to_string());
    }
    let law2 = compose_with_extension(&eps, m)? == *m;
    if !law2 {
        detail.push("ε∘m† differs from m".to_string());
    }
    let lhs = extend(&compose_with_extension(m, n)?, s, depth)?;
    let mut law3 = true;
    for (qname, lp) in &lhs.pi {
        let q = qname.as_protocol().expect("protocol");
        let (mq, hm) = extend_protocol(m, q)?;
        let (nmq, hn) = extend_protocol(n, &mq)?;
        let rh = hn.then(&hm)?;
        if *lp != Measurement::protocol(nmq) || lhs.h[qname] != rh {
            law3 = false;
            detail.push(format!("(m∘n†)† and m†∘n† differ at {q}"));
            break;
        }
    }
    Ok(LawReport {
        counit_extension_is_identity: law1,
        counit_after_extension: law2,
        extension_composition: law3,
        detail,
    })
}

/// Whether `m: MP(X) → X` sends facets to compatible protocol sets and
/// every outcome map is total.
pub fn is_endomorphism(s: &Scenario, m: &DeterministicMorphism) -> Result<bool> {
    let mp = super::MpScenario::new(s);
    Ok(m.check_typed(&mp, s).is_ok())
}

/// `MP(X⊗Y) → MP(X)⊗MP(Y)`: protocols over one side are embedded into the
/// tensor scenario, and runs are relabelled back.
pub fn comonoidal(s1: &Scenario, s2: &Scenario, depth: usize) -> Result<(DeterministicMorphism, Scenario)> {
    let target = tensor_scenario(&super::mp_scenario(s1, depth)?, &super::mp_scenario(s2, depth)?);
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (side, s) in [(true, s1), (false, s2)] {
        let tag = move |m: &Measurement| if side { m.clone().left() } else { m.clone().right() };
        for q in enumerate_protocols(s, depth)? {
            let embedded = q.map_measurements(tag);
            let map = q
                .maximal_runs()
                .iter()
                .map(|r| (Outcome::Run(r.map_measurements(tag)), Outcome::Run(r.clone())))
                .collect();
            let name = tag(&Measurement::protocol(q.clone()));
            pi.insert(name.clone(), Measurement::protocol(embedded));
            h.insert(name, OutcomeMap::new(map, q.outcome_set())?);
        }
    }
    Ok((DeterministicMorphism { pi, h }, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ops::tensor;
    use crate::model::EmpiricalModel;
    use crate::protocols::{mp_model, MpModel};
    use crate::scenario::names::parse_measurement;
    use std::collections::BTreeSet;

    /// `π†Q` by the literal definition: merge every tuple of maximal runs
    /// interpreting a run of `Q`, then close under prefixes.
    fn literal_extension(m: &DeterministicMorphism, q: &MeasurementProtocol) -> BTreeSet<Run> {
        let mut out = BTreeSet::new();
        for ybar in q.runs() {
            let mut partial = vec![Run::empty()];
            for (y, p) in ybar.steps() {
                let proto = m.pi[y].as_protocol().unwrap();
                let pre: Vec<&Run> = proto
                    .maximal_runs()
                    .iter()
                    .filter(|r| m.h[y].apply(&Outcome::Run((*r).clone())) == Some(p))
                    .collect();
                let mut next = Vec::new();
                for acc in &partial {
                    for r in &pre {
                        if acc.consistent(r) {
                            next.push(acc.merge(r));
                        }
                    }
                }
                partial = next;
            }
            for r in partial {
                out.extend(r.prefixes());
            }
        }
        out
    }

    fn adaptive() -> (Scenario, DeterministicMorphism) {
        let s = Scenario::uniform(&["0", "1"], [vec!["a", "b", "c"]]).unwrap();
        let mut m = counit(&s);
        let q = parse_measurement("{b=0;a=0|b=0;a=1|b=1;c=0|b=1;c=1}").unwrap();
        let proto = q.as_protocol().unwrap().clone();
        let parity: BTreeMap<Outcome, Outcome> = proto
            .maximal_runs()
            .iter()
            .map(|r| {
                let ones = r.steps().iter().filter(|(_, o)| *o == Outcome::label("1")).count();
                (Outcome::Run(r.clone()), Outcome::label(if ones % 2 == 1 { "1" } else { "0" }))
            })
            .collect();
        let b = Measurement::base("b");
        m.pi.insert(b.clone(), q);
        m.h.insert(b, OutcomeMap::new(parity, s.outcomes(&Measurement::base("a")).unwrap().clone()).unwrap());
        (s, m)
    }

    #[test]
    fn sequential_extension_matches_literal_definition() {
        let (s, m) = adaptive();
        assert!(is_endomorphism(&s, &m).unwrap());
        for q in enumerate_protocols(&s, 2).unwrap() {
            let (p, _) = extend_protocol(&m, &q).unwrap();
            let lit = literal_extension(&m, &q);
            assert_eq!(p.runs(), &lit, "at {q}");
            assert!(p.validate_on(&s).is_empty());
        }
    }

    #[test]
    fn comonad_laws_on_small_examples() {
        let (s, m) = adaptive();
        let eps = counit(&s);
        for (a, b) in [(&m, &m), (&eps, &m), (&m, &eps)] {
            let r = check_laws(&s, 2, a, b).unwrap();
            assert!(r.all_hold(), "{:?}", r.detail);
        }
    }

    #[test]
    fn counit_pushforward_recovers_the_model() {
        let pr = EmpiricalModel::pr_box();
        let eps = counit(pr.scenario());
        let lazy = MpModel::new(&pr);
        assert_eq!(eps.pushforward(&lazy, pr.scenario()).unwrap(), pr);
        let explicit = mp_model(&pr, 1).unwrap();
        assert_eq!(eps.pushforward(&explicit, pr.scenario()).unwrap(), pr);
        let u = EmpiricalModel::singleton_model();
        let eu = counit(u.scenario());
        assert_eq!(eu.pi.len(), 1);
    }

    #[test]
    fn comonoidal_map_on_pr_and_u() {
        let pr = EmpiricalModel::pr_box();
        let u = EmpiricalModel::singleton_model();
        let (c, target) = comonoidal(pr.scenario(), u.scenario(), 1).unwrap();
        let joint = tensor(&pr, &u).unwrap();
        let lhs = c.pushforward(&MpModel::new(&joint), &target).unwrap();
        let rhs = tensor(&mp_model(&pr, 1).unwrap(), &mp_model(&u, 1).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        for q in c.pi.values() {
            assert!(q.as_protocol().unwrap().validate_on(joint.scenario()).is_empty());
        }
        let z = Scenario::zero();
        let (cz, tz) = comonoidal(&z, &z, 1).unwrap();
        assert_eq!(cz.pi.len(), 2);
        assert_eq!(tz.measurements().len(), 2);
    }
}
