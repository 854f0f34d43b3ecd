//! The free operations on empirical models.

use std::collections::{BTreeMap, BTreeSet};

use super::{Distribution, EmpiricalModel};
use crate::error::{Error, Result};
use crate::rational::{in_unit_interval, Prob};
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario, SimplicialComplex};

/// A vertex map `f: X' → X`, keyed by the new measurements.
pub type VertexMap = BTreeMap<Measurement, Measurement>;

/// An outcome map `h_x: O_x → O'_x` with an explicit codomain.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OutcomeMap {
    map: BTreeMap<Outcome, Outcome>,
    codomain: BTreeSet<Outcome>,
}

/// A family of outcome maps; measurements without an entry are left unchanged.
pub type OutcomeFamily = BTreeMap<Measurement, OutcomeMap>;

impl OutcomeMap {
    pub fn new(map: BTreeMap<Outcome, Outcome>, codomain: BTreeSet<Outcome>) -> Result<Self> {
        if let Some(o) = map.values().find(|o| !codomain.contains(*o)) {
            return Err(Error::domain(format!("image `{o}` is outside the declared codomain")));
        }
        if codomain.is_empty() {
            return Err(Error::domain("empty codomain"));
        }
        Ok(OutcomeMap { map, codomain })
    }

    /// The map with codomain equal to its image.
    pub fn from_map(map: BTreeMap<Outcome, Outcome>) -> Self {
        let codomain = map.values().cloned().collect();
        OutcomeMap { map, codomain }
    }

    pub fn identity(outcomes: &BTreeSet<Outcome>) -> Self {
        OutcomeMap {
            map: outcomes.iter().map(|o| (o.clone(), o.clone())).collect(),
            codomain: outcomes.clone(),
        }
    }

    pub fn constant(domain: &BTreeSet<Outcome>, value: Outcome) -> Self {
        OutcomeMap {
            map: domain.iter().map(|o| (o.clone(), value.clone())).collect(),
            codomain: [value].into_iter().collect(),
        }
    }

    pub fn apply(&self, o: &Outcome) -> Option<&Outcome> {
        self.map.get(o)
    }

    pub fn entries(&self) -> &BTreeMap<Outcome, Outcome> {
        &self.map
    }

    pub fn codomain(&self) -> &BTreeSet<Outcome> {
        &self.codomain
    }

    pub fn domain(&self) -> BTreeSet<Outcome> {
        self.map.keys().cloned().collect()
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &OutcomeMap) -> Result<OutcomeMap> {
        let mut map = BTreeMap::new();
        for (o, p) in &self.map {
            let q = then
                .apply(p)
                .ok_or_else(|| Error::domain(format!("outcome map undefined at `{p}`")))?;
            map.insert(o.clone(), q.clone());
        }
        Ok(OutcomeMap {
            map,
            codomain: then.codomain.clone(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b) && self.codomain.iter().eq(self.map.keys())
    }

    pub(crate) fn check_total(&self, x: &Measurement, domain: &BTreeSet<Outcome>) -> Result<()> {
        if let Some(o) = domain.iter().find(|o| !self.map.contains_key(*o)) {
            return Err(Error::domain(format!("outcome map for `{x}` is undefined at `{o}`")));
        }
        if let Some(o) = self.map.keys().find(|o| !domain.contains(*o)) {
            return Err(Error::domain(format!("outcome map for `{x}` mentions non-outcome `{o}`")));
        }
        Ok(())
    }
}

fn rename_assignment(a: &Assignment, f: impl Fn(&Measurement) -> Measurement) -> Assignment {
    a.iter().map(|(m, o)| (f(m), o.clone())).collect()
}

/// The scenario `⟨X', Σ', f*O⟩` of a pullback. Without explicit facets the
/// largest complex making `f` simplicial is used.
pub fn pullback_scenario(s: &Scenario, f: &VertexMap, facets: Option<&[Face]>) -> Result<Scenario> {
    for y in f.values() {
        if !s.has(y) {
            return Err(Error::UnknownMeasurement(y.to_string()));
        }
    }
    let domain: BTreeSet<Measurement> = f.keys().cloned().collect();
    let complex = match facets {
        Some(fs) => SimplicialComplex::new(domain.clone(), fs.iter().cloned())?,
        None => s.complex().preimage(&domain, f),
    };
    if !complex.is_simplicial_into(s.complex(), f) {
        return Err(Error::domain("vertex map is not simplicial into the source complex"));
    }
    let outcomes = domain
        .iter()
        .map(|x| Ok((x.clone(), s.outcomes(&f[x])?.clone())))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Scenario::new(outcomes, complex.facets().iter().cloned())
}

/// `f*e`.
pub fn pullback(e: &EmpiricalModel, f: &VertexMap, facets: Option<&[Face]>) -> Result<EmpiricalModel> {
    let s = pullback_scenario(e.scenario(), f, facets)?;
    EmpiricalModel::from_facets(s, |sigma| {
        let image: Face = sigma.iter().map(|x| f[x].clone()).collect();
        let d = e.marginal(&image)?;
        Ok(d.map(sigma.clone(), |t| {
            sigma
                .iter()
                .map(|x| (x.clone(), t.get(&f[x]).expect("image measured").clone()))
                .collect()
        }))
    })
}

/// The scenario `⟨X, Σ, O'⟩` of a coarse-graining.
pub fn coarse_scenario(s: &Scenario, h: &OutcomeFamily) -> Result<Scenario> {
    let mut outcomes = s.outcome_map().clone();
    for (x, hx) in h {
        let ox = s.outcomes(x)?;
        hx.check_total(x, ox)?;
        outcomes.insert(x.clone(), hx.codomain().clone());
    }
    Scenario::new(outcomes, s.facets().iter().cloned())
}

/// Applies the family to one assignment.
pub(crate) fn apply_family(h: &OutcomeFamily, a: &Assignment) -> Assignment {
    a.iter()
        .map(|(m, o)| {
            let o2 = h.get(m).and_then(|hm| hm.apply(o)).unwrap_or(o);
            (m.clone(), o2.clone())
        })
        .collect()
}

/// `e/h`.
pub fn coarse_grain(e: &EmpiricalModel, h: &OutcomeFamily) -> Result<EmpiricalModel> {
    let s = coarse_scenario(e.scenario(), h)?;
    EmpiricalModel::from_facets(s, |c| {
        let d = e.facet_distribution(c).expect("same facets");
        Ok(d.map(c.clone(), |a| apply_family(h, a)))
    })
}

/// `e +_λ e'`, with weight `λ` on the first argument.
pub fn mix(e: &EmpiricalModel, lambda: &Prob, e2: &EmpiricalModel) -> Result<EmpiricalModel> {
    if !in_unit_interval(lambda) {
        return Err(Error::domain(format!("mixing weight {lambda} is outside [0,1]")));
    }
    if e.scenario() != e2.scenario() {
        return Err(Error::domain("mixed models live on different scenarios"));
    }
    EmpiricalModel::from_facets(e.scenario().clone(), |c| {
        Ok(e.facet_distribution(c)
            .expect("facet")
            .mix(lambda, e2.facet_distribution(c).expect("facet")))
    })
}

fn tagged_outcomes(s1: &Scenario, s2: &Scenario) -> BTreeMap<Measurement, BTreeSet<Outcome>> {
    s1.outcome_map()
        .iter()
        .map(|(m, o)| (m.clone().left(), o.clone()))
        .chain(s2.outcome_map().iter().map(|(m, o)| (m.clone().right(), o.clone())))
        .collect()
}

pub fn choice_scenario(s1: &Scenario, s2: &Scenario) -> Scenario {
    let complex = s1.complex().coproduct(s2.complex());
    Scenario::new(tagged_outcomes(s1, s2), complex.facets().iter().cloned()).expect("coproduct scenario")
}

pub fn tensor_scenario(s1: &Scenario, s2: &Scenario) -> Scenario {
    let complex = s1.complex().join(s2.complex());
    Scenario::new(tagged_outcomes(s1, s2), complex.facets().iter().cloned()).expect("join scenario")
}

fn untag(c: &Face, left: bool) -> Face {
    c.iter()
        .filter_map(|m| match (m, left) {
            (Measurement::Left(inner), true) | (Measurement::Right(inner), false) => Some((**inner).clone()),
            _ => None,
        })
        .collect()
}

/// `e & e'`.
pub fn choice(e: &EmpiricalModel, e2: &EmpiricalModel) -> Result<EmpiricalModel> {
    let s = choice_scenario(e.scenario(), e2.scenario());
    EmpiricalModel::from_facets(s, |c| {
        let left = c.iter().next().is_some_and(|m| matches!(m, Measurement::Left(_)));
        let inner = untag(c, left);
        let (d, tag): (Distribution, fn(Measurement) -> Measurement) = if left {
            (e.marginal(&inner)?, Measurement::left)
        } else {
            (e2.marginal(&inner)?, Measurement::right)
        };
        Ok(d.map(c.clone(), |a| rename_assignment(a, |m| tag(m.clone()))))
    })
}

/// `e ⊗ e'`.
pub fn tensor(e: &EmpiricalModel, e2: &EmpiricalModel) -> Result<EmpiricalModel> {
    let s = tensor_scenario(e.scenario(), e2.scenario());
    EmpiricalModel::from_facets(s, |c| {
        let d1 = e.marginal(&untag(c, true))?;
        let d2 = e2.marginal(&untag(c, false))?;
        Ok(d1.product(
            &d2,
            |a| rename_assignment(a, |m| m.clone().left()),
            |b| rename_assignment(b, |m| m.clone().right()),
            c.clone(),
        ))
    })
}

/// `e[x?y]`, returning the model and the new measurement's name.
pub fn conditional(e: &EmpiricalModel, x: &Measurement, y: &BTreeMap<Outcome, Measurement>) -> Result<(EmpiricalModel, Measurement)> {
    let (s, name) = e.scenario().extend_conditional(x, y)?;
    let model = EmpiricalModel::from_facets(s, |c| {
        if !c.contains(&name) {
            return e.marginal(c);
        }
        let mut sigma = c.clone();
        sigma.remove(&name);
        let mut out: BTreeMap<Assignment, Prob> = BTreeMap::new();
        for (o, yo) in y {
            let mut wide = sigma.clone();
            wide.insert(x.clone());
            wide.insert(yo.clone());
            let d = e.marginal(&wide)?;
            for (t, p) in d.iter() {
                if t.get(x) != Some(o) {
                    continue;
                }
                let o2 = t.get(yo).expect("measured").clone();
                let key = t.project(&sigma).with(name.clone(), Outcome::pair(o.clone(), o2));
                *out.entry(key).or_insert_with(|| Prob::from_integer(0.into())) += p;
            }
        }
        Ok(Distribution::from_map_unchecked(c.clone(), out))
    })?;
    Ok((model, name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::scenario::face;
    use crate::scenario::names::parse_assignment;

    fn a(s: &str) -> Assignment {
        parse_assignment(s).unwrap()
    }

    fn m(s: &str) -> Measurement {
        Measurement::base(s)
    }

    fn o(s: &str) -> Outcome {
        Outcome::label(s)
    }

    fn flip() -> OutcomeMap {
        OutcomeMap::from_map([(o("0"), o("1")), (o("1"), o("0"))].into_iter().collect())
    }

    #[test]
    fn identity_pullback_and_coarse_graining() {
        let pr = EmpiricalModel::pr_box();
        let id: VertexMap = pr.scenario().measurements().iter().map(|x| (x.clone(), x.clone())).collect();
        assert_eq!(pullback(&pr, &id, None).unwrap(), pr);
        let h: OutcomeFamily = pr
            .scenario()
            .outcome_map()
            .iter()
            .map(|(x, os)| (x.clone(), OutcomeMap::identity(os)))
            .collect();
        assert_eq!(coarse_grain(&pr, &h).unwrap(), pr);
    }

    #[test]
    fn aliasing_pullback_copies_outcome() {
        let pr = EmpiricalModel::pr_box();
        let f: VertexMap = [(m("a"), m("x1")), (m("b"), m("x1"))].into_iter().collect();
        let e = pullback(&pr, &f, None).unwrap();
        let d = e.facet_distribution(&face(["a", "b"])).unwrap();
        assert_eq!(d.get(&a("a=0,b=0")), ratio(1, 2));
        assert_eq!(d.get(&a("a=1,b=1")), ratio(1, 2));
        assert_eq!(d.support_len(), 2);
        let bad: VertexMap = [(m("a"), m("x1")), (m("b"), m("x2"))].into_iter().collect();
        assert!(pullback(&pr, &bad, Some(&[face(["a", "b"])])).is_err());
    }

    #[test]
    fn flipping_bob_swaps_correlations() {
        let pr = EmpiricalModel::pr_box();
        let h: OutcomeFamily = [(m("y1"), flip()), (m("y2"), flip())].into_iter().collect();
        let e = coarse_grain(&pr, &h).unwrap();
        for (x, y, anti) in [("x1", "y1", true), ("x1", "y2", true), ("x2", "y1", true), ("x2", "y2", false)] {
            let d = e.facet_distribution(&face([x, y])).unwrap();
            let (p, q) = if anti { ("0", "1") } else { ("0", "0") };
            assert_eq!(d.get(&a(&format!("{x}={p},{y}={q}"))), ratio(1, 2));
        }
        let partial: OutcomeFamily = [(m("y1"), OutcomeMap::from_map([(o("0"), o("1"))].into_iter().collect()))].into_iter().collect();
        assert!(coarse_grain(&pr, &partial).is_err());
    }

    #[test]
    fn mixing_orientation() {
        let pr = EmpiricalModel::pr_box();
        let g = a("x1=0,x2=0,y1=0,y2=0");
        let det = EmpiricalModel::deterministic(pr.scenario().clone(), &g).unwrap();
        assert_eq!(mix(&pr, &ratio(1, 1), &det).unwrap(), pr);
        assert_eq!(mix(&pr, &ratio(0, 1), &det).unwrap(), det);
        assert_eq!(mix(&pr, &ratio(1, 3), &pr).unwrap(), pr);
        assert!(mix(&pr, &ratio(3, 2), &det).is_err());
        assert!(mix(&pr, &ratio(1, 2), &EmpiricalModel::singleton_model()).is_err());
    }

    #[test]
    fn choice_and_tensor_shapes() {
        let pr = EmpiricalModel::pr_box();
        let c = choice(&pr, &pr).unwrap();
        assert_eq!(c.scenario().facets().len(), 8);
        assert!(c.validate_model().is_valid());
        let lc = face(["x1", "y1"]).into_iter().map(|v| v.left()).collect::<Face>();
        assert_eq!(
            c.facet_distribution(&lc).unwrap().get(&[(m("x1").left(), o("0")), (m("y1").left(), o("0"))].into_iter().collect()),
            ratio(1, 2)
        );
        let t = tensor(&pr, &pr).unwrap();
        assert_eq!(t.scenario().facets().len(), 16);
        assert!(t.validate_model().is_valid());
        let u = EmpiricalModel::singleton_model();
        let uu = tensor(&u, &u).unwrap();
        assert_eq!(uu.scenario().measurements().len(), 2);
        assert_eq!(uu.facet_distributions().len(), 1);
        let z = EmpiricalModel::zero_model();
        let zr = choice(&z, &pr).unwrap();
        assert_eq!(zr.scenario().facets().len(), 4);
        assert!(zr.validate_model().is_valid());
        let zz = choice(&z, &z).unwrap();
        assert!(zz.validate_model().is_valid());
        assert!(tensor(&z, &pr).unwrap().validate_model().is_valid());
    }

    #[test]
    fn conditional_on_pr() {
        let pr = EmpiricalModel::pr_box();
        let y: BTreeMap<Outcome, Measurement> = [(o("0"), m("y1")), (o("1"), m("y2"))].into_iter().collect();
        let (e, name) = conditional(&pr, &m("x1"), &y).unwrap();
        assert!(e.validate_model().is_valid());
        let d = e.marginal(&[name.clone()].into_iter().collect()).unwrap();
        let s = Scenario::pr();
        let rows = [(o("0"), "y1"), (o("1"), "y2")];
        for (ox, yname) in rows {
            for oy in ["0", "1"] {
                let row = EmpiricalModel::pr_box();
                let expected = row
                    .facet_distribution(&face(["x1", yname]))
                    .unwrap()
                    .get(&a(&format!("x1={ox},{yname}={oy}")));
                let key: Assignment = [(name.clone(), Outcome::pair(ox.clone(), o(oy)))].into_iter().collect();
                assert_eq!(d.get(&key), expected);
            }
        }
        assert_eq!(d.get(&[(name.clone(), Outcome::pair(o("0"), o("0")))].into_iter().collect()), ratio(1, 2));
        let with_x: Face = [name.clone(), m("x1")].into_iter().collect();
        let dx = e.marginal(&with_x).unwrap();
        let mismatch: Assignment = [(name.clone(), Outcome::pair(o("0"), o("0"))), (m("x1"), o("1"))].into_iter().collect();
        assert_eq!(dx.get(&mismatch), ratio(0, 1));
        assert_eq!(s.measurements().len() + 1, e.scenario().measurements().len());
    }
}
