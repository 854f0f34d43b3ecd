use std::collections::BTreeMap;

use num_traits::One;

use super::Distribution;
use crate::error::{Error, Result};
use crate::rational::{ratio, Prob};
use crate::scenario::names::face_to_string;
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario, ScenarioLike, ValidationReport};

/// A compatible family of distributions, one per facet.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EmpiricalModel {
    scenario: Scenario,
    dists: BTreeMap<Face, Distribution>,
}

/// Anything that can report marginals on faces of its scenario.
pub trait ModelLike: ScenarioLike {
    fn marginal_on(&self, sigma: &Face) -> Result<Distribution>;
}

impl EmpiricalModel {
    /// Builds a model and rejects anything [`validate_model`](Self::validate_model) reports.
    pub fn new(scenario: Scenario, dists: BTreeMap<Face, Distribution>) -> Result<Self> {
        let e = EmpiricalModel { scenario, dists };
        e.validate_model().into_result()?;
        Ok(e)
    }

    /// Builds a model without checking; use [`validate_model`](Self::validate_model) afterwards.
    pub fn new_unchecked(scenario: Scenario, dists: BTreeMap<Face, Distribution>) -> Self {
        EmpiricalModel { scenario, dists }
    }

    /// Builds a model by evaluating `f` on every facet.
    pub(crate) fn from_facets(scenario: Scenario, mut f: impl FnMut(&Face) -> Result<Distribution>) -> Result<Self> {
        let mut dists = BTreeMap::new();
        for c in scenario.facets() {
            dists.insert(c.clone(), f(c)?);
        }
        Ok(EmpiricalModel { scenario, dists })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn facet_distributions(&self) -> &BTreeMap<Face, Distribution> {
        &self.dists
    }

    pub fn facet_distribution(&self, c: &Face) -> Option<&Distribution> {
        self.dists.get(c)
    }

    /// Checks the distribution invariants on every facet and exact agreement
    /// of marginals on every pairwise facet intersection.
    pub fn validate_model(&self) -> ValidationReport {
        let mut report = self.scenario.validate();
        for c in self.scenario.facets() {
            let Some(d) = self.dists.get(c) else {
                report.push(format!("no distribution for facet {}", face_to_string(c)));
                continue;
            };
            if d.context() != c {
                report.push(format!("distribution for facet {} lives on another context", face_to_string(c)));
                continue;
            }
            for (a, _) in d.iter() {
                for (m, o) in a.iter() {
                    if !self.scenario.outcomes(m).is_ok_and(|os| os.contains(o)) {
                        report.push(format!("`{o}` is not an outcome of `{m}` (facet {})", face_to_string(c)));
                    }
                }
            }
            let total = d.total();
            if !total.is_one() {
                report.push(format!("weights on facet {} sum to {total}, not 1", face_to_string(c)));
            }
        }
        for f in self.dists.keys() {
            if !self.scenario.facets().contains(f) {
                report.push(format!("distribution given for non-facet {}", face_to_string(f)));
            }
        }
        if !report.is_valid() {
            return report;
        }
        let facets: Vec<&Face> = self.scenario.facets().iter().collect();
        for (i, c1) in facets.iter().enumerate() {
            for c2 in &facets[i + 1..] {
                let inter: Face = c1.intersection(c2).cloned().collect();
                let m1 = self.dists[*c1].marginal(&inter).expect("subset");
                let m2 = self.dists[*c2].marginal(&inter).expect("subset");
                if m1 != m2 {
                    report.push(format!(
                        "marginals of facets {} and {} disagree on {}",
                        face_to_string(c1),
                        face_to_string(c2),
                        face_to_string(&inter)
                    ));
                }
            }
        }
        report
    }

    /// `e_σ`, computed from a covering facet.
    pub fn marginal(&self, sigma: &Face) -> Result<Distribution> {
        if !self.scenario.complex().is_face(sigma)? {
            return Err(Error::domain(format!("{} is not a face", face_to_string(sigma))));
        }
        let c = self.scenario.complex().covering_facet(sigma).expect("face has a facet");
        self.dists[c].marginal(sigma)
    }

    /// The unique model on the zero scenario.
    pub fn zero_model() -> Self {
        let s = Scenario::zero();
        EmpiricalModel::from_facets(s, |_| Ok(Distribution::point(Assignment::empty()))).expect("zero model")
    }

    /// The unique model on the singleton scenario.
    pub fn singleton_model() -> Self {
        let s = Scenario::singleton();
        EmpiricalModel::from_facets(s, |c| {
            Ok(Distribution::point(c.iter().map(|m| (m.clone(), Outcome::star())).collect()))
        })
        .expect("singleton model")
    }

    /// The deterministic model assigning `global` (a total assignment).
    pub fn deterministic(scenario: Scenario, global: &Assignment) -> Result<Self> {
        for m in scenario.measurements() {
            let o = global
                .get(m)
                .ok_or_else(|| Error::domain(format!("no outcome given for `{m}`")))?;
            if !scenario.outcomes(m)?.contains(o) {
                return Err(Error::domain(format!("`{o}` is not an outcome of `{m}`")));
            }
        }
        EmpiricalModel::from_facets(scenario, |c| Ok(Distribution::point(global.project(c))))
    }

    /// The PR box: correlated on x1y1, x1y2, x2y1 and anti-correlated on x2y2.
    pub fn pr_box() -> Self {
        let s = Scenario::pr();
        EmpiricalModel::from_facets(s, |c| {
            let anti = c.contains(&Measurement::base("x2")) && c.contains(&Measurement::base("y2"));
            let half = ratio(1, 2);
            let entries = c.iter().collect::<Vec<_>>();
            let mk = |a: &str, b: &str| -> Assignment {
                [(entries[0].clone(), Outcome::label(a)), (entries[1].clone(), Outcome::label(b))]
                    .into_iter()
                    .collect()
            };
            let w = if anti {
                vec![(mk("0", "1"), half.clone()), (mk("1", "0"), half)]
            } else {
                vec![(mk("0", "0"), half.clone()), (mk("1", "1"), half)]
            };
            Distribution::new(c.clone(), w)
        })
        .expect("PR box")
    }

    /// Probability of `a` under the marginal on its domain.
    pub fn probability(&self, a: &Assignment) -> Result<Prob> {
        Ok(self.marginal(&a.domain())?.get(a))
    }
}

impl ScenarioLike for EmpiricalModel {
    fn outcome_set(&self, m: &Measurement) -> Result<std::collections::BTreeSet<Outcome>> {
        self.scenario.outcome_set(m)
    }

    fn is_face(&self, sigma: &Face) -> Result<bool> {
        self.scenario.is_face(sigma)
    }
}

impl ModelLike for EmpiricalModel {
    fn marginal_on(&self, sigma: &Face) -> Result<Distribution> {
        self.marginal(sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::face;
    use crate::scenario::names::parse_assignment;

    fn a(s: &str) -> Assignment {
        parse_assignment(s).unwrap()
    }

    fn correlated() -> EmpiricalModel {
        let s = Scenario::pr();
        EmpiricalModel::from_facets(s, |c| {
            let v: Vec<&Measurement> = c.iter().collect();
            let mk = |o: &str| -> Assignment {
                [(v[0].clone(), Outcome::label(o)), (v[1].clone(), Outcome::label(o))].into_iter().collect()
            };
            Distribution::new(c.clone(), [(mk("0"), ratio(1, 2)), (mk("1"), ratio(1, 2))])
        })
        .unwrap()
    }

    /// The eight marginal equations of a bipartite two-setting box, written out.
    fn marginal_equations_hold(e: &EmpiricalModel) -> bool {
        let pairs = [("x1", "y1", "x1", "y2"), ("x2", "y1", "x2", "y2"), ("x1", "y1", "x2", "y1"), ("x1", "y2", "x2", "y2")];
        pairs.iter().all(|(a1, b1, a2, b2)| {
            let shared = if a1 == a2 { *a1 } else { *b1 };
            ["0", "1"].iter().all(|o| {
                let sum = |x: &str, y: &str| -> Prob {
                    let d = e.facet_distribution(&face([x, y])).unwrap();
                    ["0", "1"]
                        .iter()
                        .map(|p| {
                            let (ox, oy) = if shared == x { (*o, *p) } else { (*p, *o) };
                            d.get(&a(&format!("{x}={ox},{y}={oy}")))
                        })
                        .fold(Prob::from_integer(0.into()), |acc, q| acc + q)
                };
                sum(a1, b1) == sum(a2, b2)
            })
        })
    }

    #[test]
    fn pr_and_correlated_are_valid() {
        let pr = EmpiricalModel::pr_box();
        assert!(pr.validate_model().is_valid());
        assert!(marginal_equations_hold(&pr));
        let c = correlated();
        assert!(c.validate_model().is_valid());
        assert!(marginal_equations_hold(&c));
    }

    #[test]
    fn unnormalized_entry_is_reported() {
        let pr = EmpiricalModel::pr_box();
        let mut dists = pr.facet_distributions().clone();
        let c = face(["x1", "y1"]);
        let bumped = Distribution::unnormalized(
            c.clone(),
            [(a("x1=0,y1=0"), ratio(3, 4)), (a("x1=1,y1=1"), ratio(1, 2))],
        )
        .unwrap();
        dists.insert(c, bumped);
        let bad = EmpiricalModel::new_unchecked(pr.scenario().clone(), dists);
        let report = bad.validate_model();
        assert!(report.violations.iter().any(|v| v.contains("sum to 5/4")));
    }

    #[test]
    fn signalling_table_is_reported() {
        let pr = EmpiricalModel::pr_box();
        let mut dists = pr.facet_distributions().clone();
        let c = face(["x1", "y1"]);
        dists.insert(c.clone(), Distribution::point(a("x1=0,y1=0")));
        let bad = EmpiricalModel::new_unchecked(pr.scenario().clone(), dists);
        assert!(bad.validate_model().violations.iter().any(|v| v.contains("disagree")));
    }

    #[test]
    fn marginal_examples() {
        let pr = EmpiricalModel::pr_box();
        let m = pr.marginal(&face(["x1"])).unwrap();
        assert_eq!(m.get(&a("x1=0")), ratio(1, 2));
        assert_eq!(m.get(&a("x1=1")), ratio(1, 2));
        assert_eq!(pr.marginal(&Face::new()).unwrap(), Distribution::point(Assignment::empty()));
        let c = face(["x2", "y2"]);
        assert_eq!(&pr.marginal(&c).unwrap(), pr.facet_distribution(&c).unwrap());
        assert!(pr.marginal(&face(["x1", "x2"])).is_err());
        let via1 = pr.facet_distribution(&face(["x1", "y1"])).unwrap().marginal(&face(["y1"])).unwrap();
        let via2 = pr.facet_distribution(&face(["x2", "y1"])).unwrap().marginal(&face(["y1"])).unwrap();
        assert_eq!(via1, via2);
    }

    #[test]
    fn unit_models() {
        let z = EmpiricalModel::zero_model();
        assert_eq!(z.facet_distributions().len(), 1);
        assert!(z.facet_distributions().contains_key(&Face::new()));
        let u = EmpiricalModel::singleton_model();
        let star: Assignment = [(Measurement::star(), Outcome::star())].into_iter().collect();
        assert_eq!(u.probability(&star).unwrap(), ratio(1, 1));
    }
}
