use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::complex::show_face;
use super::{Face, Measurement, Outcome, SimplicialComplex};
use crate::error::{Error, Result};

/// A measurement scenario `⟨X,Σ,O⟩`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Scenario {
    complex: SimplicialComplex,
    outcomes: BTreeMap<Measurement, BTreeSet<Outcome>>,
}

/// Read access to a (possibly lazily constructed) scenario.
pub trait ScenarioLike {
    /// The outcome set of `m`; unknown measurements are an error.
    fn outcome_set(&self, m: &Measurement) -> Result<BTreeSet<Outcome>>;
    /// Whether `sigma` is a face; unknown measurements are an error.
    fn is_face(&self, sigma: &Face) -> Result<bool>;
}

/// A list of invariant violations; empty means valid.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: impl Into<String>) {
        self.violations.push(v.into());
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::invalid(self.violations.join("; ")))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks declared scenario data before normalization into a [`Scenario`].
///
/// Reports duplicate measurement ids, empty or duplicated outcome lists,
/// facets mentioning unknown measurements, facets contained in other
/// facets, and vertices not covered by any facet.
pub fn validate_scenario(
    measurements: &[(Measurement, Vec<Outcome>)],
    facets: &[Vec<Measurement>],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = BTreeSet::new();
    for (m, outs) in measurements {
        if !seen.insert(m.clone()) {
            report.push(format!("duplicate measurement id `{m}`"));
        }
        if outs.is_empty() {
            report.push(format!("empty outcome set for `{m}`"));
        }
        let distinct: BTreeSet<&Outcome> = outs.iter().collect();
        if distinct.len() != outs.len() {
            report.push(format!("duplicate outcome label for `{m}`"));
        }
    }
    let mut sets: Vec<Face> = Vec::new();
    for f in facets {
        let set: Face = f.iter().cloned().collect();
        if set.len() != f.len() {
            report.push(format!("facet {} repeats a measurement", show_face(&set)));
        }
        for v in &set {
            if !seen.contains(v) {
                report.push(format!("facet {} mentions unknown measurement `{v}`", show_face(&set)));
            }
        }
        sets.push(set);
    }
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            if i != j && a.is_subset(b) && (a != b || i < j) {
                report.push(format!("facet {} is contained in facet {}", show_face(a), show_face(b)));
            }
        }
    }
    for (m, _) in measurements {
        if !sets.iter().any(|s| s.contains(m)) {
            report.push(format!("measurement `{m}` is not covered by any facet"));
        }
    }
    report
}

impl Scenario {
    /// Builds a scenario from outcome sets and generating faces.
    ///
    /// Generators need not be maximal and vertices need not be covered;
    /// uncovered vertices become isolated. Empty outcome sets are rejected.
    pub fn new(outcomes: BTreeMap<Measurement, BTreeSet<Outcome>>, generators: impl IntoIterator<Item = Face>) -> Result<Self> {
        if let Some((m, _)) = outcomes.iter().find(|(_, o)| o.is_empty()) {
            return Err(Error::invalid(format!("empty outcome set for `{m}`")));
        }
        let complex = SimplicialComplex::new(outcomes.keys().cloned().collect(), generators)?;
        Ok(Scenario { complex, outcomes })
    }

    /// Builds a scenario from declared data, rejecting anything
    /// [`validate_scenario`] reports.
    pub fn from_declared(measurements: Vec<(Measurement, Vec<Outcome>)>, facets: Vec<Vec<Measurement>>) -> Result<Self> {
        validate_scenario(&measurements, &facets).into_result()?;
        let outcomes = measurements
            .into_iter()
            .map(|(m, o)| (m, o.into_iter().collect()))
            .collect();
        Scenario::new(outcomes, facets.into_iter().map(|f| f.into_iter().collect()))
    }

    /// Same outcome set for every measurement, given by string labels.
    pub fn uniform<I, S>(outcomes: &[&str], facets: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<S>>,
        S: AsRef<str>,
    {
        let outs: BTreeSet<Outcome> = outcomes.iter().map(|o| Outcome::label(o)).collect();
        let gens: Vec<Face> = facets.into_iter().map(super::face).collect();
        let map = gens
            .iter()
            .flatten()
            .map(|m| (m.clone(), outs.clone()))
            .collect();
        Scenario::new(map, gens)
    }

    /// The zero scenario `⟨∅,Δ0,()⟩`.
    pub fn zero() -> Self {
        Scenario {
            complex: SimplicialComplex::empty(),
            outcomes: BTreeMap::new(),
        }
    }

    /// The singleton scenario `⟨{⋆},Δ1,O_⋆={⋆}⟩`.
    pub fn singleton() -> Self {
        let mut outcomes = BTreeMap::new();
        outcomes.insert(Measurement::star(), [Outcome::star()].into_iter().collect());
        Scenario {
            complex: SimplicialComplex::simplex([Measurement::star()]),
            outcomes,
        }
    }

    /// The bipartite scenario with measurements x1,x2,y1,y2 and binary outcomes.
    pub fn pr() -> Self {
        Scenario::uniform(
            &["0", "1"],
            [vec!["x1", "y1"], vec!["x1", "y2"], vec!["x2", "y1"], vec!["x2", "y2"]],
        )
        .expect("static scenario")
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn facets(&self) -> &BTreeSet<Face> {
        self.complex.facets()
    }

    pub fn measurements(&self) -> &BTreeSet<Measurement> {
        self.complex.vertices()
    }

    pub fn outcome_map(&self) -> &BTreeMap<Measurement, BTreeSet<Outcome>> {
        &self.outcomes
    }

    pub fn has(&self, m: &Measurement) -> bool {
        self.outcomes.contains_key(m)
    }

    pub fn outcomes(&self, m: &Measurement) -> Result<&BTreeSet<Outcome>> {
        self.outcomes
            .get(m)
            .ok_or_else(|| Error::UnknownMeasurement(m.to_string()))
    }

    /// Re-checks the structural invariants of a constructed scenario.
    pub fn validate(&self) -> ValidationReport {
        let measurements: Vec<(Measurement, Vec<Outcome>)> = self
            .outcomes
            .iter()
            .map(|(m, o)| (m.clone(), o.iter().cloned().collect()))
            .collect();
        let facets: Vec<Vec<Measurement>> = self
            .facets()
            .iter()
            .filter(|f| !f.is_empty() || self.outcomes.is_empty())
            .map(|f| f.iter().cloned().collect())
            .collect();
        validate_scenario(&measurements, &facets)
    }

    /// Number of global assignments `∏|O_x|`, saturating.
    pub fn global_count(&self) -> u128 {
        self.outcomes
            .values()
            .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
    }

    /// Assignments on `sigma` in lexicographic order: measurements by their
    /// sorted order, outcomes by their sorted order, last measurement fastest.
    pub fn enumerate_assignments(&self, sigma: &Face) -> Result<Vec<Assignment>> {
        let axes: Vec<(Measurement, Vec<Outcome>)> = sigma
            .iter()
            .map(|m| Ok((m.clone(), self.outcomes(m)?.iter().cloned().collect())))
            .collect::<Result<_>>()?;
        Ok(product(&axes))
    }

    /// Adds the conditional measurement `x?y`, returning the new scenario and
    /// the name of the new measurement.
    pub fn extend_conditional(&self, x: &Measurement, y: &BTreeMap<Outcome, Measurement>) -> Result<(Scenario, Measurement)> {
        let ox = self.outcomes(x)?;
        if y.keys().ne(ox.iter()) {
            return Err(Error::domain(format!(
                "conditional on `{x}` must give one follow-up per outcome of `{x}`"
            )));
        }
        for ym in y.values() {
            self.outcomes(ym)?;
            let pair: Face = [x.clone(), ym.clone()].into_iter().collect();
            if ym == x || !self.complex.contains_face(&pair) {
                return Err(Error::domain(format!(
                    "`{ym}` is not a vertex of the link of `{x}`"
                )));
            }
        }
        let name = Measurement::cond(x.clone(), y.clone());
        if self.has(&name) {
            return Err(Error::domain(format!("conditional name `{name}` already exists")));
        }
        let mut new_outcomes: BTreeSet<Outcome> = BTreeSet::new();
        for (o, ym) in y {
            for o2 in self.outcomes(ym)? {
                new_outcomes.insert(Outcome::pair(o.clone(), o2.clone()));
            }
        }
        let mut gens: Vec<Face> = self.facets().iter().cloned().collect();
        for mut sigma in self.conditional_bases(x, y) {
            sigma.insert(name.clone());
            gens.push(sigma);
        }
        let mut outcomes = self.outcomes.clone();
        outcomes.insert(name.clone(), new_outcomes);
        Ok((Scenario::new(outcomes, gens)?, name))
    }

    /// Maximal `σ ⊆ X` with `σ ∪ {x, y_o} ∈ Σ` for every `o`.
    fn conditional_bases(&self, x: &Measurement, y: &BTreeMap<Outcome, Measurement>) -> Vec<Face> {
        let per_branch: Vec<Vec<&Face>> = y
            .values()
            .map(|ym| {
                self.facets()
                    .iter()
                    .filter(|f| f.contains(x) && f.contains(ym))
                    .collect()
            })
            .collect();
        let mut cands: Vec<Face> = Vec::new();
        let mut idx = vec![0usize; per_branch.len()];
        'outer: loop {
            let mut inter: Option<Face> = None;
            for (b, &i) in idx.iter().enumerate() {
                let f = per_branch[b][i];
                inter = Some(match inter {
                    None => f.clone(),
                    Some(acc) => acc.intersection(f).cloned().collect(),
                });
            }
            cands.push(inter.unwrap_or_default());
            for b in (0..idx.len()).rev() {
                idx[b] += 1;
                if idx[b] < per_branch[b].len() {
                    continue 'outer;
                }
                idx[b] = 0;
            }
            break;
        }
        super::complex::maximal(cands).into_iter().collect()
    }
}

impl ScenarioLike for Scenario {
    fn outcome_set(&self, m: &Measurement) -> Result<BTreeSet<Outcome>> {
        self.outcomes(m).cloned()
    }

    fn is_face(&self, sigma: &Face) -> Result<bool> {
        self.complex.is_face(sigma)
    }
}

/// All assignments over the given axes, last axis varying fastest.
pub(crate) fn product(axes: &[(Measurement, Vec<Outcome>)]) -> Vec<Assignment> {
    let mut out = vec![Assignment::empty()];
    for (m, outs) in axes {
        let mut next = Vec::with_capacity(out.len() * outs.len());
        for a in &out {
            for o in outs {
                let mut b = a.clone();
                b.0.insert(m.clone(), o.clone());
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// An assignment of outcomes to a set of measurements.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<Measurement, Outcome>);

impl Assignment {
    pub fn new(values: BTreeMap<Measurement, Outcome>) -> Self {
        Assignment(values)
    }

    pub fn empty() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn domain(&self) -> Face {
        self.0.keys().cloned().collect()
    }

    pub fn get(&self, m: &Measurement) -> Option<&Outcome> {
        self.0.get(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Measurement, &Outcome)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &BTreeMap<Measurement, Outcome> {
        &self.0
    }

    pub fn insert(&mut self, m: Measurement, o: Outcome) {
        self.0.insert(m, o);
    }

    pub fn with(mut self, m: Measurement, o: Outcome) -> Self {
        self.0.insert(m, o);
        self
    }

    /// Restriction to `tau`, which must be contained in the domain.
    pub fn restrict(&self, tau: &Face) -> Result<Assignment> {
        if let Some(v) = tau.iter().find(|v| !self.0.contains_key(*v)) {
            return Err(Error::domain(format!("`{v}` is not in the assignment's domain")));
        }
        Ok(self.project(tau))
    }

    /// Restriction to `tau ∩ domain`.
    pub fn project(&self, tau: &Face) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(m, _)| tau.contains(*m))
                .map(|(m, o)| (m.clone(), o.clone()))
                .collect(),
        )
    }

    /// Whether both assignments agree on their common measurements.
    pub fn agrees_with(&self, other: &Assignment) -> bool {
        self.0
            .iter()
            .all(|(m, o)| other.0.get(m).is_none_or(|o2| o2 == o))
    }

    /// The union of two agreeing assignments.
    pub fn union(&self, other: &Assignment) -> Option<Assignment> {
        if !self.agrees_with(other) {
            return None;
        }
        let mut out = self.0.clone();
        out.extend(other.0.iter().map(|(m, o)| (m.clone(), o.clone())));
        Some(Assignment(out))
    }
}

impl FromIterator<(Measurement, Outcome)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Measurement, Outcome)>>(iter: T) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::names::assignment_to_string(self))
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::face;

    fn m(s: &str) -> Measurement {
        Measurement::base(s)
    }

    fn o(s: &str) -> Outcome {
        Outcome::label(s)
    }

    #[test]
    fn validation_examples() {
        assert!(Scenario::pr().validate().is_valid());
        assert!(Scenario::singleton().validate().is_valid());
        assert!(Scenario::zero().validate().is_valid());
        let bad = validate_scenario(&[(m("x1"), vec![])], &[vec![m("x1")]]);
        assert!(bad.violations.iter().any(|v| v.contains("empty outcome set")));
        let nested = validate_scenario(
            &[(m("a"), vec![o("0")]), (m("b"), vec![o("0")]), (m("c"), vec![o("0")])],
            &[vec![m("a"), m("b")], vec![m("a")]],
        );
        assert!(nested.violations.iter().any(|v| v.contains("contained in")));
        assert!(nested.violations.iter().any(|v| v.contains("`c` is not covered")));
        let dup = validate_scenario(&[(m("a"), vec![o("0")]), (m("a"), vec![o("1")])], &[vec![m("a")]]);
        assert!(!dup.is_valid());
    }

    #[test]
    fn assignments_are_sorted_products() {
        let s = Scenario::pr();
        let asg = s.enumerate_assignments(&face(["y1", "x1"])).unwrap();
        let shown: Vec<String> = asg.iter().map(|a| a.to_string()).collect();
        assert_eq!(shown, ["x1=0,y1=0", "x1=0,y1=1", "x1=1,y1=0", "x1=1,y1=1"]);
        assert_eq!(s.enumerate_assignments(&Face::new()).unwrap(), vec![Assignment::empty()]);
        let t = Scenario::uniform(&["a", "b", "c"], [vec!["x"]]).unwrap();
        assert_eq!(t.enumerate_assignments(&face(["x"])).unwrap().len(), 3);
        assert_eq!(asg, s.enumerate_assignments(&face(["x1", "y1"])).unwrap());
    }

    #[test]
    fn restriction() {
        let a: Assignment = [(m("x1"), o("0")), (m("y1"), o("1"))].into_iter().collect();
        assert_eq!(a.restrict(&face(["x1"])).unwrap().to_string(), "x1=0");
        assert!(a.restrict(&Face::new()).unwrap().is_empty());
        assert_eq!(a.restrict(&a.domain()).unwrap(), a);
        assert!(a.restrict(&face(["x2"])).is_err());
    }

    fn brute_faces(s: &Scenario, x: &Measurement, y: &BTreeMap<Outcome, Measurement>, name: &Measurement) -> BTreeSet<Face> {
        let mut out = s.complex().faces();
        let xs: Vec<Measurement> = s.measurements().iter().cloned().collect();
        for mask in 0u32..(1 << xs.len()) {
            let sigma: Face = (0..xs.len()).filter(|i| mask >> i & 1 == 1).map(|i| xs[i].clone()).collect();
            let ok = y.values().all(|ym| {
                let mut t = sigma.clone();
                t.insert(x.clone());
                t.insert(ym.clone());
                s.complex().contains_face(&t)
            });
            if ok {
                let mut t = sigma;
                t.insert(name.clone());
                out.insert(t);
            }
        }
        out
    }

    #[test]
    fn conditional_extension_matches_formula() {
        let s = Scenario::pr();
        let y: BTreeMap<Outcome, Measurement> = [(o("0"), m("y1")), (o("1"), m("y2"))].into_iter().collect();
        let (t, name) = s.extend_conditional(&m("x1"), &y).unwrap();
        assert_eq!(t.measurements().len(), 5);
        assert_eq!(t.outcomes(&name).unwrap().len(), 4);
        assert!(t.complex().contains_face(&[name.clone()].into_iter().collect()));
        assert!(t.complex().contains_face(&[name.clone(), m("x1")].into_iter().collect()));
        assert_eq!(t.complex().faces(), brute_faces(&s, &m("x1"), &y, &name));
        for f in s.complex().faces() {
            assert!(t.complex().contains_face(&f));
        }
        let constant: BTreeMap<Outcome, Measurement> = [(o("0"), m("y1")), (o("1"), m("y1"))].into_iter().collect();
        let (t2, n2) = s.extend_conditional(&m("x2"), &constant).unwrap();
        assert_eq!(t2.outcomes(&n2).unwrap().len(), 4);
        assert_eq!(t2.complex().faces(), brute_faces(&s, &m("x2"), &constant, &n2));
        let bad: BTreeMap<Outcome, Measurement> = [(o("0"), m("x1")), (o("1"), m("y2"))].into_iter().collect();
        assert!(matches!(s.extend_conditional(&m("x1"), &bad), Err(Error::Domain(_))));
        assert!(t.extend_conditional(&m("x1"), &y).is_err());
    }
}
