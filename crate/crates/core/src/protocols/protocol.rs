use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use super::Run;
use crate::error::{Error, Result};
use crate::scenario::{Assignment, Face, Measurement, Outcome, ScenarioLike};

/// An adaptive strategy: a non-empty, prefix-closed, outcome-complete,
/// deterministically branching set of runs.
///
/// Identity is the run set; the branching index is derived from it.
#[derive(Clone)]
pub struct MeasurementProtocol {
    runs: BTreeSet<Run>,
    next: BTreeMap<Run, Measurement>,
    maximal: Vec<Run>,
}

/// Which protocol condition failed, with a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolViolation {
    Empty,
    /// A step names a measurement twice, an unknown measurement or outcome,
    /// or its context is not a face.
    BadRun { run: String, reason: String },
    /// Condition (i): a prefix is missing.
    NotPrefixClosed { run: String, missing: String },
    /// Condition (ii): an outcome of a performed measurement is missing.
    MissingOutcome { run: String, outcome: String },
    /// Condition (iii): two different next measurements after the same prefix.
    Branching { prefix: String, first: String, second: String },
}

impl fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolViolation::Empty => write!(f, "protocol has no runs"),
            ProtocolViolation::BadRun { run, reason } => write!(f, "run `{run}`: {reason}"),
            ProtocolViolation::NotPrefixClosed { run, missing } => {
                write!(f, "condition (i): `{run}` is present but its prefix `{missing}` is not")
            }
            ProtocolViolation::MissingOutcome { run, outcome } => {
                write!(f, "condition (ii): `{run}` is present but outcome `{outcome}` of its last measurement is missing")
            }
            ProtocolViolation::Branching { prefix, first, second } => {
                write!(f, "condition (iii): after `{prefix}` both `{first}` and `{second}` are measured")
            }
        }
    }
}

fn show(r: &Run) -> String {
    if r.is_empty() {
        "Λ".to_string()
    } else {
        r.to_string()
    }
}

/// Checks conditions (i)–(iii) and the run invariants against a scenario.
pub fn is_protocol(q: &BTreeSet<Run>, s: &impl ScenarioLike) -> Vec<ProtocolViolation> {
    let mut out = Vec::new();
    if q.is_empty() {
        out.push(ProtocolViolation::Empty);
        return out;
    }
    for r in q {
        if !r.has_distinct_measurements() {
            out.push(ProtocolViolation::BadRun {
                run: show(r),
                reason: "repeats a measurement".into(),
            });
            continue;
        }
        let mut ok = true;
        for (m, o) in r.steps() {
            match s.outcome_set(m) {
                Err(_) => {
                    ok = false;
                    out.push(ProtocolViolation::BadRun {
                        run: show(r),
                        reason: format!("unknown measurement `{m}`"),
                    });
                }
                Ok(os) if !os.contains(o) => {
                    ok = false;
                    out.push(ProtocolViolation::BadRun {
                        run: show(r),
                        reason: format!("`{o}` is not an outcome of `{m}`"),
                    });
                }
                Ok(_) => {}
            }
        }
        if ok && !s.is_face(&r.context()).unwrap_or(false) {
            out.push(ProtocolViolation::BadRun {
                run: show(r),
                reason: "its measurements do not form a context".into(),
            });
        }
    }
    out.extend(structural_violations(q));
    for r in q {
        if let Some((m, _)) = r.steps().last() {
            let prefix = r.prefix(r.len() - 1);
            if let Ok(os) = s.outcome_set(m) {
                for o in os {
                    let sib = prefix.then(m.clone(), o.clone());
                    if !q.contains(&sib) {
                        out.push(ProtocolViolation::MissingOutcome {
                            run: show(r),
                            outcome: o.to_string(),
                        });
                    }
                }
            }
        }
    }
    out.dedup();
    out
}

fn structural_violations(q: &BTreeSet<Run>) -> Vec<ProtocolViolation> {
    let mut out = Vec::new();
    let mut next: BTreeMap<Run, &Measurement> = BTreeMap::new();
    for r in q {
        if let Some((m, _)) = r.steps().last() {
            let prefix = r.prefix(r.len() - 1);
            if !q.contains(&prefix) {
                out.push(ProtocolViolation::NotPrefixClosed {
                    run: show(r),
                    missing: show(&prefix),
                });
            }
            match next.get(&prefix) {
                Some(prev) if *prev != m => out.push(ProtocolViolation::Branching {
                    prefix: show(&prefix),
                    first: prev.to_string(),
                    second: m.to_string(),
                }),
                Some(_) => {}
                None => {
                    next.insert(prefix, m);
                }
            }
        }
    }
    out
}

impl MeasurementProtocol {
    /// Builds a protocol from a prefix-closed, deterministically branching
    /// run set. Outcome completeness needs a scenario; see [`is_protocol`].
    pub fn from_runs(runs: impl IntoIterator<Item = Run>) -> Result<Self> {
        let runs: BTreeSet<Run> = runs.into_iter().collect();
        if runs.is_empty() {
            return Err(Error::invalid(ProtocolViolation::Empty));
        }
        if let Some(r) = runs.iter().find(|r| !r.has_distinct_measurements()) {
            return Err(Error::invalid(format!("run `{}` repeats a measurement", show(r))));
        }
        if let Some(v) = structural_violations(&runs).into_iter().next() {
            return Err(Error::invalid(v));
        }
        let mut next = BTreeMap::new();
        for r in &runs {
            if let Some((m, _)) = r.steps().last() {
                next.insert(r.prefix(r.len() - 1), m.clone());
            }
        }
        let maximal = runs
            .iter()
            .filter(|r| !next.contains_key(*r))
            .cloned()
            .collect();
        Ok(MeasurementProtocol { runs, next, maximal })
    }

    /// The prefix closure of the given runs.
    pub fn from_maximal_runs(maximal: impl IntoIterator<Item = Run>) -> Result<Self> {
        let mut runs = BTreeSet::new();
        for r in maximal {
            runs.extend(r.prefixes());
        }
        MeasurementProtocol::from_runs(runs)
    }

    /// `{Λ}`: measure nothing.
    pub fn lambda() -> Self {
        MeasurementProtocol::from_runs([Run::empty()]).expect("static protocol")
    }

    /// `{Λ} ∪ {x}×O_x`: measure `x` once.
    pub fn single(x: &Measurement, outcomes: &BTreeSet<Outcome>) -> Self {
        MeasurementProtocol::from_maximal_runs(
            outcomes.iter().map(|o| Run::single(x.clone(), o.clone())),
        )
        .expect("single-measurement protocol")
    }

    pub fn runs(&self) -> &BTreeSet<Run> {
        &self.runs
    }

    /// The outcome set `O_Q`, sorted.
    pub fn maximal_runs(&self) -> &[Run] {
        &self.maximal
    }

    pub fn outcome_set(&self) -> BTreeSet<Outcome> {
        self.maximal.iter().cloned().map(Outcome::Run).collect()
    }

    /// The measurement performed after `prefix`, if the protocol continues.
    pub fn next_measurement(&self, prefix: &Run) -> Option<&Measurement> {
        self.next.get(prefix)
    }

    /// The outcomes of the step after `r`, with the extended runs.
    pub fn children(&self, r: &Run) -> Vec<(Outcome, Run)> {
        if !self.next.contains_key(r) {
            return Vec::new();
        }
        self.runs
            .range(r.clone()..)
            .take_while(|c| r.is_prefix_of(c))
            .filter(|c| c.len() == r.len() + 1)
            .map(|c| (c.steps()[r.len()].1.clone(), c.clone()))
            .collect()
    }

    pub fn contains(&self, r: &Run) -> bool {
        self.runs.contains(r)
    }

    pub fn is_maximal(&self, r: &Run) -> bool {
        self.runs.contains(r) && !self.next.contains_key(r)
    }

    /// Length of the longest run.
    pub fn depth(&self) -> usize {
        self.maximal.iter().map(Run::len).max().unwrap_or(0)
    }

    /// Every measurement the protocol may perform.
    pub fn measurements(&self) -> Face {
        self.next.values().cloned().collect()
    }

    /// Checks the protocol conditions against a scenario.
    pub fn validate_on(&self, s: &impl ScenarioLike) -> Vec<ProtocolViolation> {
        is_protocol(&self.runs, s)
    }

    /// The maximal run obtained by following the protocol along `a`, or
    /// `None` if a measurement it needs is unassigned.
    pub fn follow(&self, a: &Assignment) -> Option<Run> {
        let mut r = Run::empty();
        while let Some(m) = self.next.get(&r) {
            let o = a.get(m)?;
            r = r.then(m.clone(), o.clone());
        }
        Some(r)
    }

    /// The maximal runs that agree with `a` on its domain.
    pub fn consistent_maxruns(&self, a: &Assignment) -> Vec<Run> {
        self.maximal
            .iter()
            .filter(|r| r.steps().iter().all(|(m, o)| a.get(m).is_none_or(|v| v == o)))
            .cloned()
            .collect()
    }

    /// Renames every measurement (used to embed protocols into larger scenarios).
    pub fn map_measurements(&self, f: impl Fn(&Measurement) -> Measurement) -> MeasurementProtocol {
        MeasurementProtocol::from_runs(self.runs.iter().map(|r| r.map_measurements(&f)))
            .expect("injective renaming preserves protocol structure")
    }
}

impl PartialEq for MeasurementProtocol {
    fn eq(&self, other: &Self) -> bool {
        self.runs == other.runs
    }
}

impl Eq for MeasurementProtocol {}

impl PartialOrd for MeasurementProtocol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MeasurementProtocol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.runs.cmp(&other.runs)
    }
}

impl Hash for MeasurementProtocol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.runs.hash(state);
    }
}

impl fmt::Display for MeasurementProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::scenario::names::write_measurement(f, &Measurement::protocol(self.clone()))
    }
}

impl fmt::Debug for MeasurementProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::names::{parse_measurement, parse_run};
    use crate::scenario::{face, Scenario};

    fn runs(srcs: &[&str]) -> BTreeSet<Run> {
        srcs.iter().map(|s| parse_run(s).unwrap()).collect()
    }

    fn full() -> Scenario {
        Scenario::uniform(&["0", "1"], [vec!["x", "y", "z"]]).unwrap()
    }

    #[test]
    fn counit_protocol_is_valid() {
        let s = Scenario::pr();
        let x = Measurement::base("x1");
        let p = MeasurementProtocol::single(&x, s.outcomes(&x).unwrap());
        assert!(p.validate_on(&s).is_empty());
        assert_eq!(p.maximal_runs().len(), 2);
        assert_eq!(p.to_string(), "{x1=0|x1=1}");
    }

    #[test]
    fn missing_outcome_is_condition_ii() {
        let v = is_protocol(&runs(&["", "x=0"]), &full());
        assert!(matches!(v.as_slice(), [ProtocolViolation::MissingOutcome { .. }]));
        assert!(v[0].to_string().starts_with("condition (ii)"));
    }

    #[test]
    fn adaptive_branching_is_allowed() {
        let q = runs(&["", "x=0", "x=1", "x=0;y=0", "x=0;y=1", "x=1;z=0", "x=1;z=1"]);
        assert!(is_protocol(&q, &full()).is_empty());
        let pr = Scenario::pr();
        let q = runs(&["", "x1=0", "x1=1", "x1=0;x2=0", "x1=0;x2=1"]);
        assert!(matches!(is_protocol(&q, &pr).as_slice(), [ProtocolViolation::BadRun { .. }, ..]));
        let bad = runs(&["", "x=0", "x=1", "y=0", "y=1"]);
        assert!(is_protocol(&bad, &full())
            .iter()
            .any(|v| matches!(v, ProtocolViolation::Branching { .. })));
        let unclosed = runs(&["x=0", "x=1"]);
        assert!(is_protocol(&unclosed, &full())
            .iter()
            .any(|v| matches!(v, ProtocolViolation::NotPrefixClosed { .. })));
    }

    #[test]
    fn follow_and_consistent_maxruns() {
        let m = parse_measurement("{x=0;y=0|x=0;y=1|x=1;z=0|x=1;z=1}").unwrap();
        let p = m.as_protocol().unwrap();
        let a = crate::scenario::names::parse_assignment("x=1,y=0,z=1").unwrap();
        assert_eq!(p.follow(&a).unwrap(), parse_run("x=1;z=1").unwrap());
        let partial = crate::scenario::names::parse_assignment("x=0").unwrap();
        assert_eq!(p.follow(&partial), None);
        assert_eq!(p.consistent_maxruns(&partial).len(), 2);
        assert_eq!(p.depth(), 2);
        assert_eq!(p.measurements(), face(["x", "y", "z"]));
        assert_eq!(MeasurementProtocol::lambda().maximal_runs(), &[Run::empty()]);
    }
}
