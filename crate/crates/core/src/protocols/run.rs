use std::fmt;

use crate::scenario::{Assignment, Face, Measurement, Outcome};

/// A sequence of distinct measurements with their observed outcomes.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    steps: Vec<(Measurement, Outcome)>,
}

impl Run {
    /// The empty run `Λ`.
    pub fn empty() -> Self {
        Run { steps: Vec::new() }
    }

    pub fn new(steps: Vec<(Measurement, Outcome)>) -> Self {
        Run { steps }
    }

    pub fn single(m: Measurement, o: Outcome) -> Self {
        Run { steps: vec![(m, o)] }
    }

    pub fn steps(&self) -> &[(Measurement, Outcome)] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `self · (m, o)`.
    pub fn then(&self, m: Measurement, o: Outcome) -> Run {
        let mut steps = self.steps.clone();
        steps.push((m, o));
        Run { steps }
    }

    pub fn prefix(&self, n: usize) -> Run {
        Run {
            steps: self.steps[..n].to_vec(),
        }
    }

    /// All prefixes, from `Λ` up to the run itself.
    pub fn prefixes(&self) -> impl Iterator<Item = Run> + '_ {
        (0..=self.steps.len()).map(|n| self.prefix(n))
    }

    pub fn is_prefix_of(&self, other: &Run) -> bool {
        other.steps.starts_with(&self.steps)
    }

    /// Whether the measurements are pairwise distinct.
    pub fn has_distinct_measurements(&self) -> bool {
        self.context().len() == self.steps.len()
    }

    /// `σ_x̄`.
    pub fn context(&self) -> Face {
        self.steps.iter().map(|(m, _)| m.clone()).collect()
    }

    /// `s_x̄`.
    pub fn assignment(&self) -> Assignment {
        self.steps.iter().cloned().collect()
    }

    pub fn outcome_of(&self, m: &Measurement) -> Option<&Outcome> {
        self.steps.iter().find(|(x, _)| x == m).map(|(_, o)| o)
    }

    /// Agreement on common measurements.
    pub fn consistent(&self, other: &Run) -> bool {
        self.steps
            .iter()
            .all(|(m, o)| other.outcome_of(m).is_none_or(|o2| o2 == o))
    }

    /// The merge `x̄ ∗ ȳ`: appends the steps of `other` whose measurement
    /// has not been performed yet; inconsistent runs merge to `Λ`.
    pub fn merge(&self, other: &Run) -> Run {
        if !self.consistent(other) {
            return Run::empty();
        }
        let mut steps = self.steps.clone();
        for (m, o) in &other.steps {
            if !steps.iter().any(|(x, _)| x == m) {
                steps.push((m.clone(), o.clone()));
            }
        }
        Run { steps }
    }

    /// Applies `f` to every measurement.
    pub fn map_measurements(&self, f: impl Fn(&Measurement) -> Measurement) -> Run {
        Run {
            steps: self.steps.iter().map(|(m, o)| (f(m), o.clone())).collect(),
        }
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::scenario::names::write_run(f, self)
    }
}

impl fmt::Debug for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "Λ")
        } else {
            write!(f, "{self}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::names::parse_run;

    fn r(s: &str) -> Run {
        parse_run(s).unwrap()
    }

    /// The merge clauses read literally, by recursion on the right argument.
    fn merge_by_clauses(x: &Run, y: &Run) -> Run {
        match y.steps().split_first() {
            None => x.clone(),
            Some(((m, o), rest)) => {
                let tail = Run::new(rest.to_vec());
                if x.context().contains(m) {
                    merge_by_clauses(x, &tail)
                } else {
                    merge_by_clauses(&x.then(m.clone(), o.clone()), &tail)
                }
            }
        }
    }

    #[test]
    fn merge_examples() {
        assert_eq!(r("x=0").merge(&Run::empty()), r("x=0"));
        assert_eq!(r("x=0").merge(&r("x=0;y=1")), r("x=0;y=1"));
        assert_eq!(r("x=0").merge(&r("x=1;y=1")), Run::empty());
        assert_eq!(r("a=0;b=1").merge(&r("c=0;b=1;d=1")), r("a=0;b=1;c=0;d=1"));
    }

    #[test]
    fn merge_agrees_with_clauses_and_unions_contexts() {
        let runs = ["", "x=0", "x=1", "y=0", "x=0;y=1", "y=1;x=0", "z=0;x=0", "y=0;z=1;x=1"];
        for a in runs {
            for b in runs {
                let (ra, rb) = (r(a), r(b));
                if ra.consistent(&rb) {
                    let m = ra.merge(&rb);
                    assert_eq!(m, merge_by_clauses(&ra, &rb));
                    let ctx: Face = ra.context().union(&rb.context()).cloned().collect();
                    assert_eq!(m.context(), ctx);
                } else {
                    assert!(ra.merge(&rb).is_empty());
                }
            }
        }
    }
}
