use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Prob;
use crate::scenario::{Assignment, Face};

/// A finitely supported distribution over assignments on a fixed context.
///
/// Only non-zero weights are stored; absent assignments have probability 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution {
    context: Face,
    weights: BTreeMap<Assignment, Prob>,
}

impl Distribution {
    /// Builds and checks a distribution: every key has domain `context`,
    /// weights are non-negative and sum to exactly one.
    pub fn new(context: Face, weights: impl IntoIterator<Item = (Assignment, Prob)>) -> Result<Self> {
        let d = Distribution::unnormalized(context, weights)?;
        let total = d.total();
        if !total.is_one() {
            return Err(Error::invalid(format!(
                "weights on {} sum to {total}, not 1",
                crate::scenario::names::face_to_string(&d.context)
            )));
        }
        Ok(d)
    }

    /// Like [`new`](Self::new) without the sum-to-one check.
    pub fn unnormalized(context: Face, weights: impl IntoIterator<Item = (Assignment, Prob)>) -> Result<Self> {
        let mut out: BTreeMap<Assignment, Prob> = BTreeMap::new();
        for (a, p) in weights {
            if a.domain() != context {
                return Err(Error::invalid(format!(
                    "assignment `{a}` is not on context {}",
                    crate::scenario::names::face_to_string(&context)
                )));
            }
            if p < Prob::zero() {
                return Err(Error::invalid(format!("negative weight {p} at `{a}`")));
            }
            *out.entry(a).or_insert_with(Prob::zero) += p;
        }
        out.retain(|_, p| !p.is_zero());
        Ok(Distribution { context, weights: out })
    }

    pub(crate) fn from_map_unchecked(context: Face, weights: BTreeMap<Assignment, Prob>) -> Self {
        let mut weights = weights;
        weights.retain(|_, p| !p.is_zero());
        Distribution { context, weights }
    }

    /// The point mass at `a`.
    pub fn point(a: Assignment) -> Self {
        Distribution {
            context: a.domain(),
            weights: [(a, Prob::one())].into_iter().collect(),
        }
    }

    pub fn context(&self) -> &Face {
        &self.context
    }

    pub fn get(&self, a: &Assignment) -> Prob {
        self.weights.get(a).cloned().unwrap_or_else(Prob::zero)
    }

    /// Support entries in assignment order.
    pub fn iter(&self) -> impl Iterator<Item = (&Assignment, &Prob)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> Prob {
        self.weights.values().fold(Prob::zero(), |acc, p| acc + p)
    }

    /// Marginal on `tau ⊆ context`.
    pub fn marginal(&self, tau: &Face) -> Result<Distribution> {
        if !tau.is_subset(&self.context) {
            return Err(Error::domain(format!(
                "{} is not contained in {}",
                crate::scenario::names::face_to_string(tau),
                crate::scenario::names::face_to_string(&self.context)
            )));
        }
        Ok(self.map(tau.clone(), |a| a.project(tau)))
    }

    /// Pushes the distribution along `f`, whose results must lie on `context`.
    pub fn map(&self, context: Face, f: impl Fn(&Assignment) -> Assignment) -> Distribution {
        let mut out: BTreeMap<Assignment, Prob> = BTreeMap::new();
        for (a, p) in &self.weights {
            *out.entry(f(a)).or_insert_with(Prob::zero) += p;
        }
        Distribution { context, weights: out }
    }

    /// `λ·self + (1−λ)·other`, on the same context.
    pub fn mix(&self, lambda: &Prob, other: &Distribution) -> Distribution {
        let mu = Prob::one() - lambda;
        let mut out: BTreeMap<Assignment, Prob> = BTreeMap::new();
        for (a, p) in &self.weights {
            *out.entry(a.clone()).or_insert_with(Prob::zero) += lambda * p;
        }
        for (a, p) in &other.weights {
            *out.entry(a.clone()).or_insert_with(Prob::zero) += &mu * p;
        }
        Distribution::from_map_unchecked(self.context.clone(), out)
    }

    /// Product distribution on disjoint contexts, after renaming each side.
    pub fn product(
        &self,
        other: &Distribution,
        left: impl Fn(&Assignment) -> Assignment,
        right: impl Fn(&Assignment) -> Assignment,
        context: Face,
    ) -> Distribution {
        let mut out = BTreeMap::new();
        for (a, p) in &self.weights {
            let la = left(a);
            for (b, q) in &other.weights {
                let joined = la.union(&right(b)).expect("disjoint contexts");
                out.insert(joined, p * q);
            }
        }
        Distribution { context, weights: out }
    }

    /// Scales all weights by `c > 0`.
    pub fn scale(&self, c: &Prob) -> Distribution {
        Distribution::from_map_unchecked(
            self.context.clone(),
            self.weights.iter().map(|(a, p)| (a.clone(), p * c)).collect(),
        )
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.weights.iter().map(|(a, p)| (a.to_string(), p.to_string())))
            .finish()
    }
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

    #[test]
    fn checks_domain_sign_and_total() {
        let ctx = face(["x", "y"]);
        let ok = Distribution::new(ctx.clone(), [(a("x=0,y=0"), ratio(1, 2)), (a("x=1,y=1"), ratio(1, 2))]);
        assert!(ok.is_ok());
        assert!(Distribution::new(ctx.clone(), [(a("x=0,y=0"), ratio(3, 4))]).is_err());
        assert!(Distribution::new(ctx.clone(), [(a("x=0"), ratio(1, 1))]).is_err());
        assert!(Distribution::new(ctx, [(a("x=0,y=0"), ratio(2, 1)), (a("x=1,y=0"), ratio(-1, 1))]).is_err());
    }

    #[test]
    fn marginal_sums_extensions() {
        let d = Distribution::new(
            face(["x", "y"]),
            [(a("x=0,y=0"), ratio(1, 2)), (a("x=1,y=1"), ratio(1, 4)), (a("x=1,y=0"), ratio(1, 4))],
        )
        .unwrap();
        let m = d.marginal(&face(["x"])).unwrap();
        assert_eq!(m.get(&a("x=0")), ratio(1, 2));
        assert_eq!(m.get(&a("x=1")), ratio(1, 2));
        assert_eq!(d.marginal(&Face::new()).unwrap(), Distribution::point(Assignment::empty()));
        assert!(d.marginal(&face(["z"])).is_err());
    }
}
