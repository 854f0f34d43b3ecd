//! Library models and seeded random generation.

use std::collections::BTreeSet;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ops::{coarse_grain, mix};
use crate::model::{Distribution, EmpiricalModel, OutcomeFamily, OutcomeMap};
use crate::rational::{ratio, Prob};
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario};

/// Largest denominator used for sampled weights.
pub const MAX_DENOMINATOR: i64 = 32;

/// The generator for case `case` of a run seeded with `seed`.
pub fn case_rng(seed: u64, case: u64) -> ChaCha8Rng {
    let mixed = seed ^ case.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mixed)
}

pub fn pr() -> EmpiricalModel {
    EmpiricalModel::pr_box()
}

/// PR's scenario with every context perfectly correlated.
pub fn correlated_box() -> EmpiricalModel {
    let s = Scenario::pr();
    EmpiricalModel::from_facets(s, |c| {
        let half = ratio(1, 2);
        let w = ["0", "1"]
            .iter()
            .map(|o| (c.iter().map(|m| (m.clone(), Outcome::label(o))).collect(), half.clone()));
        Distribution::new(c.clone(), w)
    })
    .expect("correlated box")
}

/// `PR +_{1/3} correlated`, with NCF 2/3.
pub fn mix_demo() -> EmpiricalModel {
    mix(&pr(), &ratio(1, 3), &correlated_box()).expect("same scenario")
}

/// A point-mass model on PR's scenario.
pub fn deterministic_pr(global: &Assignment) -> Result<EmpiricalModel> {
    EmpiricalModel::deterministic(Scenario::pr(), global)
}

/// One measurement `c` with outcomes `0..k` drawn with the given weights.
pub fn coin(weights: &[Prob]) -> Result<EmpiricalModel> {
    if weights.is_empty() {
        return Err(Error::domain("a coin needs at least one outcome"));
    }
    let c = Measurement::base("c");
    let outcomes: BTreeSet<Outcome> = (0..weights.len()).map(|i| Outcome::label(&i.to_string())).collect();
    let s = Scenario::new([(c.clone(), outcomes)].into_iter().collect(), [[c.clone()].into_iter().collect::<Face>()])?;
    let face: Face = [c.clone()].into_iter().collect();
    let dist = Distribution::new(
        face.clone(),
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| (Assignment::empty().with(c.clone(), Outcome::label(&i.to_string())), w.clone())),
    )?;
    EmpiricalModel::new(s, [(face, dist)].into_iter().collect())
}

/// The uniform `k`-outcome coin.
pub fn uniform_coin(k: usize) -> Result<EmpiricalModel> {
    coin(&vec![ratio(1, k as i64); k])
}

/// `k` positive weights summing to one, with denominators at most `max_den`.
pub fn random_weights(rng: &mut impl Rng, k: usize, max_den: i64) -> Vec<Prob> {
    assert!(k >= 1);
    let den = rng.gen_range((k as i64).max(2)..=max_den.max(k as i64));
    let mut cuts: Vec<i64> = (1..den).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(k);
    for c in cuts.into_iter().chain([den]) {
        out.push(ratio(c - prev, den));
        prev = c;
    }
    out
}

/// A random weight in `[0,1]` with bounded denominator.
pub fn random_prob(rng: &mut impl Rng, max_den: i64) -> Prob {
    let den = rng.gen_range(1..=max_den);
    ratio(rng.gen_range(0..=den), den)
}

/// A random scenario on `1..=max_measurements` binary measurements `m0, m1, …`.
pub fn random_scenario(rng: &mut impl Rng, max_measurements: usize) -> Scenario {
    let n = rng.gen_range(1..=max_measurements.max(1));
    let names: Vec<Measurement> = (0..n).map(|i| Measurement::base(&format!("m{i}"))).collect();
    let mut gens: Vec<Face> = Vec::new();
    for _ in 0..rng.gen_range(1..=n) {
        let f: Face = names.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if !f.is_empty() {
            gens.push(f);
        }
    }
    for m in &names {
        if !gens.iter().any(|f| f.contains(m)) {
            gens.push([m.clone()].into_iter().collect());
        }
    }
    let binary: BTreeSet<Outcome> = ["0", "1"].iter().map(|o| Outcome::label(o)).collect();
    Scenario::new(names.iter().map(|m| (m.clone(), binary.clone())).collect(), gens).expect("random scenario")
}

pub fn random_global(rng: &mut impl Rng, s: &Scenario) -> Assignment {
    s.outcome_map()
        .iter()
        .map(|(m, os)| {
            let os: Vec<&Outcome> = os.iter().collect();
            (m.clone(), (*os.choose(rng).expect("nonempty outcome set")).clone())
        })
        .collect()
}

/// A convex mixture of up to three random deterministic models on `s`.
pub fn random_noncontextual(rng: &mut impl Rng, s: &Scenario) -> EmpiricalModel {
    let k = rng.gen_range(1..=3);
    let weights = random_weights(rng, k, MAX_DENOMINATOR);
    let mut acc: Option<(Prob, EmpiricalModel)> = None;
    for w in weights {
        let d = EmpiricalModel::deterministic(s.clone(), &random_global(rng, s)).expect("total assignment");
        acc = Some(match acc {
            None => (w, d),
            Some((aw, a)) => {
                let total = &aw + &w;
                (total.clone(), mix(&a, &(aw / &total), &d).expect("same scenario"))
            }
        });
    }
    acc.expect("at least one component").1
}

/// PR with the outcomes of a random subset of measurements swapped.
pub fn random_pr_relabeling(rng: &mut impl Rng) -> EmpiricalModel {
    let flip = OutcomeMap::from_map(
        [("0", "1"), ("1", "0")]
            .iter()
            .map(|(a, b)| (Outcome::label(a), Outcome::label(b)))
            .collect(),
    );
    let family: OutcomeFamily = Scenario::pr()
        .measurements()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|m| (m.clone(), flip.clone()))
        .collect();
    coarse_grain(&pr(), &family).expect("bijective relabeling")
}

/// A random model on at most `max_measurements` binary measurements: either
/// noncontextual on a random scenario, or a mixture of a PR relabeling with
/// a noncontextual model on PR's scenario.
pub fn random_model(rng: &mut impl Rng, max_measurements: usize) -> EmpiricalModel {
    if max_measurements >= 4 && rng.gen_bool(0.4) {
        let nc = random_noncontextual(rng, &Scenario::pr());
        let lambda = random_prob(rng, MAX_DENOMINATOR);
        mix(&random_pr_relabeling(rng), &lambda, &nc).expect("same scenario")
    } else {
        let s = random_scenario(rng, max_measurements);
        random_noncontextual(rng, &s)
    }
}

/// A random model on `s`; on PR's scenario it is a PR relabeling mixed
/// with a noncontextual model about half the time.
pub fn random_model_on(rng: &mut impl Rng, s: &Scenario) -> EmpiricalModel {
    let nc = random_noncontextual(rng, s);
    if *s == Scenario::pr() && rng.gen_bool(0.5) {
        let lambda = random_prob(rng, MAX_DENOMINATOR);
        mix(&random_pr_relabeling(rng), &lambda, &nc).expect("same scenario")
    } else {
        nc
    }
}

/// `k/den` with `0 < k < den`.
pub fn random_open_prob(rng: &mut impl Rng, max_den: i64) -> Prob {
    let den = rng.gen_range(2..=max_den.max(2));
    ratio(rng.gen_range(1..den), den)
}

/// Every global assignment on `s`, in order.
pub fn globals(s: &Scenario) -> Vec<Assignment> {
    let mut out = vec![Assignment::empty()];
    for (m, os) in s.outcome_map() {
        out = out
            .into_iter()
            .flat_map(|a| os.iter().map(move |o| a.clone().with(m.clone(), o.clone())))
            .collect();
    }
    out
}

/// An assignment of labels to base measurements.
pub fn labels(pairs: &[(&str, &str)]) -> Assignment {
    pairs.iter().map(|(m, o)| (Measurement::base(m), Outcome::label(o))).collect()
}

#[cfg(test)]
pub(crate) fn sum(ws: &[Prob]) -> Prob {
    ws.iter().fold(Prob::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;
    use crate::fraction::ncf;

    #[test]
    fn library_models() {
        assert!(correlated_box().validate_model().is_valid());
        assert_eq!(ncf(&mix_demo()).unwrap().optimum, ratio(2, 3));
        let c = uniform_coin(3).unwrap();
        assert_eq!(c.scenario().measurements().len(), 1);
        assert!(coin(&[]).is_err());
    }

    #[test]
    fn weights_sum_to_one() {
        let mut rng = case_rng(1, 0);
        for k in 1..6 {
            let ws = random_weights(&mut rng, k, MAX_DENOMINATOR);
            assert_eq!(ws.len(), k);
            assert!(ws.iter().all(|w| *w > Prob::zero()));
            assert!(sum(&ws).is_one());
        }
    }

    #[test]
    fn random_models_are_valid_and_reproducible() {
        for case in 0..30 {
            let a = random_model(&mut case_rng(9, case), 4);
            let b = random_model(&mut case_rng(9, case), 4);
            assert_eq!(a, b);
            assert!(a.validate_model().is_valid());
        }
    }

    #[test]
    fn relabelings_stay_strongly_contextual() {
        let mut rng = case_rng(3, 3);
        for _ in 0..5 {
            assert!(ncf(&random_pr_relabeling(&mut rng)).unwrap().optimum.is_zero());
        }
    }
}
