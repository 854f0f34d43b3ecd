use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::Simulation;
use crate::error::{Error, Result};
use crate::gen::coin;
use crate::model::ops::tensor;
use crate::model::{DeterministicMorphism, EmpiricalModel, OutcomeFamily, OutcomeMap, VertexMap};
use crate::protocols::{extend_protocol, MeasurementProtocol, Run};
use crate::rational::Prob;
use crate::scenario::{Measurement, Outcome};
use crate::terms::{eval, normalize, Env, Term, TypingContext};

/// A simulated measurement: a protocol over `d⊗c` and how to read its maximal runs.
type Strategy = (MeasurementProtocol, OutcomeMap);

struct Summand<'a> {
    weight: Prob,
    vertices: &'a VertexMap,
    family: &'a OutcomeFamily,
    core: &'a Term,
}

fn summands<'a>(t: &'a Term, w: Prob, out: &mut Vec<Summand<'a>>) -> Result<()> {
    match t {
        Term::Mix { left, lambda, right } => {
            for (side, scale) in [(left, lambda.clone()), (right, Prob::one() - lambda)] {
                if !scale.is_zero() {
                    summands(side, &w * scale, out)?;
                }
            }
            Ok(())
        }
        Term::Coarse { body, family } => match &**body {
            Term::Pullback { map, body, .. } => {
                out.push(Summand { weight: w, vertices: map, family, core: body });
                Ok(())
            }
            _ => Err(Error::invalid(format!("`{t}` is not in normal form"))),
        },
        _ => Err(Error::invalid(format!("`{t}` is not in normal form"))),
    }
}

fn uses_unit(t: &Term) -> bool {
    match t {
        Term::One => true,
        Term::Tensor(a, b) => uses_unit(a) || uses_unit(b),
        Term::Cond { body, .. } => uses_unit(body),
        _ => false,
    }
}

fn single(m: &Measurement, outcomes: &BTreeSet<Outcome>, read: impl Fn(&Outcome) -> Outcome, codomain: BTreeSet<Outcome>) -> Result<Strategy> {
    let map = outcomes
        .iter()
        .map(|o| (Outcome::Run(Run::single(m.clone(), o.clone())), read(o)))
        .collect();
    Ok((MeasurementProtocol::single(m, outcomes), OutcomeMap::new(map, codomain)?))
}

fn constant(o: Outcome) -> Result<Strategy> {
    let map = [(Outcome::Run(Run::empty()), o.clone())].into_iter().collect();
    Ok((MeasurementProtocol::lambda(), OutcomeMap::new(map, [o].into_iter().collect())?))
}

struct Resource<'a> {
    d: &'a EmpiricalModel,
    coin: Option<Measurement>,
    star: Option<Measurement>,
}

fn atoms(
    t: &Term,
    path: &mut Vec<bool>,
    res: &Resource<'_>,
    out: &mut BTreeMap<Measurement, Strategy>,
) -> Result<()> {
    let name = |m: &Measurement, path: &[bool]| {
        path.iter().rev().fold(m.clone(), |acc, &left| if left { acc.left() } else { acc.right() })
    };
    match t {
        Term::Tensor(a, b) => {
            path.push(true);
            atoms(a, path, res, out)?;
            path.pop();
            path.push(false);
            atoms(b, path, res, out)?;
            path.pop();
        }
        Term::Var(_) => {
            for (y, os) in res.d.scenario().outcome_map() {
                out.insert(name(y, path), single(&y.clone().left(), os, Outcome::clone, os.clone())?);
            }
        }
        Term::One => {
            let strategy = match &res.star {
                Some(s) => {
                    let star: BTreeSet<Outcome> = [Outcome::star()].into_iter().collect();
                    single(s, &star, Outcome::clone, star.clone())?
                }
                None => constant(Outcome::star())?,
            };
            out.insert(name(&Measurement::star(), path), strategy);
        }
        Term::Zero => {}
        _ => return Err(Error::invalid(format!("`{t}` is not a tensor of atoms"))),
    }
    Ok(())
}

/// Runs `q` over the simulated measurements, reading each maximal run of
/// `q` with `read`.
fn through(
    strategies: &BTreeMap<Measurement, Strategy>,
    q: &MeasurementProtocol,
    read: impl Fn(&Run) -> Outcome,
    codomain: BTreeSet<Outcome>,
) -> Result<Strategy> {
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for m in q.measurements() {
        let (p, hp) = strategies
            .get(&m)
            .ok_or_else(|| Error::domain(format!("no protocol simulates `{m}`")))?;
        pi.insert(m.clone(), Measurement::protocol(p.clone()));
        h.insert(m, hp.clone());
    }
    let (p, hq) = extend_protocol(&DeterministicMorphism { pi, h }, q)?;
    let reader = q
        .maximal_runs()
        .iter()
        .map(|r| (Outcome::Run(r.clone()), read(r)))
        .collect();
    Ok((p, hq.then(&OutcomeMap::new(reader, codomain)?)?))
}

fn cond_strategy(
    strategies: &BTreeMap<Measurement, Strategy>,
    x: &Measurement,
    branches: &BTreeMap<Outcome, Measurement>,
) -> Result<Strategy> {
    let outs = |m: &Measurement| -> Result<BTreeSet<Outcome>> {
        strategies
            .get(m)
            .map(|(_, h)| h.codomain().clone())
            .ok_or_else(|| Error::domain(format!("no protocol simulates `{m}`")))
    };
    let mut runs = Vec::new();
    let mut codomain = BTreeSet::new();
    for o in outs(x)? {
        let y = branches
            .get(&o)
            .ok_or_else(|| Error::domain(format!("conditional on `{x}` has no branch for `{o}`")))?;
        for o2 in outs(y)? {
            runs.push(Run::single(x.clone(), o.clone()).then(y.clone(), o2.clone()));
            codomain.insert(Outcome::pair(o.clone(), o2));
        }
    }
    let q = MeasurementProtocol::from_maximal_runs(runs)?;
    let read = |r: &Run| Outcome::pair(r.steps()[0].1.clone(), r.steps()[1].1.clone());
    through(strategies, &q, read, codomain)
}

fn core_strategies(core: &Term, res: &Resource<'_>) -> Result<BTreeMap<Measurement, Strategy>> {
    let mut layers = Vec::new();
    let mut t = core;
    while let Term::Cond { body, x, branches } = t {
        layers.push((x, branches));
        t = body;
    }
    let mut out = BTreeMap::new();
    atoms(t, &mut Vec::new(), res, &mut out)?;
    for (x, branches) in layers.into_iter().rev() {
        let s = cond_strategy(&out, x, branches)?;
        out.insert(Measurement::cond(x.clone(), branches.clone()), s);
    }
    Ok(out)
}

/// Compiles a term in one free variable into a simulation of its value
/// from `d`.
///
/// The term is normalized into weighted summands `(f_i*t2_i)/h_i`. With
/// several summands the ancilla carries a coin with those weights, and
/// every protocol starts by flipping it; a `u` factor is added when some
/// summand uses `u`. Conditional measurements become adaptive protocols.
pub fn term_to_simulation(t: &Term, v: &str, d: &EmpiricalModel) -> Result<Simulation> {
    if let Some(w) = t.free_vars().into_iter().find(|w| w != v) {
        return Err(Error::ill_typed("var", format!("unbound variable `{w}`")));
    }
    let ctx = TypingContext::new().with(v, d.scenario().clone())?;
    let env: Env = [(v.to_string(), d.clone())].into_iter().collect();
    let target = eval(t, &env)?;
    let normal = normalize(&ctx, t)?;
    let mut parts = Vec::new();
    summands(&normal, Prob::one(), &mut parts)?;

    let coin_part = (parts.len() > 1)
        .then(|| coin(&parts.iter().map(|s| s.weight.clone()).collect::<Vec<_>>()))
        .transpose()?;
    let unit_part = parts.iter().any(|s| uses_unit(s.core)).then(EmpiricalModel::singleton_model);
    let c = Measurement::base("c");
    let (ancilla, coin_name, star_name) = match (coin_part, unit_part) {
        (None, None) => (EmpiricalModel::zero_model(), None, None),
        (Some(k), None) => (k, Some(c.right()), None),
        (None, Some(u)) => (u, None, Some(Measurement::star().right())),
        (Some(k), Some(u)) => (tensor(&k, &u)?, Some(c.left().right()), Some(Measurement::star().right().right())),
    };
    let res = Resource { d, coin: coin_name, star: star_name };

    let per_summand = parts
        .iter()
        .map(|s| core_strategies(s.core, &res))
        .collect::<Result<Vec<_>>>()?;
    let mut pi = BTreeMap::new();
    let mut h = BTreeMap::new();
    for (x, ox) in target.scenario().outcome_map() {
        let mut branch: BTreeMap<Measurement, Strategy> = BTreeMap::new();
        for (i, (s, strategies)) in parts.iter().zip(&per_summand).enumerate() {
            let core_name = s
                .vertices
                .get(x)
                .ok_or_else(|| Error::invalid(format!("summand {i} does not interpret `{x}`")))?;
            let (p, hp) = strategies
                .get(core_name)
                .ok_or_else(|| Error::invalid(format!("no protocol simulates `{core_name}`")))?;
            let hx = s
                .family
                .get(x)
                .ok_or_else(|| Error::invalid(format!("summand {i} has no outcome map for `{x}`")))?;
            branch.insert(Measurement::base(&format!("s{i}")), (p.clone(), hp.then(hx)?));
        }
        let (p, hx) = match &res.coin {
            None => branch.into_values().next().expect("at least one summand"),
            Some(coin_m) => {
                let flip = Measurement::base("c");
                let k = parts.len();
                let labels: BTreeSet<Outcome> = (0..k).map(|i| Outcome::label(&i.to_string())).collect();
                branch.insert(flip.clone(), single(coin_m, &labels, Outcome::clone, labels.clone())?);
                let runs = (0..k).flat_map(|i| {
                    let s = Measurement::base(&format!("s{i}"));
                    let start = Run::single(flip.clone(), Outcome::label(&i.to_string()));
                    branch[&s].1.codomain().iter().map(move |o| start.then(s.clone(), o.clone())).collect::<Vec<_>>()
                });
                let q = MeasurementProtocol::from_maximal_runs(runs)?;
                through(&branch, &q, |r| r.steps()[1].1.clone(), ox.clone())?
            }
        };
        pi.insert(x.clone(), Measurement::protocol(p));
        h.insert(x.clone(), OutcomeMap::new(hx.entries().clone(), ox.clone())?);
    }
    let morphism = DeterministicMorphism::new(pi, h)?;
    let mut sim = Simulation { source: d.clone(), ancilla, target, morphism, depth: 0 };
    sim.depth = sim.used_depth().max(1);
    Ok(sim)
}
