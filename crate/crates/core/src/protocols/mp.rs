use std::collections::{BTreeMap, BTreeSet};

use super::{MeasurementProtocol, Run};
use crate::error::{check_guard, Error, Result};
use crate::model::{Distribution, EmpiricalModel, ModelLike};
use crate::rational::Prob;
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario, ScenarioLike};

/// `MP(X)` queried lazily: measurements are the protocols over the base,
/// outcomes are maximal runs, faces are compatible protocol sets.
#[derive(Clone, Debug)]
pub struct MpScenario<'a, S: ScenarioLike> {
    base: &'a S,
}

impl<'a, S: ScenarioLike> MpScenario<'a, S> {
    pub fn new(base: &'a S) -> Self {
        MpScenario { base }
    }

    pub fn base(&self) -> &S {
        self.base
    }
}

pub(crate) fn protocol_of<'m>(m: &'m Measurement, base: &impl ScenarioLike) -> Result<&'m MeasurementProtocol> {
    let q = m
        .as_protocol()
        .ok_or_else(|| Error::UnknownMeasurement(m.to_string()))?;
    if let Some(v) = q.validate_on(base).into_iter().next() {
        return Err(Error::domain(format!("`{m}` is not a protocol on the base scenario: {v}")));
    }
    Ok(q)
}

impl<S: ScenarioLike> ScenarioLike for MpScenario<'_, S> {
    fn outcome_set(&self, m: &Measurement) -> Result<BTreeSet<Outcome>> {
        Ok(protocol_of(m, self.base)?.outcome_set())
    }

    fn is_face(&self, sigma: &Face) -> Result<bool> {
        let qs = sigma
            .iter()
            .map(|m| protocol_of(m, self.base))
            .collect::<Result<Vec<_>>>()?;
        protocols_compatible(self.base, &qs)
    }
}

/// Whether every choice of pairwise consistent runs `x̄_i ∈ Q_i` has
/// `⋃σ_{x̄_i}` a face. Maximal runs suffice: any consistent choice extends
/// to a consistent choice of maximal runs with a larger context.
pub fn protocols_compatible(base: &impl ScenarioLike, qs: &[&MeasurementProtocol]) -> Result<bool> {
    fn rec(base: &impl ScenarioLike, qs: &[&MeasurementProtocol], i: usize, acc: &Assignment) -> Result<bool> {
        if i == qs.len() {
            return Ok(true);
        }
        for r in qs[i].consistent_maxruns(acc) {
            let next = acc.union(&r.assignment()).expect("consistent");
            if !base.is_face(&next.domain())? {
                return Ok(false);
            }
            if !rec(base, qs, i + 1, &next)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
    rec(base, qs, 0, &Assignment::empty())
}

/// `MP(e)` queried lazily over any model.
#[derive(Clone, Debug)]
pub struct MpModel<'a, M: ModelLike> {
    base: &'a M,
}

impl<'a, M: ModelLike> MpModel<'a, M> {
    pub fn new(base: &'a M) -> Self {
        MpModel { base }
    }
}

impl<M: ModelLike> ScenarioLike for MpModel<'_, M> {
    fn outcome_set(&self, m: &Measurement) -> Result<BTreeSet<Outcome>> {
        MpScenario::new(self.base).outcome_set(m)
    }

    fn is_face(&self, sigma: &Face) -> Result<bool> {
        MpScenario::new(self.base).is_face(sigma)
    }
}

impl<M: ModelLike> ModelLike for MpModel<'_, M> {
    fn marginal_on(&self, sigma: &Face) -> Result<Distribution> {
        if !self.is_face(sigma)? {
            return Err(Error::domain("protocols are not compatible"));
        }
        let items: Vec<(&Measurement, &MeasurementProtocol)> = sigma
            .iter()
            .map(|m| (m, m.as_protocol().expect("checked")))
            .collect();
        let mut cache: BTreeMap<Face, Distribution> = BTreeMap::new();
        let mut out: BTreeMap<Assignment, Prob> = BTreeMap::new();
        let mut chosen: Vec<Run> = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn rec<M: ModelLike>(
            base: &M,
            items: &[(&Measurement, &MeasurementProtocol)],
            acc: &Assignment,
            chosen: &mut Vec<Run>,
            cache: &mut BTreeMap<Face, Distribution>,
            out: &mut BTreeMap<Assignment, Prob>,
        ) -> Result<()> {
            let i = chosen.len();
            if i == items.len() {
                let dom = acc.domain();
                if !cache.contains_key(&dom) {
                    cache.insert(dom.clone(), base.marginal_on(&dom)?);
                }
                let p = cache[&dom].get(acc);
                if p != Prob::from_integer(0.into()) {
                    let key: Assignment = items
                        .iter()
                        .zip(chosen.iter())
                        .map(|((m, _), r)| ((*m).clone(), Outcome::Run(r.clone())))
                        .collect();
                    out.insert(key, p);
                }
                return Ok(());
            }
            for r in items[i].1.consistent_maxruns(acc) {
                let next = acc.union(&r.assignment()).expect("consistent");
                chosen.push(r);
                rec(base, items, &next, chosen, cache, out)?;
                chosen.pop();
            }
            Ok(())
        }
        rec(self.base, &items, &Assignment::empty(), &mut chosen, &mut cache, &mut out)?;
        Ok(Distribution::from_map_unchecked(sigma.clone(), out))
    }
}

/// Number of protocol subtrees rooted at `prefix` with at most `depth` more steps.
fn count_subtrees(s: &Scenario, prefix: &Run, depth: usize) -> u128 {
    if depth == 0 {
        return 1;
    }
    let ctx = prefix.context();
    let mut total: u128 = 1;
    for m in s.measurements() {
        if ctx.contains(m) {
            continue;
        }
        let mut wide = ctx.clone();
        wide.insert(m.clone());
        if !s.complex().contains_face(&wide) {
            continue;
        }
        let mut prod: u128 = 1;
        for o in s.outcomes(m).expect("vertex") {
            prod = prod.saturating_mul(count_subtrees(s, &prefix.then(m.clone(), o.clone()), depth - 1));
        }
        total = total.saturating_add(prod);
    }
    total
}

/// Every subtree at `prefix`, as the list of its maximal runs.
fn subtrees(s: &Scenario, prefix: &Run, depth: usize) -> Vec<Vec<Run>> {
    let mut out = vec![vec![prefix.clone()]];
    if depth == 0 {
        return out;
    }
    let ctx = prefix.context();
    for m in s.measurements() {
        if ctx.contains(m) {
            continue;
        }
        let mut wide = ctx.clone();
        wide.insert(m.clone());
        if !s.complex().contains_face(&wide) {
            continue;
        }
        let mut combos: Vec<Vec<Run>> = vec![Vec::new()];
        for o in s.outcomes(m).expect("vertex") {
            let branch = subtrees(s, &prefix.then(m.clone(), o.clone()), depth - 1);
            let mut next = Vec::with_capacity(combos.len() * branch.len());
            for c in &combos {
                for b in &branch {
                    let mut joined = c.clone();
                    joined.extend(b.iter().cloned());
                    next.push(joined);
                }
            }
            combos = next;
        }
        out.extend(combos);
    }
    out
}

/// All protocols whose runs have length at most `depth`, in sorted order.
pub fn enumerate_protocols(s: &Scenario, depth: usize) -> Result<Vec<MeasurementProtocol>> {
    check_guard("measurement protocols", count_subtrees(s, &Run::empty(), depth))?;
    let set: BTreeSet<MeasurementProtocol> = subtrees(s, &Run::empty(), depth)
        .into_iter()
        .map(|maximal| MeasurementProtocol::from_maximal_runs(maximal).expect("enumerated protocol"))
        .collect();
    Ok(set.into_iter().collect())
}

/// The explicit scenario `MP(X)` restricted to protocols of depth at most `depth`.
pub fn mp_scenario(s: &Scenario, depth: usize) -> Result<Scenario> {
    let protocols = enumerate_protocols(s, depth)?;
    let n = protocols.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let ok = protocols_compatible(s, &[&protocols[i], &protocols[j]])?;
            adj[i][j] = ok;
            adj[j][i] = ok;
        }
    }
    let mut cliques = Vec::new();
    bron_kerbosch(&adj, Vec::new(), (0..n).collect(), Vec::new(), &mut cliques);
    let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut reach = None;
    for c in cliques {
        compatible_parts(s, &protocols, &mut reach, c, &mut facets)?;
    }
    let names: Vec<Measurement> = protocols.iter().cloned().map(Measurement::protocol).collect();
    let outcomes = protocols
        .iter()
        .zip(&names)
        .map(|(q, m)| (m.clone(), q.outcome_set()))
        .collect();
    let gens = facets.into_iter().map(|f| f.into_iter().map(|i| names[i].clone()).collect::<Face>());
    Scenario::new(outcomes, gens)
}

/// Contexts reached by each protocol under each global assignment. A set of
/// protocols is compatible iff the union of its contexts is a face under
/// every global assignment.
struct Reach {
    contexts: Vec<Vec<Face>>,
}

impl Reach {
    fn new(s: &Scenario, protocols: &[MeasurementProtocol]) -> Result<Self> {
        let size = s
            .measurements()
            .iter()
            .map(|m| s.outcomes(m).map_or(1, |o| o.len() as u128))
            .fold(1u128, u128::saturating_mul);
        check_guard("global assignments", size)?;
        let globals = s.enumerate_assignments(s.measurements())?;
        let contexts = protocols
            .iter()
            .map(|q| {
                globals
                    .iter()
                    .map(|g| q.consistent_maxruns(g).into_iter().next().map(|r| r.context()).unwrap_or_default())
                    .collect()
            })
            .collect();
        Ok(Reach { contexts })
    }

    fn violation(&self, s: &Scenario, set: &[usize]) -> Option<(usize, Face)> {
        let n = self.contexts.first().map_or(0, Vec::len);
        (0..n).find_map(|g| {
            let union: Face = set.iter().flat_map(|&i| self.contexts[i][g].iter().cloned()).collect();
            (!s.complex().contains_face(&union)).then_some((g, union))
        })
    }
}

/// Maximal n-ary compatible subsets of a pairwise compatible set.
fn compatible_parts(
    s: &Scenario,
    protocols: &[MeasurementProtocol],
    reach: &mut Option<Reach>,
    set: Vec<usize>,
    out: &mut BTreeSet<Vec<usize>>,
) -> Result<()> {
    let qs: Vec<&MeasurementProtocol> = set.iter().map(|&i| &protocols[i]).collect();
    if protocols_compatible(s, &qs)? {
        out.insert(set);
        return Ok(());
    }
    if reach.is_none() {
        *reach = Some(Reach::new(s, protocols)?);
    }
    let reach = reach.as_ref().expect("built");
    let mut seen = BTreeSet::new();
    let mut found = BTreeSet::new();
    let mut stack = vec![set];
    while let Some(set) = stack.pop() {
        if !seen.insert(set.clone()) {
            continue;
        }
        check_guard("compatible protocol sets", seen.len() as u128)?;
        let Some((g, _)) = reach.violation(s, &set) else {
            found.insert(set);
            continue;
        };
        for f in s.facets() {
            let part: Vec<usize> = set.iter().copied().filter(|&i| reach.contexts[i][g].is_subset(f)).collect();
            stack.push(part);
        }
    }
    for f in &found {
        if !found.iter().any(|h| h != f && f.iter().all(|i| h.contains(i))) {
            out.insert(f.clone());
        }
    }
    Ok(())
}

fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, p: Vec<usize>, x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    let pivot = p.iter().chain(x.iter()).copied().max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count());
    let mut p = p;
    let mut x = x;
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|&v| pivot.is_none_or(|u| !adj[u][v]))
        .collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&w| adj[v][w]).collect();
        let x2 = x.iter().copied().filter(|&w| adj[v][w]).collect();
        bron_kerbosch(adj, r2, p2, x2, out);
        p.retain(|&w| w != v);
        x.push(v);
    }
}

/// The explicit model `MP(e)` on [`mp_scenario`] at the given depth.
pub fn mp_model(e: &EmpiricalModel, depth: usize) -> Result<EmpiricalModel> {
    let s = mp_scenario(e.scenario(), depth)?;
    let lazy = MpModel::new(e);
    EmpiricalModel::from_facets(s, |c| lazy.marginal_on(c))
}
