use std::collections::{BTreeMap, BTreeSet};

use super::ops::{coarse_grain, pullback, OutcomeMap, VertexMap};
use super::{Distribution, EmpiricalModel};
use crate::error::{guard, Result};
use crate::rational::Prob;
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario};

/// A witness `d = (f*e)/h` with `f` a simplicial isomorphism and every
/// `h_x` a bijection.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Isomorphism {
    pub f: VertexMap,
    pub h: BTreeMap<Measurement, OutcomeMap>,
}

impl Isomorphism {
    /// `(f*e)/h` on the facets of `d_scenario`.
    pub fn apply(&self, e: &EmpiricalModel, d_scenario: &Scenario) -> Result<EmpiricalModel> {
        let facets: Vec<Face> = d_scenario.facets().iter().cloned().collect();
        let pulled = pullback(e, &self.f, Some(&facets))?;
        coarse_grain(&pulled, &self.h)
    }
}

fn signature(s: &Scenario, x: &Measurement) -> (usize, Vec<usize>) {
    let mut sizes: Vec<usize> = s.facets().iter().filter(|c| c.contains(x)).map(|c| c.len()).collect();
    sizes.sort_unstable();
    (s.outcomes(x).map(|o| o.len()).unwrap_or(0), sizes)
}

fn invariants_match(e: &Scenario, d: &Scenario) -> bool {
    let facet_sizes = |s: &Scenario| {
        let mut v: Vec<usize> = s.facets().iter().map(|c| c.len()).collect();
        v.sort_unstable();
        v
    };
    let sigs = |s: &Scenario| {
        let mut v: Vec<(usize, Vec<usize>)> = s.measurements().iter().map(|x| signature(s, x)).collect();
        v.sort();
        v
    };
    e.measurements().len() == d.measurements().len()
        && e.facets().len() == d.facets().len()
        && facet_sizes(e) == facet_sizes(d)
        && sigs(e) == sigs(d)
}

struct Search<'a> {
    e: &'a EmpiricalModel,
    d: &'a EmpiricalModel,
    order: Vec<Measurement>,
    f: VertexMap,
    h: BTreeMap<Measurement, BTreeMap<Outcome, Outcome>>,
    used: BTreeSet<Measurement>,
    nodes: u128,
    warned: bool,
    d_marginals: BTreeMap<Face, Distribution>,
}

impl Search<'_> {
    fn d_marginal(&mut self, a: &Face) -> Distribution {
        if let Some(m) = self.d_marginals.get(a) {
            return m.clone();
        }
        let m = self.d.marginal(a).expect("subface of a facet");
        self.d_marginals.insert(a.clone(), m.clone());
        m
    }

    /// Checks every facet of `d` through `x'` on its assigned part.
    fn consistent_at(&mut self, xp: &Measurement) -> bool {
        let facets: Vec<Face> = self
            .d
            .scenario()
            .facets()
            .iter()
            .filter(|c| c.contains(xp))
            .cloned()
            .collect();
        for c in facets {
            let assigned: Face = c.iter().filter(|v| self.f.contains_key(*v)).cloned().collect();
            let image: Face = assigned.iter().map(|v| self.f[v].clone()).collect();
            let Ok(em) = self.e.marginal(&image) else {
                return false;
            };
            if assigned.len() == c.len() && !self.e.scenario().facets().contains(&image) {
                return false;
            }
            let pushed = em.map(assigned.clone(), |t| {
                assigned
                    .iter()
                    .map(|v| (v.clone(), self.h[v][t.get(&self.f[v]).expect("measured")].clone()))
                    .collect::<Assignment>()
            });
            if pushed != self.d_marginal(&assigned) {
                return false;
            }
        }
        true
    }

    fn run(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        self.nodes += 1;
        if !self.warned && self.nodes > guard() {
            eprintln!("warning: isomorphism search has visited more than {} nodes", guard());
            self.warned = true;
        }
        let xp = self.order[k].clone();
        let sig = signature(self.d.scenario(), &xp);
        let dm = self.d_marginal(&[xp.clone()].into_iter().collect());
        let cands: Vec<Measurement> = self
            .e
            .scenario()
            .measurements()
            .iter()
            .filter(|x| !self.used.contains(*x) && signature(self.e.scenario(), x) == sig)
            .cloned()
            .collect();
        for x in cands {
            let em = self.e.marginal(&[x.clone()].into_iter().collect()).expect("vertex");
            for bij in marginal_bijections(self.e.scenario(), &x, &em, self.d.scenario(), &xp, &dm) {
                self.f.insert(xp.clone(), x.clone());
                self.h.insert(xp.clone(), bij);
                self.used.insert(x.clone());
                if self.consistent_at(&xp) && self.run(k + 1) {
                    return true;
                }
                self.used.remove(&x);
                self.f.remove(&xp);
                self.h.remove(&xp);
            }
        }
        false
    }
}

/// Bijections `O_x → O'_{x'}` that carry the marginal of `x` onto that of `x'`.
fn marginal_bijections(
    es: &Scenario,
    x: &Measurement,
    em: &Distribution,
    ds: &Scenario,
    xp: &Measurement,
    dm: &Distribution,
) -> Vec<BTreeMap<Outcome, Outcome>> {
    let ox: Vec<Outcome> = es.outcomes(x).expect("vertex").iter().cloned().collect();
    let oxp: Vec<Outcome> = ds.outcomes(xp).expect("vertex").iter().cloned().collect();
    let pe = |o: &Outcome| -> Prob { em.get(&[(x.clone(), o.clone())].into_iter().collect()) };
    let pd = |o: &Outcome| -> Prob { dm.get(&[(xp.clone(), o.clone())].into_iter().collect()) };
    let mut out = Vec::new();
    let mut current = BTreeMap::new();
    let mut taken = vec![false; oxp.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        ox: &[Outcome],
        oxp: &[Outcome],
        pe: &dyn Fn(&Outcome) -> Prob,
        pd: &dyn Fn(&Outcome) -> Prob,
        taken: &mut Vec<bool>,
        current: &mut BTreeMap<Outcome, Outcome>,
        out: &mut Vec<BTreeMap<Outcome, Outcome>>,
    ) {
        if i == ox.len() {
            out.push(current.clone());
            return;
        }
        let p = pe(&ox[i]);
        for j in 0..oxp.len() {
            if !taken[j] && pd(&oxp[j]) == p {
                taken[j] = true;
                current.insert(ox[i].clone(), oxp[j].clone());
                rec(i + 1, ox, oxp, pe, pd, taken, current, out);
                current.remove(&ox[i]);
                taken[j] = false;
            }
        }
    }
    if ox.len() == oxp.len() {
        rec(0, &ox, &oxp, &pe, &pd, &mut taken, &mut current, &mut out);
    }
    out
}

/// Vertices of `s` ordered so that each one shares as many facets as
/// possible with the ones before it.
fn search_order(s: &Scenario) -> Vec<Measurement> {
    let mut order: Vec<Measurement> = Vec::new();
    let mut rest: BTreeSet<Measurement> = s.measurements().clone();
    while !rest.is_empty() {
        let score = |x: &Measurement| -> (usize, usize) {
            let shared = s
                .facets()
                .iter()
                .filter(|c| c.contains(x))
                .map(|c| c.iter().filter(|v| order.contains(v)).count())
                .sum();
            let deg = s.facets().iter().filter(|c| c.contains(x)).map(|c| c.len()).sum();
            (shared, deg)
        };
        let best = rest
            .iter()
            .max_by(|a, b| score(a).cmp(&score(b)).then_with(|| b.cmp(a)))
            .expect("non-empty")
            .clone();
        rest.remove(&best);
        order.push(best);
    }
    order
}

/// Searches for `d = (f*e)/h` with `f` a simplicial isomorphism and
/// outcome bijections `h`. Returns a witness when one exists.
pub fn is_isomorphic(e: &EmpiricalModel, d: &EmpiricalModel) -> Option<Isomorphism> {
    if !invariants_match(e.scenario(), d.scenario()) {
        return None;
    }
    let mut search = Search {
        e,
        d,
        order: search_order(d.scenario()),
        f: BTreeMap::new(),
        h: BTreeMap::new(),
        used: BTreeSet::new(),
        nodes: 0,
        warned: false,
        d_marginals: BTreeMap::new(),
    };
    if !search.run(0) {
        return None;
    }
    let h = search
        .h
        .iter()
        .map(|(xp, map)| {
            let codomain = d.scenario().outcomes(xp).expect("vertex").clone();
            (xp.clone(), OutcomeMap::new(map.clone(), codomain).expect("bijection"))
        })
        .collect();
    Some(Isomorphism { f: search.f, h })
}
