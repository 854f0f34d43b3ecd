use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::simplex::{equality_feasible, simplex_solve};
use crate::error::{check_guard, Error, Result};
use crate::model::{Distribution, EmpiricalModel};
use crate::rational::Prob;
use crate::scenario::{Assignment, Face, Measurement};

/// A linear functional on empirical models, one coefficient per facet
/// and local assignment (absent entries are zero).
///
/// Every non-contextual model scores at least 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellFunctional {
    pub coefficients: BTreeMap<Face, BTreeMap<Assignment, Prob>>,
}

impl BellFunctional {
    /// `Σ_{C,s} y_{C,s} e_C(s)`.
    pub fn value(&self, e: &EmpiricalModel) -> Result<Prob> {
        let mut total = Prob::zero();
        for (c, row) in &self.coefficients {
            let d = e.marginal(c)?;
            for (s, y) in row {
                total += y * d.get(s);
            }
        }
        Ok(total)
    }

    /// The score of a deterministic global assignment.
    pub fn score_global(&self, g: &Assignment) -> Prob {
        self.coefficients
            .iter()
            .map(|(c, row)| row.get(&g.project(c)).cloned().unwrap_or_else(Prob::zero))
            .fold(Prob::zero(), |a, b| a + b)
    }
}

/// The optimal solution of the non-contextual fraction program.
#[derive(Clone, Debug)]
pub struct LpResult {
    pub optimum: Prob,
    /// Positive weights on global assignments.
    pub weights: Vec<(Assignment, Prob)>,
    /// `e_C(s) − Σ_{g|_C=s} b_g` on every facet, zero entries omitted.
    pub residual: BTreeMap<Face, BTreeMap<Assignment, Prob>>,
    pub certificate: BellFunctional,
    model: EmpiricalModel,
}

impl LpResult {
    /// `e^NC`: the normalized weights pushed to facets, when the optimum is positive.
    pub fn noncontextual_part(&self) -> Option<EmpiricalModel> {
        if self.optimum.is_zero() {
            return None;
        }
        let scale = Prob::one() / &self.optimum;
        let weights: Vec<(Assignment, Prob)> = self.weights.iter().map(|(g, w)| (g.clone(), w * &scale)).collect();
        Some(global_mixture(&self.model, &weights))
    }

    /// `e'`: the normalized residual, when the optimum is below one.
    pub fn contextual_part(&self) -> Option<EmpiricalModel> {
        if self.optimum.is_one() {
            return None;
        }
        if self.optimum.is_zero() {
            return Some(self.model.clone());
        }
        let scale = Prob::one() / (Prob::one() - &self.optimum);
        let dists = self
            .residual
            .iter()
            .map(|(c, row)| {
                let d = Distribution::new(c.clone(), row.iter().map(|(a, p)| (a.clone(), p * &scale)))
                    .expect("normalized residual");
                (c.clone(), d)
            })
            .collect();
        Some(EmpiricalModel::new_unchecked(self.model.scenario().clone(), dists))
    }
}

/// The model on `e`'s scenario induced by a distribution on global assignments.
pub fn global_mixture(e: &EmpiricalModel, weights: &[(Assignment, Prob)]) -> EmpiricalModel {
    let dists = e
        .scenario()
        .facets()
        .iter()
        .map(|c| {
            let mut row: BTreeMap<Assignment, Prob> = BTreeMap::new();
            for (g, w) in weights {
                *row.entry(g.project(c)).or_insert_with(Prob::zero) += w;
            }
            (c.clone(), Distribution::new(c.clone(), row).expect("weights sum to one"))
        })
        .collect();
    EmpiricalModel::new_unchecked(e.scenario().clone(), dists)
}

/// Global assignments whose restriction to every facet lies in the support.
pub fn supported_globals(e: &EmpiricalModel) -> Result<Vec<Assignment>> {
    let order: Vec<Measurement> = e.scenario().measurements().iter().cloned().collect();
    let facets: Vec<(&Face, &Distribution)> = e.facet_distributions().iter().collect();
    let mut out = Vec::new();
    let limit = crate::error::guard();
    fn rec(
        e: &EmpiricalModel,
        order: &[Measurement],
        facets: &[(&Face, &Distribution)],
        acc: Assignment,
        out: &mut Vec<Assignment>,
        limit: u128,
    ) -> Result<()> {
        let k = acc.len();
        if k == order.len() {
            if out.len() as u128 >= limit {
                return check_guard("LP columns (supported global assignments)", out.len() as u128 + 1);
            }
            out.push(acc);
            return Ok(());
        }
        let x = &order[k];
        for o in e.scenario().outcomes(x)? {
            let next = acc.clone().with(x.clone(), o.clone());
            let ok = facets.iter().filter(|(c, _)| c.contains(x)).all(|(c, d)| {
                let part = next.project(c);
                d.iter().any(|(s, _)| part.agrees_with(s))
            });
            if ok {
                rec(e, order, facets, next, out, limit)?;
            }
        }
        Ok(())
    }
    rec(e, &order, &facets, Assignment::empty(), &mut out, limit)?;
    Ok(out)
}

struct Program {
    globals: Vec<Assignment>,
    rows: Vec<(Face, Assignment, Prob)>,
    matrix: Vec<Vec<Prob>>,
}

fn program(e: &EmpiricalModel) -> Result<Program> {
    let globals = supported_globals(e)?;
    let mut rows = Vec::new();
    for (c, d) in e.facet_distributions() {
        for (s, p) in d.iter() {
            rows.push((c.clone(), s.clone(), p.clone()));
        }
    }
    let index: BTreeMap<(&Face, &Assignment), usize> = rows.iter().enumerate().map(|(i, (c, s, _))| ((c, s), i)).collect();
    let mut matrix = vec![vec![Prob::zero(); globals.len()]; rows.len()];
    for (j, g) in globals.iter().enumerate() {
        for c in e.facet_distributions().keys() {
            let s = g.project(c);
            let i = index[&(c, &s)];
            matrix[i][j] = Prob::one();
        }
    }
    Ok(Program { globals, rows, matrix })
}

/// The non-contextual fraction by exact linear programming:
/// `max Σ b_g` subject to `Σ_{g|_C=s} b_g ≤ e_C(s)` and `b ≥ 0`.
///
/// Columns are the global assignments that avoid every zero cell; the
/// others must have weight zero in any feasible point.
pub fn ncf(e: &EmpiricalModel) -> Result<LpResult> {
    let p = program(e)?;
    let rhs: Vec<Prob> = p.rows.iter().map(|(_, _, v)| v.clone()).collect();
    let cost = vec![Prob::one(); p.globals.len()];
    let sol = if p.globals.is_empty() {
        super::simplex::LpSolution {
            optimum: Prob::zero(),
            x: Vec::new(),
            dual: vec![Prob::zero(); p.rows.len()],
        }
    } else {
        simplex_solve(&p.matrix, &rhs, &cost)?
    };
    let weights: Vec<(Assignment, Prob)> = p
        .globals
        .iter()
        .zip(sol.x.iter())
        .filter(|(_, w)| !w.is_zero())
        .map(|(g, w)| (g.clone(), w.clone()))
        .collect();
    let mut residual: BTreeMap<Face, BTreeMap<Assignment, Prob>> = BTreeMap::new();
    for (i, (c, s, v)) in p.rows.iter().enumerate() {
        let used: Prob = p.matrix[i].iter().zip(sol.x.iter()).filter(|(a, _)| !a.is_zero()).map(|(_, x)| x.clone()).sum();
        let r = v - used;
        if !r.is_zero() {
            residual.entry(c.clone()).or_default().insert(s.clone(), r);
        }
    }
    let mut coefficients: BTreeMap<Face, BTreeMap<Assignment, Prob>> = BTreeMap::new();
    for (i, (c, s, _)) in p.rows.iter().enumerate() {
        if !sol.dual[i].is_zero() {
            coefficients.entry(c.clone()).or_default().insert(s.clone(), sol.dual[i].clone());
        }
    }
    for c in e.scenario().facets() {
        let support = e.facet_distribution(c).expect("facet");
        for s in e.scenario().enumerate_assignments(c)? {
            if support.get(&s).is_zero() {
                coefficients.entry(c.clone()).or_default().insert(s, Prob::one());
            }
        }
    }
    Ok(LpResult {
        optimum: sol.optimum,
        weights,
        residual,
        certificate: BellFunctional { coefficients },
        model: e.clone(),
    })
}

/// `CF(e) = 1 − NCF(e)`.
pub fn cf(e: &EmpiricalModel) -> Result<Prob> {
    Ok(Prob::one() - ncf(e)?.optimum)
}

/// Whether `e` is the marginal family of a distribution on global assignments.
///
/// Decided twice, by `NCF(e) = 1` and by equality-constrained feasibility;
/// disagreement is reported as an error.
pub fn is_noncontextual(e: &EmpiricalModel) -> Result<bool> {
    let by_fraction = ncf(e)?.optimum.is_one();
    let by_feasibility = global_section(e)?.is_some();
    if by_fraction != by_feasibility {
        return Err(Error::invalid("fraction and feasibility tests disagree"));
    }
    Ok(by_fraction)
}

/// A distribution on global assignments whose marginals are `e`, if any.
pub fn global_section(e: &EmpiricalModel) -> Result<Option<Vec<(Assignment, Prob)>>> {
    let p = program(e)?;
    if p.globals.is_empty() {
        return Ok(None);
    }
    let rhs: Vec<Prob> = p.rows.iter().map(|(_, _, v)| v.clone()).collect();
    Ok(equality_feasible(&p.matrix, &rhs)?.map(|x| {
        p.globals
            .into_iter()
            .zip(x)
            .filter(|(_, w)| !w.is_zero())
            .collect()
    }))
}

/// Enumerates every global assignment; used by tests as a brute-force oracle.
pub fn all_globals(e: &EmpiricalModel) -> Result<Vec<Assignment>> {
    check_guard("global assignments", e.scenario().global_count())?;
    e.scenario().enumerate_assignments(e.scenario().measurements())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ops::{mix, tensor};
    use crate::scenario::Outcome;

    fn bit(b: bool) -> Outcome {
        Outcome::label(if b { "1" } else { "0" })
    }

    use crate::rational::ratio;
    use crate::scenario::Scenario;

    fn correlated() -> EmpiricalModel {
        let g0: Assignment = Scenario::pr().measurements().iter().map(|m| (m.clone(), bit(false))).collect();
        let g1: Assignment = Scenario::pr().measurements().iter().map(|m| (m.clone(), bit(true))).collect();
        global_mixture(&EmpiricalModel::pr_box(), &[(g0, ratio(1, 2)), (g1, ratio(1, 2))])
    }

    #[test]
    fn pr_box_is_strongly_contextual() {
        let pr = EmpiricalModel::pr_box();
        let all = all_globals(&pr).unwrap();
        assert_eq!(all.len(), 16);
        for g in &all {
            let hits_zero = pr.facet_distributions().iter().any(|(c, d)| d.get(&g.project(c)).is_zero());
            assert!(hits_zero);
        }
        let r = ncf(&pr).unwrap();
        assert_eq!(r.optimum, ratio(0, 1));
        assert_eq!(cf(&pr).unwrap(), ratio(1, 1));
        assert!(!is_noncontextual(&pr).unwrap());
        assert_eq!(r.contextual_part().unwrap(), pr);
    }

    #[test]
    fn deterministic_and_unit_models() {
        let g: Assignment = Scenario::pr().measurements().iter().map(|m| (m.clone(), bit(true))).collect();
        let det = EmpiricalModel::deterministic(Scenario::pr(), &g).unwrap();
        assert_eq!(ncf(&det).unwrap().optimum, ratio(1, 1));
        assert!(is_noncontextual(&det).unwrap());
        assert_eq!(cf(&EmpiricalModel::zero_model()).unwrap(), ratio(0, 1));
        assert_eq!(cf(&EmpiricalModel::singleton_model()).unwrap(), ratio(0, 1));
    }

    #[test]
    fn mixture_with_a_third_of_pr() {
        let e = mix(&EmpiricalModel::pr_box(), &ratio(1, 3), &correlated()).unwrap();
        let r = ncf(&e).unwrap();
        assert_eq!(r.optimum, ratio(2, 3));
        let nc = r.noncontextual_part().unwrap();
        let rest = r.contextual_part().unwrap();
        assert!(nc.validate_model().is_valid());
        assert!(rest.validate_model().is_valid());
        assert!(is_noncontextual(&nc).unwrap());
        assert_eq!(mix(&nc, &r.optimum, &rest).unwrap(), e);
        let f = &r.certificate;
        assert_eq!(f.value(&e).unwrap(), r.optimum);
        for g in all_globals(&e).unwrap() {
            assert!(f.score_global(&g) >= ratio(1, 1));
        }
    }

    #[test]
    fn product_rule_on_pr_squared() {
        let pr = EmpiricalModel::pr_box();
        let pp = tensor(&pr, &pr).unwrap();
        assert_eq!(ncf(&pp).unwrap().optimum, ratio(0, 1));
        let e = mix(&pr, &ratio(1, 2), &correlated()).unwrap();
        let ee = tensor(&e, &e).unwrap();
        assert_eq!(ncf(&e).unwrap().optimum, ratio(1, 2));
        assert_eq!(ncf(&ee).unwrap().optimum, ratio(1, 4));
    }
}
