use num_traits::One;

use super::Term;
use crate::error::{Error, Result};
use crate::fraction::ncf;
use crate::model::{EmpiricalModel, OutcomeMap};
use crate::rational::Prob;
use crate::scenario::{Assignment, Face, Measurement, Outcome, Scenario};

/// The deterministic model of a global assignment, as `(f*u)/h` with
/// `f` constant at `*` and `h_x(*) = g(x)`.
pub fn deterministic_term(s: &Scenario, g: &Assignment) -> Result<Term> {
    let map = s.measurements().iter().map(|x| (x.clone(), Measurement::star())).collect();
    let facets: Vec<Face> = s.facets().iter().cloned().collect();
    let family = s
        .measurements()
        .iter()
        .map(|x| {
            let o = g
                .get(x)
                .ok_or_else(|| Error::domain(format!("assignment does not measure `{x}`")))?;
            let hx = OutcomeMap::new([(Outcome::star(), o.clone())].into_iter().collect(), s.outcomes(x)?.clone())?;
            Ok((x.clone(), hx))
        })
        .collect::<Result<_>>()?;
    Ok(Term::coarse(Term::pullback(map, Some(facets), Term::One), family))
}

/// A closed term evaluating to the noncontextual model `e`: a right-nested
/// mixture of deterministic witnesses weighted by a global decomposition.
pub fn noncontextual_to_term(e: &EmpiricalModel) -> Result<Term> {
    let lp = ncf(e)?;
    if !lp.optimum.is_one() {
        return Err(Error::domain(format!("model is contextual (NCF = {})", lp.optimum)));
    }
    let s = e.scenario();
    let mut parts: Vec<(Prob, Term)> = lp
        .weights
        .iter()
        .map(|(g, w)| Ok((w.clone(), deterministic_term(s, g)?)))
        .collect::<Result<_>>()?;
    let (mut acc_w, mut acc) = parts.pop().ok_or_else(|| Error::domain("empty decomposition"))?;
    while let Some((w, t)) = parts.pop() {
        let total = &w + &acc_w;
        acc = Term::mix(t, &w / &total, acc);
        acc_w = total;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_isomorphic, ops};
    use crate::rational::ratio;
    use crate::terms::eval_closed;

    fn det(bits: [&str; 4]) -> EmpiricalModel {
        let g: Assignment = ["x1", "x2", "y1", "y2"]
            .iter()
            .zip(bits)
            .map(|(m, o)| (Measurement::base(m), Outcome::label(o)))
            .collect();
        EmpiricalModel::deterministic(Scenario::pr(), &g).unwrap()
    }

    #[test]
    fn deterministic_model() {
        let e = det(["0", "1", "1", "0"]);
        let t = noncontextual_to_term(&e).unwrap();
        assert!(t.is_closed());
        assert!(matches!(t, Term::Coarse { .. }));
        assert_eq!(eval_closed(&t).unwrap(), e);
    }

    #[test]
    fn uniform_mixture_of_two() {
        let e = ops::mix(&det(["0", "0", "0", "0"]), &ratio(1, 2), &det(["1", "1", "1", "1"])).unwrap();
        let t = noncontextual_to_term(&e).unwrap();
        let Term::Mix { lambda, right, .. } = &t else { panic!("{t}") };
        assert_eq!(*lambda, ratio(1, 2));
        assert!(matches!(**right, Term::Coarse { .. }));
        assert!(is_isomorphic(&eval_closed(&t).unwrap(), &e).is_some());
    }

    #[test]
    fn unequal_weights() {
        let e = ops::mix(&det(["0", "1", "0", "1"]), &ratio(1, 3), &det(["1", "0", "0", "1"])).unwrap();
        let t = noncontextual_to_term(&e).unwrap();
        assert_eq!(eval_closed(&t).unwrap(), e);
    }

    #[test]
    fn trivial_scenarios() {
        for e in [EmpiricalModel::zero_model(), EmpiricalModel::singleton_model()] {
            assert_eq!(eval_closed(&noncontextual_to_term(&e).unwrap()).unwrap(), e);
        }
    }

    #[test]
    fn contextual_input_is_rejected() {
        assert!(matches!(noncontextual_to_term(&EmpiricalModel::pr_box()), Err(Error::Domain(_))));
    }
}
