use std::collections::BTreeMap;

use super::Term;
use crate::error::{Error, Result};
use crate::model::ops::{choice, coarse_grain, conditional, mix, pullback, tensor};
use crate::model::EmpiricalModel;

/// A binding of variables to models.
pub type Env = BTreeMap<String, EmpiricalModel>;

/// `t[e1/v1, …, en/vn]`.
///
/// Repeated variables are allowed here; typing decides linearity.
pub fn eval(t: &Term, env: &Env) -> Result<EmpiricalModel> {
    match t {
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| Error::ill_typed("var", format!("unbound variable `{v}`"))),
        Term::Zero => Ok(EmpiricalModel::zero_model()),
        Term::One => Ok(EmpiricalModel::singleton_model()),
        Term::Pullback { map, facets, body } => pullback(&eval(body, env)?, map, facets.as_deref()),
        Term::Coarse { body, family } => coarse_grain(&eval(body, env)?, family),
        Term::Mix { left, lambda, right } => mix(&eval(left, env)?, lambda, &eval(right, env)?),
        Term::Choice(a, b) => choice(&eval(a, env)?, &eval(b, env)?),
        Term::Tensor(a, b) => tensor(&eval(a, env)?, &eval(b, env)?),
        Term::Cond { body, x, branches } => Ok(conditional(&eval(body, env)?, x, branches)?.0),
    }
}

/// Evaluates a closed term.
pub fn eval_closed(t: &Term) -> Result<EmpiricalModel> {
    eval(t, &Env::new())
}
