//! The typing judgment `Γ ⊢ t : X`.

use std::collections::BTreeMap;

use super::Term;
use crate::error::{Error, Result};
use crate::model::ops::{choice_scenario, coarse_scenario, pullback_scenario, tensor_scenario};
use crate::model::EmpiricalModel;
use crate::rational::in_unit_interval;
use crate::scenario::Scenario;

/// An ordered assignment of scenarios to distinct variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypingContext {
    vars: BTreeMap<String, Scenario>,
}

/// Whether a variable may occur more than once.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearity {
    /// Each variable at most once, as in the term language proper.
    Linear,
    /// Repeated occurrences allowed; rewriting can duplicate subterms.
    Shared,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, v: &str, s: Scenario) -> Result<()> {
        if self.vars.contains_key(v) {
            return Err(Error::ill_typed("context", format!("variable `{v}` bound twice")));
        }
        self.vars.insert(v.to_string(), s);
        Ok(())
    }

    pub fn with(mut self, v: &str, s: Scenario) -> Result<Self> {
        self.bind(v, s)?;
        Ok(self)
    }

    pub fn from_env(env: &BTreeMap<String, EmpiricalModel>) -> Self {
        TypingContext {
            vars: env.iter().map(|(v, e)| (v.clone(), e.scenario().clone())).collect(),
        }
    }

    pub fn get(&self, v: &str) -> Option<&Scenario> {
        self.vars.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Scenario)> {
        self.vars.iter()
    }
}

/// The scenario `X` with `Γ ⊢ t : X`, rejecting repeated variables.
pub fn typecheck(ctx: &TypingContext, t: &Term) -> Result<Scenario> {
    typecheck_with(ctx, t, Linearity::Linear)
}

pub fn typecheck_with(ctx: &TypingContext, t: &Term, linearity: Linearity) -> Result<Scenario> {
    if linearity == Linearity::Linear {
        let mut seen = std::collections::BTreeSet::new();
        for v in t.occurrences() {
            if !seen.insert(v) {
                return Err(Error::ill_typed("linearity", format!("variable `{v}` occurs more than once")));
            }
        }
    }
    infer(ctx, t)
}

fn infer(ctx: &TypingContext, t: &Term) -> Result<Scenario> {
    match t {
        Term::Var(v) => ctx
            .get(v)
            .cloned()
            .ok_or_else(|| Error::ill_typed("var", format!("unbound variable `{v}`"))),
        Term::Zero => Ok(Scenario::zero()),
        Term::One => Ok(Scenario::singleton()),
        Term::Pullback { map, facets, body } => {
            let s = infer(ctx, body)?;
            pullback_scenario(&s, map, facets.as_deref()).map_err(|e| Error::ill_typed("pull", e))
        }
        Term::Coarse { body, family } => {
            let s = infer(ctx, body)?;
            for x in family.keys() {
                if !s.has(x) {
                    return Err(Error::ill_typed("coarse", format!("unknown measurement `{x}`")));
                }
            }
            coarse_scenario(&s, family).map_err(|e| Error::ill_typed("coarse", e))
        }
        Term::Mix { left, lambda, right } => {
            if !in_unit_interval(lambda) {
                return Err(Error::ill_typed("mix", format!("weight {lambda} is outside [0,1]")));
            }
            let a = infer(ctx, left)?;
            let b = infer(ctx, right)?;
            if a != b {
                return Err(Error::ill_typed("mix", "the two sides have different scenarios"));
            }
            Ok(a)
        }
        Term::Choice(a, b) => Ok(choice_scenario(&infer(ctx, a)?, &infer(ctx, b)?)),
        Term::Tensor(a, b) => Ok(tensor_scenario(&infer(ctx, a)?, &infer(ctx, b)?)),
        Term::Cond { body, x, branches } => {
            let s = infer(ctx, body)?;
            s.extend_conditional(x, branches)
                .map(|(s, _)| s)
                .map_err(|e| Error::ill_typed("cond", e))
        }
    }
}
