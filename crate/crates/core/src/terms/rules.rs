//! The equational theory, oriented left to right.
//!
//! A rule fires only if its left-hand side matches and the rewritten term
//! is well typed in the same context (repeated variables allowed).

use std::collections::BTreeMap;

use num_traits::One;

use super::typing::{typecheck_with, Linearity, TypingContext};
use super::Term;
use crate::model::{OutcomeFamily, OutcomeMap, VertexMap};
use crate::rational::Prob;
use crate::scenario::{Face, Measurement, Outcome, Scenario};

type Matcher = fn(&TypingContext, &Term) -> Option<Term>;

/// One oriented equation.
#[derive(Clone, Copy)]
pub struct RewriteRule {
    pub number: u8,
    pub equation: &'static str,
    matcher: Matcher,
}

impl RewriteRule {
    /// Rewrites `t` at its root.
    pub fn apply(&self, ctx: &TypingContext, t: &Term) -> Option<Term> {
        shared(ctx, t)?;
        let rhs = (self.matcher)(ctx, t)?;
        shared(ctx, &rhs)?;
        Some(rhs)
    }
}

impl std::fmt::Debug for RewriteRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}) {}", self.number, self.equation)
    }
}

pub(crate) fn shared(ctx: &TypingContext, t: &Term) -> Option<Scenario> {
    typecheck_with(ctx, t, Linearity::Shared).ok()
}

/// All 28 rules, in order.
pub fn rules() -> Vec<RewriteRule> {
    let table: [(&'static str, Matcher); 28] = [
        ("a & b = b & a", choice_comm),
        ("a & (b & c) = (a & b) & c", choice_assoc),
        ("a & z = a = z & a", choice_unit),
        ("a (x) b = b (x) a", tensor_comm),
        ("a (x) (b (x) c) = (a (x) b) (x) c", tensor_assoc),
        ("a (x) z = a = z (x) a", tensor_unit),
        ("a +_1 b = a", mix_degenerate),
        ("a +_l a = a", mix_idempotent),
        ("a +_l b = b +_(1-l) a", mix_comm),
        ("(a +_l b) +_m c = a +_(lm) (b +_((m-lm)/(1-lm)) c)", mix_assoc),
        ("g*(f*a) = (f.g)*a", pull_pull),
        ("(a/h)/j = a/(j.h)", coarse_coarse),
        ("f*(a/h) = f*a / f*h", pull_coarse),
        ("f*(a +_l b) = f*a +_l f*b", pull_mix),
        ("(a +_l b)/h = a/h +_l b/h", coarse_mix),
        ("(a +_l b) & (c +_l d) = (a & c) +_l (b & d)", choice_mix),
        ("(a +_l b) (x) c = (a (x) c) +_l (b (x) c)", tensor_mix),
        ("(a +_l b)[x?y] = a[x?y] +_l b[x?y]", cond_mix),
        ("a/h & b/j = (a & b)/[h,j]", choice_coarse),
        ("a/h (x) b/j = (a (x) b)/[h,j]", tensor_coarse),
        ("f*a & g*b = [f,g]*(a & b)", choice_pull),
        ("f*a (x) g*b = [f,g]*(a (x) b)", tensor_pull),
        ("a[x?y][x'?y'] = a[x'?y'][x?y]", cond_comm),
        ("(f*a)[x?y] = f~*(a[f(x)?(f.y)])", cond_pull),
        ("(a/h)[x?y] = (a[x?(y.h_x)])/h~", cond_coarse),
        ("a[x?y] & b = (a & b)[x?y]", cond_choice),
        ("a[x?y] (x) b = (a (x) b)[x?y]", cond_tensor),
        ("a & b = i*(a (x) b)", choice_elim),
    ];
    table
        .into_iter()
        .enumerate()
        .map(|(i, (equation, matcher))| RewriteRule {
            number: i as u8 + 1,
            equation,
            matcher,
        })
        .collect()
}

/// The rule with the given number (1–28).
pub fn rule(number: u8) -> RewriteRule {
    rules()[number as usize - 1]
}

fn choice_comm(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(a, b) = t else { return None };
    Some(Term::choice((**b).clone(), (**a).clone()))
}

fn choice_assoc(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(a, bc) = t else { return None };
    let Term::Choice(b, c) = &**bc else { return None };
    Some(Term::choice(Term::choice((**a).clone(), (**b).clone()), (**c).clone()))
}

fn choice_unit(_: &TypingContext, t: &Term) -> Option<Term> {
    match t {
        Term::Choice(a, z) if **z == Term::Zero => Some((**a).clone()),
        Term::Choice(z, a) if **z == Term::Zero => Some((**a).clone()),
        _ => None,
    }
}

fn tensor_comm(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(a, b) = t else { return None };
    Some(Term::tensor((**b).clone(), (**a).clone()))
}

fn tensor_assoc(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(a, bc) = t else { return None };
    let Term::Tensor(b, c) = &**bc else { return None };
    Some(Term::tensor(Term::tensor((**a).clone(), (**b).clone()), (**c).clone()))
}

fn tensor_unit(_: &TypingContext, t: &Term) -> Option<Term> {
    match t {
        Term::Tensor(a, z) if **z == Term::Zero => Some((**a).clone()),
        Term::Tensor(z, a) if **z == Term::Zero => Some((**a).clone()),
        _ => None,
    }
}

fn mix_degenerate(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Mix { left, lambda, .. } = t else { return None };
    lambda.is_one().then(|| (**left).clone())
}

fn mix_idempotent(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Mix { left, right, .. } = t else { return None };
    (left == right).then(|| (**left).clone())
}

fn mix_comm(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Mix { left, lambda, right } = t else { return None };
    Some(Term::mix((**right).clone(), Prob::one() - lambda, (**left).clone()))
}

fn mix_assoc(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Mix { left, lambda: m, right: c } = t else { return None };
    let Term::Mix { left: a, lambda: l, right: b } = &**left else { return None };
    let lm = l * m;
    if lm.is_one() {
        return None;
    }
    let inner = (m - &lm) / (Prob::one() - &lm);
    Some(Term::mix((**a).clone(), lm, Term::mix((**b).clone(), inner, (**c).clone())))
}

fn pull_pull(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Pullback { map: g, body, .. } = t else { return None };
    let Term::Pullback { map: f, body: a, .. } = &**body else { return None };
    let fg: VertexMap = g.iter().map(|(k, v)| Some((k.clone(), f.get(v)?.clone()))).collect::<Option<_>>()?;
    let facets = facets_of(ctx, t)?;
    Some(Term::pullback(fg, Some(facets), (**a).clone()))
}

fn compose_families(h: &OutcomeFamily, j: &OutcomeFamily) -> Option<OutcomeFamily> {
    let mut out = h.clone();
    for (x, jx) in j {
        let composed = match h.get(x) {
            Some(hx) => hx.then(jx).ok()?,
            None => jx.clone(),
        };
        out.insert(x.clone(), composed);
    }
    Some(out)
}

fn coarse_coarse(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Coarse { body, family: j } = t else { return None };
    let Term::Coarse { body: a, family: h } = &**body else { return None };
    Some(Term::coarse((**a).clone(), compose_families(h, j)?))
}

fn pull_coarse(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Pullback { map: f, facets, body } = t else { return None };
    let Term::Coarse { body: a, family: h } = &**body else { return None };
    let fh: OutcomeFamily = f
        .iter()
        .filter_map(|(k, v)| h.get(v).map(|hv| (k.clone(), hv.clone())))
        .collect();
    Some(Term::coarse(Term::pullback(f.clone(), facets.clone(), (**a).clone()), fh))
}

fn pull_mix(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Pullback { map, facets, body } = t else { return None };
    let Term::Mix { left, lambda, right } = &**body else { return None };
    let pull = |x: &Term| Term::pullback(map.clone(), facets.clone(), x.clone());
    Some(Term::mix(pull(left), lambda.clone(), pull(right)))
}

fn coarse_mix(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Coarse { body, family } = t else { return None };
    let Term::Mix { left, lambda, right } = &**body else { return None };
    let coarse = |x: &Term| Term::coarse(x.clone(), family.clone());
    Some(Term::mix(coarse(left), lambda.clone(), coarse(right)))
}

fn choice_mix(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(ab, cd) = t else { return None };
    let Term::Mix { left: a, lambda: l, right: b } = &**ab else { return None };
    let Term::Mix { left: c, lambda: l2, right: d } = &**cd else { return None };
    if l != l2 {
        return None;
    }
    Some(Term::mix(
        Term::choice((**a).clone(), (**c).clone()),
        l.clone(),
        Term::choice((**b).clone(), (**d).clone()),
    ))
}

fn tensor_mix(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(ab, c) = t else { return None };
    let Term::Mix { left: a, lambda, right: b } = &**ab else { return None };
    Some(Term::mix(
        Term::tensor((**a).clone(), (**c).clone()),
        lambda.clone(),
        Term::tensor((**b).clone(), (**c).clone()),
    ))
}

fn cond_mix(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Cond { body, x, branches } = t else { return None };
    let Term::Mix { left, lambda, right } = &**body else { return None };
    let cond = |a: &Term| Term::cond(a.clone(), x.clone(), branches.clone());
    Some(Term::mix(cond(left), lambda.clone(), cond(right)))
}

pub(crate) fn tag_family(h: &OutcomeFamily, tag: fn(Measurement) -> Measurement) -> OutcomeFamily {
    h.iter().map(|(x, hx)| (tag(x.clone()), hx.clone())).collect()
}

fn joined_families(h: &OutcomeFamily, j: &OutcomeFamily) -> OutcomeFamily {
    let mut out = tag_family(h, Measurement::left);
    out.extend(tag_family(j, Measurement::right));
    out
}

fn choice_coarse(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(ah, bj) = t else { return None };
    let (Term::Coarse { body: a, family: h }, Term::Coarse { body: b, family: j }) = (&**ah, &**bj) else {
        return None;
    };
    Some(Term::coarse(Term::choice((**a).clone(), (**b).clone()), joined_families(h, j)))
}

fn tensor_coarse(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(ah, bj) = t else { return None };
    let (Term::Coarse { body: a, family: h }, Term::Coarse { body: b, family: j }) = (&**ah, &**bj) else {
        return None;
    };
    Some(Term::coarse(Term::tensor((**a).clone(), (**b).clone()), joined_families(h, j)))
}

fn joined_maps(f: &VertexMap, g: &VertexMap) -> VertexMap {
    f.iter()
        .map(|(k, v)| (k.clone().left(), v.clone().left()))
        .chain(g.iter().map(|(k, v)| (k.clone().right(), v.clone().right())))
        .collect()
}

fn facets_of(ctx: &TypingContext, t: &Term) -> Option<Vec<Face>> {
    Some(shared(ctx, t)?.facets().iter().cloned().collect())
}

fn choice_pull(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(fa, gb) = t else { return None };
    let (Term::Pullback { map: f, body: a, .. }, Term::Pullback { map: g, body: b, .. }) = (&**fa, &**gb) else {
        return None;
    };
    Some(Term::pullback(
        joined_maps(f, g),
        Some(facets_of(ctx, t)?),
        Term::choice((**a).clone(), (**b).clone()),
    ))
}

fn tensor_pull(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(fa, gb) = t else { return None };
    let (Term::Pullback { map: f, body: a, .. }, Term::Pullback { map: g, body: b, .. }) = (&**fa, &**gb) else {
        return None;
    };
    Some(Term::pullback(
        joined_maps(f, g),
        Some(facets_of(ctx, t)?),
        Term::tensor((**a).clone(), (**b).clone()),
    ))
}

fn cond_comm(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Cond { body, x: x2, branches: y2 } = t else { return None };
    let Term::Cond { body: a, x, branches: y } = &**body else { return None };
    let first = Measurement::cond(x.clone(), y.clone());
    if *x2 == first || y2.values().any(|m| *m == first) {
        return None;
    }
    Some(Term::cond(
        Term::cond((**a).clone(), x2.clone(), y2.clone()),
        x.clone(),
        y.clone(),
    ))
}

fn cond_pull(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Cond { body, x, branches } = t else { return None };
    let Term::Pullback { map: f, body: a, .. } = &**body else { return None };
    let fx = f.get(x)?.clone();
    let fy: BTreeMap<Outcome, Measurement> = branches
        .iter()
        .map(|(o, y)| Some((o.clone(), f.get(y)?.clone())))
        .collect::<Option<_>>()?;
    let mut tilde = f.clone();
    tilde.insert(Measurement::cond(x.clone(), branches.clone()), Measurement::cond(fx.clone(), fy.clone()));
    Some(Term::pullback(tilde, Some(facets_of(ctx, t)?), Term::cond((**a).clone(), fx, fy)))
}

fn cond_coarse(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Cond { body, x, branches } = t else { return None };
    let Term::Coarse { body: a, family: h } = &**body else { return None };
    let sa = shared(ctx, a)?;
    let lhs = shared(ctx, t)?;
    let apply = |m: &Measurement, o: &Outcome| -> Option<Outcome> {
        match h.get(m) {
            Some(hm) => hm.apply(o).cloned(),
            None => Some(o.clone()),
        }
    };
    let mut new_branches = BTreeMap::new();
    for o in sa.outcomes(x).ok()? {
        let p = apply(x, o)?;
        new_branches.insert(o.clone(), branches.get(&p)?.clone());
    }
    let new_name = Measurement::cond(x.clone(), new_branches.clone());
    let mut pairs = BTreeMap::new();
    for o in sa.outcomes(x).ok()? {
        let p = apply(x, o)?;
        let yp = &branches[&p];
        for o2 in sa.outcomes(&new_branches[o]).ok()? {
            pairs.insert(Outcome::pair(o.clone(), o2.clone()), Outcome::pair(p.clone(), apply(yp, o2)?));
        }
    }
    let codomain = lhs.outcomes(&Measurement::cond(x.clone(), branches.clone())).ok()?.clone();
    let mut tilde = h.clone();
    tilde.insert(new_name, OutcomeMap::new(pairs, codomain).ok()?);
    Some(Term::coarse(Term::cond((**a).clone(), x.clone(), new_branches), tilde))
}

fn tagged_cond(
    body: Term,
    x: &Measurement,
    branches: &BTreeMap<Outcome, Measurement>,
) -> Term {
    Term::cond(
        body,
        x.clone().left(),
        branches.iter().map(|(o, y)| (o.clone(), y.clone().left())).collect(),
    )
}

fn cond_choice(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(ax, b) = t else { return None };
    let Term::Cond { body: a, x, branches } = &**ax else { return None };
    Some(tagged_cond(Term::choice((**a).clone(), (**b).clone()), x, branches))
}

fn cond_tensor(_: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Tensor(ax, b) = t else { return None };
    let Term::Cond { body: a, x, branches } = &**ax else { return None };
    Some(tagged_cond(Term::tensor((**a).clone(), (**b).clone()), x, branches))
}

fn choice_elim(ctx: &TypingContext, t: &Term) -> Option<Term> {
    let Term::Choice(a, b) = t else { return None };
    let s = shared(ctx, t)?;
    let identity: VertexMap = s.measurements().iter().map(|m| (m.clone(), m.clone())).collect();
    Some(Term::pullback(
        identity,
        Some(s.facets().iter().cloned().collect()),
        Term::tensor((**a).clone(), (**b).clone()),
    ))
}
