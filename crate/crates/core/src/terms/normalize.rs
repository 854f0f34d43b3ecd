//! Normal forms.
//!
//! ```text
//! t0 ::= t1 | t0 +_λ t1        (any nesting of mixes over t1 leaves)
//! t1 ::= (f*t2)/h
//! t2 ::= t3 | t2[x?y]
//! t3 ::= t4 | t4 (x) t3
//! t4 ::= z | u | v
//! ```
//!
//! Normalization runs in stages. Choices become pullbacks of tensors; mixes
//! float to the top as a weighted list of mix-free summands; each summand is
//! then flattened to a core (a tensor of atoms with conditionals on top)
//! together with one vertex map and one outcome family.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::rules::{rule, shared};
use super::typing::{typecheck_with, Linearity, TypingContext};
use super::Term;
use crate::error::{Error, Result};
use crate::model::{OutcomeFamily, OutcomeMap, VertexMap};
use crate::rational::Prob;
use crate::scenario::{Face, Measurement, Outcome, Scenario};

/// Rewrites a well-typed term into normal form, preserving its value.
pub fn normalize(ctx: &TypingContext, t: &Term) -> Result<Term> {
    typecheck_with(ctx, t, Linearity::Shared)?;
    let t = eliminate_choice(ctx, t)?;
    let summands = float_mixes(&t);
    let parts = summands
        .into_iter()
        .map(|(w, s)| Ok((w, canonical(ctx, &s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(reassemble(parts))
}

/// Whether `t` is generated by the normal-form grammar.
pub fn is_normal_form(t: &Term) -> bool {
    match t {
        Term::Mix { left, right, .. } => is_normal_form(left) && is_normal_form(right),
        t => is_t1(t),
    }
}

fn is_t1(t: &Term) -> bool {
    match t {
        Term::Coarse { body, .. } => matches!(&**body, Term::Pullback { body, .. } if is_t2(body)),
        _ => false,
    }
}

fn is_t2(t: &Term) -> bool {
    match t {
        Term::Cond { body, .. } => is_t2(body),
        t => is_t3(t),
    }
}

fn is_t3(t: &Term) -> bool {
    match t {
        Term::Tensor(a, b) => is_t4(a) && is_t3(b),
        t => is_t4(t),
    }
}

fn is_t4(t: &Term) -> bool {
    matches!(t, Term::Zero | Term::One | Term::Var(_))
}

fn eliminate_choice(ctx: &TypingContext, t: &Term) -> Result<Term> {
    let rec = |x: &Term| eliminate_choice(ctx, x);
    Ok(match t {
        Term::Var(_) | Term::Zero | Term::One => t.clone(),
        Term::Pullback { map, facets, body } => Term::pullback(map.clone(), facets.clone(), rec(body)?),
        Term::Coarse { body, family } => Term::coarse(rec(body)?, family.clone()),
        Term::Mix { left, lambda, right } => Term::mix(rec(left)?, lambda.clone(), rec(right)?),
        Term::Tensor(a, b) => Term::tensor(rec(a)?, rec(b)?),
        Term::Cond { body, x, branches } => Term::cond(rec(body)?, x.clone(), branches.clone()),
        Term::Choice(a, b) => {
            let inner = Term::choice(rec(a)?, rec(b)?);
            rule(28)
                .apply(ctx, &inner)
                .ok_or_else(|| Error::ill_typed("choice", format!("cannot eliminate choice in `{inner}`")))?
        }
    })
}

type Summands = Vec<(Prob, Term)>;

fn float_mixes(t: &Term) -> Summands {
    let lift = |body: &Term, wrap: &dyn Fn(Term) -> Term| -> Summands {
        float_mixes(body).into_iter().map(|(w, s)| (w, wrap(s))).collect()
    };
    match t {
        Term::Var(_) | Term::Zero | Term::One => vec![(Prob::one(), t.clone())],
        Term::Pullback { map, facets, body } => lift(body, &|s| Term::pullback(map.clone(), facets.clone(), s)),
        Term::Coarse { body, family } => lift(body, &|s| Term::coarse(s, family.clone())),
        Term::Cond { body, x, branches } => lift(body, &|s| Term::cond(s, x.clone(), branches.clone())),
        Term::Mix { left, lambda, right } => {
            let rest = Prob::one() - lambda;
            let mut out = Vec::new();
            for (scale, side) in [(lambda.clone(), left), (rest, right)] {
                if scale.is_zero() {
                    continue;
                }
                out.extend(float_mixes(side).into_iter().map(|(w, s)| (w * &scale, s)));
            }
            out
        }
        Term::Tensor(a, b) | Term::Choice(a, b) => {
            let (fa, fb) = (float_mixes(a), float_mixes(b));
            let mut out = Vec::with_capacity(fa.len() * fb.len());
            for (wa, sa) in &fa {
                for (wb, sb) in &fb {
                    let s = match t {
                        Term::Tensor(..) => Term::tensor(sa.clone(), sb.clone()),
                        _ => Term::choice(sa.clone(), sb.clone()),
                    };
                    out.push((wa * wb, s));
                }
            }
            out
        }
    }
}

fn reassemble(mut parts: Summands) -> Term {
    let (w, first) = parts.remove(0);
    if parts.is_empty() {
        return first;
    }
    let rest = Prob::one() - &w;
    for p in &mut parts {
        p.0 = &p.0 / &rest;
    }
    Term::mix(first, w, reassemble(parts))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Vertex {
    Atom(usize),
    Cond(usize),
}

/// A vertex of the core: a measurement of an atom, or a core conditional.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct CoreVertex {
    at: Vertex,
    name: Measurement,
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct CoreCond {
    first: CoreVertex,
    branches: BTreeMap<Outcome, CoreVertex>,
}

#[derive(Clone, Debug)]
struct Core {
    atoms: Vec<Term>,
    conds: Vec<CoreCond>,
    outcomes: BTreeMap<CoreVertex, BTreeSet<Outcome>>,
    star: Option<usize>,
}

/// A summand `(F*core)/H`, with `F` and `H` indexed by outer measurements.
struct Canon {
    core: Core,
    vertices: BTreeMap<Measurement, CoreVertex>,
    maps: BTreeMap<Measurement, OutcomeMap>,
}

impl Core {
    fn atom(t: Term, s: &Scenario) -> (Core, BTreeMap<Measurement, CoreVertex>) {
        let mut outcomes = BTreeMap::new();
        let mut vertices = BTreeMap::new();
        for m in s.measurements() {
            let v = CoreVertex { at: Vertex::Atom(0), name: m.clone() };
            outcomes.insert(v.clone(), s.outcomes(m).expect("own measurement").clone());
            vertices.insert(m.clone(), v);
        }
        let core = Core { atoms: vec![t], conds: Vec::new(), outcomes, star: None };
        (core, vertices)
    }

    fn empty() -> Core {
        Core { atoms: Vec::new(), conds: Vec::new(), outcomes: BTreeMap::new(), star: None }
    }

    fn star_vertex(&mut self) -> CoreVertex {
        let i = match self.star {
            Some(i) => i,
            None => {
                self.atoms.push(Term::One);
                let i = self.atoms.len() - 1;
                self.star = Some(i);
                let v = CoreVertex { at: Vertex::Atom(i), name: Measurement::star() };
                self.outcomes.insert(v, [Outcome::star()].into_iter().collect());
                i
            }
        };
        CoreVertex { at: Vertex::Atom(i), name: Measurement::star() }
    }

    fn add_cond(&mut self, c: CoreCond) -> CoreVertex {
        let j = match self.conds.iter().position(|d| *d == c) {
            Some(j) => j,
            None => {
                let mut outs = BTreeSet::new();
                for (o, y) in &c.branches {
                    for o2 in &self.outcomes[y] {
                        outs.insert(Outcome::pair(o.clone(), o2.clone()));
                    }
                }
                self.conds.push(c);
                let j = self.conds.len() - 1;
                self.outcomes.insert(CoreVertex { at: Vertex::Cond(j), name: Measurement::star() }, outs);
                j
            }
        };
        CoreVertex { at: Vertex::Cond(j), name: Measurement::star() }
    }

    fn shift(v: &CoreVertex, atoms: usize, conds: usize) -> CoreVertex {
        let at = match v.at {
            Vertex::Atom(i) => Vertex::Atom(i + atoms),
            Vertex::Cond(j) => Vertex::Cond(j + conds),
        };
        CoreVertex { at, name: v.name.clone() }
    }

    fn join(&mut self, other: Core) -> (usize, usize) {
        let (na, nc) = (self.atoms.len(), self.conds.len());
        self.atoms.extend(other.atoms);
        for c in other.conds {
            self.conds.push(CoreCond {
                first: Core::shift(&c.first, na, nc),
                branches: c.branches.iter().map(|(o, y)| (o.clone(), Core::shift(y, na, nc))).collect(),
            });
        }
        for (v, os) in other.outcomes {
            self.outcomes.insert(Core::shift(&v, na, nc), os);
        }
        if self.star.is_none() {
            self.star = other.star.map(|i| i + na);
        }
        (na, nc)
    }

    fn realize(&self, v: &CoreVertex) -> Measurement {
        match v.at {
            Vertex::Atom(i) => {
                let k = self.atoms.len();
                let mut m = if i + 1 < k { v.name.clone().left() } else { v.name.clone() };
                for _ in 0..i {
                    m = m.right();
                }
                m
            }
            Vertex::Cond(j) => {
                let c = &self.conds[j];
                Measurement::cond(
                    self.realize(&c.first),
                    c.branches.iter().map(|(o, y)| (o.clone(), self.realize(y))).collect(),
                )
            }
        }
    }

    fn term(&self) -> Term {
        let mut t = match self.atoms.split_last() {
            None => Term::Zero,
            Some((last, init)) => init.iter().rev().fold(last.clone(), |acc, a| Term::tensor(a.clone(), acc)),
        };
        for c in &self.conds {
            let branches = c.branches.iter().map(|(o, y)| (o.clone(), self.realize(y))).collect();
            t = Term::cond(t, self.realize(&c.first), branches);
        }
        t
    }
}

fn canonical(ctx: &TypingContext, t: &Term) -> Result<Term> {
    let outer = shared(ctx, t).ok_or_else(|| Error::ill_typed("normalize", format!("`{t}` does not typecheck")))?;
    let c = canon(ctx, t)?;
    let map: VertexMap = c.vertices.iter().map(|(x, v)| (x.clone(), c.core.realize(v))).collect();
    let facets: Vec<Face> = outer.facets().iter().cloned().collect();
    let family: OutcomeFamily = c.maps;
    Ok(Term::coarse(Term::pullback(map, Some(facets), c.core.term()), family))
}

fn canon(ctx: &TypingContext, t: &Term) -> Result<Canon> {
    let scenario = |x: &Term| {
        shared(ctx, x).ok_or_else(|| Error::ill_typed("normalize", format!("`{x}` does not typecheck")))
    };
    let identity = |core: Core, vertices: BTreeMap<Measurement, CoreVertex>, s: &Scenario| {
        let maps = s
            .measurements()
            .iter()
            .map(|m| (m.clone(), OutcomeMap::identity(s.outcomes(m).expect("own measurement"))))
            .collect();
        Canon { core, vertices, maps }
    };
    match t {
        Term::Var(_) | Term::One => {
            let s = scenario(t)?;
            let (core, vertices) = Core::atom(t.clone(), &s);
            Ok(identity(core, vertices, &s))
        }
        Term::Zero => Ok(Canon { core: Core::empty(), vertices: BTreeMap::new(), maps: BTreeMap::new() }),
        Term::Pullback { map, body, .. } => {
            let b = canon(ctx, body)?;
            let vertices = map.iter().map(|(k, v)| (k.clone(), b.vertices[v].clone())).collect();
            let maps = map.iter().map(|(k, v)| (k.clone(), b.maps[v].clone())).collect();
            Ok(Canon { core: b.core, vertices, maps })
        }
        Term::Coarse { body, family } => {
            let mut b = canon(ctx, body)?;
            for (x, j) in family {
                let composed = b.maps[x].then(j)?;
                b.maps.insert(x.clone(), composed);
            }
            Ok(b)
        }
        Term::Tensor(a, b) => {
            let (ca, cb) = (canon(ctx, a)?, canon(ctx, b)?);
            let mut core = ca.core;
            let (na, nc) = core.join(cb.core);
            let mut vertices = BTreeMap::new();
            let mut maps = BTreeMap::new();
            for (x, v) in ca.vertices {
                vertices.insert(x.clone().left(), v);
            }
            for (x, v) in cb.vertices {
                vertices.insert(x.clone().right(), Core::shift(&v, na, nc));
            }
            for (x, h) in ca.maps {
                maps.insert(x.left(), h);
            }
            for (x, h) in cb.maps {
                maps.insert(x.right(), h);
            }
            Ok(Canon { core, vertices, maps })
        }
        Term::Cond { body, x, branches } => {
            let outer = scenario(t)?;
            let mut b = canon(ctx, body)?;
            let fx = b.vertices[x].clone();
            let hx = b.maps[x].clone();
            let mut core_branches = BTreeMap::new();
            let mut starred = BTreeSet::new();
            for o in b.core.outcomes[&fx].clone() {
                let p = hx.apply(&o).expect("total outcome map");
                let target = b.vertices[&branches[p]].clone();
                let target = if target == fx {
                    starred.insert(o.clone());
                    b.core.star_vertex()
                } else {
                    target
                };
                core_branches.insert(o, target);
            }
            let cv = b.core.add_cond(CoreCond { first: fx.clone(), branches: core_branches.clone() });
            let name = Measurement::cond(x.clone(), branches.clone());
            let mut pairs = BTreeMap::new();
            for (o, y) in &core_branches {
                let p = hx.apply(o).expect("total outcome map");
                let hy = &b.maps[&branches[p]];
                for o2 in &b.core.outcomes[y] {
                    let inner = if starred.contains(o) { o } else { o2 };
                    let image = hy.apply(inner).expect("total outcome map").clone();
                    pairs.insert(Outcome::pair(o.clone(), o2.clone()), Outcome::pair(p.clone(), image));
                }
            }
            let codomain = outer.outcomes(&name)?.clone();
            b.maps.insert(name.clone(), OutcomeMap::new(pairs, codomain)?);
            b.vertices.insert(name, cv);
            Ok(b)
        }
        Term::Mix { .. } | Term::Choice(..) => Err(Error::invalid(format!("`{t}` is not a mix-free, choice-free summand"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{is_isomorphic, EmpiricalModel};
    use crate::terms::{eval, parse, Env};

    fn env() -> Env {
        [
            ("v".to_string(), EmpiricalModel::pr_box()),
            ("w".to_string(), EmpiricalModel::singleton_model()),
        ]
        .into_iter()
        .collect()
    }

    fn roundtrip(src: &str) -> Term {
        let env = env();
        let ctx = TypingContext::from_env(&env);
        let t = parse(src).unwrap();
        let n = normalize(&ctx, &t).unwrap_or_else(|e| panic!("{src}: {e}"));
        assert!(is_normal_form(&n), "{src} -> {n}");
        let (a, b) = (eval(&t, &env).unwrap(), eval(&n, &env).unwrap());
        assert!(is_isomorphic(&a, &b).is_some(), "{src} -> {n}");
        assert_eq!(normalize(&ctx, &n).unwrap(), n, "not idempotent on {src}");
        n
    }

    #[test]
    fn grammar() {
        assert!(!is_normal_form(&parse("v").unwrap()));
        assert!(is_normal_form(&parse("(pull[a:x1] v)/[a:{0>0,1>1}]").unwrap()));
        assert!(is_normal_form(&parse("(pull[] (z (x) v))/[]").unwrap()));
        assert!(!is_normal_form(&parse("(pull[] ((z (x) v) (x) u))/[]").unwrap()));
        assert!(is_normal_form(&parse("(pull[] u)/[] +_1/2 (pull[] v[x1?(0:y1,1:y2)])/[]").unwrap()));
        assert!(!is_normal_form(&parse("(pull[] (u +_1/2 u))/[]").unwrap()));
    }

    #[test]
    fn choice_with_zero() {
        let n = roundtrip("z & v");
        let Term::Coarse { body, .. } = &n else { panic!("{n}") };
        let Term::Pullback { body, .. } = &**body else { panic!("{n}") };
        assert_eq!(**body, parse("v").unwrap());
    }

    #[test]
    fn conditional_floats_above_tensor() {
        let n = roundtrip("v[x1?(0:y1,1:y2)] (x) u");
        let Term::Coarse { body, .. } = &n else { panic!("{n}") };
        let Term::Pullback { body, .. } = &**body else { panic!("{n}") };
        assert!(matches!(&**body, Term::Cond { body, .. } if matches!(&**body, Term::Tensor(..))));
    }

    #[test]
    fn mixes_float_to_the_top() {
        let n = roundtrip("(v +_1/3 v/[x1:{0>1,1>0}]) (x) (w +_1/2 w)");
        let mut leaves = 0;
        let mut t = &n;
        while let Term::Mix { left, right, .. } = t {
            assert!(is_t1(left));
            leaves += 1;
            t = right;
        }
        assert_eq!(leaves + 1, 4);
    }

    #[test]
    fn samples() {
        for src in [
            "v",
            "z",
            "u",
            "u & u",
            "v & w",
            "(v & w) (x) u",
            "pull[a:x1,b:y1] v",
            "(pull[a:x1,b:y1] v)/[a:{0>k,1>k}]",
            "v[x1?(0:y1,1:y2)][x2?(0:y1,1:y2)]",
            "(v/[x1:{0>1,1>0}])[x1?(0:y1,1:y2)]",
            "(pull[p:x1,q:y1,r:y2] v)[p?(0:q,1:r)]",
            "(pull[p:x1,q:x1,r:y1] v)[p?(0:q,1:r)]",
            "(pull[p:x1,q:x1,r:y1] v)[p?(0:r,1:r)][q?(0:r,1:r)]",
            "(v +_1/4 v/[y1:{0>1,1>0}])[x1?(0:y1,1:y2)] & ((z & u) +_1/2 (z & w))",
            "pull[a:L.*,b:R.*] (u (x) (u +_0 w))",
            "v/[x1:{0>0,1>0}@{0,1}] +_1 v",
            "(u & z) +_1/2 (w & z)",
        ] {
            roundtrip(src);
        }
    }
}
