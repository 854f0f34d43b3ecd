use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::model::{OutcomeFamily, OutcomeMap, VertexMap};
use crate::rational::{format as format_prob, Prob};
use crate::scenario::names::{write_measurement, write_outcome};
use crate::scenario::{Face, Measurement, Outcome};

/// A term of the free-operation language.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Term {
    Var(String),
    /// `z`, the unique model on the empty scenario.
    Zero,
    /// `u`, the unique model on the one-measurement, one-outcome scenario.
    One,
    /// `f*t`. Without explicit facets the largest complex on which `map`
    /// is simplicial is used.
    Pullback {
        map: VertexMap,
        facets: Option<Vec<Face>>,
        body: Box<Term>,
    },
    /// `t/h`.
    Coarse { body: Box<Term>, family: OutcomeFamily },
    /// `t +_λ t'`.
    Mix { left: Box<Term>, lambda: Prob, right: Box<Term> },
    Choice(Box<Term>, Box<Term>),
    Tensor(Box<Term>, Box<Term>),
    /// `t[x?y]`.
    Cond {
        body: Box<Term>,
        x: Measurement,
        branches: BTreeMap<Outcome, Measurement>,
    },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn pullback(map: VertexMap, facets: Option<Vec<Face>>, body: Term) -> Term {
        Term::Pullback { map, facets, body: Box::new(body) }
    }

    pub fn coarse(body: Term, family: OutcomeFamily) -> Term {
        Term::Coarse { body: Box::new(body), family }
    }

    pub fn mix(left: Term, lambda: Prob, right: Term) -> Term {
        Term::Mix { left: Box::new(left), lambda, right: Box::new(right) }
    }

    pub fn choice(a: Term, b: Term) -> Term {
        Term::Choice(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: Term, b: Term) -> Term {
        Term::Tensor(Box::new(a), Box::new(b))
    }

    pub fn cond(body: Term, x: Measurement, branches: BTreeMap<Outcome, Measurement>) -> Term {
        Term::Cond { body: Box::new(body), x, branches }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero | Term::One => 1,
            Term::Pullback { body, .. } | Term::Coarse { body, .. } | Term::Cond { body, .. } => 1 + body.size(),
            Term::Mix { left, right, .. } => 1 + left.size() + right.size(),
            Term::Choice(a, b) | Term::Tensor(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Variable occurrences, in left-to-right order (with repetitions).
    pub fn occurrences(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Zero | Term::One => {}
            Term::Pullback { body, .. } | Term::Coarse { body, .. } | Term::Cond { body, .. } => body.collect_vars(out),
            Term::Mix { left, right, .. } => {
                left.collect_vars(out);
                right.collect_vars(out);
            }
            Term::Choice(a, b) | Term::Tensor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.occurrences().into_iter().map(str::to_string).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.occurrences().is_empty()
    }

    fn level(&self) -> u8 {
        match self {
            Term::Mix { .. } => 0,
            Term::Choice(..) => 1,
            Term::Tensor(..) => 2,
            Term::Pullback { .. } => 3,
            Term::Coarse { .. } | Term::Cond { .. } => 4,
            Term::Var(_) | Term::Zero | Term::One => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_char('(')?;
            self.write_at(f, 0)?;
            return f.write_char(')');
        }
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Zero => f.write_char('z'),
            Term::One => f.write_char('u'),
            Term::Pullback { map, facets, body } => {
                f.write_str("pull[")?;
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write_measurement(f, k)?;
                    f.write_char(':')?;
                    write_measurement(f, v)?;
                }
                if let Some(fs) = facets {
                    f.write_char(';')?;
                    for (i, c) in fs.iter().enumerate() {
                        if i > 0 {
                            f.write_char(',')?;
                        }
                        write_face(f, c)?;
                    }
                }
                f.write_str("] ")?;
                body.write_at(f, 3)
            }
            Term::Coarse { body, family } => {
                body.write_at(f, 4)?;
                f.write_str("/[")?;
                for (i, (x, h)) in family.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write_measurement(f, x)?;
                    f.write_char(':')?;
                    write_outcome_map(f, h)?;
                }
                f.write_char(']')
            }
            Term::Cond { body, x, branches } => {
                body.write_at(f, 4)?;
                f.write_char('[')?;
                if matches!(x, Measurement::Cond(_)) {
                    f.write_char('(')?;
                    write_measurement(f, x)?;
                    f.write_char(')')?;
                } else {
                    write_measurement(f, x)?;
                }
                f.write_str("?(")?;
                for (i, (o, y)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write_outcome(f, o)?;
                    f.write_char(':')?;
                    write_measurement(f, y)?;
                }
                f.write_str(")]")
            }
            Term::Mix { left, lambda, right } => {
                left.write_at(f, 1)?;
                write!(f, " +_{} ", format_prob(lambda))?;
                right.write_at(f, 0)
            }
            Term::Choice(a, b) => {
                a.write_at(f, 2)?;
                f.write_str(" & ")?;
                b.write_at(f, 1)
            }
            Term::Tensor(a, b) => {
                a.write_at(f, 3)?;
                f.write_str(" (x) ")?;
                b.write_at(f, 2)
            }
        }
    }
}

fn write_face(f: &mut impl fmt::Write, c: &Face) -> fmt::Result {
    f.write_char('{')?;
    for (i, m) in c.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write_measurement(f, m)?;
    }
    f.write_char('}')
}

fn write_outcome_map(f: &mut impl fmt::Write, h: &OutcomeMap) -> fmt::Result {
    f.write_char('{')?;
    for (i, (a, b)) in h.entries().iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        write_outcome(f, a)?;
        f.write_char('>')?;
        write_outcome(f, b)?;
    }
    f.write_char('}')?;
    let image: BTreeSet<&Outcome> = h.entries().values().collect();
    if image.len() != h.codomain().len() {
        f.write_str("@{")?;
        for (i, o) in h.codomain().iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write_outcome(f, o)?;
        }
        f.write_char('}')?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
