//! Concrete syntax of terms.
//!
//! ```text
//! mix     := choice ( '+_' rational mix )?
//! choice  := tensor ( '&' choice )?
//! tensor  := prefix ( '(x)' tensor )?
//! prefix  := 'pull' '[' map ( ';' faces )? ']' prefix | postfix
//! postfix := primary ( '[' atom '?' '(' branches ')' ']' | '/' '[' family ']' )*
//! primary := 'z' | 'u' | ident | '(' mix ')'
//! map     := ε | measurement ':' measurement ( ',' ... )*
//! faces   := face ( ',' face )*        face := '{' measurement,* '}'
//! family  := ε | measurement ':' '{' outcome '>' outcome,* '}' ( '@' '{' outcome,* '}' )? ( ',' ... )*
//! ```
//!
//! A coarse-graining's codomain defaults to the image of its map.

use std::collections::{BTreeMap, BTreeSet};

use super::Term;
use crate::error::Result;
use crate::model::{OutcomeFamily, OutcomeMap, VertexMap};
use crate::rational;
use crate::scenario::names::Cursor;
use crate::scenario::{Face, Measurement, Outcome};

const KEYWORDS: [&str; 3] = ["z", "u", "pull"];

pub fn parse(src: &str) -> Result<Term> {
    let mut c = Cursor::new(src);
    let t = mix(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    Ok(t)
}

fn mix(c: &mut Cursor<'_>) -> Result<Term> {
    let left = choice(c)?;
    if c.eat("+_") {
        c.skip_ws();
        let len = c
            .rest()
            .chars()
            .take_while(|ch| ch.is_ascii_digit() || *ch == '/')
            .count();
        if len == 0 {
            return Err(c.error("expected a rational mixing weight"));
        }
        let text = &c.rest()[..len];
        let lambda = rational::parse(text).map_err(|e| c.error(e.to_string()))?;
        c.eat(text);
        let right = mix(c)?;
        return Ok(Term::mix(left, lambda, right));
    }
    Ok(left)
}

fn choice(c: &mut Cursor<'_>) -> Result<Term> {
    let left = tensor(c)?;
    if c.eat("&") {
        return Ok(Term::choice(left, choice(c)?));
    }
    Ok(left)
}

fn tensor(c: &mut Cursor<'_>) -> Result<Term> {
    let left = prefix(c)?;
    if c.eat("(x)") {
        return Ok(Term::tensor(left, tensor(c)?));
    }
    Ok(left)
}

fn keyword_ahead(c: &mut Cursor<'_>, word: &str) -> bool {
    c.peek_ident() == Some(word)
}

fn prefix(c: &mut Cursor<'_>) -> Result<Term> {
    if keyword_ahead(c, "pull") {
        c.eat("pull");
        c.expect("[")?;
        let map = vertex_map(c)?;
        let facets = if c.eat(";") { Some(faces(c)?) } else { None };
        c.expect("]")?;
        let body = prefix(c)?;
        return Ok(Term::pullback(map, facets, body));
    }
    postfix(c)
}

fn postfix(c: &mut Cursor<'_>) -> Result<Term> {
    let mut t = primary(c)?;
    loop {
        if c.eat("[") {
            let x = c.atom()?;
            c.expect("?")?;
            c.expect("(")?;
            let branches = c.branches()?;
            c.expect("]")?;
            t = Term::cond(t, x, branches);
        } else if c.eat("/") {
            c.expect("[")?;
            let family = family(c)?;
            c.expect("]")?;
            t = Term::coarse(t, family);
        } else {
            return Ok(t);
        }
    }
}

fn primary(c: &mut Cursor<'_>) -> Result<Term> {
    if c.eat("(") {
        let t = mix(c)?;
        c.expect(")")?;
        return Ok(t);
    }
    let at = c.clone();
    let name = c.ident()?;
    match name.as_str() {
        "z" => Ok(Term::Zero),
        "u" => Ok(Term::One),
        _ if KEYWORDS.contains(&name.as_str()) => Err(at.error(format!("unexpected keyword `{name}`"))),
        _ => Ok(Term::Var(name)),
    }
}

fn vertex_map(c: &mut Cursor<'_>) -> Result<VertexMap> {
    let mut map = VertexMap::new();
    if matches!(c.peek(), Some(']') | Some(';')) {
        return Ok(map);
    }
    loop {
        let k = c.measurement()?;
        c.expect(":")?;
        let v = c.measurement()?;
        if map.insert(k.clone(), v).is_some() {
            return Err(c.error(format!("measurement `{k}` mapped twice")));
        }
        if !c.eat(",") {
            return Ok(map);
        }
    }
}

fn faces(c: &mut Cursor<'_>) -> Result<Vec<Face>> {
    let mut out = Vec::new();
    loop {
        c.expect("{")?;
        let mut face = BTreeSet::new();
        if !c.eat("}") {
            loop {
                face.insert(c.measurement()?);
                if c.eat("}") {
                    break;
                }
                c.expect(",")?;
            }
        }
        out.push(face);
        if !c.eat(",") {
            return Ok(out);
        }
    }
}

fn outcome_list(c: &mut Cursor<'_>) -> Result<BTreeSet<Outcome>> {
    c.expect("{")?;
    let mut out = BTreeSet::new();
    if c.eat("}") {
        return Ok(out);
    }
    loop {
        out.insert(c.outcome()?);
        if c.eat("}") {
            return Ok(out);
        }
        c.expect(",")?;
    }
}

fn family(c: &mut Cursor<'_>) -> Result<OutcomeFamily> {
    let mut fam = OutcomeFamily::new();
    if c.peek() == Some(']') {
        return Ok(fam);
    }
    loop {
        let x: Measurement = c.measurement()?;
        c.expect(":")?;
        c.expect("{")?;
        let mut map = BTreeMap::new();
        if !c.eat("}") {
            loop {
                let a = c.outcome()?;
                c.expect(">")?;
                let b = c.outcome()?;
                if map.insert(a.clone(), b).is_some() {
                    return Err(c.error(format!("outcome `{a}` mapped twice")));
                }
                if c.eat("}") {
                    break;
                }
                c.expect(",")?;
            }
        }
        let h = if c.eat("@") {
            let codomain = outcome_list(c)?;
            OutcomeMap::new(map, codomain).map_err(|e| c.error(e.to_string()))?
        } else {
            OutcomeMap::from_map(map)
        };
        if fam.insert(x.clone(), h).is_some() {
            return Err(c.error(format!("measurement `{x}` coarse-grained twice")));
        }
        if !c.eat(",") {
            return Ok(fam);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn spec_examples() {
        assert_eq!(parse("u (x) u").unwrap(), Term::tensor(Term::One, Term::One));
        assert_eq!(parse("v1 +_1/2 z").unwrap(), Term::mix(Term::var("v1"), ratio(1, 2), Term::Zero));
        let t = parse("v[x1?(0:y1,1:y2)]").unwrap();
        let branches: BTreeMap<Outcome, Measurement> = [
            (Outcome::label("0"), Measurement::base("y1")),
            (Outcome::label("1"), Measurement::base("y2")),
        ]
        .into_iter()
        .collect();
        assert_eq!(t, Term::cond(Term::var("v"), Measurement::base("x1"), branches));
    }

    #[test]
    fn precedence() {
        let t = parse("a +_1/3 b & c (x) d[x?(0:y)] /[y:{0>1}]").unwrap();
        match t {
            Term::Mix { left, right, .. } => {
                assert_eq!(*left, Term::var("a"));
                match *right {
                    Term::Choice(b, rest) => {
                        assert_eq!(*b, Term::var("b"));
                        assert!(matches!(*rest, Term::Tensor(..)));
                    }
                    other => panic!("{other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
        let p = parse("pull[a:x] v (x) u").unwrap();
        assert!(matches!(p, Term::Tensor(..)));
    }

    #[test]
    fn round_trips_through_the_printer() {
        for src in [
            "z",
            "u (x) (u (x) v)",
            "(u (x) u) (x) v",
            "(a +_1/2 b) +_1/3 c",
            "a & (b & c)",
            "(a & b) & c",
            "pull[a:L.x,b:R.*;{a,b}] (v (x) u)",
            "(pull[] z)/[]",
            "(pull[p:*] u)/[p:{*>1}@{0,1}]",
            "v[x1?(0:y1,1:y2)][(x1?(0:y1,1:y2))?((0,0):x2,(0,1):x2,(1,0):x2,(1,1):x2)]",
            "pull[a:x] pull[b:a] v",
            "(v /[x:{0>1,1>0}])[x?(0:y,1:y)]",
        ] {
            let t = parse(src).unwrap();
            assert_eq!(parse(&t.to_string()).unwrap(), t, "{src} printed as {t}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse("v +_ z") {
            Err(crate::Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 6)),
            other => panic!("{other:?}"),
        }
        assert!(parse("pull").is_err());
        assert!(parse("(v").is_err());
        assert!(parse("v w").is_err());
    }
}
