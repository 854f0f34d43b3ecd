//! Textual form of measurement names, outcomes, runs and assignments.
//!
//! ```text
//! measurement := atom ( '?' '(' branch (',' branch)* ')' )*
//! atom        := ident | 'L.' atom | 'R.' atom | '(' measurement ')' | '{' runs '}'
//! branch      := outcome ':' measurement
//! runs        := ε | run ('|' run)*
//! run         := ε | measurement '=' outcome (';' measurement '=' outcome)*
//! outcome     := ident | '(' outcome ',' outcome ')' | '[' run ']'
//! assignment  := ε | measurement '=' outcome (',' measurement '=' outcome)*
//! ```
//!
//! A protocol is written as the list of its maximal runs; `{}` is the
//! protocol that measures nothing.

use std::collections::BTreeMap;
use std::fmt;

use super::{Assignment, Measurement, Outcome};
use crate::error::{Error, Result};
use crate::protocols::{MeasurementProtocol, Run};

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '*' | '-' | '#')
}

pub(crate) fn write_measurement(f: &mut impl fmt::Write, m: &Measurement) -> fmt::Result {
    match m {
        Measurement::Base(s) => f.write_str(s),
        Measurement::Left(inner) => {
            f.write_str("L.")?;
            write_atom(f, inner)
        }
        Measurement::Right(inner) => {
            f.write_str("R.")?;
            write_atom(f, inner)
        }
        Measurement::Cond(c) => {
            write_measurement(f, &c.first)?;
            f.write_str("?(")?;
            for (i, (o, y)) in c.branches.iter().enumerate() {
                if i > 0 {
                    f.write_char(',')?;
                }
                write_outcome(f, o)?;
                f.write_char(':')?;
                write_measurement(f, y)?;
            }
            f.write_char(')')
        }
        Measurement::Protocol(p) => {
            f.write_char('{')?;
            let maximal = p.maximal_runs();
            for (i, r) in maximal.iter().enumerate() {
                if i > 0 {
                    f.write_char('|')?;
                }
                write_run(f, r)?;
            }
            f.write_char('}')
        }
    }
}

fn write_atom(f: &mut impl fmt::Write, m: &Measurement) -> fmt::Result {
    if matches!(m, Measurement::Cond(_)) {
        f.write_char('(')?;
        write_measurement(f, m)?;
        f.write_char(')')
    } else {
        write_measurement(f, m)
    }
}

pub(crate) fn write_outcome(f: &mut impl fmt::Write, o: &Outcome) -> fmt::Result {
    match o {
        Outcome::Label(s) => f.write_str(s),
        Outcome::Pair(a, b) => {
            f.write_char('(')?;
            write_outcome(f, a)?;
            f.write_char(',')?;
            write_outcome(f, b)?;
            f.write_char(')')
        }
        Outcome::Run(r) => {
            f.write_char('[')?;
            write_run(f, r)?;
            f.write_char(']')
        }
    }
}

pub(crate) fn write_run(f: &mut impl fmt::Write, r: &Run) -> fmt::Result {
    for (i, (m, o)) in r.steps().iter().enumerate() {
        if i > 0 {
            f.write_char(';')?;
        }
        write_measurement(f, m)?;
        f.write_char('=')?;
        write_outcome(f, o)?;
    }
    Ok(())
}

pub fn run_to_string(r: &Run) -> String {
    let mut s = String::new();
    write_run(&mut s, r).expect("writing to a string");
    s
}

pub fn assignment_to_string(a: &Assignment) -> String {
    let mut s = String::new();
    for (i, (m, o)) in a.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write_measurement(&mut s, m).expect("writing to a string");
        s.push('=');
        write_outcome(&mut s, o).expect("writing to a string");
    }
    s
}

/// Renders a face as `{a,b}` in sorted order.
pub fn face_to_string(f: &super::Face) -> String {
    let parts: Vec<String> = f.iter().map(|m| m.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Character cursor shared by the name parser and the term parser.
#[derive(Clone)]
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        let before = &self.src[..self.pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| is_ident_char(*c))
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return Err(self.error("expected identifier"));
        }
        let s = self.rest()[..len].to_string();
        self.pos += len;
        Ok(s)
    }

    /// Peeks an identifier without consuming it.
    pub(crate) fn peek_ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len: usize = rest
            .chars()
            .take_while(|c| is_ident_char(*c))
            .map(char::len_utf8)
            .sum();
        (len > 0).then(|| &rest[..len])
    }

    pub(crate) fn measurement(&mut self) -> Result<Measurement> {
        let mut m = self.atom()?;
        loop {
            let save = self.clone();
            if self.eat("?") && self.eat("(") {
                let branches = self.branches()?;
                m = Measurement::cond(m, branches);
            } else {
                *self = save;
                return Ok(m);
            }
        }
    }

    /// A measurement without trailing conditional suffixes.
    pub(crate) fn atom(&mut self) -> Result<Measurement> {
        if self.eat("L.") {
            return Ok(self.atom()?.left());
        }
        if self.eat("R.") {
            return Ok(self.atom()?.right());
        }
        if self.eat("(") {
            let m = self.measurement()?;
            self.expect(")")?;
            return Ok(m);
        }
        if self.eat("{") {
            let mut maximal = Vec::new();
            if !self.eat("}") {
                loop {
                    maximal.push(self.run()?);
                    if self.eat("}") {
                        break;
                    }
                    self.expect("|")?;
                }
            } else {
                maximal.push(Run::empty());
            }
            let p = MeasurementProtocol::from_maximal_runs(maximal)
                .map_err(|e| self.error(e.to_string()))?;
            return Ok(Measurement::protocol(p));
        }
        Ok(Measurement::Base(self.ident()?))
    }

    /// Parses `o:m, ...` up to and including the closing parenthesis.
    pub(crate) fn branches(&mut self) -> Result<BTreeMap<Outcome, Measurement>> {
        let mut out = BTreeMap::new();
        loop {
            let o = self.outcome()?;
            self.expect(":")?;
            let y = self.measurement()?;
            if out.insert(o.clone(), y).is_some() {
                return Err(self.error(format!("duplicate branch for outcome `{o}`")));
            }
            if self.eat(")") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    pub(crate) fn outcome(&mut self) -> Result<Outcome> {
        if self.eat("(") {
            let a = self.outcome()?;
            self.expect(",")?;
            let b = self.outcome()?;
            self.expect(")")?;
            return Ok(Outcome::pair(a, b));
        }
        if self.eat("[") {
            if self.eat("]") {
                return Ok(Outcome::Run(Run::empty()));
            }
            let r = self.run()?;
            self.expect("]")?;
            return Ok(Outcome::Run(r));
        }
        Ok(Outcome::Label(self.ident()?))
    }

    pub(crate) fn run(&mut self) -> Result<Run> {
        let mut steps = Vec::new();
        match self.peek() {
            None | Some('|') | Some('}') | Some(']') => return Ok(Run::empty()),
            _ => {}
        }
        loop {
            let m = self.measurement()?;
            self.expect("=")?;
            let o = self.outcome()?;
            steps.push((m, o));
            if !self.eat(";") {
                return Ok(Run::new(steps));
            }
        }
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Cursor<'_>) -> Result<T>) -> Result<T> {
    let mut c = Cursor::new(src);
    let v = f(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected trailing input"));
    }
    Ok(v)
}

pub fn parse_measurement(src: &str) -> Result<Measurement> {
    whole(src, |c| c.measurement())
}

pub fn parse_outcome(src: &str) -> Result<Outcome> {
    whole(src, |c| c.outcome())
}

pub fn parse_run(src: &str) -> Result<Run> {
    whole(src, |c| c.run())
}

pub fn parse_assignment(src: &str) -> Result<Assignment> {
    whole(src, |c| {
        let mut values = BTreeMap::new();
        if c.at_end() {
            return Ok(Assignment::new(values));
        }
        loop {
            let m = c.measurement()?;
            c.expect("=")?;
            let o = c.outcome()?;
            if values.insert(m.clone(), o).is_some() {
                return Err(c.error(format!("measurement `{m}` assigned twice")));
            }
            if !c.eat(",") {
                return Ok(Assignment::new(values));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_names_round_trip() {
        for src in [
            "x1",
            "L.x1",
            "R.L.y2",
            "x1?(0:y1,1:y2)",
            "L.(x1?(0:y1,1:y2))",
            "x1?(0:y1,1:y2)?((0,0):z,(0,1):z,(1,0):z,(1,1):z)",
            "{x1=0;y1=1|x1=1}",
            "{}",
        ] {
            let m = parse_measurement(src).unwrap();
            assert_eq!(m.to_string(), src);
            assert_eq!(parse_measurement(&m.to_string()).unwrap(), m);
        }
    }

    #[test]
    fn assignments_with_pair_outcomes() {
        let a = parse_assignment("x1?(0:y1,1:y2)=(0,1),y1=0").unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(parse_assignment(&assignment_to_string(&a)).unwrap(), a);
        assert!(parse_assignment("x=0,x=1").is_err());
        assert!(parse_assignment("").unwrap().is_empty());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_measurement("x1?(0:)") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 1);
                assert!(column > 1);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
