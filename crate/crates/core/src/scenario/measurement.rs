use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::protocols::{MeasurementProtocol, Run};

/// A measurement label with structured provenance.
///
/// Disjoint unions tag measurements with [`Measurement::Left`] and
/// [`Measurement::Right`]; conditional measurements carry their first
/// measurement and the outcome-indexed follow-ups; measurement protocols are
/// the measurements of protocol scenarios.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measurement {
    Base(String),
    Left(Box<Measurement>),
    Right(Box<Measurement>),
    Cond(Arc<Conditional>),
    Protocol(Arc<MeasurementProtocol>),
}

/// The data of a conditional measurement `x?y`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Conditional {
    pub first: Measurement,
    pub branches: BTreeMap<Outcome, Measurement>,
}

/// An outcome label. Conditional measurements have pair outcomes and
/// protocols have maximal runs as outcomes.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Label(String),
    Pair(Box<Outcome>, Box<Outcome>),
    Run(Run),
}

impl Measurement {
    pub fn base(name: &str) -> Self {
        Measurement::Base(name.to_string())
    }

    /// The single measurement of the singleton scenario.
    pub fn star() -> Self {
        Measurement::Base("*".to_string())
    }

    pub fn left(self) -> Self {
        Measurement::Left(Box::new(self))
    }

    pub fn right(self) -> Self {
        Measurement::Right(Box::new(self))
    }

    pub fn cond(first: Measurement, branches: BTreeMap<Outcome, Measurement>) -> Self {
        Measurement::Cond(Arc::new(Conditional { first, branches }))
    }

    pub fn protocol(p: MeasurementProtocol) -> Self {
        Measurement::Protocol(Arc::new(p))
    }

    pub fn as_protocol(&self) -> Option<&MeasurementProtocol> {
        match self {
            Measurement::Protocol(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_cond(&self) -> Option<&Conditional> {
        match self {
            Measurement::Cond(c) => Some(c),
            _ => None,
        }
    }

    /// Applies `f` to every measurement occurring inside a conditional name
    /// (including the conditional itself is left to the caller).
    pub fn map_cond_parts(&self, f: &mut impl FnMut(&Measurement) -> Measurement) -> Measurement {
        match self {
            Measurement::Cond(c) => Measurement::cond(
                f(&c.first),
                c.branches
                    .iter()
                    .map(|(o, m)| (o.clone(), f(m)))
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

impl Outcome {
    pub fn label(s: &str) -> Self {
        Outcome::Label(s.to_string())
    }

    pub fn star() -> Self {
        Outcome::Label("*".to_string())
    }

    pub fn pair(a: Outcome, b: Outcome) -> Self {
        Outcome::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_pair(&self) -> Option<(&Outcome, &Outcome)> {
        match self {
            Outcome::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_run(&self) -> Option<&Run> {
        match self {
            Outcome::Run(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::names::write_measurement(f, self)
    }
}

impl fmt::Debug for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::names::write_outcome(f, self)
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
