//! Exact probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Prob = BigRational;

pub fn zero() -> Prob {
    Prob::zero()
}

pub fn one() -> Prob {
    Prob::one()
}

pub fn ratio(n: i64, d: i64) -> Prob {
    Prob::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Prob {
    Prob::from_integer(BigInt::from(n))
}

/// Parses `p/q` or an integer.
pub fn parse(text: &str) -> Result<Prob> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational `{text}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::invalid(format!("bad rational `{text}`")))?;
    if d.is_zero() {
        return Err(Error::invalid(format!("zero denominator in `{text}`")));
    }
    Ok(Prob::new(n, d))
}

/// Renders as `p/q`, or as an integer when the denominator is one.
pub fn format(p: &Prob) -> String {
    p.to_string()
}

pub fn in_unit_interval(p: &Prob) -> bool {
    p >= &zero() && p <= &one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse(" 1 ").unwrap(), one());
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
        assert_eq!(format(&ratio(3, 6)), "1/2");
    }
}
