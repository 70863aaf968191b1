//! Exact rational arithmetic helpers.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::Error;

/// Exact rational number used for every length and offset.
pub type Rational = Ratio<i64>;

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let bad = || Error::MalformedRational(text.to_string());
    let trimmed = text.trim();
    match trimmed.split_once('/') {
        Some((num, den)) => {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            let den: i64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num: i64 = trimmed.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(num))
        }
    }
}

/// Canonical `"p/q"` form (always with a denominator, lowest terms).
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Least common multiple of the denominators.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i64 {
    values.into_iter().fold(1i64, |acc, v| acc.lcm(v.denom()))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("6/4").unwrap(), frac(3, 2));
        assert_eq!(parse_rational(" 5 ").unwrap(), int(5));
        assert_eq!(format_rational(&frac(6, 4)), "3/2");
        assert_eq!(format_rational(&int(2)), "2/1");
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(matches!(parse_rational("3/0"), Err(Error::MalformedRational(_))));
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn lcm_of_denominators() {
        assert_eq!(denominator_lcm(&[frac(1, 2), frac(1, 3), int(4)]), 6);
    }
}
