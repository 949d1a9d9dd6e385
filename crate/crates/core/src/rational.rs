//! Exact rational constants as they appear in models and files.

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

/// Parses `7`, `3/4` or `2.25` into an exact rational. Negative literals are
/// not part of the grammar and are rejected.
pub fn parse_rational(text: &str) -> Option<Rational> {
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = parse_digits(num)?;
        let den: i64 = parse_digits(den)?;
        if den == 0 {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || frac.len() > 18 {
            return None;
        }
        let int: i64 = parse_digits(int)?;
        let frac_val: i64 = parse_digits(frac)?;
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let num = int.checked_mul(scale)?.checked_add(frac_val)?;
        return Some(Rational::new(num, scale));
    }
    parse_digits(text).map(Rational::from_integer)
}

fn parse_digits(s: &str) -> Option<i64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// `5` for integers, `5/2` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_and_fraction_agree() {
        assert_eq!(parse_rational("1/2"), parse_rational("0.5"));
        assert_eq!(parse_rational("2.25"), Some(Rational::new(9, 4)));
        assert_eq!(parse_rational("10"), Some(Rational::from_integer(10)));
        assert_eq!(parse_rational("4/8"), Some(Rational::new(1, 2)));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "1/0", "-3", "1.", ".5", "a", "1/2/3", "1e3"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    #[test]
    fn format_roundtrips() {
        for s in ["0", "7", "3/4", "22/7"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
    }
}
