//! Exact rational scalars and small vector helpers.
//!
//! Every scalar in this crate is a `Rat` (arbitrary-precision rational,
//! always in lowest terms with positive denominator). Nothing in the
//! analysis path ever rounds.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Rational from numerator/denominator. Panics on zero denominator.
pub fn ratio(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parse a rational from `p`, `p/q` or a plain decimal like `0.25`.
/// Decimals are converted exactly (0.25 -> 1/4).
pub fn parse_rat(text: &str) -> Option<Rat> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let i: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: BigInt = frac_part.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rat::new(f, scale);
        let int = Rat::from_integer(i);
        return Some(if negative { int - frac } else { int + frac });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Canonical `p/q` form (plain `p` when the denominator is 1).
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Quotient of lossy conversions still gives a usable value for
        // operands too large for a single to_f64.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(v: &[Rat]) -> Rat {
    dot(v, v)
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn zero_vec(len: usize) -> Vec<Rat> {
    vec![Rat::zero(); len]
}

pub fn neg_vec(v: &[Rat]) -> Vec<Rat> {
    v.iter().map(|x| -x).collect()
}

pub fn sub_vec(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Rat, v: &[Rat]) -> Vec<Rat> {
    v.iter().map(|x| c * x).collect()
}

/// Scales so the first nonzero entry is +1 or -1 (sign preserved).
/// Zero vectors are returned unchanged.
pub fn normalize_first_nonzero(v: &[Rat]) -> Vec<Rat> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(first) => {
            let scale = first.abs().recip();
            scale_vec(&scale, v)
        }
        None => v.to_vec(),
    }
}

pub fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rat).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_and_decimal() {
        assert_eq!(parse_rat("7").unwrap(), rat(7));
        assert_eq!(parse_rat("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rat("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-1.25").unwrap(), ratio(-5, 4));
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("").is_none());
    }

    #[test]
    fn formats_in_lowest_terms() {
        assert_eq!(fmt_rat(&ratio(2, 4)), "1/2");
        assert_eq!(fmt_rat(&rat(-3)), "-3");
    }

    #[test]
    fn normalization_fixes_leading_entry() {
        let v = vec![rat(0), rat(-2), rat(4)];
        assert_eq!(normalize_first_nonzero(&v), vec![rat(0), rat(-1), rat(2)]);
    }
}
