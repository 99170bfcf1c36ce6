//! Exact rational scalars and conversions to and from `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact rational scalar used for structure constants, metrics and polynomials.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float (every finite `f64` is dyadic).
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn zeros(n: usize) -> Vec<Q> {
    vec![Q::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = zeros(n);
    v[i] = Q::one();
    v
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Parses `"3"`, `"-3/4"` or a decimal literal such as `"0.125"` exactly.
pub fn parse_rational(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(t) {
        return Ok(Q::from_integer(n));
    }
    // decimal with optional exponent, parsed exactly
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Q::from_integer(num);
    if scale >= 0 {
        value *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -value } else { value })
}

/// Serde adapter accepting integers, floats (converted exactly) or `"a/b"` strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rational(pub Q);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(i) = self.0.to_integer().to_i64() {
                return s.serialize_i64(i);
            }
        }
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Rational(q(i))),
            Raw::Float(f) => from_f64(f)
                .map(Rational)
                .ok_or_else(|| serde::de::Error::custom("non-finite number")),
            Raw::Str(s) => parse_rational(&s).map(Rational).map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Scales a rational vector to a primitive integer vector whose first nonzero entry is positive.
pub fn primitive(v: &[Q]) -> Vec<Q> {
    use num_integer::Integer;
    let lcm = v
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| Q::from_integer(x / &g * &sign)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_rational("-3/4").unwrap(), qf(-3, 4));
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert_eq!(parse_rational("0.125").unwrap(), qf(1, 8));
        assert_eq!(parse_rational("-2.5e1").unwrap(), q(-25));
        assert_eq!(parse_rational("1e-2").unwrap(), qf(1, 100));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn float_conversion_is_exact() {
        let x = from_f64(0.1).unwrap();
        assert_eq!(to_f64(&x), 0.1);
        assert!(from_f64(f64::NAN).is_none());
    }

    #[test]
    fn primitive_clears_denominators_and_sign() {
        let v = vec![q(0), qf(-1, 2), qf(3, 4)];
        assert_eq!(primitive(&v), vec![q(0), q(2), q(-3)]);
    }

    #[test]
    fn serde_accepts_all_forms() {
        let v: Vec<Rational> = serde_json::from_str(r#"[1, 0.5, "2/3"]"#).unwrap();
        assert_eq!(v[0].0, q(1));
        assert_eq!(v[1].0, qf(1, 2));
        assert_eq!(v[2].0, qf(2, 3));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[1,"1/2","2/3"]"#);
    }
}
