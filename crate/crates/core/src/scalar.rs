//! Exact arithmetic in the quadratic field ℚ(√2).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a + b·√2` with rational `a`, `b`. The representation is unique, so
/// structural equality is numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScalarQ2 {
    a: BigRational,
    b: BigRational,
}

impl ScalarQ2 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        ScalarQ2 { a, b }
    }

    pub fn from_rational(a: BigRational) -> Self {
        ScalarQ2 { a, b: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// `√2`.
    pub fn sqrt2() -> Self {
        ScalarQ2 { a: BigRational::zero(), b: BigRational::one() }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        ScalarQ2 { a: self.a.clone(), b: -self.b.clone() }
    }

    /// `a² − 2b²`, the field norm.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(2.into()) * &self.b * &self.b
    }

    /// Exact sign of `a + b√2`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a² with 2b².
        let a2 = &self.a * &self.a;
        let b2 = BigRational::from_integer(2.into()) * &self.b * &self.b;
        match a2.cmp(&b2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::from_rational)
            .ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
    }

    /// Parses `"a/b"`, an integer, or a decimal such as `"0.41"` or `"1e-3"`, exactly.
    pub fn parse_rational(s: &str) -> Result<BigRational> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        if t.contains('/') {
            let r = BigRational::from_str(t).map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
            return Ok(r);
        }
        parse_decimal(t).ok_or_else(|| Error::Parse(format!("bad number {s:?}")))
    }

    fn write_rational(r: &BigRational) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int}{frac}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

impl FromStr for ScalarQ2 {
    type Err = Error;
    /// Accepts the rational forms of [`ScalarQ2::parse_rational`] and the
    /// `Display` forms `"a + (b)*sqrt2"`, `"(b)*sqrt2"`, `"-sqrt2"`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(head) = t.strip_suffix("sqrt2") else {
            return ScalarQ2::parse_rational(&t).map(ScalarQ2::from_rational);
        };
        let head = head.strip_suffix('*').unwrap_or(head);
        let (prefix, coef) = match head.strip_suffix(')') {
            Some(h) => {
                let open = h.rfind('(').ok_or_else(|| Error::Parse(format!("bad scalar {s:?}")))?;
                (&h[..open], ScalarQ2::parse_rational(&h[open + 1..])?)
            }
            None => (head, BigRational::one()),
        };
        let (rat, coef) = if let Some(r) = prefix.strip_suffix('+') {
            (r, coef)
        } else if let Some(r) = prefix.strip_suffix('-') {
            (r, -coef)
        } else if prefix.is_empty() {
            ("", coef)
        } else {
            return Err(Error::Parse(format!("bad scalar {s:?}")));
        };
        let a = if rat.is_empty() { BigRational::zero() } else { ScalarQ2::parse_rational(rat)? };
        Ok(ScalarQ2::new(a, coef))
    }
}

impl fmt::Display for ScalarQ2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = Self::write_rational(&self.a);
        if self.b.is_zero() {
            return f.write_str(&a);
        }
        let b = Self::write_rational(&self.b.abs());
        let sign = if self.b.is_negative() { '-' } else { '+' };
        if self.a.is_zero() {
            let lead = if self.b.is_negative() { "-" } else { "" };
            write!(f, "{lead}({b})*sqrt2")
        } else {
            write!(f, "{a} {sign} ({b})*sqrt2")
        }
    }
}

impl PartialOrd for ScalarQ2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScalarQ2 {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        (self.clone() - other.clone()).signum()
    }
}

impl Add for ScalarQ2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ScalarQ2 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl<'a> Add<&'a ScalarQ2> for &'a ScalarQ2 {
    type Output = ScalarQ2;
    fn add(self, o: &ScalarQ2) -> ScalarQ2 {
        ScalarQ2 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for ScalarQ2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ScalarQ2 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl<'a> Sub<&'a ScalarQ2> for &'a ScalarQ2 {
    type Output = ScalarQ2;
    fn sub(self, o: &ScalarQ2) -> ScalarQ2 {
        ScalarQ2 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a ScalarQ2> for &'a ScalarQ2 {
    type Output = ScalarQ2;
    fn mul(self, o: &ScalarQ2) -> ScalarQ2 {
        if self.b.is_zero() && o.b.is_zero() {
            return ScalarQ2::from_rational(&self.a * &o.a);
        }
        let two = BigRational::from_integer(2.into());
        ScalarQ2 {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Mul for ScalarQ2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl Div for ScalarQ2 {
    type Output = Self;
    /// Panics on division by zero, like the rational types it wraps.
    fn div(self, o: Self) -> Self {
        if o.b.is_zero() {
            return ScalarQ2 { a: self.a / &o.a, b: self.b / &o.a };
        }
        let n = o.norm();
        let num = &self * &o.conjugate();
        ScalarQ2 { a: num.a / &n, b: num.b / &n }
    }
}

impl Neg for ScalarQ2 {
    type Output = Self;
    fn neg(self) -> Self {
        ScalarQ2 { a: -self.a, b: -self.b }
    }
}

impl Zero for ScalarQ2 {
    fn zero() -> Self {
        ScalarQ2::default()
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for ScalarQ2 {
    fn one() -> Self {
        ScalarQ2::from_integer(1)
    }
}

impl std::iter::Sum for ScalarQ2 {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ScalarQ2::zero(), |a, b| a + b)
    }
}

impl From<BigRational> for ScalarQ2 {
    fn from(r: BigRational) -> Self {
        ScalarQ2::from_rational(r)
    }
}

impl Serialize for ScalarQ2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.b.is_zero() {
            s.serialize_str(&Self::write_rational(&self.a))
        } else {
            let mut m = s.serialize_map(Some(2))?;
            m.serialize_entry("rat", &Self::write_rational(&self.a))?;
            m.serialize_entry("sqrt2", &Self::write_rational(&self.b))?;
            m.end()
        }
    }
}

impl<'de> Deserialize<'de> for ScalarQ2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        ScalarQ2::from_json(&v).map_err(de::Error::custom)
    }
}

impl ScalarQ2 {
    /// Accepts a string (rational or decimal), a JSON number (read from its
    /// literal text, so `0.41` is exactly 41/100), or `{"rat", "sqrt2"}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        use serde_json::Value;
        match v {
            Value::String(s) => s.parse(),
            Value::Number(n) => n.to_string().parse(),
            Value::Object(m) => {
                for k in m.keys() {
                    if k != "rat" && k != "sqrt2" {
                        return Err(Error::Parse(format!("unexpected scalar field {k:?}")));
                    }
                }
                let part = |key: &str| -> Result<BigRational> {
                    match m.get(key) {
                        None => Ok(BigRational::zero()),
                        Some(Value::String(s)) => ScalarQ2::parse_rational(s),
                        Some(Value::Number(n)) => ScalarQ2::parse_rational(&n.to_string()),
                        Some(other) => Err(Error::Parse(format!("bad scalar component {other}"))),
                    }
                };
                Ok(ScalarQ2::new(part("rat")?, part("sqrt2")?))
            }
            other => Err(Error::Parse(format!("bad scalar {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> ScalarQ2 {
        ScalarQ2::from_ratio(a, b)
    }

    #[test]
    fn parsing() {
        assert_eq!("1/3".parse::<ScalarQ2>().unwrap(), q(1, 3));
        assert_eq!("0.41".parse::<ScalarQ2>().unwrap(), q(41, 100));
        assert_eq!("-2.5e-1".parse::<ScalarQ2>().unwrap(), q(-1, 4));
        assert_eq!("7".parse::<ScalarQ2>().unwrap(), q(7, 1));
        assert_eq!(".5".parse::<ScalarQ2>().unwrap(), q(1, 2));
        assert!("abc".parse::<ScalarQ2>().is_err());
        assert!("1/0".parse::<ScalarQ2>().is_err());
        assert!(".".parse::<ScalarQ2>().is_err());
    }

    #[test]
    fn json_forms() {
        let v: serde_json::Value = serde_json::from_str(r#"[0.34, "2/3", {"rat": "7/11", "sqrt2": "1/9"}]"#).unwrap();
        let xs: Vec<ScalarQ2> = serde_json::from_value(v).unwrap();
        assert_eq!(xs[0], q(34, 100));
        assert_eq!(xs[1], q(2, 3));
        assert_eq!(xs[2], q(7, 11) + q(1, 9) * ScalarQ2::sqrt2());
        let back = serde_json::to_string(&xs).unwrap();
        assert_eq!(back, r#"["17/50","2/3",{"rat":"7/11","sqrt2":"1/9"}]"#);
    }

    #[test]
    fn field_ops() {
        let s = ScalarQ2::sqrt2();
        assert_eq!(&s * &s, q(2, 1));
        let x = q(7, 11) + q(1, 9) * s.clone();
        let y = q(3, 2) - s.clone();
        assert_eq!((x.clone() / y.clone()) * y, x);
        assert_eq!(x.clone() - x, ScalarQ2::zero());
    }

    #[test]
    fn ordering() {
        let s = ScalarQ2::sqrt2();
        assert!(s > q(141, 100) && s < q(142, 100));
        // 3 - 2√2 ≈ 0.1716 > 0
        let t = q(3, 1) - q(2, 1) * s.clone();
        assert_eq!(t.signum(), Ordering::Greater);
        assert_eq!((-t).signum(), Ordering::Less);
        assert!(q(1, 1) - s.clone() < ScalarQ2::zero());
        assert!((q(7, 11) + q(1, 9) * s).to_f64() - (7.0 / 11.0 + 2f64.sqrt() / 9.0) < 1e-15);
    }

    #[test]
    fn parse_display_round_trip() {
        let cases = [q(7, 11) + ScalarQ2::sqrt2() * q(1, 9), ScalarQ2::sqrt2() * q(-3, 2), q(1, 2) - ScalarQ2::sqrt2(), q(5, 1)];
        for c in cases {
            assert_eq!(c.to_string().parse::<ScalarQ2>().unwrap(), c);
        }
        assert_eq!("sqrt2".parse::<ScalarQ2>().unwrap(), ScalarQ2::sqrt2());
        assert_eq!("-sqrt2".parse::<ScalarQ2>().unwrap(), -ScalarQ2::sqrt2());
        assert!("1 sqrt2".parse::<ScalarQ2>().is_err());
    }

    #[test]
    fn display() {
        assert_eq!(q(2, 4).to_string(), "1/2");
        assert_eq!((q(1, 2) - q(1, 3) * ScalarQ2::sqrt2()).to_string(), "1/2 - (1/3)*sqrt2");
        assert_eq!(ScalarQ2::sqrt2().to_string(), "(1)*sqrt2");
    }
}
