//! Exact field elements: arbitrary-precision rationals and residues modulo a
//! prime `q > 3`.
//!
//! A [`Scalar`] carries its own field tag so that values can be passed around
//! without a separate context. Mixing values from different fields is a
//! programming error and panics.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moduli are kept below 2^63 so that sums of two residues never overflow.
pub const MAX_MODULUS: u64 = 1 << 63;

/// The coefficient field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecDoc", into = "FieldSpecDoc")]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum FieldSpecDoc {
    Rational,
    Prime { q: u64 },
}

impl TryFrom<FieldSpecDoc> for FieldSpec {
    type Error = Error;

    fn try_from(doc: FieldSpecDoc) -> Result<Self> {
        match doc {
            FieldSpecDoc::Rational => Ok(FieldSpec::Rational),
            FieldSpecDoc::Prime { q } => FieldSpec::prime(q),
        }
    }
}

impl From<FieldSpec> for FieldSpecDoc {
    fn from(f: FieldSpec) -> Self {
        match f {
            FieldSpec::Rational => FieldSpecDoc::Rational,
            FieldSpec::Prime(q) => FieldSpecDoc::Prime { q },
        }
    }
}

impl FieldSpec {
    /// Validated prime field: `q` must be a prime with `3 < q < 2^63`.
    pub fn prime(q: u64) -> Result<Self> {
        if q <= 3 {
            return Err(Error::InvalidField(format!(
                "modulus {q} must exceed 3 (characteristic 2 and 3 are not supported)"
            )));
        }
        if q >= MAX_MODULUS {
            return Err(Error::InvalidField(format!("modulus {q} must be below 2^63")));
        }
        if !is_prime(q) {
            return Err(Error::InvalidField(format!("modulus {q} is not prime")));
        }
        Ok(FieldSpec::Prime(q))
    }

    /// 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rational => 0,
            FieldSpec::Prime(q) => *q,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldSpec::Prime(q) => Scalar::Prime {
                value: (v as i128).rem_euclid(q as i128) as u64,
                modulus: q,
            },
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(BigRational::from_integer(v.clone())),
            FieldSpec::Prime(q) => {
                let r = v.mod_floor(&BigInt::from(q));
                Scalar::Prime {
                    value: r.to_u64().expect("residue below modulus"),
                    modulus: q,
                }
            }
        }
    }

    /// Residue `v mod q`; for the rationals this is just the integer `v`.
    pub fn from_u64(&self, v: u64) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldSpec::Prime(q) => Scalar::Prime {
                value: v % q,
                modulus: q,
            },
        }
    }

    /// Parses the text form: `a`, `-a` or `a/b`. Prime-field input may be any
    /// integer or fraction; it is reduced to the canonical residue.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let err = |reason: &str| Error::ParseScalar {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = text.trim();
        let (num, den) = match trimmed.split_once('/') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (trimmed, None),
        };
        let num = BigInt::from_str(num).map_err(|_| err("numerator is not an integer"))?;
        let den = match den {
            Some(d) => BigInt::from_str(d).map_err(|_| err("denominator is not an integer"))?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        match self {
            FieldSpec::Rational => Ok(Scalar::Rational(BigRational::new(num, den))),
            FieldSpec::Prime(q) => {
                let d = self.from_bigint(&den);
                let inv = d.inv().ok_or_else(|| err(&format!("denominator divisible by {q}")))?;
                Ok(&self.from_bigint(&num) * &inv)
            }
        }
    }

    /// Uniform residue for prime fields; a small integer in `[-bound, bound]`
    /// for the rationals.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> Scalar {
        match *self {
            FieldSpec::Rational => self.from_i64(rng.gen_range(-bound..=bound)),
            FieldSpec::Prime(q) => Scalar::Prime {
                value: rng.gen_range(0..q),
                modulus: q,
            },
        }
    }

    /// Maps a scalar of another field into this one. Rationals reduce modulo a
    /// prime (failing when the denominator vanishes); prime residues only map
    /// to the same prime field.
    pub fn convert(&self, s: &Scalar) -> Result<Scalar> {
        match (self, s) {
            (FieldSpec::Rational, Scalar::Rational(_)) => Ok(s.clone()),
            (FieldSpec::Prime(q), Scalar::Rational(r)) => {
                let den = self.from_bigint(r.denom());
                let inv = den
                    .inv()
                    .ok_or_else(|| Error::DenominatorClash(s.to_string(), *q))?;
                Ok(&self.from_bigint(r.numer()) * &inv)
            }
            (FieldSpec::Prime(q), Scalar::Prime { modulus, .. }) if q == modulus => Ok(s.clone()),
            _ => Err(Error::FieldMismatch(self.to_string(), s.field().to_string())),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Prime(q) => write!(f, "prime:{q}"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// `rational` or `prime:Q`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rational" => Ok(FieldSpec::Rational),
            other => match other.strip_prefix("prime:") {
                Some(q) => {
                    let q = q
                        .parse::<u64>()
                        .map_err(|_| Error::InvalidField(format!("bad modulus in {other:?}")))?;
                    FieldSpec::prime(q)
                }
                None => Err(Error::InvalidField(format!(
                    "expected `rational` or `prime:Q`, got {other:?}"
                ))),
            },
        }
    }
}

/// An element of the field named by its [`FieldSpec`]. Rationals are kept in
/// lowest terms with positive denominator and residues in `[0, q)`, so
/// derived equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Prime { value: u64, modulus: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rational(_) => FieldSpec::Rational,
            Scalar::Prime { modulus, .. } => FieldSpec::Prime(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Prime { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Rational(r) => Scalar::Rational(r.recip()),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: pow_mod(*value, modulus - 2, *modulus),
                modulus: *modulus,
            },
        })
    }

    /// `self / rhs`; panics on division by zero.
    pub fn div(&self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv().expect("division by zero")
    }

    pub fn pow(&self, mut e: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Canonical residue for prime fields.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Scalar::Prime { value, .. } => Some(*value),
            Scalar::Rational(_) => None,
        }
    }

    /// Sign as an integer, for ±1 detection over any field.
    pub fn as_unit_sign(&self) -> Option<i8> {
        if self.is_one() {
            Some(1)
        } else if (-self).is_one() {
            Some(-1)
        } else {
            None
        }
    }

    fn check_same(&self, other: &Scalar) {
        if let (Scalar::Prime { modulus: a, .. }, Scalar::Prime { modulus: b, .. }) = (self, other)
        {
            assert_eq!(a, b, "scalars from different prime fields");
            return;
        }
        assert_eq!(self.field(), other.field(), "scalars from different fields");
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { value, .. } => write!(f, "{value}"),
        }
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn add(self, rhs: &'a Scalar) -> Scalar {
        self.check_same(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                let s = a + b;
                Scalar::Prime {
                    value: if s >= *modulus { s - modulus } else { s },
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self.check_same(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a - b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime {
                    value: if a >= b { a - b } else { a + modulus - b },
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;

    fn mul(self, rhs: &'a Scalar) -> Scalar {
        self.check_same(rhs);
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Prime { value: a, modulus }, Scalar::Prime { value: b, .. }) => {
                Scalar::Prime {
                    value: mul_mod(*a, *b, *modulus),
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Prime { value, modulus } => Scalar::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -&self
    }
}

impl Add for Scalar {
    type Output = Scalar;

    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;

    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => *a += b,
            _ => *self = &*self + rhs,
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        match (&mut *self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => *a -= b,
            _ => *self = &*self - rhs,
        }
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prime_validation() {
        assert!(FieldSpec::prime(101).is_ok());
        assert!(FieldSpec::prime(2).is_err());
        assert!(FieldSpec::prime(3).is_err());
        assert!(FieldSpec::prime(91).is_err());
        assert!(FieldSpec::prime(1_000_003).is_ok());
        assert!(FieldSpec::prime((1 << 61) - 1).is_ok());
    }

    #[test]
    fn canonical_forms() {
        let q = FieldSpec::Rational;
        assert_eq!(q.parse_scalar("2/4").unwrap(), q.parse_scalar("-1/-2").unwrap());
        assert_eq!(q.parse_scalar("6/3").unwrap().to_string(), "2");
        assert_eq!(q.parse_scalar("3/-6").unwrap().to_string(), "-1/2");
        assert!(q.parse_scalar("1/0").is_err());
        assert!(q.parse_scalar("x").is_err());

        let f = FieldSpec::prime(101).unwrap();
        assert_eq!(f.from_i64(-1).to_string(), "100");
        assert_eq!(f.parse_scalar("1/2").unwrap(), f.from_i64(51));
        assert!(f.parse_scalar("1/101").is_err());
    }

    #[test]
    fn field_spec_json() {
        let f: FieldSpec = serde_json::from_str(r#"{"kind":"prime","q":101}"#).unwrap();
        assert_eq!(f, FieldSpec::Prime(101));
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"kind":"prime","q":101}"#);
        assert!(serde_json::from_str::<FieldSpec>(r#"{"kind":"prime","q":2}"#).is_err());
        let r: FieldSpec = serde_json::from_str(r#"{"kind":"rational"}"#).unwrap();
        assert_eq!(r, FieldSpec::Rational);
        assert_eq!("prime:101".parse::<FieldSpec>().unwrap(), f);
    }

    #[test]
    fn reduction_mod_prime() {
        let f = FieldSpec::prime(7).unwrap();
        let half = FieldSpec::Rational.parse_scalar("1/2").unwrap();
        assert_eq!(f.convert(&half).unwrap(), f.from_i64(4));
        let seventh = FieldSpec::Rational.parse_scalar("1/7").unwrap();
        assert!(matches!(f.convert(&seventh), Err(Error::DenominatorClash(..))));
    }

    proptest! {
        #[test]
        fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let q = FieldSpec::Rational;
            let s = q.parse_scalar(&format!("{n}/{d}")).unwrap();
            prop_assert_eq!(q.parse_scalar(&s.to_string()).unwrap(), s);
        }

        #[test]
        fn prime_inverse(v in 1u64..1_000_003) {
            let f = FieldSpec::prime(1_000_003).unwrap();
            let s = f.from_u64(v);
            prop_assert!((&s * &s.inv().unwrap()).is_one());
        }
    }
}
