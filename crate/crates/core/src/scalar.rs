//! Numeric regimes.
//!
//! Every algorithm in the crate is generic over [`Scalar`], which is
//! implemented for `f64` (tolerance-controlled) and for [`Rational`]
//! (exact, arbitrary precision). The regime of a computation is therefore
//! fixed by its type; [`ScalarMode`] is the runtime description of it.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::quadrature;
use crate::error::{Error, Result};

/// Relative tolerance used for grid predicates (membership, `b == f(a)`) in
/// the floating regime.
pub const GRID_TOLERANCE: f64 = 1e-12;

/// Default relative tolerance of the floating regime.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Numeric regime governing arithmetic and equality detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    Exact,
    Approx { tolerance: f64 },
}

impl Default for ScalarMode {
    fn default() -> Self {
        ScalarMode::Approx {
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl ScalarMode {
    pub fn name(&self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Approx { .. } => "approx",
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            ScalarMode::Exact => 0.0,
            ScalarMode::Approx { tolerance } => *tolerance,
        }
    }
}

/// A number type the engine can compute with.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Converts the result of a transcendental evaluation. Fails in the exact regime.
    fn from_inexact(v: f64) -> Result<Self>;
    fn to_rational(&self) -> Result<Rational>;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn abs(&self) -> Self;
    /// Integer power; negative exponents invert.
    fn powi(&self, exp: i32) -> Self;

    /// `|self - other| <= tol * max(1, |self|, |other|)`; exact equality when `EXACT`.
    fn near(&self, other: &Self, tol: f64) -> bool;

    /// Integral of a continuous integrand over the dense interval `[lo, hi]`.
    fn integrate_dense(
        g: &dyn Fn(&Self) -> Result<Self>,
        lo: &Self,
        hi: &Self,
        abs_tol: f64,
    ) -> Result<Self>;

    fn mode(tolerance: f64) -> ScalarMode {
        if Self::EXACT {
            ScalarMode::Exact
        } else {
            ScalarMode::Approx { tolerance }
        }
    }

    fn to_value(&self) -> Value;

    /// Point equality as used by grid predicates.
    fn grid_eq(&self, other: &Self) -> bool {
        self.near(other, GRID_TOLERANCE)
    }

    fn midpoint(&self, other: &Self) -> Self {
        (self.clone() + other.clone()) / Self::from_i64(2)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// `self <= other`, allowing `slack` in the floating regime.
    fn le_within(&self, other: &Self, slack: f64) -> bool {
        if Self::EXACT {
            self <= other
        } else {
            self.to_f64() <= other.to_f64() + slack
        }
    }
}

/// `max(1, |x|)` over the given values, as an `f64` scale for tolerances.
pub fn magnitude<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> f64 {
    values
        .into_iter()
        .map(|v| v.to_f64().abs())
        .fold(1.0, f64::max)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn from_inexact(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("function value"))
        }
    }
    fn to_rational(&self) -> Result<Rational> {
        if !self.is_finite() {
            return Err(Error::NonFinite("conversion to rational"));
        }
        // Shortest round-tripping decimal, so 0.1 maps to 1/10.
        format!("{self}").parse()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powi(&self, exp: i32) -> Self {
        f64::powi(*self, exp)
    }
    fn near(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(f64::abs(*self)).max(f64::abs(*other));
        (self - other).abs() <= tol * scale
    }
    fn integrate_dense(
        g: &dyn Fn(&Self) -> Result<Self>,
        lo: &Self,
        hi: &Self,
        abs_tol: f64,
    ) -> Result<Self> {
        quadrature::adaptive_simpson(g, *lo, *hi, abs_tol)
    }
    fn to_value(&self) -> Value {
        Value::Approx(*self)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::from_integer(0)
    }
    fn one() -> Self {
        Rational::from_integer(1)
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_inexact(_v: f64) -> Result<Self> {
        Err(Error::NotExact(
            "represent a transcendental function value".into(),
        ))
    }
    fn to_rational(&self) -> Result<Rational> {
        Ok(self.clone())
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn powi(&self, exp: i32) -> Self {
        self.pow(exp)
    }
    fn near(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn integrate_dense(
        _g: &dyn Fn(&Self) -> Result<Self>,
        lo: &Self,
        hi: &Self,
        _abs_tol: f64,
    ) -> Result<Self> {
        Err(Error::NotExact(format!(
            "integrate over the dense component [{lo}, {hi}]"
        )))
    }
    fn to_value(&self) -> Value {
        Value::Exact(self.clone())
    }
}

/// A computed number tagged with the regime that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64(),
            Value::Approx(v) => *v,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            // Negative zero prints as 0.
            Value::Approx(v) if *v == 0.0 => f.write_str("0"),
            Value::Approx(v) => write!(f, "{v}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// Exact rational number in canonical reduced form.
///
/// Values whose numerator and denominator fit in an `i64` are kept inline;
/// their arithmetic runs on `i128` intermediates with `u64` gcds. Anything
/// larger spills to a `BigRational`. The representation is canonical: a
/// value is stored inline if and only if it fits.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    Small(Small),
    Big(BigRational),
}

/// Reduced `n/d` with `d > 0` and `n != i64::MIN`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Small {
    n: i64,
    d: i64,
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    match (u64::try_from(a), u64::try_from(b)) {
        (Ok(a), Ok(b)) => gcd_u64(a, b) as u128,
        _ => a.gcd(&b),
    }
}

impl Small {
    fn int(n: i64) -> Option<Small> {
        (n != i64::MIN).then_some(Small { n, d: 1 })
    }

    /// Reduces `n/d` for `d > 0`; `None` when the result does not fit.
    fn reduce(n: i128, d: i128) -> Option<Small> {
        debug_assert!(d > 0);
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        let (n, d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Some(Small { n, d }),
            _ => None,
        }
    }

    fn add(self, o: Small) -> Option<Small> {
        if self.d == o.d {
            let n = self.n as i128 + o.n as i128;
            return if self.d == 1 { i64::try_from(n).ok().and_then(Small::int) } else { Small::reduce(n, self.d as i128) };
        }
        Small::reduce(
            self.n as i128 * o.d as i128 + o.n as i128 * self.d as i128,
            self.d as i128 * o.d as i128,
        )
    }

    fn neg(self) -> Small {
        Small { n: -self.n, d: self.d }
    }

    fn mul(self, o: Small) -> Option<Small> {
        if self.d == 1 && o.d == 1 {
            return i64::try_from(self.n as i128 * o.n as i128).ok().and_then(Small::int);
        }
        Small::reduce(self.n as i128 * o.n as i128, self.d as i128 * o.d as i128)
    }

    fn recip(self) -> Option<Small> {
        match self.n.cmp(&0) {
            Ordering::Equal => None,
            Ordering::Greater => Some(Small { n: self.d, d: self.n }),
            Ordering::Less => Some(Small { n: -self.d, d: -self.n }),
        }
    }

    fn cmp(self, o: Small) -> Ordering {
        if self.d == o.d {
            return self.n.cmp(&o.n);
        }
        (self.n as i128 * o.d as i128).cmp(&(o.n as i128 * self.d as i128))
    }

    fn big(self) -> BigRational {
        BigRational::new_raw(BigInt::from(self.n), BigInt::from(self.d))
    }
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        let (n, d) = if denom < 0 { (-(numer as i128), -(denom as i128)) } else { (numer as i128, denom as i128) };
        match Small::reduce(n, d) {
            Some(r) => Rational(Repr::Small(r)),
            None => Rational::from_big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    pub fn from_integer(v: i64) -> Self {
        match Small::int(v) {
            Some(r) => Rational(Repr::Small(r)),
            None => Rational(Repr::Big(BigRational::from_integer(BigInt::from(v)))),
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(v))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Rational::from_big(BigRational::new(numer, denom)))
    }

    fn from_big(b: BigRational) -> Self {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Rational(Repr::Small(Small { n, d })),
            _ => Rational(Repr::Big(b)),
        }
    }

    fn big(&self) -> Cow<'_, BigRational> {
        match &self.0 {
            Repr::Small(r) => Cow::Owned(r.big()),
            Repr::Big(b) => Cow::Borrowed(b),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(r.n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(r.d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    /// The value as an `i64`, if it is an integer in range.
    pub fn to_i64(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        match &self.0 {
            Repr::Small(r) => Some(r.n),
            Repr::Big(b) => b.numer().to_i64(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => {
                let (n, d) = (r.n, r.d);
                // Exact when both parts are representable.
                if n.unsigned_abs() < (1u64 << 53) && d < (1i64 << 53) {
                    n as f64 / d as f64
                } else {
                    big_to_f64(&self.big())
                }
            }
            Repr::Big(b) => big_to_f64(b),
        }
    }

    /// Exact value of a finite float.
    pub fn from_f64_exact(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Rational::from_big)
    }

    pub fn pow(&self, exp: i32) -> Self {
        let mut base = if exp < 0 {
            Rational::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Rational::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Decimal expansion when the denominator has no prime factors besides 2 and 5.
    fn terminating_decimal(&self) -> Option<String> {
        let denom = self.denom();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        let mut d = denom.clone();
        while d.is_even() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return None;
        }
        let places = twos.max(fives);
        let scaled = self.numer() * num_traits::pow(BigInt::from(10), places as usize) / denom;
        let negative = scaled.sign() == Sign::Minus;
        let digits = scaled.magnitude().to_string();
        let places = places as usize;
        let body = if places == 0 {
            digits
        } else if digits.len() > places {
            let (int, frac) = digits.split_at(digits.len() - places);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{}", "0".repeat(places - digits.len()), digits)
        };
        Some(if negative { format!("-{body}") } else { body })
    }
}

fn big_to_f64(b: &BigRational) -> f64 {
    b.to_f64().unwrap_or_else(|| {
        let n = b.numer().to_f64().unwrap_or(f64::NAN);
        let d = b.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Default for Rational {
    fn default() -> Self {
        Rational::from_integer(0)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigRational> for Rational {
    fn from(v: BigRational) -> Self {
        Rational::from_big(v)
    }
}

impl From<Rational> for BigRational {
    fn from(v: Rational) -> Self {
        v.big().into_owned()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // Canonical representation: an inline value never equals a spilled one.
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Inline and spilled values never compare equal, so they may hash apart.
        match &self.0 {
            Repr::Small(r) => (0u8, r).hash(state),
            Repr::Big(b) => (1u8, b.numer(), b.denom()).hash(state),
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(*b),
            _ => self.big().cmp(&other.big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn small_add(a: Small, b: Small) -> Option<Small> {
    a.add(b)
}

fn small_sub(a: Small, b: Small) -> Option<Small> {
    a.add(b.neg())
}

fn small_mul(a: Small, b: Small) -> Option<Small> {
    a.mul(b)
}

fn small_div(a: Small, b: Small) -> Option<Small> {
    a.mul(b.recip()?)
}

macro_rules! rational_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = $checked(*a, *b) {
                        return Rational(Repr::Small(r));
                    }
                }
                Rational::from_big($trait::$method(self.big().into_owned(), rhs.big().into_owned()))
            }
        }

        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                $trait::$method(self.clone(), rhs.clone())
            }
        }
    };
}

rational_binop!(Add, add, small_add);
rational_binop!(Sub, sub, small_sub);
rational_binop!(Mul, mul, small_mul);
rational_binop!(Div, div, small_div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self.0 {
            // Inline numerators are never i64::MIN, so negation cannot overflow.
            Repr::Small(r) => Rational(Repr::Small(r.neg())),
            Repr::Big(b) => Rational::from_big(-b),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) if r.d == 1 => write!(f, "{}", r.n),
            Repr::Small(r) => write!(f, "{}/{}", r.n, r.d),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts integers, `p/q`, and decimals with an optional exponent.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParseNumber(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            return Rational::from_bigints(p, q).map_err(|_| err());
        }
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (t, 0),
        };
        let (negative, unsigned) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int, frac) = unsigned.split_once('.').unwrap_or((unsigned, ""));
        if (int.is_empty() && frac.is_empty())
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int}{frac}");
        let mut numer: BigInt = if digits.is_empty() {
            BigInt::zero()
        } else {
            digits.parse().map_err(|_| err())?
        };
        if negative {
            numer = -numer;
        }
        let scale = exponent - frac.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rational::from_big(value))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if let Some(dec) = self.terminating_decimal() {
            return serializer.serialize_str(&dec);
        }
        let mut map = serializer.serialize_map(Some(2))?;
        match (self.numer().to_i64(), self.denom().to_i64()) {
            (Some(n), Some(d)) => {
                map.serialize_entry("num", &n)?;
                map.serialize_entry("den", &d)?;
            }
            _ => {
                map.serialize_entry("num", &self.numer().to_string())?;
                map.serialize_entry("den", &self.denom().to_string())?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number, a decimal or p/q string, or {\"num\":p,\"den\":q}")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
        Ok(Rational::from_bigint(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
        v.to_rational().map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Rational, A::Error> {
        let mut num: Option<BigInt> = None;
        let mut den: Option<BigInt> = None;
        while let Some(key) = map.next_key::<String>()? {
            let part: IntPart = map.next_value()?;
            match key.as_str() {
                "num" => num = Some(part.0),
                "den" => den = Some(part.0),
                other => return Err(de::Error::unknown_field(other, &["num", "den"])),
            }
        }
        let num = num.ok_or_else(|| de::Error::missing_field("num"))?;
        let den = den.ok_or_else(|| de::Error::missing_field("den"))?;
        Rational::from_bigints(num, den).map_err(de::Error::custom)
    }
}

/// An integer given either as a JSON integer or as a string of digits.
struct IntPart(BigInt);

impl<'de> Deserialize<'de> for IntPart {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = IntPart;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<IntPart, E> {
                Ok(IntPart(BigInt::from(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<IntPart, E> {
                Ok(IntPart(BigInt::from(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<IntPart, E> {
                v.trim().parse().map(IntPart).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(r("9/2"), Rational::new(9, 2));
        assert_eq!(r("0.05"), Rational::new(1, 20));
        assert_eq!(r("-1.5e2"), Rational::from_integer(-150));
        assert_eq!(r("2.5E-1"), Rational::new(1, 4));
        assert_eq!(r(".5"), Rational::new(1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn display_is_reduced_p_over_q() {
        assert_eq!(Rational::new(27, 6).to_string(), "9/2");
        assert_eq!(Rational::new(-4, 2).to_string(), "-2");
        assert_eq!(Rational::new(3, -9).to_string(), "-1/3");
    }

    #[test]
    fn overflow_spills_to_big_and_comes_back() {
        let big = Rational::from_integer(i64::MAX).pow(4);
        assert!(matches!(big.0, Repr::Big(_)));
        let back = big.clone() / Rational::from_integer(i64::MAX).pow(3);
        assert!(matches!(back.0, Repr::Small(_)));
        assert_eq!(back, Rational::from_integer(i64::MAX));
        assert!(big > Rational::from_integer(i64::MAX));
        assert!(-big.clone() < Rational::zero());
    }

    #[test]
    fn power_and_negative_power() {
        assert_eq!(Rational::new(3, 2).pow(3), Rational::new(27, 8));
        assert_eq!(Rational::new(3, 2).pow(-2), Rational::new(4, 9));
        assert_eq!(Rational::new(5, 7).pow(0), Rational::one());
    }

    #[test]
    fn serde_forms() {
        let v: Rational = serde_json::from_str("{\"num\":9,\"den\":2}").unwrap();
        assert_eq!(v, Rational::new(9, 2));
        let v: Rational = serde_json::from_str("\"0.25\"").unwrap();
        assert_eq!(v, Rational::new(1, 4));
        let v: Rational = serde_json::from_str("0.05").unwrap();
        assert_eq!(v, Rational::new(1, 20));
        assert_eq!(serde_json::to_string(&Rational::new(1, 4)).unwrap(), "\"0.25\"");
        assert_eq!(
            serde_json::to_string(&Rational::new(1, 3)).unwrap(),
            "{\"num\":1,\"den\":3}"
        );
        let third: Rational = serde_json::from_str("{\"num\":1,\"den\":3}").unwrap();
        assert_eq!(third, Rational::new(1, 3));
    }

    #[test]
    fn float_to_rational_uses_shortest_decimal() {
        assert_eq!(0.1f64.to_rational().unwrap(), Rational::new(1, 10));
        assert_eq!((-2.5f64).to_rational().unwrap(), Rational::new(-5, 2));
        assert_eq!(Rational::new(1, 3).to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn near_is_relative_for_floats() {
        assert!(1e6f64.near(&(1e6 + 1e-7), 1e-12));
        assert!(!1.0f64.near(&1.001, 1e-9));
        assert!(!Rational::new(1, 3).near(&Rational::new(1, 3 + 1), 1.0));
    }

    proptest::proptest! {
        #[test]
        fn field_identities_match_bigrational(
            a in -1_000_000i64..1_000_000, b in 1i64..1000,
            c in -1_000_000i64..1_000_000, d in 1i64..1000,
        ) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            let bx = BigRational::new(a.into(), b.into());
            let by = BigRational::new(c.into(), d.into());
            proptest::prop_assert_eq!(BigRational::from(x.clone() + y.clone()), &bx + &by);
            proptest::prop_assert_eq!(BigRational::from(x.clone() - y.clone()), &bx - &by);
            proptest::prop_assert_eq!(BigRational::from(x.clone() * y.clone()), &bx * &by);
            if c != 0 {
                proptest::prop_assert_eq!(BigRational::from(x.clone() / y.clone()), &bx / &by);
            }
            proptest::prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        }

        #[test]
        fn wide_operands_stay_canonical(
            a in i64::MIN + 1..=i64::MAX, b in 1i64..=i64::MAX,
            c in i64::MIN + 1..=i64::MAX, d in 1i64..=i64::MAX,
        ) {
            proptest::prop_assume!(c != 0);
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            let bx = BigRational::new(a.into(), b.into());
            let by = BigRational::new(c.into(), d.into());
            let canonical = |r: &Rational| {
                let fits = r.numer().to_i64().is_some_and(|n| n != i64::MIN) && r.denom().to_i64().is_some();
                fits == matches!(r.0, Repr::Small(_))
            };
            for (got, want) in [
                (x.clone() + y.clone(), &bx + &by),
                (x.clone() - y.clone(), &bx - &by),
                (x.clone() * y.clone(), &bx * &by),
                (x.clone() / y.clone(), &bx / &by),
            ] {
                proptest::prop_assert!(canonical(&got));
                proptest::prop_assert_eq!(BigRational::from(got), want);
            }
            proptest::prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
        }
    }
}
