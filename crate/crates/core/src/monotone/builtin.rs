//! Named function families and their textual specs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::piecewise::{make_piecewise, PieceDef, PiecewiseFn, PiecewiseMode};
use super::{Callable, Direction, MonotoneFn};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use crate::timescale::TimeScale;

/// Integer exponents above this use floating `powf` even at integer points.
const MAX_EXACT_EXPONENT: i64 = 4096;

/// A named function family.
///
/// Text forms: `identity`, `power k`, `exp B` (or `exp base B`), `falling k`,
/// `binomial k`, `sine k`, `affine m c`. Coefficients are integers, `p/q`
/// fractions, or decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Builtin {
    Identity,
    /// `t^k`.
    Power(u32),
    /// `B^t`.
    Exp(Rational),
    /// `t(t-1)…(t-k+1)`.
    Falling(u32),
    /// `C(t, k) = t^(k)/k!`.
    Binomial(u32),
    /// `sin(πt / 2k)`.
    Sine(u32),
    /// `m·t + c`.
    Affine(Rational, Rational),
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Identity => write!(f, "identity"),
            Builtin::Power(k) => write!(f, "power {k}"),
            Builtin::Exp(b) => write!(f, "exp {b}"),
            Builtin::Falling(k) => write!(f, "falling {k}"),
            Builtin::Binomial(k) => write!(f, "binomial {k}"),
            Builtin::Sine(k) => write!(f, "sine {k}"),
            Builtin::Affine(m, c) => write!(f, "affine {m} {c}"),
        }
    }
}

impl From<Builtin> for String {
    fn from(b: Builtin) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Builtin {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::InvalidArgument(format!("unknown function spec {s:?}"));
        let order = |w: &str| -> Result<u32> {
            w.parse::<u32>()
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| Error::InvalidArgument(format!("order must be a positive integer in {s:?}")))
        };
        match words.as_slice() {
            ["identity"] => Ok(Builtin::Identity),
            ["power", k] => Ok(Builtin::Power(order(k)?)),
            ["exp", b] | ["exp", "base", b] => {
                let b: Rational = b.parse()?;
                if b <= Rational::from(0) || b == Rational::from(1) {
                    return Err(Error::InvalidArgument(format!("exp base must be positive and not 1 in {s:?}")));
                }
                Ok(Builtin::Exp(b))
            }
            ["falling", k] => Ok(Builtin::Falling(order(k)?)),
            ["binomial", k] => Ok(Builtin::Binomial(order(k)?)),
            ["sine", k] => Ok(Builtin::Sine(order(k)?)),
            ["affine", m, c] => {
                let m: Rational = m.parse()?;
                if m == Rational::from(0) {
                    return Err(Error::InvalidArgument("affine slope must be nonzero".into()));
                }
                Ok(Builtin::Affine(m, c.parse()?))
            }
            _ => Err(bad()),
        }
    }
}

fn falling<S: Scalar>(t: &S, k: u32) -> S {
    (0..k).fold(S::one(), |acc, j| acc * (t.clone() - S::from_i64(j as i64)))
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).fold(Rational::from(1), |acc, j| acc * Rational::from(j))
}

/// Integer value of `t`, when it has one.
fn as_integer<S: Scalar>(t: &S) -> Option<i64> {
    if S::EXACT {
        t.to_rational().ok()?.to_i64()
    } else {
        let x = t.to_f64();
        (x.fract() == 0.0 && x.abs() < 9e15).then_some(x as i64)
    }
}

fn exp_value<S: Scalar>(base: &Rational, t: &S) -> Result<S> {
    match as_integer(t) {
        Some(n) if n.abs() <= MAX_EXACT_EXPONENT => Ok(S::from_rational(&base.pow(n as i32))),
        _ => S::from_inexact(base.to_f64().powf(t.to_f64())),
    }
}

impl Builtin {
    pub fn eval<S: Scalar>(&self, t: &S) -> Result<S> {
        match self {
            Builtin::Identity => Ok(t.clone()),
            Builtin::Power(k) => Ok(t.powi(*k as i32)),
            Builtin::Exp(b) => exp_value(b, t),
            Builtin::Falling(k) => Ok(falling(t, *k)),
            Builtin::Binomial(k) => Ok(falling(t, *k) / S::from_rational(&factorial(*k))),
            Builtin::Sine(k) => {
                let x = t.to_f64() * std::f64::consts::PI / (2.0 * *k as f64);
                S::from_inexact(x.sin())
            }
            Builtin::Affine(m, c) => Ok(S::from_rational(m) * t.clone() + S::from_rational(c)),
        }
    }

    pub fn callable<S: Scalar>(&self) -> Callable<S> {
        let me = self.clone();
        Arc::new(move |t: &S| me.eval(t))
    }

    /// A closed-form inverse where one is cheap; otherwise inversion falls
    /// back to bisection.
    pub fn inverse<S: Scalar>(&self) -> Option<Callable<S>> {
        match self.clone() {
            Builtin::Identity => Some(Arc::new(|y: &S| Ok(y.clone()))),
            Builtin::Affine(m, c) => Some(Arc::new(move |y: &S| {
                Ok((y.clone() - S::from_rational(&c)) / S::from_rational(&m))
            })),
            Builtin::Power(k) => Some(Arc::new(move |y: &S| {
                S::from_inexact(y.to_f64().powf(1.0 / k as f64))
            })),
            Builtin::Exp(b) => {
                let ln_b = b.to_f64().ln();
                Some(Arc::new(move |y: &S| S::from_inexact(y.to_f64().ln() / ln_b)))
            }
            Builtin::Falling(_) | Builtin::Binomial(_) | Builtin::Sine(_) => None,
        }
    }

    /// Validated function on `window`, with its direction read off the ends.
    pub fn monotone<S: Scalar>(&self, window: TimeScale<S>) -> Result<MonotoneFn<S>> {
        let eval = self.callable::<S>();
        let direction = Direction::detect(eval.as_ref(), &window)?;
        MonotoneFn::new(eval, direction, window, self.inverse())
    }

    pub fn piece<S: Scalar>(&self) -> PieceDef<S> {
        PieceDef {
            eval: self.callable(),
            direction: None,
            inverse: self.inverse(),
        }
    }
}

/// Piecewise composition of named pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseSpec {
    pub knots: Vec<Rational>,
    pub pieces: Vec<Builtin>,
    pub mode: PiecewiseMode,
}

/// A function as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Named(Builtin),
    Piecewise { piecewise: PiecewiseSpec },
}

impl FunctionSpec {
    /// The named function on `window`; piecewise specs are rejected.
    pub fn monotone<S: Scalar>(&self, window: TimeScale<S>) -> Result<MonotoneFn<S>> {
        match self {
            FunctionSpec::Named(b) => b.monotone(window),
            FunctionSpec::Piecewise { .. } => Err(Error::InvalidArgument(
                "a piecewise function cannot be used where a single monotone function is expected".into(),
            )),
        }
    }

    /// The piecewise function on `scale`; a named function becomes a single
    /// piece spanning the whole scale.
    pub fn piecewise<S: Scalar>(&self, scale: &TimeScale<S>) -> Result<PiecewiseFn<S>> {
        match self {
            FunctionSpec::Named(b) => make_piecewise(
                scale,
                vec![scale.min().clone(), scale.max().clone()],
                vec![b.piece()],
                PiecewiseMode::ScaleContinuous,
            ),
            FunctionSpec::Piecewise { piecewise } => make_piecewise(
                scale,
                piecewise.knots.iter().map(S::from_rational).collect(),
                piecewise.pieces.iter().map(Builtin::piece).collect(),
                piecewise.mode,
            ),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(FunctionSpec::Named(s.parse()?))
    }
}
