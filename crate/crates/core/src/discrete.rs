//! Exact specializations to integer windows, and the worked discrete
//! example chains.
//!
//! Everything here is computed from plain integer sums over a table of
//! function values, independently of the general integration machinery, so
//! the two routes can be compared term for term.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::MonotoneFn;
use crate::scalar::{magnitude, Rational, Value, DEFAULT_TOLERANCE};
use crate::timescale::Component;
use crate::young::{BoundKind, BoundReport, Variant};

/// Arbitrary-precision rational used for all exact work.
pub type ExactScalar = Rational;

/// Default width of example windows on unbounded domains.
pub const DEFAULT_WINDOW: i64 = 64;

/// An increasing function tabulated on `lo, lo+1, …, hi`.
#[derive(Debug, Clone)]
pub struct IntegerWindow {
    lo: i64,
    values: Vec<Rational>,
}

impl IntegerWindow {
    /// Tabulates `f`, whose window must be consecutive integers.
    pub fn new(f: &MonotoneFn<Rational>) -> Result<Self> {
        if !f.is_increasing() {
            return Err(Error::InvalidArgument(
                "integer-window bounds need an increasing function".into(),
            ));
        }
        let pts: Vec<i64> = f
            .scale()
            .components()
            .iter()
            .map(|c| match c {
                Component::Point(x) => x.to_i64(),
                Component::Interval(..) => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidArgument("window is not a set of integers".into()))?;
        if pts.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidArgument("window integers are not consecutive".into()));
        }
        let values = pts
            .iter()
            .map(|&t| f.value(&Rational::from(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntegerWindow { lo: pts[0], values })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    fn check(&self, t: i64) -> Result<usize> {
        if t < self.lo || t > self.hi() {
            return Err(Error::NotInScale { point: t.to_string() });
        }
        Ok((t - self.lo) as usize)
    }

    pub fn f(&self, t: i64) -> Result<Rational> {
        Ok(self.values[self.check(t)?].clone())
    }

    /// `f(t − 1)`, with `t − 1` held at the window start.
    pub fn f_prev(&self, t: i64) -> Result<Rational> {
        self.check(t)?;
        self.f((t - 1).max(self.lo))
    }

    pub fn inverse(&self, y: &Rational) -> Result<i64> {
        self.values
            .binary_search(y)
            .map(|i| self.lo + i as i64)
            .map_err(|_| Error::NotInImage(y.to_string()))
    }

    /// `Σ_{t=from}^{to−1} f(t)`, negated when `to < from`.
    pub fn sum(&self, from: i64, to: i64) -> Result<Rational> {
        if to < from {
            return self.sum(to, from).map(|s| -s);
        }
        self.check(from)?;
        self.check(to)?;
        Ok((from..to).fold(Rational::from(0), |acc, t| acc + self.values[(t - self.lo) as usize].clone()))
    }

    /// `Σ_{y ∈ (b̂, b]} f⁻¹(y)·(y − ρ̃(y))` over the image, negated when `b < b̂`.
    pub fn image_sum(&self, b_hat: &Rational, b: &Rational) -> Result<Rational> {
        let (i, j) = (self.inverse(b_hat)?, self.inverse(b)?);
        if j < i {
            return self.image_sum(b, b_hat).map(|s| -s);
        }
        Ok(((i + 1)..=j).fold(Rational::from(0), |acc, t| {
            let k = (t - self.lo) as usize;
            acc + Rational::from(t) * (self.values[k].clone() - self.values[k - 1].clone())
        }))
    }

    /// `y ∈ {f(x − 1), f(x)}`.
    fn zero(&self, x: i64, y: &Rational) -> Result<bool> {
        Ok(*y == self.f(x)? || *y == self.f_prev(x)?)
    }

    pub fn sandwich(&self, a: i64, a_hat: i64, b: &Rational, b_hat: &Rational) -> Result<BoundReport<Rational>> {
        let middle = self.sum(a_hat, a)? + self.image_sum(b_hat, b)? - Rational::from(a) * b.clone()
            + Rational::from(a_hat) * b_hat.clone();
        let (x_hat, x) = (self.inverse(b_hat)?, self.inverse(b)?);
        let (p_hat, p) = (self.f_prev(a_hat)?, self.f_prev(a)?);
        let lower = Rational::from(x_hat - a_hat) * (p_hat.clone() - b_hat.clone());
        let upper = Rational::from(x - a) * (b.clone() - p.clone());
        Ok(BoundReport {
            kind: BoundKind::Discrete,
            variant: Some(Variant::RhoRho),
            lower,
            middle,
            upper,
            equality_lower: self.zero(a, b)? && self.zero(x_hat, &p_hat)?,
            equality_upper: self.zero(a_hat, b_hat)? && self.zero(x, &p)?,
            reversed: false,
            witnesses: vec![
                ("a", Rational::from(a)),
                ("a_hat", Rational::from(a_hat)),
                ("b", b.clone()),
                ("b_hat", b_hat.clone()),
            ],
        })
    }

    pub fn inverse_free(&self, a: i64, a_hat: i64, alpha: i64, alpha_hat: i64) -> Result<BoundReport<Rational>> {
        let (fa, fah) = (self.f(alpha)?, self.f(alpha_hat)?);
        let (p, p_hat) = (self.f_prev(a)?, self.f_prev(a_hat)?);
        let middle = self.sum(a_hat, a)? - self.sum(alpha_hat, alpha)?
            + Rational::from(alpha - a) * fa.clone()
            + Rational::from(a_hat - alpha_hat) * fah.clone();
        let lower = Rational::from(alpha_hat - a_hat) * (p_hat.clone() - fah.clone());
        let upper = Rational::from(alpha - a) * (fa.clone() - p.clone());
        Ok(BoundReport {
            kind: BoundKind::DiscreteInverseFree,
            variant: Some(Variant::RhoRho),
            lower,
            middle,
            upper,
            equality_lower: self.zero(a, &fa)? && self.zero(alpha_hat, &p_hat)?,
            equality_upper: self.zero(a_hat, &fah)? && self.zero(alpha, &p)?,
            reversed: false,
            witnesses: vec![
                ("a", Rational::from(a)),
                ("a_hat", Rational::from(a_hat)),
                ("alpha", Rational::from(alpha)),
                ("alpha_hat", Rational::from(alpha_hat)),
            ],
        })
    }
}

fn integer(t: &Rational) -> Result<i64> {
    t.to_i64()
        .ok_or_else(|| Error::NotInScale { point: t.to_string() })
}

/// Sandwich on an integer window from direct sums; the image sum uses
/// backward graininess on the image.
pub fn discrete_sandwich(
    f: &MonotoneFn<Rational>,
    a: &Rational,
    a_hat: &Rational,
    b: &Rational,
    b_hat: &Rational,
) -> Result<BoundReport<Rational>> {
    IntegerWindow::new(f)?.sandwich(integer(a)?, integer(a_hat)?, b, b_hat)
}

pub fn discrete_inverse_free(
    f: &MonotoneFn<Rational>,
    a: &Rational,
    a_hat: &Rational,
    alpha: &Rational,
    alpha_hat: &Rational,
) -> Result<BoundReport<Rational>> {
    IntegerWindow::new(f)?.inverse_free(integer(a)?, integer(a_hat)?, integer(alpha)?, integer(alpha_hat)?)
}

/// `t(t−1)⋯(t−k+1)`; the empty product for `k = 0`.
pub fn falling_factorial(t: i64, k: u32) -> Rational {
    (0..k as i64).fold(Rational::from(1), |acc, j| acc * Rational::from(t - j))
}

fn binomial(t: i64, k: u32) -> Rational {
    falling_factorial(t, k) / falling_factorial(k as i64, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    FallingFactorial,
    GeometricB,
    LegendreB,
    SineK,
    BinomialK,
}

impl ExampleName {
    pub const ALL: [ExampleName; 5] = [
        ExampleName::FallingFactorial,
        ExampleName::GeometricB,
        ExampleName::LegendreB,
        ExampleName::SineK,
        ExampleName::BinomialK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleName::FallingFactorial => "falling_factorial",
            ExampleName::GeometricB => "geometric_b",
            ExampleName::LegendreB => "legendre_b",
            ExampleName::SineK => "sine_k",
            ExampleName::BinomialK => "binomial_k",
        }
    }

    /// Whether the chain is evaluated in floating point.
    pub fn is_approx(self) -> bool {
        matches!(self, ExampleName::LegendreB | ExampleName::SineK)
    }

    fn uses_base(self) -> bool {
        matches!(self, ExampleName::GeometricB | ExampleName::LegendreB)
    }
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `k` for the factorial, sine and binomial chains; `base` for the
/// geometric and Legendre chains.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Rational>,
}

impl ExampleParams {
    pub fn k(k: u32) -> Self {
        ExampleParams { k: Some(k), base: None }
    }

    pub fn base(base: Rational) -> Self {
        ExampleParams { k: None, base: Some(base) }
    }
}

impl fmt::Display for ExampleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.k, &self.base) {
            (Some(k), _) => write!(f, "k={k}"),
            (None, Some(b)) => write!(f, "B={b}"),
            (None, None) => Ok(()),
        }
    }
}

/// One evaluated chain `lhs ≤ mid ≤ rhs`.
///
/// For the Legendre chain `b = B^b_exp` and `β = B^beta_exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRow {
    pub example: ExampleName,
    pub params: ExampleParams,
    pub a: i64,
    pub alpha: i64,
    pub b_exp: Option<i64>,
    pub beta_exp: Option<i64>,
    pub lhs: Value,
    pub mid: Value,
    pub rhs: Value,
    pub holds: bool,
    pub equality: bool,
}

impl ExampleRow {
    /// Compact description of the instance, e.g. `k=2 a=4 alpha=2`.
    pub fn inputs(&self) -> String {
        let mut s = format!("{} a={} alpha={}", self.params, self.a, self.alpha);
        if let (Some(b), Some(beta)) = (self.b_exp, self.beta_exp) {
            s.push_str(&format!(" b=B^{b} beta=B^{beta}"));
        }
        s
    }
}

/// The integer domain on which the named chain is stated, and the default
/// window inside it.
fn default_range(name: ExampleName, params: &ExampleParams) -> Result<((i64, i64), (i64, i64))> {
    let k = params.k.map(i64::from);
    Ok(match name {
        ExampleName::FallingFactorial => {
            let k = k.unwrap();
            ((k - 1, i64::MAX), (k - 1, k - 1 + DEFAULT_WINDOW))
        }
        ExampleName::BinomialK => {
            let k = k.unwrap();
            ((k, i64::MAX), (k, k + DEFAULT_WINDOW))
        }
        ExampleName::SineK => {
            let k = k.unwrap();
            ((-k, k), (-k, k))
        }
        ExampleName::GeometricB | ExampleName::LegendreB => {
            ((i64::MIN, i64::MAX), (0, DEFAULT_WINDOW))
        }
    })
}

fn validate_params(name: ExampleName, params: &ExampleParams) -> Result<()> {
    if name.uses_base() {
        match &params.base {
            Some(b) if *b > Rational::from(1) && params.k.is_none() => Ok(()),
            _ => Err(Error::InvalidArgument(format!("{name} needs a single base B > 1"))),
        }
    } else {
        match params.k {
            Some(k) if k >= 1 && params.base.is_none() => Ok(()),
            _ => Err(Error::InvalidArgument(format!("{name} needs a single order k >= 1"))),
        }
    }
}

/// Evaluates the named chain on every admissible instance in `range`
/// (the example's default window when `None`).
///
/// Rows with `a = α` use the chain multiplied through by `a − α`, which is
/// `0 ≤ 0 ≤ 0`.
pub fn example_suite(name: ExampleName, params: &ExampleParams, range: Option<(i64, i64)>) -> Result<Vec<ExampleRow>> {
    validate_params(name, params)?;
    let ((dlo, dhi), default) = default_range(name, params)?;
    let (lo, hi) = range.unwrap_or(default);
    if lo > hi || lo < dlo || hi > dhi {
        return Err(Error::InvalidArgument(format!(
            "range [{lo}, {hi}] is outside the domain of {name}"
        )));
    }
    let mut rows = Vec::new();
    if name == ExampleName::LegendreB {
        let base = params.base.clone().unwrap();
        for a in lo..=hi {
            for j in lo..=hi {
                rows.push(legendre_row(&base, params, a, j, lo, lo));
            }
        }
        for alpha in lo..=hi {
            for i in lo..=hi {
                rows.push(legendre_row(&base, params, hi, hi, alpha, i));
            }
        }
        return Ok(rows);
    }
    for alpha in lo..=hi {
        for a in alpha..=hi {
            let (lhs, mid, rhs) = if a == alpha {
                zero_chain(name)
            } else {
                chain(name, params, a, alpha)
            };
            rows.push(ExampleRow {
                example: name,
                params: params.clone(),
                a,
                alpha,
                b_exp: None,
                beta_exp: None,
                holds: chain_holds(&lhs, &mid, &rhs, 0.0),
                lhs,
                mid,
                rhs,
                equality: alpha == a || alpha == a - 1,
            });
        }
    }
    Ok(rows)
}

fn zero_chain(name: ExampleName) -> (Value, Value, Value) {
    let z = if name.is_approx() {
        Value::Approx(0.0)
    } else {
        Value::Exact(Rational::from(0))
    };
    (z.clone(), z.clone(), z)
}

/// The chain for `a > α`.
fn chain(name: ExampleName, params: &ExampleParams, a: i64, alpha: i64) -> (Value, Value, Value) {
    let d = Rational::from(a - alpha);
    match name {
        ExampleName::FallingFactorial => {
            let k = params.k.unwrap();
            let lhs = d.clone() * falling_factorial(alpha, k);
            let mid = (falling_factorial(a, k + 1) - falling_factorial(alpha, k + 1)) / Rational::from(k as i64 + 1);
            let rhs = d * falling_factorial(a - 1, k);
            (Value::Exact(lhs), Value::Exact(mid), Value::Exact(rhs))
        }
        ExampleName::GeometricB => {
            let b = params.base.clone().unwrap();
            let pow = |n: i64| b.pow(n as i32);
            let mid = (pow(a) - pow(alpha)) / (d * (b.clone() - Rational::from(1)));
            (Value::Exact(pow(alpha)), Value::Exact(mid), Value::Exact(pow(a - 1)))
        }
        ExampleName::BinomialK => {
            let k = params.k.unwrap();
            let kk = Rational::from(k as i64);
            let num = (Rational::from(a) - kk.clone()) * binomial(a, k) - (Rational::from(alpha) - kk) * binomial(alpha, k);
            let mid = num / (d * Rational::from(k as i64 + 1));
            (Value::Exact(binomial(alpha, k)), Value::Exact(mid), Value::Exact(binomial(a - 1, k)))
        }
        ExampleName::SineK => {
            let k = params.k.unwrap() as f64;
            let pi = std::f64::consts::PI;
            let (a, alpha) = (a as f64, alpha as f64);
            let lhs = (alpha * pi / (2.0 * k)).sin();
            let mid = ((2.0 * alpha - 1.0) * pi / (4.0 * k)).cos() - ((2.0 * a - 1.0) * pi / (4.0 * k)).cos();
            let mid = mid / (pi / (4.0 * k)).sin() / (2.0 * (a - alpha));
            let rhs = ((a - 1.0) * pi / (2.0 * k)).sin();
            (Value::Approx(lhs), Value::Approx(mid), Value::Approx(rhs))
        }
        ExampleName::LegendreB => unreachable!("Legendre rows are built separately"),
    }
}

fn legendre_row(base: &Rational, params: &ExampleParams, a: i64, j: i64, alpha: i64, i: i64) -> ExampleRow {
    let bb = base.to_f64();
    let log_b = |y: f64| y.ln() / bb.ln();
    let pow = |n: i64| base.pow(n as i32).to_f64();
    let (af, alf) = (a as f64, alpha as f64);
    let (b, beta) = (pow(j), pow(i));
    let c = 1.0 / (bb - 1.0);
    let lhs = (log_b(beta) - alf) * (pow(alpha - 1) - beta);
    let terms = [
        (pow(a) - pow(alpha)) * c,
        b * log_b(b),
        -b * c,
        beta * (alf + c - log_b(beta)),
        -af * b,
    ];
    let mid: f64 = terms.iter().sum();
    let rhs = (log_b(b) - af) * (b - pow(a - 1));
    // The middle cancels terms of size about a·B^a; rounding scales with them.
    let cancelled = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let (lhs, mid, rhs) = (Value::Approx(lhs), Value::Approx(mid), Value::Approx(rhs));
    ExampleRow {
        example: ExampleName::LegendreB,
        params: params.clone(),
        a,
        alpha,
        b_exp: Some(j),
        beta_exp: Some(i),
        holds: chain_holds(&lhs, &mid, &rhs, cancelled),
        lhs,
        mid,
        rhs,
        equality: (i == alpha - 1 || i == alpha) && (j == a - 1 || j == a),
    }
}

/// `lhs ≤ mid ≤ rhs`, exactly or within the default tolerance relative to
/// the larger of the values and `scale`.
fn chain_holds(lhs: &Value, mid: &Value, rhs: &Value, scale: f64) -> bool {
    match (lhs, mid, rhs) {
        (Value::Exact(l), Value::Exact(m), Value::Exact(r)) => l <= m && m <= r,
        _ => {
            let (l, m, r) = (lhs.to_f64(), mid.to_f64(), rhs.to_f64());
            let slack = DEFAULT_TOLERANCE * magnitude(&[l, m, r]).max(scale);
            l <= m + slack && m <= r + slack
        }
    }
}
