//! The Young functional of a monotone function and its sandwich bounds.
//!
//! For `f` on the window `[α₁, α₂]_T` with `β₁ = f(α₁)`,
//!
//! ```text
//! F(a, b) = ∫_{α₁}^{a} f(t) Δt + ∫_{β₁}^{b} f⁻¹(y) ∇y − a·b + α₁·β₁
//! ```
//!
//! is nonnegative for increasing `f` and vanishes exactly when
//! `b ∈ {f(ρ(a)), f(a)}`. For decreasing `f` the sign flips and the `f⁻¹`
//! integral is a delta integral on the image (see
//! [`MonotoneFn::inverse_integral`]).
//!
//! Equality flags are grid predicates, never numeric coincidences. Each
//! bound gap splits into two Young functionals at explicit points, so a
//! bound is attained exactly when both of those points are zeros of `F`;
//! [`BoundReport::witnesses`] lists the points used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotone::{MonotoneFn, PiecewiseFn, PiecewiseMode};
use crate::scalar::{magnitude, Scalar};
use crate::timescale::TimeScale;

/// Which substitutions enter a sandwich bound: `f⁻¹` or `σ∘f⁻¹` for the
/// first factor, `f^ρ` or `f` for the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    RhoRho,
    RhoF,
    SigmaRho,
    SigmaF,
}

impl Variant {
    /// Enumeration order, also used to break ties.
    pub const ALL: [Variant; 4] = [Variant::RhoRho, Variant::RhoF, Variant::SigmaRho, Variant::SigmaF];

    fn uses_sigma(self) -> bool {
        matches!(self, Variant::SigmaRho | Variant::SigmaF)
    }

    fn uses_f(self) -> bool {
        matches!(self, Variant::RhoF | Variant::SigmaF)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::RhoRho => "rho_rho",
            Variant::RhoF => "rho_f",
            Variant::SigmaRho => "sigma_rho",
            Variant::SigmaF => "sigma_f",
        }
    }
}

/// Which bound family produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Sandwich,
    Legendre,
    InverseFree,
    /// Both end pieces share a direction.
    PiecewiseSameEnds,
    /// The end pieces have opposite directions.
    PiecewiseMixedEnds,
    Discrete,
    DiscreteInverseFree,
}

/// A computed middle value with its two bounds.
///
/// When `reversed` is false the claim is `lower ≤ middle ≤ upper`;
/// when true it is `upper ≤ middle ≤ lower`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<S> {
    pub kind: BoundKind,
    pub variant: Option<Variant>,
    pub lower: S,
    pub middle: S,
    pub upper: S,
    pub equality_lower: bool,
    pub equality_upper: bool,
    pub reversed: bool,
    pub witnesses: Vec<(&'static str, S)>,
}

impl<S: Scalar> BoundReport<S> {
    /// Slack allowed by `tol` relative to the magnitudes involved; zero for
    /// exact scalars.
    pub fn slack(&self, tol: f64) -> f64 {
        let w = magnitude(self.witnesses.iter().map(|(_, v)| v));
        tol * magnitude([&self.lower, &self.middle, &self.upper]).max(w * w)
    }

    pub fn holds(&self, tol: f64) -> bool {
        let slack = self.slack(tol);
        let (lo, hi) = if self.reversed {
            (&self.upper, &self.lower)
        } else {
            (&self.lower, &self.upper)
        };
        lo.le_within(&self.middle, slack) && self.middle.le_within(hi, slack)
    }

    pub fn witness(&self, name: &str) -> Option<&S> {
        self.witnesses.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }
}

/// Result of a single functional evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungCheck<S> {
    pub value: S,
    pub holds: bool,
    pub equality: bool,
}

/// `F(a,b) + F(α,β)` against `−(α−a)(β−b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointBound<S> {
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
    pub equality: bool,
}

/// A monotone function with the anchor `(α₁, β₁ = f(α₁))`.
#[derive(Debug, Clone)]
pub struct YoungContext<S: Scalar> {
    f: MonotoneFn<S>,
    alpha1: S,
    beta1: S,
}

impl<S: Scalar> YoungContext<S> {
    pub fn new(f: MonotoneFn<S>) -> Result<Self> {
        let alpha1 = f.scale().min().clone();
        let beta1 = f.value(&alpha1)?;
        Ok(YoungContext { f, alpha1, beta1 })
    }

    pub fn function(&self) -> &MonotoneFn<S> {
        &self.f
    }

    pub fn scale(&self) -> &TimeScale<S> {
        self.f.scale()
    }

    pub fn image(&self) -> &TimeScale<S> {
        self.f.image()
    }

    pub fn alpha1(&self) -> &S {
        &self.alpha1
    }

    pub fn beta1(&self) -> &S {
        &self.beta1
    }

    pub fn tolerance(&self) -> f64 {
        self.f.tolerance()
    }

    fn on_image(&self, b: &S) -> Result<S> {
        self.image()
            .locate(b)
            .map(|l| l.point)
            .ok_or_else(|| Error::NotInImage(b.to_string()))
    }

    /// `F(a, b)`.
    pub fn functional(&self, a: &S, b: &S) -> Result<S> {
        let a = self.scale().snap(a)?;
        let b = self.on_image(b)?;
        Ok(self.f.integral(&self.alpha1, &a)? + self.f.inverse_integral(&self.beta1, &b)?
            - a * b
            + self.alpha1.clone() * self.beta1.clone())
    }

    /// `b ∈ {f(ρ(a)), f(a)}`: the zero set of `F`.
    pub fn is_zero_point(&self, a: &S, b: &S) -> Result<bool> {
        zero_point(&self.f, a, b)
    }

    fn slack(&self, values: &[&S]) -> f64 {
        let m = magnitude(values.iter().copied());
        self.tolerance() * m * m
    }

    pub fn young_check(&self, a: &S, b: &S) -> Result<YoungCheck<S>> {
        let value = self.functional(a, b)?;
        let slack = self.slack(&[a, b, &self.alpha1, &self.beta1]);
        let holds = if self.f.is_increasing() {
            S::zero().le_within(&value, slack)
        } else {
            value.le_within(&S::zero(), slack)
        };
        Ok(YoungCheck {
            value,
            holds,
            equality: self.is_zero_point(a, b)?,
        })
    }

    /// `F(a, f(a))`, identically zero.
    pub fn phi(&self, a: &S) -> Result<S> {
        self.functional(a, &self.f.value(a)?)
    }

    /// `F(a,b) + F(α,β)` against `−(α−a)(β−b)`; the difference is
    /// `F(a,β) + F(α,b)`, which fixes the equality set.
    pub fn two_point_bound(&self, a: &S, b: &S, alpha: &S, beta: &S) -> Result<TwoPointBound<S>> {
        let lhs = self.functional(a, b)? + self.functional(alpha, beta)?;
        let rhs = -((alpha.clone() - a.clone()) * (beta.clone() - b.clone()));
        let slack = self.slack(&[a, b, alpha, beta, &self.alpha1, &self.beta1]);
        let holds = if self.f.is_increasing() {
            rhs.le_within(&lhs, slack)
        } else {
            lhs.le_within(&rhs, slack)
        };
        let equality = self.is_zero_point(a, beta)? && self.is_zero_point(alpha, b)?;
        Ok(TwoPointBound { lhs, rhs, holds, equality })
    }

    /// `f⁻¹(b)` or `σ(f⁻¹(b))`.
    fn first_factor(&self, b: &S, variant: Variant) -> Result<S> {
        let x = self.f.inverse(b)?;
        if variant.uses_sigma() {
            self.f.sigma(&x)
        } else {
            Ok(x)
        }
    }

    /// `f^ρ(a)` or `f(a)`.
    fn second_factor(&self, a: &S, variant: Variant) -> Result<S> {
        if variant.uses_f() {
            self.f.value(a)
        } else {
            self.f.rho_value(a)
        }
    }

    /// `∫_â^a f Δt + ∫_b̂^b f⁻¹ − ab + âb̂`, i.e. `F(a,b) − F(â,b̂)`.
    fn sandwich_middle(&self, a: &S, a_hat: &S, b: &S, b_hat: &S) -> Result<S> {
        Ok(self.f.integral(a_hat, a)? + self.f.inverse_integral(b_hat, b)? - a.clone() * b.clone()
            + a_hat.clone() * b_hat.clone())
    }

    fn sandwich_with_middle(&self, middle: S, pts: &Points<S>, variant: Variant) -> Result<BoundReport<S>> {
        let Points { a, a_hat, b, b_hat } = pts;
        let alpha_hat = self.first_factor(b_hat, variant)?;
        let beta_hat = self.second_factor(a_hat, variant)?;
        let alpha = self.first_factor(b, variant)?;
        let beta = self.second_factor(a, variant)?;
        let lower = (alpha_hat.clone() - a_hat.clone()) * (beta_hat.clone() - b_hat.clone());
        let upper = (alpha.clone() - a.clone()) * (b.clone() - beta.clone());
        // middle − lower = F(a,b) + F(α̂,β̂); upper − middle = F(â,b̂) + F(α,β).
        let equality_lower = self.is_zero_point(a, b)? && self.is_zero_point(&alpha_hat, &beta_hat)?;
        let equality_upper = self.is_zero_point(a_hat, b_hat)? && self.is_zero_point(&alpha, &beta)?;
        Ok(BoundReport {
            kind: BoundKind::Sandwich,
            variant: Some(variant),
            lower,
            middle,
            upper,
            equality_lower,
            equality_upper,
            reversed: !self.f.is_increasing(),
            witnesses: pts.named(),
        })
    }

    fn points(&self, a: &S, a_hat: &S, b: &S, b_hat: &S) -> Result<Points<S>> {
        Ok(Points {
            a: self.scale().snap(a)?,
            a_hat: self.scale().snap(a_hat)?,
            b: self.on_image(b)?,
            b_hat: self.on_image(b_hat)?,
        })
    }

    /// Bounds on `F(a,b) − F(â,b̂)` in the chosen variant.
    pub fn sandwich_bounds(&self, a: &S, a_hat: &S, b: &S, b_hat: &S, variant: Variant) -> Result<BoundReport<S>> {
        let pts = self.points(a, a_hat, b, b_hat)?;
        let middle = self.sandwich_middle(&pts.a, &pts.a_hat, &pts.b, &pts.b_hat)?;
        self.sandwich_with_middle(middle, &pts, variant)
    }

    /// All four variants, in [`Variant::ALL`] order. The middle value, the
    /// inverses and the zero-set tests are shared between variants.
    pub fn sandwich_all(&self, a: &S, a_hat: &S, b: &S, b_hat: &S) -> Result<[BoundReport<S>; 4]> {
        let pts = self.points(a, a_hat, b, b_hat)?;
        let middle = self.sandwich_middle(&pts.a, &pts.a_hat, &pts.b, &pts.b_hat)?;
        let f = &self.f;
        let (x, x_hat) = (f.inverse(&pts.b)?, f.inverse(&pts.b_hat)?);
        let (sx, sx_hat) = (f.sigma(&x)?, f.sigma(&x_hat)?);
        // `(f(t), f(ρ(t)))` for every point whose zero set is tested.
        let [at_a, at_a_hat, at_x, at_x_hat, at_sx, at_sx_hat] =
            [&pts.a, &pts.a_hat, &x, &x_hat, &sx, &sx_hat].map(|t| f.value_pair(t));
        let (at_a, at_a_hat) = (at_a?, at_a_hat?);
        let (at_x, at_x_hat, at_sx, at_sx_hat) = (at_x?, at_x_hat?, at_sx?, at_sx_hat?);
        let zero = |pair: &(S, S), v: &S| v.grid_eq(&pair.0) || v.grid_eq(&pair.1);
        let (zero_ab, zero_ab_hat) = (zero(&at_a, &pts.b), zero(&at_a_hat, &pts.b_hat));
        let report = |variant: Variant| {
            let (alpha, alpha_hat, at_alpha, at_alpha_hat) = if variant.uses_sigma() {
                (&sx, &sx_hat, &at_sx, &at_sx_hat)
            } else {
                (&x, &x_hat, &at_x, &at_x_hat)
            };
            let pick = |pair: &(S, S)| if variant.uses_f() { pair.0.clone() } else { pair.1.clone() };
            let (beta, beta_hat) = (pick(&at_a), pick(&at_a_hat));
            let lower = (alpha_hat.clone() - pts.a_hat.clone()) * (beta_hat.clone() - pts.b_hat.clone());
            let upper = (alpha.clone() - pts.a.clone()) * (pts.b.clone() - beta.clone());
            BoundReport {
                kind: BoundKind::Sandwich,
                variant: Some(variant),
                lower,
                middle: middle.clone(),
                upper,
                equality_lower: zero_ab && zero(at_alpha_hat, &beta_hat),
                equality_upper: zero_ab_hat && zero(at_alpha, &beta),
                reversed: !f.is_increasing(),
                witnesses: pts.named(),
            }
        };
        Ok(Variant::ALL.map(report))
    }

    /// The tightest of the four upper bounds: the least for increasing `f`,
    /// the greatest for decreasing `f`. Ties go to the earlier variant.
    pub fn best_upper_bound(&self, a: &S, a_hat: &S, b: &S, b_hat: &S) -> Result<(Variant, S)> {
        let reports = self.sandwich_all(a, a_hat, b, b_hat)?;
        let inc = self.f.is_increasing();
        let mut best = (reports[0].variant.unwrap(), reports[0].upper.clone());
        for r in &reports[1..] {
            let better = if inc { r.upper < best.1 } else { r.upper > best.1 };
            if better {
                best = (r.variant.unwrap(), r.upper.clone());
            }
        }
        Ok(best)
    }

    /// The conjugate pair generated by `f` with `g(α₁) = anchor`.
    pub fn legendre_pair(&self, anchor: S) -> LegendrePair<'_, S> {
        LegendrePair { ctx: self, anchor }
    }

    /// Sandwich with `b = f(α)`, `b̂ = f(α̂)`, computed without `f⁻¹`.
    pub fn inverse_free_sandwich(&self, a: &S, a_hat: &S, alpha: &S, alpha_hat: &S) -> Result<BoundReport<S>> {
        let snap = |t: &S| self.scale().snap(t);
        let (a, a_hat, alpha, alpha_hat) = (snap(a)?, snap(a_hat)?, snap(alpha)?, snap(alpha_hat)?);
        let f = &self.f;
        let (f_alpha, f_alpha_hat) = (f.value(&alpha)?, f.value(&alpha_hat)?);
        let (fr_a, fr_a_hat) = (f.rho_value(&a)?, f.rho_value(&a_hat)?);
        let middle = f.integral(&a_hat, &a)? - f.integral(&alpha_hat, &alpha)?
            + (alpha.clone() - a.clone()) * f_alpha.clone()
            + (a_hat.clone() - alpha_hat.clone()) * f_alpha_hat.clone();
        let lower = (alpha_hat.clone() - a_hat.clone()) * (fr_a_hat.clone() - f_alpha_hat.clone());
        let upper = (alpha.clone() - a.clone()) * (f_alpha.clone() - fr_a.clone());
        let equality_lower = self.is_zero_point(&a, &f_alpha)? && self.is_zero_point(&alpha_hat, &fr_a_hat)?;
        let equality_upper = self.is_zero_point(&a_hat, &f_alpha_hat)? && self.is_zero_point(&alpha, &fr_a)?;
        Ok(BoundReport {
            kind: BoundKind::InverseFree,
            variant: Some(Variant::RhoRho),
            lower,
            middle,
            upper,
            equality_lower,
            equality_upper,
            reversed: !f.is_increasing(),
            witnesses: vec![
                ("a", a),
                ("a_hat", a_hat),
                ("alpha", alpha),
                ("alpha_hat", alpha_hat),
            ],
        })
    }
}

struct Points<S> {
    a: S,
    a_hat: S,
    b: S,
    b_hat: S,
}

impl<S: Clone> Points<S> {
    fn named(&self) -> Vec<(&'static str, S)> {
        vec![
            ("a", self.a.clone()),
            ("a_hat", self.a_hat.clone()),
            ("b", self.b.clone()),
            ("b_hat", self.b_hat.clone()),
        ]
    }
}

fn zero_point<S: Scalar>(f: &MonotoneFn<S>, a: &S, b: &S) -> Result<bool> {
    let (fa, fra) = f.value_pair(a)?;
    Ok(b.grid_eq(&fa) || b.grid_eq(&fra))
}

/// `g(a) = anchor + ∫_{α₁}^a f Δt` and
/// `g*(b) = ∫_{β₁}^b f⁻¹ + α₁β₁ − anchor`, so that
/// `g(a) + g*(b) − ab = F(a, b)`.
#[derive(Debug, Clone)]
pub struct LegendrePair<'a, S: Scalar> {
    ctx: &'a YoungContext<S>,
    anchor: S,
}

impl<S: Scalar> LegendrePair<'_, S> {
    pub fn g(&self, a: &S) -> Result<S> {
        Ok(self.anchor.clone() + self.ctx.f.integral(&self.ctx.alpha1, a)?)
    }

    pub fn g_star(&self, b: &S) -> Result<S> {
        let b = self.ctx.on_image(b)?;
        Ok(self.ctx.f.inverse_integral(&self.ctx.beta1, &b)?
            + self.ctx.alpha1.clone() * self.ctx.beta1.clone()
            - self.anchor.clone())
    }

    /// `g(a) + g*(b) − ab`.
    pub fn gap(&self, a: &S, b: &S) -> Result<S> {
        Ok(self.g(a)? + self.g_star(b)? - a.clone() * b.clone())
    }

    /// The sandwich written through `g` and `g*`, with the plain bounds.
    pub fn sandwich(&self, a: &S, a_hat: &S, b: &S, b_hat: &S) -> Result<BoundReport<S>> {
        let pts = self.ctx.points(a, a_hat, b, b_hat)?;
        let middle = self.gap(&pts.a, &pts.b)? - self.gap(&pts.a_hat, &pts.b_hat)?;
        let mut report = self.ctx.sandwich_with_middle(middle, &pts, Variant::RhoRho)?;
        report.kind = BoundKind::Legendre;
        Ok(report)
    }
}

/// Piecewise sandwich on `[a_1, a_{m+1}]` with end values `b_1`, `b_{m+1}`.
///
/// The middle is the sum over pieces of each piece's delta integral and the
/// `f_i⁻¹` integral over that piece's own image between its end values,
/// plus the jump sum in real-jumps mode, minus `a_{m+1}b_{m+1} − a_1 b_1`.
/// With `K_i = (a_i − f⁻¹(b_i))(f^ρ(a_i) − b_i)` the bounds are
/// `−K_1 ≤ · ≤ K_{m+1}` when the end pieces share a direction and
/// `K_{m+1} − K_1 ≤ · ≤ 0` otherwise, reversed when the first piece decreases.
pub fn piecewise_sandwich<S: Scalar>(pf: &PiecewiseFn<S>, b_first: &S, b_last: &S) -> Result<BoundReport<S>> {
    let pieces = pf.pieces();
    let knots = pf.knots();
    let m = pieces.len();
    let (first, last) = (&pieces[0], &pieces[m - 1]);
    let (a_first, a_last) = (knots[0].clone(), knots[m].clone());

    let x_first = first.inverse(b_first)?;
    if x_first < a_first {
        return Err(Error::NotInImage(format!(
            "{b_first} (its preimage {x_first} precedes the first knot {a_first})"
        )));
    }
    let x_last = last.inverse(b_last)?;
    let b_first = first.value(&x_first)?;
    let b_last = last.value(&x_last)?;

    let mut middle = S::zero();
    for (i, p) in pieces.iter().enumerate() {
        let from = if i == 0 { b_first.clone() } else { p.value(&knots[i])? };
        let to = if i == m - 1 { b_last.clone() } else { p.value(&knots[i + 1])? };
        middle = middle + p.integral(&knots[i], &knots[i + 1])? + p.inverse_integral(&from, &to)?;
    }
    if pf.mode() == PiecewiseMode::RealJumps {
        middle = middle + pf.jump_sum();
    }
    middle = middle - a_last.clone() * b_last.clone() + a_first.clone() * b_first.clone();

    let rho_first = first.rho_value(&a_first)?;
    let rho_last = last.rho_value(&a_last)?;
    let k_first = (a_first.clone() - x_first.clone()) * (rho_first.clone() - b_first.clone());
    let k_last = (a_last.clone() - x_last.clone()) * (rho_last.clone() - b_last.clone());

    let same_ends = first.is_increasing() == last.is_increasing();
    let (lower, upper, kind) = if same_ends {
        (-k_first, k_last, BoundKind::PiecewiseSameEnds)
    } else {
        (k_last - k_first, S::zero(), BoundKind::PiecewiseMixedEnds)
    };
    // Each gap is a sum of one end-piece functional at the first end and one
    // at the last end; a term carrying K_i moves that end to (f⁻¹(b_i), f^ρ(a_i)).
    let z_first_base = zero_point(first, &a_first, &b_first)?;
    let z_first_k = zero_point(first, &x_first, &rho_first)?;
    let z_last_base = zero_point(last, &a_last, &b_last)?;
    let z_last_k = zero_point(last, &x_last, &rho_last)?;
    let (equality_lower, equality_upper) = if same_ends {
        (z_first_k && z_last_base, z_first_base && z_last_k)
    } else {
        (z_first_k && z_last_k, z_first_base && z_last_base)
    };
    Ok(BoundReport {
        kind,
        variant: None,
        lower,
        middle,
        upper,
        equality_lower,
        equality_upper,
        reversed: !first.is_increasing(),
        witnesses: vec![
            ("a_first", a_first),
            ("a_last", a_last),
            ("b_first", b_first),
            ("b_last", b_last),
        ],
    })
}

/// [`piecewise_sandwich`] for a scale-continuous composite.
pub fn piecewise_continuous_sandwich<S: Scalar>(pf: &PiecewiseFn<S>, b_first: &S, b_last: &S) -> Result<BoundReport<S>> {
    if pf.mode() != PiecewiseMode::ScaleContinuous {
        return Err(Error::InvalidArgument("expected a scale-continuous piecewise function".into()));
    }
    piecewise_sandwich(pf, b_first, b_last)
}

/// [`piecewise_sandwich`] for a composite with jumps on a real interval;
/// there `f^ρ = f`, and the `f⁻¹` integrals run over the piece ranges only.
pub fn piecewise_real_sandwich<S: Scalar>(pf: &PiecewiseFn<S>, b_first: &S, b_last: &S) -> Result<BoundReport<S>> {
    if pf.mode() != PiecewiseMode::RealJumps {
        return Err(Error::InvalidArgument("expected a piecewise function with jumps".into()));
    }
    piecewise_sandwich(pf, b_first, b_last)
}
