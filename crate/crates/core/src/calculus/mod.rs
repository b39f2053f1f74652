//! Delta and nabla integration on time scales, and the generalized
//! monomials `h_n`.
//!
//! An integral over a time scale is the ordinary integral over the dense
//! parts plus graininess-weighted values at scattered points. For the
//! delta integral on `[a, b)` a right-scattered point `t` contributes
//! `μ(t)·g(t)`; for the nabla integral on `(a, b]` a left-scattered point
//! `y` contributes `ν(y)·g(y)`.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::timescale::{Component, Place, TimeScale};

/// Largest supported order for [`h_n`].
pub const MAX_MONOMIAL_ORDER: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    Delta,
    Nabla,
}

/// Number of interval components meeting `[a, b]`, used to split the
/// quadrature tolerance budget.
fn dense_count<S: Scalar>(comps: &[Component<S>]) -> usize {
    comps.iter().filter(|c| !c.is_point()).count().max(1)
}

fn integrate<S: Scalar>(
    scale: &TimeScale<S>,
    g: &dyn Fn(&S) -> Result<S>,
    a: &S,
    b: &S,
    tol: f64,
    kind: IntegralKind,
) -> Result<S> {
    let la = scale.locate_or_err(a)?;
    let lb = scale.locate_or_err(b)?;
    if la.point > lb.point {
        return integrate(scale, g, b, a, tol, kind).map(|v| -v);
    }
    if la.point == lb.point {
        return Ok(S::zero());
    }
    let (a, b) = (la.point, lb.point);
    let comps = scale.components();
    let span = &comps[la.index..=lb.index];
    let abs_tol = tol / dense_count(span) as f64;
    let mut total = S::zero();
    for (i, c) in comps.iter().enumerate().take(lb.index + 1).skip(la.index) {
        match c {
            Component::Point(x) => match kind {
                IntegralKind::Delta if *x < b => {
                    total = total + (comps[i + 1].start().clone() - x.clone()) * g(x)?;
                }
                IntegralKind::Nabla if *x > a => {
                    total = total + (x.clone() - comps[i - 1].end().clone()) * g(x)?;
                }
                _ => {}
            },
            Component::Interval(lo, hi) => {
                let from = if *lo < a { a.clone() } else { lo.clone() };
                let to = if *hi > b { b.clone() } else { hi.clone() };
                if from < to {
                    total = total + S::integrate_dense(g, &from, &to, abs_tol)?;
                }
                match kind {
                    IntegralKind::Delta if *hi < b => {
                        total = total + (comps[i + 1].start().clone() - hi.clone()) * g(hi)?;
                    }
                    IntegralKind::Nabla if *lo > a => {
                        total = total + (lo.clone() - comps[i - 1].end().clone()) * g(lo)?;
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(total)
}

/// `∫_a^b g(t) Δt`: scattered points of `[a, b)` weighted by `μ`, plus the
/// ordinary integral over dense parts. `a > b` negates.
pub fn delta_integral<S: Scalar>(
    scale: &TimeScale<S>,
    g: impl Fn(&S) -> Result<S>,
    a: &S,
    b: &S,
    tol: f64,
) -> Result<S> {
    integrate(scale, &g, a, b, tol, IntegralKind::Delta)
}

/// `∫_a^b g(y) ∇y`: scattered points of `(a, b]` weighted by `ν`, plus the
/// ordinary integral over dense parts. `a > b` negates.
pub fn nabla_integral<S: Scalar>(
    scale: &TimeScale<S>,
    g: impl Fn(&S) -> Result<S>,
    a: &S,
    b: &S,
    tol: f64,
) -> Result<S> {
    integrate(scale, &g, a, b, tol, IntegralKind::Nabla)
}

/// Running integral from `min T`, tabulated at every component boundary so
/// that `∫_a^b` costs two lookups plus at most two partial quadratures.
#[derive(Debug, Clone)]
pub(crate) struct CumulativeIntegral<S> {
    kind: IntegralKind,
    at_start: Vec<S>,
    at_end: Vec<S>,
    tol: f64,
}

impl<S: Scalar> CumulativeIntegral<S> {
    pub(crate) fn build(
        scale: &TimeScale<S>,
        g: &dyn Fn(&S) -> Result<S>,
        kind: IntegralKind,
        tol: f64,
    ) -> Result<Self> {
        let comps = scale.components();
        let abs_tol = tol / dense_count(comps) as f64;
        let mut at_start = Vec::with_capacity(comps.len());
        let mut at_end = Vec::with_capacity(comps.len());
        let mut running = S::zero();
        for (i, c) in comps.iter().enumerate() {
            if i > 0 {
                let prev_end = comps[i - 1].end();
                let gap = c.start().clone() - prev_end.clone();
                let weight = match kind {
                    IntegralKind::Delta => g(prev_end)?,
                    IntegralKind::Nabla => g(c.start())?,
                };
                running = running + gap * weight;
            }
            at_start.push(running.clone());
            if let Component::Interval(lo, hi) = c {
                running = running + S::integrate_dense(g, lo, hi, abs_tol)?;
            }
            at_end.push(running.clone());
        }
        Ok(CumulativeIntegral {
            kind,
            at_start,
            at_end,
            tol: abs_tol,
        })
    }

    fn running(&self, scale: &TimeScale<S>, g: &dyn Fn(&S) -> Result<S>, t: &S) -> Result<S> {
        let loc = scale.locate_or_err(t)?;
        Ok(match loc.place {
            Place::Isolated | Place::Lo => self.at_start[loc.index].clone(),
            Place::Hi => self.at_end[loc.index].clone(),
            Place::Interior => {
                let lo = scale.components()[loc.index].start();
                self.at_start[loc.index].clone()
                    + S::integrate_dense(g, lo, &loc.point, self.tol)?
            }
        })
    }

    /// `∫_a^b` of the tabulated kind.
    pub(crate) fn between(
        &self,
        scale: &TimeScale<S>,
        g: &dyn Fn(&S) -> Result<S>,
        a: &S,
        b: &S,
    ) -> Result<S> {
        let la = scale.locate_or_err(a)?;
        let lb = scale.locate_or_err(b)?;
        if la.point == lb.point {
            return Ok(S::zero());
        }
        // Both ends inside the same interval: integrate directly.
        if la.index == lb.index && la.place == Place::Interior && lb.place == Place::Interior {
            return S::integrate_dense(g, &la.point, &lb.point, self.tol);
        }
        debug_assert!(matches!(self.kind, IntegralKind::Delta | IntegralKind::Nabla));
        Ok(self.running(scale, g, &lb.point)? - self.running(scale, g, &la.point)?)
    }
}

/// Generalized monomial `h_n(t, s)`: `h_0 ≡ 1`,
/// `h_{k+1}(t, s) = ∫_s^t h_k(τ, s) Δτ`.
///
/// When `[min(s,t), max(s,t)] ∩ T` is purely discrete the values are
/// tabulated bottom-up along the grid in `O(n·N)`; otherwise the recursion
/// runs through nested quadrature, which is exponential in `n`.
pub fn h_n<S: Scalar>(scale: &TimeScale<S>, n: u32, t: &S, s: &S, tol: f64) -> Result<S> {
    if n > MAX_MONOMIAL_ORDER {
        return Err(Error::InvalidArgument(format!(
            "h_n order {n} exceeds {MAX_MONOMIAL_ORDER}"
        )));
    }
    let t = scale.snap(t)?;
    let s = scale.snap(s)?;
    if n == 0 {
        return Ok(S::one());
    }
    let (lo, hi) = if t < s { (&t, &s) } else { (&s, &t) };
    let window = scale.restrict(lo, hi)?;
    if window.is_discrete() {
        return Ok(h_n_tabulated(&window, n, &t, &s));
    }
    h_n_recursive(scale, n, &t, &s, tol)
}

fn h_n_tabulated<S: Scalar>(window: &TimeScale<S>, n: u32, t: &S, s: &S) -> S {
    let pts: Vec<S> = window.components().iter().map(|c| c.start().clone()).collect();
    let last = pts.len() - 1;
    let mut prev = vec![S::one(); pts.len()];
    for _ in 0..n {
        let mut cur = vec![S::zero(); pts.len()];
        if t >= s {
            // s = pts[0]; march upward.
            for j in 0..last {
                cur[j + 1] = cur[j].clone() + (pts[j + 1].clone() - pts[j].clone()) * prev[j].clone();
            }
        } else {
            // s = pts[last]; march downward.
            for j in (0..last).rev() {
                cur[j] = cur[j + 1].clone() - (pts[j + 1].clone() - pts[j].clone()) * prev[j].clone();
            }
        }
        prev = cur;
    }
    if t >= s {
        prev[last].clone()
    } else {
        prev[0].clone()
    }
}

fn h_n_recursive<S: Scalar>(scale: &TimeScale<S>, n: u32, t: &S, s: &S, tol: f64) -> Result<S> {
    if n == 0 {
        return Ok(S::one());
    }
    delta_integral(scale, |tau| h_n_recursive(scale, n - 1, tau, s, tol), s, t, tol)
}
