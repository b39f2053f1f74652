//! Globally adaptive Simpson quadrature.
//!
//! The panel with the largest error estimate is bisected until the summed
//! estimate meets the tolerance. Splitting order is deterministic, so
//! results are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Uniform bisection levels applied before any error test; keeps kinks of
/// piecewise-smooth integrands from hiding between samples.
const MIN_DEPTH: u32 = 3;
const MAX_PANELS: usize = 1 << 18;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    flm: f64,
    frm: f64,
    value: f64,
    error: f64,
}

impl Panel {
    fn new(eval: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Result<Self> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (eval(lm)?, eval(rm)?);
        let whole = simpson(a, b, fa, fm, fb);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        let resolved = !(a < lm && lm < m && m < rm && rm < b);
        let floor = 16.0 * f64::EPSILON * (left.abs() + right.abs());
        let error = if resolved || delta.abs() / 15.0 <= floor { 0.0 } else { delta.abs() / 15.0 };
        Ok(Panel { a, b, fa, fm, fb, flm, frm, value: left + right + delta / 15.0, error })
    }

    fn split(self, eval: &dyn Fn(f64) -> Result<f64>) -> Result<(Panel, Panel)> {
        let m = 0.5 * (self.a + self.b);
        Ok((
            Panel::new(eval, self.a, m, self.fa, self.flm, self.fm)?,
            Panel::new(eval, m, self.b, self.fm, self.frm, self.fb)?,
        ))
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn finite(v: f64, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("integrand is not finite at {at}")))
    }
}

/// Integral of `g` over `[lo, hi]` to absolute tolerance `abs_tol`.
/// Reversed bounds negate the result.
pub fn adaptive_simpson(
    g: &dyn Fn(&f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    abs_tol: f64,
) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if hi < lo {
        return adaptive_simpson(g, hi, lo, abs_tol).map(|v| -v);
    }
    let eval = |t: f64| finite(g(&t)?, t);
    let n = 1usize << MIN_DEPTH;
    let width = (hi - lo) / n as f64;
    let nodes: Vec<f64> = (0..=2 * n)
        .map(|k| if k == 2 * n { hi } else { lo + 0.5 * width * k as f64 })
        .collect();
    let values = nodes.iter().map(|&t| eval(t)).collect::<Result<Vec<_>>>()?;
    let mut heap = BinaryHeap::with_capacity(4 * n);
    for k in 0..n {
        let (i, j, l) = (2 * k, 2 * k + 1, 2 * k + 2);
        heap.push(Panel::new(&eval, nodes[i], nodes[l], values[i], values[j], values[l])?);
    }
    let tol = abs_tol.max(0.0);
    loop {
        let total_error: f64 = heap.iter().map(|p| p.error).sum();
        if total_error <= tol {
            break;
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureDidNotConverge {
                lo: lo.to_string(),
                hi: hi.to_string(),
                tolerance: abs_tol,
            });
        }
        // Split a batch so the full error sum is recomputed rarely.
        let batch = heap.len().div_ceil(4).max(1);
        for _ in 0..batch {
            match heap.peek() {
                Some(p) if p.error > 0.0 => {}
                _ => break,
            }
            let worst = heap.pop().expect("peeked");
            let (l, r) = worst.split(&eval)?;
            heap.push(l);
            heap.push(r);
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(panels.iter().map(|p| p.value).sum())
}
