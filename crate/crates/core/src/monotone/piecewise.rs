use serde::{Deserialize, Serialize};

use super::{Callable, Direction, MonotoneFn};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, DEFAULT_TOLERANCE};
use crate::timescale::TimeScale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiecewiseMode {
    /// Adjacent pieces agree at shared knots.
    ScaleContinuous,
    /// Jumps at interior knots are allowed; the scale must be one interval.
    RealJumps,
}

/// One piece before validation. `direction: None` reads it off the ends.
#[derive(Clone)]
pub struct PieceDef<S> {
    pub eval: Callable<S>,
    pub direction: Option<Direction>,
    pub inverse: Option<Callable<S>>,
}

/// Value change at an interior knot: `left = f_{i-1}(a_i)`, `right = f_i(a_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump<S> {
    pub at: S,
    pub left: S,
    pub right: S,
}

/// Knots `a_1 < … < a_{m+1}` with a monotone piece on each `[a_i, a_{i+1}]`.
///
/// The first piece is validated on `[ρ(a_1), a_2]` so that `f_1^ρ(a_1)` is
/// available when `a_1` is left-scattered.
#[derive(Debug, Clone)]
pub struct PiecewiseFn<S: Scalar> {
    scale: TimeScale<S>,
    knots: Vec<S>,
    pieces: Vec<MonotoneFn<S>>,
    mode: PiecewiseMode,
    jumps: Vec<Jump<S>>,
}

pub fn make_piecewise<S: Scalar>(
    scale: &TimeScale<S>,
    knots: Vec<S>,
    pieces: Vec<PieceDef<S>>,
    mode: PiecewiseMode,
) -> Result<PiecewiseFn<S>> {
    if knots.len() < 2 || pieces.len() + 1 != knots.len() {
        return Err(Error::InvalidPiecewise(format!(
            "{} knots cannot carry {} pieces",
            knots.len(),
            pieces.len()
        )));
    }
    let knots = knots.iter().map(|k| scale.snap(k)).collect::<Result<Vec<S>>>()?;
    if let Some(w) = knots.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidPiecewise(format!(
            "knots must increase strictly, got {} then {}",
            w[0], w[1]
        )));
    }
    if mode == PiecewiseMode::RealJumps && (scale.components().len() != 1 || scale.is_discrete()) {
        return Err(Error::InvalidPiecewise(
            "jumps are only supported on a single real interval".into(),
        ));
    }
    let mut built = Vec::with_capacity(pieces.len());
    for (i, def) in pieces.into_iter().enumerate() {
        let lo = if i == 0 { scale.rho(&knots[0])? } else { knots[i].clone() };
        let window = scale.restrict(&lo, &knots[i + 1])?;
        let direction = match def.direction {
            Some(d) => d,
            None => Direction::detect(def.eval.as_ref(), &window)?,
        };
        built.push(MonotoneFn::new(def.eval, direction, window, def.inverse)?);
    }
    let mut jumps = Vec::new();
    for i in 1..built.len() {
        let at = knots[i].clone();
        let left = built[i - 1].value(&at)?;
        let right = built[i].value(&at)?;
        match mode {
            PiecewiseMode::ScaleContinuous if !left.near(&right, DEFAULT_TOLERANCE) => {
                return Err(Error::InvalidPiecewise(format!(
                    "pieces {i} and {} disagree at knot {at}: {left} vs {right}",
                    i + 1
                )));
            }
            PiecewiseMode::ScaleContinuous => {}
            PiecewiseMode::RealJumps => jumps.push(Jump { at, left, right }),
        }
    }
    Ok(PiecewiseFn {
        scale: scale.clone(),
        knots,
        pieces: built,
        mode,
        jumps,
    })
}

impl<S: Scalar> PiecewiseFn<S> {
    pub fn scale(&self) -> &TimeScale<S> {
        &self.scale
    }

    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    pub fn pieces(&self) -> &[MonotoneFn<S>] {
        &self.pieces
    }

    pub fn mode(&self) -> PiecewiseMode {
        self.mode
    }

    /// Interior jumps in knot order; empty in scale-continuous mode.
    pub fn jumps(&self) -> &[Jump<S>] {
        &self.jumps
    }

    /// `Σ a_i [f_i(a_i) − f_{i−1}(a_i)]` over interior knots.
    pub fn jump_sum(&self) -> S {
        self.jumps.iter().fold(S::zero(), |acc, j| {
            acc + j.at.clone() * (j.right.clone() - j.left.clone())
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.pieces = self.pieces.into_iter().map(|p| p.with_tolerance(tolerance)).collect();
        self
    }

    /// Index of the piece that owns `t`: pieces are closed on the left, and
    /// the last one also owns `a_{m+1}`.
    pub fn piece_index(&self, t: &S) -> Result<usize> {
        let t = self.scale.snap(t)?;
        if t < self.knots[0] || t > *self.knots.last().unwrap() {
            return Err(Error::InvalidArgument(format!(
                "{t} lies outside the knot range [{}, {}]",
                self.knots[0],
                self.knots.last().unwrap()
            )));
        }
        let i = self.knots.partition_point(|k| *k <= t);
        Ok((i - 1).min(self.pieces.len() - 1))
    }

    pub fn value(&self, t: &S) -> Result<S> {
        self.pieces[self.piece_index(t)?].value(t)
    }
}
