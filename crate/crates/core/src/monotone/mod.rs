//! Strictly monotone functions on time scales.

mod builtin;
mod piecewise;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::calculus::{CumulativeIntegral, IntegralKind};
use crate::error::{Error, Result};
use crate::scalar::{magnitude, Scalar, DEFAULT_TOLERANCE};
use crate::timescale::{Component, Place, TimeScale};

pub use builtin::{Builtin, FunctionSpec, PiecewiseSpec};
pub use piecewise::{make_piecewise, Jump, PieceDef, PiecewiseFn, PiecewiseMode};

/// A shareable scalar function.
pub type Callable<S> = Arc<dyn Fn(&S) -> Result<S> + Send + Sync>;

/// Mesh points per interval component used by validation.
pub const VALIDATION_MESH: usize = 33;

/// Bisection steps used when hunting a jump inside one mesh cell.
const CONTINUITY_STEPS: usize = 80;

/// Quadrature tolerance relative to the function's own tolerance.
const QUADRATURE_SHARE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn is_increasing(self) -> bool {
        self == Direction::Increasing
    }

    /// Direction implied by the values at the ends of the window.
    pub fn detect<S: Scalar>(eval: &dyn Fn(&S) -> Result<S>, window: &TimeScale<S>) -> Result<Self> {
        let (lo, hi) = (window.min(), window.max());
        let (flo, fhi) = (eval(lo)?, eval(hi)?);
        if flo < fhi {
            Ok(Direction::Increasing)
        } else if flo > fhi {
            Ok(Direction::Decreasing)
        } else {
            Err(Error::MonotonicityViolation {
                left: lo.to_string(),
                right: hi.to_string(),
            })
        }
    }
}

struct Tables<S> {
    forward: OnceLock<Result<CumulativeIntegral<S>>>,
    inverse: OnceLock<Result<CumulativeIntegral<S>>>,
}

impl<S> Default for Tables<S> {
    fn default() -> Self {
        Tables {
            forward: OnceLock::new(),
            inverse: OnceLock::new(),
        }
    }
}

/// A validated, strictly monotone, continuous function on a bounded window
/// `[α₁, α₂]` of a time scale.
#[derive(Clone)]
pub struct MonotoneFn<S: Scalar> {
    eval: Callable<S>,
    inverse: Option<Callable<S>>,
    direction: Direction,
    scale: TimeScale<S>,
    image: TimeScale<S>,
    tolerance: f64,
    tables: Arc<Tables<S>>,
}

impl<S: Scalar> fmt::Debug for MonotoneFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFn")
            .field("direction", &self.direction)
            .field("scale", &self.scale)
            .field("image", &self.image)
            .field("closed_form_inverse", &self.inverse.is_some())
            .finish()
    }
}

/// Validates `eval` on `[lo, hi] ∩ T` and wraps it.
///
/// Monotonicity is checked on every grid point plus a mesh of
/// [`VALIDATION_MESH`] points per interval; in the floating regime each mesh
/// cell is also searched for a jump. Both checks are sampling heuristics.
pub fn make_monotone<S: Scalar>(
    eval: Callable<S>,
    direction: Direction,
    scale: &TimeScale<S>,
    lo: &S,
    hi: &S,
    inverse: Option<Callable<S>>,
) -> Result<MonotoneFn<S>> {
    MonotoneFn::new(eval, direction, scale.restrict(lo, hi)?, inverse)
}

impl<S: Scalar> MonotoneFn<S> {
    /// Validates `eval` on the whole of `window`.
    pub fn new(
        eval: Callable<S>,
        direction: Direction,
        window: TimeScale<S>,
        inverse: Option<Callable<S>>,
    ) -> Result<Self> {
        validate(eval.as_ref(), direction, &window)?;
        let image = window.image(|t| eval(t), direction.is_increasing())?;
        Ok(MonotoneFn {
            eval,
            inverse,
            direction,
            scale: window,
            image,
            tolerance: DEFAULT_TOLERANCE,
            tables: Arc::default(),
        })
    }

    /// Same function with a different quadrature tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.tables = Arc::default();
        self
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_increasing(&self) -> bool {
        self.direction.is_increasing()
    }

    /// The window `[α₁, α₂]_T`.
    pub fn scale(&self) -> &TimeScale<S> {
        &self.scale
    }

    /// `f([α₁, α₂]_T)`.
    pub fn image(&self) -> &TimeScale<S> {
        &self.image
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// The raw callable, without membership checks.
    pub fn callable(&self) -> &Callable<S> {
        &self.eval
    }

    /// `f(t)` for `t` in the window.
    pub fn value(&self, t: &S) -> Result<S> {
        (self.eval)(&self.scale.snap(t)?)
    }

    /// `f(ρ(t))`, with `ρ` taken in the window.
    pub fn rho_value(&self, t: &S) -> Result<S> {
        (self.eval)(&self.scale.rho(t)?)
    }

    /// `(f(t), f(ρ(t)))` from a single lookup of `t`.
    pub fn value_pair(&self, t: &S) -> Result<(S, S)> {
        let loc = self.scale.locate_or_err(t)?;
        let rho = self.scale.rho_of(&loc);
        let at_rho = (self.eval)(&rho)?;
        if rho == loc.point {
            return Ok((at_rho.clone(), at_rho));
        }
        Ok(((self.eval)(&loc.point)?, at_rho))
    }

    pub fn sigma(&self, t: &S) -> Result<S> {
        self.scale.sigma(t)
    }

    pub fn rho(&self, t: &S) -> Result<S> {
        self.scale.rho(t)
    }

    /// `f⁻¹(y)` for `y` on the image scale. Off-grid values are an error.
    pub fn inverse(&self, y: &S) -> Result<S> {
        let loc = self
            .image
            .locate(y)
            .ok_or_else(|| Error::NotInImage(y.to_string()))?;
        let comps = self.scale.components();
        let inc = self.is_increasing();
        let j = if inc { loc.index } else { comps.len() - 1 - loc.index };
        match (&comps[j], loc.place) {
            (Component::Point(x), _) => Ok(x.clone()),
            (Component::Interval(lo, hi), Place::Lo) => Ok(if inc { lo } else { hi }.clone()),
            (Component::Interval(lo, hi), Place::Hi) => Ok(if inc { hi } else { lo }.clone()),
            (Component::Interval(lo, hi), _) => self.solve(&loc.point, lo, hi),
        }
    }

    /// Root of `f(t) = y` inside the interval `[lo, hi]`.
    fn solve(&self, y: &S, lo: &S, hi: &S) -> Result<S> {
        if let Some(inv) = &self.inverse {
            let t = inv(y)?;
            return Ok(if t < *lo {
                lo.clone()
            } else if t > *hi {
                hi.clone()
            } else {
                t
            });
        }
        if S::EXACT {
            return Err(Error::NotExact(format!(
                "invert at {y} without a closed-form inverse"
            )));
        }
        let inc = self.is_increasing();
        let (mut l, mut h) = (lo.clone(), hi.clone());
        loop {
            let m = l.midpoint(&h);
            if !(l < m && m < h) {
                break;
            }
            let fm = (self.eval)(&m)?;
            if fm == *y {
                return Ok(m);
            }
            if (fm < *y) == inc {
                l = m;
            } else {
                h = m;
            }
        }
        let (el, eh) = (((self.eval)(&l)? - y.clone()).abs(), ((self.eval)(&h)? - y.clone()).abs());
        Ok(if el <= eh { l } else { h })
    }

    fn quad_tol(&self) -> f64 {
        self.tolerance * QUADRATURE_SHARE
    }

    fn forward_table(&self) -> Result<&CumulativeIntegral<S>> {
        self.tables
            .forward
            .get_or_init(|| {
                CumulativeIntegral::build(&self.scale, &|t| (self.eval)(t), IntegralKind::Delta, self.quad_tol())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Integration kind used for `f⁻¹` on the image: nabla for increasing
    /// `f`, delta for decreasing `f`.
    pub fn inverse_kind(&self) -> IntegralKind {
        if self.is_increasing() {
            IntegralKind::Nabla
        } else {
            IntegralKind::Delta
        }
    }

    fn inverse_table(&self) -> Result<&CumulativeIntegral<S>> {
        self.tables
            .inverse
            .get_or_init(|| {
                CumulativeIntegral::build(&self.image, &|y| self.inverse(y), self.inverse_kind(), self.quad_tol())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `∫_a^b f(t) Δt` over the window.
    pub fn integral(&self, a: &S, b: &S) -> Result<S> {
        self.forward_table()?
            .between(&self.scale, &|t| (self.eval)(t), a, b)
    }

    /// Integral of `f⁻¹` over the image from `y0` to `y1`.
    ///
    /// For increasing `f` this is the nabla integral. A decreasing `f` is
    /// reduced to the increasing `t ↦ -f(t)`, whose nabla integral over the
    /// reflected image is the delta integral over the image itself.
    pub fn inverse_integral(&self, y0: &S, y1: &S) -> Result<S> {
        self.inverse_table()?
            .between(&self.image, &|y| self.inverse(y), y0, y1)
    }
}

fn validate<S: Scalar>(eval: &dyn Fn(&S) -> Result<S>, direction: Direction, window: &TimeScale<S>) -> Result<()> {
    let pts = window.sample_points(VALIDATION_MESH);
    let vals = pts.iter().map(|t| finite(eval(t)?)).collect::<Result<Vec<S>>>()?;
    for k in 1..pts.len() {
        let ordered = match direction {
            Direction::Increasing => vals[k - 1] < vals[k],
            Direction::Decreasing => vals[k - 1] > vals[k],
        };
        if !ordered {
            return Err(Error::MonotonicityViolation {
                left: pts[k - 1].to_string(),
                right: pts[k].to_string(),
            });
        }
    }
    if S::EXACT {
        return Ok(());
    }
    let mut offset = 0;
    for c in window.components() {
        if let Component::Interval(..) = c {
            let range = offset..offset + VALIDATION_MESH;
            check_continuity(eval, &pts[range.clone()], &vals[range])?;
            offset += VALIDATION_MESH;
        } else {
            offset += 1;
        }
    }
    Ok(())
}

fn finite<S: Scalar>(v: S) -> Result<S> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("function value"))
    }
}

/// Flags a cell whose value gap survives repeated bisection toward the
/// steeper half; a continuous function's gap shrinks to nothing.
fn check_continuity<S: Scalar>(eval: &dyn Fn(&S) -> Result<S>, pts: &[S], vals: &[S]) -> Result<()> {
    let scale = magnitude(vals);
    let negligible = 1e-6 * scale;
    for k in 1..pts.len() {
        let coarse = (vals[k].clone() - vals[k - 1].clone()).abs().to_f64();
        if coarse <= negligible {
            continue;
        }
        let (mut l, mut h) = (pts[k - 1].clone(), pts[k].clone());
        let (mut fl, mut fh) = (vals[k - 1].clone(), vals[k].clone());
        let mut gap = coarse;
        for _ in 0..CONTINUITY_STEPS {
            let m = l.midpoint(&h);
            if !(l < m && m < h) {
                break;
            }
            let fm = eval(&m)?;
            let left = (fm.clone() - fl.clone()).abs();
            let right = (fh.clone() - fm.clone()).abs();
            if left >= right {
                h = m;
                fh = fm;
                gap = left.to_f64();
            } else {
                l = m;
                fl = fm;
                gap = right.to_f64();
            }
            if gap <= negligible {
                break;
            }
        }
        if gap > negligible && gap >= 0.5 * coarse {
            return Err(Error::DiscontinuityDetected { near: l.midpoint(&h).to_string() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn arc<S: Scalar>(f: impl Fn(&S) -> Result<S> + Send + Sync + 'static) -> Callable<S> {
        Arc::new(f)
    }

    fn square() -> Callable<Rational> {
        arc(|t: &Rational| Ok(t.clone() * t.clone()))
    }

    #[test]
    fn accepts_and_rejects_by_direction() {
        let z = TimeScale::<Rational>::integers(-10, 10).unwrap();
        assert!(make_monotone(square(), Direction::Increasing, &z, &q(0), &q(5), None).is_ok());
        assert!(matches!(
            make_monotone(square(), Direction::Increasing, &z, &q(-3), &q(3), None),
            Err(Error::MonotonicityViolation { .. })
        ));
        let r = TimeScale::interval(0.0, 1.0).unwrap();
        let neg = MonotoneFn::new(arc(|t: &f64| Ok(-t)), Direction::Decreasing, r.clone(), None);
        assert!(neg.is_ok());
        assert!(MonotoneFn::new(arc(|t: &f64| Ok(-t)), Direction::Increasing, r, None).is_err());
    }

    #[test]
    fn jump_inside_interval_is_detected() {
        let r = TimeScale::interval(0.0, 1.0).unwrap();
        let step = arc(|t: &f64| Ok(if *t < 0.3 { *t } else { t + 0.5 }));
        assert!(matches!(
            MonotoneFn::new(step, Direction::Increasing, r.clone(), None),
            Err(Error::DiscontinuityDetected { .. })
        ));
        let steep = arc(|t: &f64| Ok((30.0 * t).exp()));
        assert!(MonotoneFn::new(steep, Direction::Increasing, r, None).is_ok());
    }

    #[test]
    fn inverse_on_discrete_and_dense_parts() {
        let z = TimeScale::<Rational>::integers(0, 5).unwrap();
        let f = MonotoneFn::new(square(), Direction::Increasing, z, None).unwrap();
        assert_eq!(f.inverse(&q(9)).unwrap(), q(3));
        assert!(matches!(f.inverse(&q(8)), Err(Error::NotInImage(_))));

        let z = TimeScale::<Rational>::integers(0, 4).unwrap();
        let pow2 = arc(|t: &Rational| Ok(Rational::from(2).pow(t.to_i64().unwrap() as i32)));
        let f = MonotoneFn::new(pow2, Direction::Increasing, z, None).unwrap();
        assert_eq!(f.inverse(&q(8)).unwrap(), q(3));

        let r = TimeScale::interval(0.0, 2.0).unwrap();
        let cube = MonotoneFn::new(arc(|t: &f64| Ok(t * t * t)), Direction::Increasing, r, None).unwrap();
        let t = cube.inverse(&5.0).unwrap();
        assert!((t - 5f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn decreasing_inverse_maps_components_in_reverse() {
        let t = TimeScale::new(vec![
            Component::Interval(0.0, 1.0),
            Component::Point(2.0),
            Component::Point(3.0),
        ])
        .unwrap();
        let f = MonotoneFn::new(arc(|x: &f64| Ok(10.0 - x)), Direction::Decreasing, t, None).unwrap();
        assert_eq!(f.image().components().len(), 3);
        assert_eq!(f.inverse(&7.0).unwrap(), 3.0);
        assert_eq!(f.inverse(&8.0).unwrap(), 2.0);
        assert_eq!(f.inverse(&9.0).unwrap(), 1.0);
        assert!((f.inverse(&9.25).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn integrals_use_cached_tables() {
        let z = TimeScale::<Rational>::integers(0, 5).unwrap();
        let f = MonotoneFn::new(square(), Direction::Increasing, z, None).unwrap();
        assert_eq!(f.integral(&q(0), &q(3)).unwrap(), q(5));
        // Image {0,1,4,9,16,25}; backward weights 1,3,5 at 1,4,9.
        assert_eq!(f.inverse_integral(&q(0), &q(9)).unwrap(), q(1 + 3 * 2 + 5 * 3));
        assert_eq!(f.inverse_integral(&q(9), &q(0)).unwrap(), q(-22));
    }

    #[test]
    fn exact_regime_needs_closed_form_on_intervals() {
        let r = TimeScale::<Rational>::interval(q(0), q(2)).unwrap();
        let f = MonotoneFn::new(square(), Direction::Increasing, r.clone(), None).unwrap();
        assert_eq!(f.inverse(&q(4)).unwrap(), q(2));
        assert!(matches!(f.inverse(&q(1)), Err(Error::NotExact(_))));
        let id = arc(|t: &Rational| Ok(t.clone()));
        let f = MonotoneFn::new(id.clone(), Direction::Increasing, r, Some(id)).unwrap();
        assert_eq!(f.inverse(&Rational::new(1, 3)).unwrap(), Rational::new(1, 3));
    }

    proptest::proptest! {
        #[test]
        fn inverse_round_trips_and_is_monotone(
            pts in proptest::collection::btree_set(-30i64..30, 2..12),
            slope in 1i64..5,
            shift in -10i64..10,
            lo in 0.0f64..1.0,
            width in 0.5f64..3.0,
            decreasing: bool,
        ) {
            let sign = if decreasing { -1 } else { 1 };
            let z = TimeScale::points(pts.iter().map(|&p| q(p))).unwrap();
            let g = arc(move |t: &Rational| Ok(q(sign * slope) * t.clone() * t.clone() * t.clone() + q(shift)));
            let dir = if decreasing { Direction::Decreasing } else { Direction::Increasing };
            let f = MonotoneFn::new(g, dir, z, None).unwrap();
            let ys: Vec<Rational> = f.image().components().iter().map(|c| c.start().clone()).collect();
            let xs: Vec<Rational> = ys.iter().map(|y| f.inverse(y).unwrap()).collect();
            for (x, y) in xs.iter().zip(&ys) {
                proptest::prop_assert_eq!(&f.value(x).unwrap(), y);
            }
            for w in xs.windows(2) {
                proptest::prop_assert!((w[0] < w[1]) == !decreasing);
            }

            let r = TimeScale::new(vec![
                Component::Interval(lo, lo + width),
                Component::Point(lo + width + 1.0),
            ]).unwrap();
            let s = sign as f64;
            let h = MonotoneFn::new(arc(move |t: &f64| Ok(s * (t.exp() + t))), dir, r, None).unwrap();
            let samples = h.scale().sample_points(17);
            let mut prev: Option<f64> = None;
            for t in samples {
                let y = h.value(&t).unwrap();
                let back = h.inverse(&y).unwrap();
                proptest::prop_assert!((h.value(&back).unwrap() - y).abs() <= 1e-10 * y.abs().max(1.0));
                if let Some(p) = prev {
                    proptest::prop_assert!(back > p);
                }
                prev = Some(back);
            }
        }
    }
}
