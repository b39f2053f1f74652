//! Bounded time scales: finite sorted unions of closed intervals and
//! isolated points, with jump operators and graininess.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Largest integer range accepted by [`ComponentSpec::Integers`].
const MAX_INTEGER_POINTS: i64 = 1_000_000;

/// One connected piece of a time scale.
#[derive(Debug, Clone, PartialEq)]
pub enum Component<S> {
    Interval(S, S),
    Point(S),
}

impl<S: Scalar> Component<S> {
    pub fn start(&self) -> &S {
        match self {
            Component::Interval(lo, _) => lo,
            Component::Point(x) => x,
        }
    }

    pub fn end(&self) -> &S {
        match self {
            Component::Interval(_, hi) => hi,
            Component::Point(x) => x,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, Component::Point(_))
    }

    fn from_bounds(lo: S, hi: S) -> Self {
        if lo == hi {
            Component::Point(lo)
        } else {
            Component::Interval(lo, hi)
        }
    }
}

/// Where a located point sits inside its component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Isolated,
    Lo,
    Interior,
    Hi,
}

/// A point of the scale resolved to its component.
#[derive(Debug, Clone, PartialEq)]
pub struct Located<S> {
    pub index: usize,
    /// The canonical value of the point (snapped to the stored grid value).
    pub point: S,
    pub place: Place,
}

/// Jump operators and graininess at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jumps<S> {
    pub sigma: S,
    pub rho: S,
    pub mu: S,
    pub nu: S,
}

/// A nonempty bounded closed subset of the reals.
///
/// Components are sorted ascending and pairwise disjoint; touching
/// intervals are merged at construction, so a point is right-scattered
/// exactly when it is an isolated point or the right end of an interval
/// that is not the last component.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScale<S> {
    components: Vec<Component<S>>,
}

impl<S: Scalar> TimeScale<S> {
    /// Normalizes raw components: sorts, merges overlapping or touching
    /// pieces and absorbs points that lie in an interval.
    pub fn new(raw: Vec<Component<S>>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyScale);
        }
        for c in &raw {
            if !c.start().is_finite() || !c.end().is_finite() {
                return Err(Error::NonFinite("time scale component"));
            }
            if let Component::Interval(lo, hi) = c {
                if lo >= hi {
                    return Err(Error::InvalidInterval {
                        lo: lo.to_string(),
                        hi: hi.to_string(),
                    });
                }
            }
        }
        let mut sorted = raw;
        sorted.sort_by(|x, y| {
            x.start()
                .partial_cmp(y.start())
                .unwrap()
                .then(x.end().partial_cmp(y.end()).unwrap())
        });
        let mut merged: Vec<Component<S>> = Vec::with_capacity(sorted.len());
        for c in sorted {
            match merged.last_mut() {
                Some(last) if c.start() <= last.end() => {
                    let lo = last.start().clone();
                    let hi = if c.end() > last.end() {
                        c.end().clone()
                    } else {
                        last.end().clone()
                    };
                    *last = Component::from_bounds(lo, hi);
                }
                _ => merged.push(c),
            }
        }
        Ok(TimeScale { components: merged })
    }

    /// `ℤ ∩ [lo, hi]`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty integer range [{lo}, {hi}]")));
        }
        Self::new((lo..=hi).map(|k| Component::Point(S::from_i64(k))).collect())
    }

    /// The closed real interval `[lo, hi]`.
    pub fn interval(lo: S, hi: S) -> Result<Self> {
        Self::new(vec![Component::Interval(lo, hi)])
    }

    pub fn points(points: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(points.into_iter().map(Component::Point).collect())
    }

    pub fn components(&self) -> &[Component<S>] {
        &self.components
    }

    pub fn min(&self) -> &S {
        self.components[0].start()
    }

    pub fn max(&self) -> &S {
        self.components.last().unwrap().end()
    }

    pub fn is_discrete(&self) -> bool {
        self.components.iter().all(Component::is_point)
    }

    /// Resolves `t` to its component, tolerating grid noise in the floating regime.
    pub fn locate(&self, t: &S) -> Option<Located<S>> {
        let idx = self.components.partition_point(|c| c.end() < t);
        let lo = idx.saturating_sub(1);
        let hi = (idx + 1).min(self.components.len());
        (lo..hi).find_map(|i| match &self.components[i] {
            Component::Point(x) if t.grid_eq(x) => Some(Located {
                index: i,
                point: x.clone(),
                place: Place::Isolated,
            }),
            Component::Interval(a, b) => {
                if t.grid_eq(a) {
                    Some(Located { index: i, point: a.clone(), place: Place::Lo })
                } else if t.grid_eq(b) {
                    Some(Located { index: i, point: b.clone(), place: Place::Hi })
                } else if a < t && t < b {
                    Some(Located { index: i, point: t.clone(), place: Place::Interior })
                } else {
                    None
                }
            }
            _ => None,
        })
    }

    pub fn contains(&self, t: &S) -> bool {
        self.locate(t).is_some()
    }

    pub(crate) fn locate_or_err(&self, t: &S) -> Result<Located<S>> {
        self.locate(t).ok_or_else(|| Error::NotInScale {
            point: t.to_string(),
        })
    }

    /// The stored grid value for `t`.
    pub fn snap(&self, t: &S) -> Result<S> {
        Ok(self.locate_or_err(t)?.point)
    }

    fn sigma_of(&self, loc: &Located<S>) -> S {
        match loc.place {
            Place::Isolated | Place::Hi => match self.components.get(loc.index + 1) {
                Some(next) => next.start().clone(),
                None => loc.point.clone(),
            },
            Place::Lo | Place::Interior => loc.point.clone(),
        }
    }

    pub(crate) fn rho_of(&self, loc: &Located<S>) -> S {
        match loc.place {
            Place::Isolated | Place::Lo if loc.index > 0 => {
                self.components[loc.index - 1].end().clone()
            }
            _ => loc.point.clone(),
        }
    }

    /// Forward jump `σ(t) = inf{s ∈ T : s > t}`, with `σ(max T) = max T`.
    pub fn sigma(&self, t: &S) -> Result<S> {
        Ok(self.sigma_of(&self.locate_or_err(t)?))
    }

    /// Backward jump `ρ(t) = sup{s ∈ T : s < t}`, with `ρ(min T) = min T`.
    pub fn rho(&self, t: &S) -> Result<S> {
        Ok(self.rho_of(&self.locate_or_err(t)?))
    }

    pub fn mu(&self, t: &S) -> Result<S> {
        let loc = self.locate_or_err(t)?;
        Ok(self.sigma_of(&loc) - loc.point)
    }

    pub fn nu(&self, t: &S) -> Result<S> {
        let loc = self.locate_or_err(t)?;
        Ok(loc.point.clone() - self.rho_of(&loc))
    }

    pub fn jump_operators(&self, t: &S) -> Result<Jumps<S>> {
        let loc = self.locate_or_err(t)?;
        let sigma = self.sigma_of(&loc);
        let rho = self.rho_of(&loc);
        Ok(Jumps {
            mu: sigma.clone() - loc.point.clone(),
            nu: loc.point - rho.clone(),
            sigma,
            rho,
        })
    }

    /// `[lo, hi] ∩ T`; both ends must lie on the scale.
    pub fn restrict(&self, lo: &S, hi: &S) -> Result<Self> {
        let lo = self.snap(lo)?;
        let hi = self.snap(hi)?;
        if lo > hi {
            return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] is reversed")));
        }
        let components = self
            .components
            .iter()
            .filter(|c| c.end() >= &lo && c.start() <= &hi)
            .map(|c| match c {
                Component::Point(x) => Component::Point(x.clone()),
                Component::Interval(a, b) => {
                    let a = if a < &lo { lo.clone() } else { a.clone() };
                    let b = if b > &hi { hi.clone() } else { b.clone() };
                    Component::from_bounds(a, b)
                }
            })
            .collect();
        Ok(TimeScale { components })
    }

    /// Image of the scale under a continuous strictly monotone map.
    ///
    /// Intervals map to intervals and points to points; for a decreasing
    /// map the component order is reversed.
    pub fn image(&self, f: impl Fn(&S) -> Result<S>, increasing: bool) -> Result<Self> {
        let mut mapped = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let m = match c {
                Component::Point(x) => Component::Point(f(x)?),
                Component::Interval(lo, hi) => {
                    let (flo, fhi) = (f(lo)?, f(hi)?);
                    let (a, b) = if increasing { (flo, fhi) } else { (fhi, flo) };
                    if a >= b {
                        return Err(Error::MonotonicityViolation {
                            left: lo.to_string(),
                            right: hi.to_string(),
                        });
                    }
                    Component::Interval(a, b)
                }
            };
            if !m.start().is_finite() || !m.end().is_finite() {
                return Err(Error::NonFinite("image of time scale"));
            }
            mapped.push(m);
        }
        if !increasing {
            mapped.reverse();
        }
        for (i, w) in mapped.windows(2).enumerate() {
            if w[0].end() >= w[1].start() {
                let (l, r) = if increasing { (i, i + 1) } else { (mapped.len() - 2 - i, mapped.len() - 1 - i) };
                return Err(Error::MonotonicityViolation {
                    left: self.components[l].end().to_string(),
                    right: self.components[r].start().to_string(),
                });
            }
        }
        Ok(TimeScale { components: mapped })
    }

    /// Isolated points plus `mesh` evenly spaced points (ends included) on
    /// each interval, ascending.
    pub fn sample_points(&self, mesh: usize) -> Vec<S> {
        let mesh = mesh.max(2);
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                Component::Point(x) => out.push(x.clone()),
                Component::Interval(lo, hi) => {
                    let steps = S::from_i64(mesh as i64 - 1);
                    for k in 0..mesh {
                        let t = if k == mesh - 1 {
                            hi.clone()
                        } else {
                            lo.clone()
                                + (hi.clone() - lo.clone()) * S::from_i64(k as i64) / steps.clone()
                        };
                        out.push(t);
                    }
                }
            }
        }
        out
    }

    pub fn to_spec(&self) -> Result<Vec<ComponentSpec>> {
        self.components
            .iter()
            .map(|c| {
                Ok(match c {
                    Component::Point(x) => ComponentSpec::Point(x.to_rational()?),
                    Component::Interval(lo, hi) => {
                        ComponentSpec::Interval([lo.to_rational()?, hi.to_rational()?])
                    }
                })
            })
            .collect()
    }

    pub fn from_spec(spec: &[ComponentSpec]) -> Result<Self> {
        let mut raw = Vec::new();
        for c in spec {
            match c {
                ComponentSpec::Point(x) => raw.push(Component::Point(S::from_rational(x))),
                ComponentSpec::Interval([lo, hi]) => raw.push(Component::Interval(
                    S::from_rational(lo),
                    S::from_rational(hi),
                )),
                ComponentSpec::Integers([lo, hi]) => {
                    if hi < lo || hi - lo >= MAX_INTEGER_POINTS {
                        return Err(Error::InvalidArgument(format!(
                            "integer range [{lo}, {hi}] is empty or too large"
                        )));
                    }
                    raw.extend((*lo..=*hi).map(|k| Component::Point(S::from_i64(k))));
                }
            }
        }
        Self::new(raw)
    }

    /// Parses the JSON array form.
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: Vec<ComponentSpec> = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("time scale JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.to_spec()?)
            .map_err(|e| Error::InvalidArgument(format!("time scale JSON: {e}")))
    }
}

/// Serialized time-scale component: `{"interval":[lo,hi]}` or `{"point":x}`.
/// `{"integers":[lo,hi]}` is accepted on input as shorthand for the points
/// `lo, lo+1, …, hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentSpec {
    Interval([Rational; 2]),
    Point(Rational),
    Integers([i64; 2]),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> TimeScale<f64> {
        TimeScale::new(vec![
            Component::Interval(0.0, 1.0),
            Component::Point(2.0),
            Component::Point(3.0),
        ])
        .unwrap()
    }

    #[test]
    fn already_normal_scale_keeps_components() {
        assert_eq!(mixed().components().len(), 3);
    }

    #[test]
    fn touching_intervals_merge() {
        let t = TimeScale::new(vec![
            Component::Interval(0.0, 1.0),
            Component::Interval(1.0, 2.0),
        ])
        .unwrap();
        assert_eq!(t.components(), &[Component::Interval(0.0, 2.0)]);
    }

    #[test]
    fn points_are_absorbed_and_sorted() {
        let t = TimeScale::new(vec![
            Component::Point(5.0),
            Component::Interval(0.0, 1.0),
            Component::Point(0.5),
        ])
        .unwrap();
        assert_eq!(
            t.components(),
            &[Component::Interval(0.0, 1.0), Component::Point(5.0)]
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(TimeScale::<f64>::new(vec![]), Err(Error::EmptyScale));
        assert!(matches!(
            TimeScale::new(vec![Component::Point(f64::NAN)]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            TimeScale::new(vec![Component::Interval(0.0, f64::INFINITY)]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            TimeScale::new(vec![Component::Interval(1.0, 1.0)]),
            Err(Error::InvalidInterval { .. })
        ));
    }

    #[test]
    fn jumps_on_mixed_scale() {
        let t = mixed();
        let j = t.jump_operators(&1.0).unwrap();
        assert_eq!((j.sigma, j.rho, j.mu, j.nu), (2.0, 1.0, 1.0, 0.0));
        let j = t.jump_operators(&3.0).unwrap();
        assert_eq!((j.sigma, j.rho, j.mu, j.nu), (3.0, 2.0, 0.0, 1.0));
        let j = t.jump_operators(&0.0).unwrap();
        assert_eq!((j.sigma, j.rho, j.mu, j.nu), (0.0, 0.0, 0.0, 0.0));
        let j = t.jump_operators(&0.25).unwrap();
        assert_eq!((j.sigma, j.rho), (0.25, 0.25));
        assert!(matches!(t.sigma(&1.5), Err(Error::NotInScale { .. })));
    }

    #[test]
    fn jumps_on_integers() {
        let t = TimeScale::<Rational>::integers(0, 10).unwrap();
        let j = t.jump_operators(&Rational::from(4)).unwrap();
        assert_eq!(j.sigma, Rational::from(5));
        assert_eq!(j.rho, Rational::from(3));
        assert_eq!(j.mu, Rational::from(1));
        assert_eq!(j.nu, Rational::from(1));
    }

    #[test]
    fn image_of_discrete_and_mixed() {
        let z = TimeScale::<Rational>::integers(0, 3).unwrap();
        let sq = z.image(|t| Ok(t.clone() * t.clone()), true).unwrap();
        assert_eq!(
            sq,
            TimeScale::points([0, 1, 4, 9].map(Rational::from)).unwrap()
        );

        let t = TimeScale::new(vec![Component::Interval(0.0, 1.0), Component::Point(2.0)]).unwrap();
        let shifted = t.image(|x| Ok(x + 1.0), true).unwrap();
        assert_eq!(
            shifted.components(),
            &[Component::Interval(1.0, 2.0), Component::Point(3.0)]
        );

        let neg = t.image(|x| Ok(-x), false).unwrap();
        assert_eq!(
            neg.components(),
            &[Component::Point(-2.0), Component::Interval(-1.0, 0.0)]
        );
    }

    #[test]
    fn image_of_powers_of_two() {
        // Oracle: map each integer point independently.
        let z = TimeScale::<Rational>::integers(0, 4).unwrap();
        let img = z.image(|t| Ok(Rational::from(2).pow(t.to_i64().unwrap() as i32)), true).unwrap();
        let expected: Vec<Rational> = (0..=4).map(|k| Rational::from(1i64 << k)).collect();
        assert_eq!(img, TimeScale::points(expected).unwrap());
    }

    #[test]
    fn image_rejects_non_monotone_map() {
        let z = TimeScale::<Rational>::integers(-2, 2).unwrap();
        assert!(matches!(
            z.image(|t| Ok(t.clone() * t.clone()), true),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn restrict_clips_intervals() {
        let t = mixed();
        let r = t.restrict(&0.5, &2.0).unwrap();
        assert_eq!(
            r.components(),
            &[Component::Interval(0.5, 1.0), Component::Point(2.0)]
        );
        let r = t.restrict(&1.0, &3.0).unwrap();
        assert_eq!(
            r.components(),
            &[Component::Point(1.0), Component::Point(2.0), Component::Point(3.0)]
        );
        assert!(t.restrict(&1.5, &3.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = TimeScale::<Rational>::from_json(
            r#"[{"interval":["0","1"]},{"point":{"num":5,"den":2}},{"point":"3"}]"#,
        )
        .unwrap();
        assert_eq!(t.components().len(), 3);
        let back = TimeScale::<Rational>::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        let z = TimeScale::<f64>::from_json(r#"[{"integers":[0,3]}]"#).unwrap();
        assert_eq!(z, TimeScale::integers(0, 3).unwrap());
        assert_eq!(
            mixed().to_json().unwrap(),
            r#"[{"interval":["0","1"]},{"point":"2"},{"point":"3"}]"#
        );
    }

    #[test]
    fn grid_noise_is_snapped() {
        let t = TimeScale::<f64>::points([0.1, 0.2, 0.3]).unwrap();
        let noisy = 0.1 + 0.2; // 0.30000000000000004
        assert_eq!(t.snap(&noisy).unwrap(), 0.3);
        assert_eq!(t.rho(&noisy).unwrap(), 0.2);
    }

    fn arb_scale() -> impl proptest::strategy::Strategy<Value = TimeScale<Rational>> {
        use proptest::prelude::*;
        proptest::collection::vec((0i64..60, 0i64..3), 1..10).prop_map(|raw| {
            let comps = raw
                .into_iter()
                .map(|(s, w)| {
                    if w == 0 {
                        Component::Point(Rational::from(s))
                    } else {
                        Component::Interval(Rational::from(s), Rational::from(s + w))
                    }
                })
                .collect();
            TimeScale::new(comps).unwrap()
        })
    }

    proptest::proptest! {
        #[test]
        fn normalized_components_are_strictly_separated(t in arb_scale()) {
            for w in t.components().windows(2) {
                proptest::prop_assert!(w[0].end() < w[1].start());
            }
        }

        #[test]
        fn sigma_rho_are_mutually_inverse_at_scattered_points(t in arb_scale()) {
            for c in t.components() {
                for p in [c.start().clone(), c.end().clone()] {
                    let s = t.sigma(&p).unwrap();
                    let nu_s = t.nu(&s).unwrap();
                    if s > p && nu_s > Rational::from(0) {
                        proptest::prop_assert_eq!(t.rho(&s).unwrap(), p.clone());
                    }
                    let r = t.rho(&p).unwrap();
                    if r < p && t.mu(&r).unwrap() > Rational::from(0) {
                        proptest::prop_assert_eq!(t.sigma(&r).unwrap(), p.clone());
                    }
                }
            }
        }

        #[test]
        fn graininess_vanishes_exactly_at_dense_sides(t in arb_scale()) {
            let n = t.components().len();
            for (i, c) in t.components().iter().enumerate() {
                let zero = Rational::from(0);
                match c {
                    Component::Point(x) => {
                        proptest::prop_assert_eq!(t.mu(x).unwrap() == zero, i == n - 1);
                        proptest::prop_assert_eq!(t.nu(x).unwrap() == zero, i == 0);
                    }
                    Component::Interval(lo, hi) => {
                        proptest::prop_assert_eq!(t.mu(lo).unwrap(), zero.clone());
                        proptest::prop_assert_eq!(t.nu(hi).unwrap(), zero.clone());
                        proptest::prop_assert_eq!(t.mu(hi).unwrap() == zero, i == n - 1);
                        proptest::prop_assert_eq!(t.nu(lo).unwrap() == zero, i == 0);
                    }
                }
            }
        }

        #[test]
        fn identity_image_is_the_scale(t in arb_scale()) {
            proptest::prop_assert_eq!(t.image(|x| Ok(x.clone()), true).unwrap(), t);
        }
    }
}
