//! Exhaustive and randomized comparisons against direct-summation oracles
//! on small discrete scales.

use std::collections::HashMap;
use std::sync::Arc;

use chronoscale::discrete::IntegerWindow;
use chronoscale::monotone::Builtin;
use chronoscale::young::{piecewise_continuous_sandwich, Variant};
use chronoscale::{
    falling_factorial, h_n, Direction, MonotoneFn, Rational, Result, TimeScale, YoungContext,
};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from(n)
}

/// A function given by its table on a discrete scale.
#[derive(Debug, Clone)]
struct Table {
    pts: Vec<Rational>,
    vals: Vec<Rational>,
}

impl Table {
    fn n(&self) -> usize {
        self.pts.len()
    }

    fn increasing(&self) -> bool {
        self.vals[0] < self.vals[1]
    }

    fn monotone(&self) -> MonotoneFn<Rational> {
        let map: HashMap<Rational, Rational> = self.pts.iter().cloned().zip(self.vals.iter().cloned()).collect();
        let eval = Arc::new(move |t: &Rational| -> Result<Rational> {
            map.get(t)
                .cloned()
                .ok_or_else(|| chronoscale::Error::Evaluation(format!("no value at {t}")))
        });
        let dir = if self.increasing() { Direction::Increasing } else { Direction::Decreasing };
        MonotoneFn::new(eval, dir, TimeScale::points(self.pts.clone()).unwrap(), None).unwrap()
    }

    /// `F(pts[i], vals[j])` from the defining sums, anchored at index 0.
    fn young(&self, i: usize, j: usize) -> Rational {
        let mut total = self.pts[0].clone() * self.vals[0].clone() - self.pts[i].clone() * self.vals[j].clone();
        for k in 0..i {
            total = total + (self.pts[k + 1].clone() - self.pts[k].clone()) * self.vals[k].clone();
        }
        for k in 1..=j {
            total = total + (self.vals[k].clone() - self.vals[k - 1].clone()) * self.pts[k].clone();
        }
        total
    }

    fn zero(&self, i: usize, j: usize) -> bool {
        j == i || j + 1 == i || (i == 0 && j == 0)
    }
}

fn rational() -> impl Strategy<Value = Rational> {
    (1i64..6, 1i64..4).prop_map(|(p, d)| Rational::new(p, d))
}

fn table(max_len: usize) -> impl Strategy<Value = Table> {
    (
        -5i64..5,
        proptest::collection::vec((rational(), rational()), 2..max_len),
        -5i64..5,
        any::<bool>(),
    )
        .prop_map(|(start, steps, v0, decreasing)| {
            let mut pts = vec![q(start)];
            let mut vals = vec![q(v0)];
            for (dt, dv) in steps {
                pts.push(pts.last().unwrap().clone() + dt);
                let next = if decreasing { vals.last().unwrap().clone() - dv } else { vals.last().unwrap().clone() + dv };
                vals.push(next);
            }
            Table { pts, vals }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_matches_sums_with_exact_zero_set(t in table(12)) {
        let ctx = YoungContext::new(t.monotone()).unwrap();
        let inc = t.increasing();
        for i in 0..t.n() {
            for j in 0..t.n() {
                let f = ctx.functional(&t.pts[i], &t.vals[j]).unwrap();
                prop_assert_eq!(&f, &t.young(i, j));
                let zero = Rational::from(0);
                if t.zero(i, j) {
                    prop_assert_eq!(&f, &zero);
                } else {
                    let signed = if inc { f > zero } else { f < zero };
                    prop_assert!(signed, "wrong sign at ({}, {})", i, j);
                }
                let check = ctx.young_check(&t.pts[i], &t.vals[j]).unwrap();
                prop_assert!(check.holds);
                prop_assert_eq!(check.equality, t.zero(i, j));
            }
            prop_assert_eq!(ctx.phi(&t.pts[i]).unwrap(), Rational::from(0));
        }
    }

    #[test]
    fn two_point_bound_exhaustive(t in table(7)) {
        let ctx = YoungContext::new(t.monotone()).unwrap();
        let n = t.n();
        for i in 0..n { for j in 0..n { for k in 0..n { for l in 0..n {
            let r = ctx.two_point_bound(&t.pts[i], &t.vals[j], &t.pts[k], &t.vals[l]).unwrap();
            let lhs = t.young(i, j) + t.young(k, l);
            prop_assert_eq!(&r.lhs, &lhs);
            prop_assert!(r.holds);
            prop_assert_eq!(r.equality, r.lhs == r.rhs);
            prop_assert_eq!(r.equality, t.zero(i, l) && t.zero(k, j));
        }}}}
    }

    #[test]
    fn sandwich_variants_exhaustive(t in table(7)) {
        let ctx = YoungContext::new(t.monotone()).unwrap();
        let n = t.n();
        let inc = t.increasing();
        for i in 0..n { for ih in 0..n { for j in 0..n { for jh in 0..n {
            let reports = ctx.sandwich_all(&t.pts[i], &t.pts[ih], &t.vals[j], &t.vals[jh]).unwrap();
            let middle = t.young(i, j) - t.young(ih, jh);
            for (r, v) in reports.iter().zip(Variant::ALL) {
                prop_assert_eq!(&r.middle, &middle);
                prop_assert_eq!(r.reversed, !inc);
                prop_assert!(r.holds(0.0), "{:?} {} {} {} {}: {:?}", v, i, ih, j, jh, r);
                prop_assert_eq!(r.equality_lower, r.lower == r.middle);
                prop_assert_eq!(r.equality_upper, r.upper == r.middle);
                // Index-level predicate for the bound points.
                let sig = matches!(v, Variant::SigmaRho | Variant::SigmaF);
                let use_f = matches!(v, Variant::RhoF | Variant::SigmaF);
                let alpha = |jj: usize| if sig { (jj + 1).min(n - 1) } else { jj };
                let beta = |ii: usize| if use_f { ii } else { ii.saturating_sub(1) };
                prop_assert_eq!(r.equality_lower, t.zero(i, j) && t.zero(alpha(jh), beta(ih)));
                prop_assert_eq!(r.equality_upper, t.zero(ih, jh) && t.zero(alpha(j), beta(i)));
            }
        }}}}
    }
}

#[test]
fn upper_bound_dominance_on_integers() {
    for spec in ["identity", "power 2", "exp 2", "affine 3 -4"] {
        let f = spec.parse::<Builtin>().unwrap().monotone(TimeScale::<Rational>::integers(0, 7).unwrap()).unwrap();
        let ctx = YoungContext::new(f.clone()).unwrap();
        let image: Vec<Rational> = f.image().components().iter().map(|c| c.start().clone()).collect();
        for a in 0..=7 {
            for ah in 0..a {
                let fa = f.value(&q(a)).unwrap();
                let fra = f.rho_value(&q(a)).unwrap();
                for b in &image {
                    for bh in image.iter().filter(|bh| *bh < b) {
                        let reports = ctx.sandwich_all(&q(a), &q(ah), b, bh).unwrap();
                        let least = reports.iter().map(|r| r.upper.clone()).min().unwrap();
                        let (_, best) = ctx.best_upper_bound(&q(a), &q(ah), b, bh).unwrap();
                        assert_eq!(best, least);
                        if *b >= fa {
                            assert_eq!(reports[1].upper, least, "{spec} a={a} b={b}");
                        }
                        if *b <= fra {
                            assert_eq!(reports[2].upper, least, "{spec} a={a} b={b}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn inverse_free_agrees_with_sandwich_and_integer_route() {
    for spec in ["identity", "power 3", "exp 3/2", "falling 2", "binomial 3"] {
        let lo = if spec.starts_with("falling") { 1 } else if spec.starts_with("binomial") { 2 } else { 0 };
        let f = spec.parse::<Builtin>().unwrap().monotone(TimeScale::<Rational>::integers(lo, lo + 7).unwrap()).unwrap();
        let ctx = YoungContext::new(f.clone()).unwrap();
        let w = IntegerWindow::new(&f).unwrap();
        for a in lo..=lo + 7 { for ah in lo..=lo + 7 { for al in lo..=lo + 7 { for alh in lo..=lo + 7 {
            let free = ctx.inverse_free_sandwich(&q(a), &q(ah), &q(al), &q(alh)).unwrap();
            let (b, bh) = (f.value(&q(al)).unwrap(), f.value(&q(alh)).unwrap());
            let sw = ctx.sandwich_bounds(&q(a), &q(ah), &b, &bh, Variant::RhoRho).unwrap();
            assert_eq!((&free.lower, &free.middle, &free.upper), (&sw.lower, &sw.middle, &sw.upper));
            assert_eq!((free.equality_lower, free.equality_upper), (sw.equality_lower, sw.equality_upper));
            let int = w.inverse_free(a, ah, al, alh).unwrap();
            assert_eq!((&int.lower, &int.middle, &int.upper), (&free.lower, &free.middle, &free.upper));
            assert_eq!((int.equality_lower, int.equality_upper), (free.equality_lower, free.equality_upper));
            let ds = w.sandwich(a, ah, &b, &bh).unwrap();
            assert_eq!((&ds.lower, &ds.middle, &ds.upper), (&sw.lower, &sw.middle, &sw.upper));
            assert_eq!((ds.equality_lower, ds.equality_upper), (sw.equality_lower, sw.equality_upper));
            assert_eq!(ds.witnesses, sw.witnesses);
        }}}}
    }
}

#[test]
fn legendre_gap_is_the_functional() {
    let f = Builtin::Exp(q(3)).monotone(TimeScale::<Rational>::integers(-3, 5).unwrap()).unwrap();
    let ctx = YoungContext::new(f.clone()).unwrap();
    for anchor in [q(0), Rational::new(7, 2)] {
        let pair = ctx.legendre_pair(anchor);
        for a in -3..=5 {
            for j in -3..=5 {
                let b = Rational::from(3).pow(j);
                assert_eq!(pair.gap(&q(a), &b).unwrap(), ctx.functional(&q(a), &b).unwrap());
            }
        }
    }
}

#[test]
fn monomials_are_scaled_falling_factorials() {
    let z = TimeScale::<Rational>::integers(-25, 25).unwrap();
    for n in 0..=8u32 {
        let nf = falling_factorial(n as i64, n);
        for s in -10..=10i64 {
            for d in -20..=20i64 {
                let t = s + d;
                if !(-25..=25).contains(&t) {
                    continue;
                }
                let h = h_n(&z, n, &q(t), &q(s), 0.0).unwrap();
                assert_eq!(h, falling_factorial(d, n) / nf.clone(), "n={n} t={t} s={s}");
            }
        }
    }
}

#[test]
fn mixed_scale_phi_is_zero() {
    let t = TimeScale::new(vec![
        chronoscale::Component::Interval(0.0, 1.0),
        chronoscale::Component::Point(2.0),
        chronoscale::Component::Point(3.0),
        chronoscale::Component::Interval(4.0, 5.0),
    ])
    .unwrap();
    for spec in ["power 3", "exp 2", "affine -2 1", "identity"] {
        let f = spec.parse::<Builtin>().unwrap().monotone(t.clone()).unwrap();
        let ctx = YoungContext::new(f).unwrap();
        for a in t.sample_points(9) {
            let v = ctx.phi(&a).unwrap();
            assert!(v.abs() <= 1e-9, "{spec} at {a}: {v}");
        }
    }
}

#[test]
fn decreasing_piecewise_mirror_cases() {
    let z = TimeScale::<Rational>::integers(0, 6).unwrap();
    let defs = |specs: &[&str]| specs.iter().map(|s| s.parse::<Builtin>().unwrap().piece()).collect::<Vec<_>>();
    // Valley: decreasing then increasing, and both decreasing.
    for (specs, same) in [(["affine -1 3", "affine 2 -6"], false), (["affine -1 10", "affine -2 13"], true)] {
        let pf = chronoscale::make_piecewise(&z, vec![q(0), q(3), q(6)], defs(&specs), chronoscale::PiecewiseMode::ScaleContinuous).unwrap();
        let first: Vec<Rational> = (0..=3).map(|t| pf.pieces()[0].value(&q(t)).unwrap()).collect();
        let last: Vec<Rational> = (3..=6).map(|t| pf.pieces()[1].value(&q(t)).unwrap()).collect();
        for b1 in &first {
            for b3 in &last {
                let r = piecewise_continuous_sandwich(&pf, b1, b3).unwrap();
                assert!(r.reversed);
                assert!(r.holds(0.0), "{specs:?} {b1} {b3}: {r:?}");
                assert_eq!(r.equality_lower, r.lower == r.middle);
                assert_eq!(r.equality_upper, r.upper == r.middle);
                assert_eq!(r.kind == chronoscale::BoundKind::PiecewiseSameEnds, same);
            }
        }
    }
}
