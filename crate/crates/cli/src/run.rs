use chronoscale::discrete::{example_suite, ExampleParams, ExampleRow};
use chronoscale::scalar::{magnitude, DEFAULT_TOLERANCE};
use chronoscale::young::{piecewise_sandwich, BoundReport};
use chronoscale::{FunctionSpec, PiecewiseFn, Rational, Scalar, TimeScale, Value, Variant, YoungContext};
use rayon::prelude::*;

use crate::config::{Check, Regime, RunConfig, DEFAULT_MESH};
use crate::error::CliError;
use crate::report::{Equality, Report, Row};

/// Runs every check of `cfg` on a pool of `jobs` threads (rayon's default
/// when `None`). Rows come back in check order, then input order.
pub fn run_verify(cfg: &RunConfig, jobs: Option<usize>) -> Result<Report, CliError> {
    cfg.validate()?;
    pool(jobs)?.install(|| verify(cfg))
}

pub(crate) fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Whether function checks of `cfg` run on rationals.
pub fn uses_exact(cfg: &RunConfig) -> Result<bool, CliError> {
    match cfg.regime {
        Regime::Approx => Ok(false),
        Regime::Auto => Ok(cfg.exact_capable()),
        Regime::Exact if cfg.exact_capable() || cfg.scale.is_none() => Ok(true),
        Regime::Exact => Err(CliError::Config(
            "the exact regime needs a discrete scale and a rational-valued function".into(),
        )),
    }
}

pub(crate) fn verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let exact = uses_exact(cfg)?;
    let mut rows = Vec::new();
    let mut exact_engine: Option<Engine<Rational>> = None;
    let mut approx_engine: Option<Engine<f64>> = None;
    for check in &cfg.checks {
        if let Check::Examples { example, k, base, range } = check {
            let params = ExampleParams { k: *k, base: base.clone() };
            let suite = example_suite(*example, &params, range.map(|[lo, hi]| (lo, hi)))?;
            rows.extend(suite.iter().map(example_row));
        } else if exact {
            let engine = match &mut exact_engine {
                Some(e) => e,
                slot => slot.insert(Engine::new(cfg)?),
            };
            rows.extend(engine.run(check)?);
        } else {
            let engine = match &mut approx_engine {
                Some(e) => e,
                slot => slot.insert(Engine::new(cfg)?),
            };
            rows.extend(engine.run(check)?);
        }
    }
    Ok(Report::new(rows))
}

fn value_regime(v: &Value) -> &'static str {
    match v {
        Value::Exact(_) => "exact",
        Value::Approx(_) => "approx",
    }
}

fn example_row(r: &ExampleRow) -> Row {
    Row {
        check: "examples".into(),
        inputs: format!("{} {}", r.example, r.inputs()),
        lower: Some(r.lhs.to_string()),
        middle: Some(r.mid.to_string()),
        upper: Some(r.rhs.to_string()),
        holds: r.holds,
        equality: Equality::single(r.equality),
        regime: value_regime(&r.mid).into(),
        error: None,
    }
}

/// A claim `lower ≤ middle ≤ upper` in ascending orientation.
struct Claim<S> {
    label: String,
    lower: Option<S>,
    middle: S,
    upper: Option<S>,
    holds: bool,
    equality: Equality,
    slack: f64,
}

impl<S: Scalar> Claim<S> {
    /// Reorients a report so that `lower` is the smaller claimed bound.
    fn from_report(label: String, r: &BoundReport<S>, tol: f64) -> Self {
        let (lower, upper, eq_lo, eq_hi) = if r.reversed {
            (&r.upper, &r.lower, r.equality_upper, r.equality_lower)
        } else {
            (&r.lower, &r.upper, r.equality_lower, r.equality_upper)
        };
        Claim {
            label,
            lower: Some(lower.clone()),
            middle: r.middle.clone(),
            upper: Some(upper.clone()),
            holds: r.holds(tol),
            equality: Equality::sides(eq_lo, eq_hi),
            slack: r.slack(tol),
        }
    }

    /// A one-sided claim against `bound`: below it when `bound_is_lower`.
    fn one_sided(label: String, bound: S, middle: S, bound_is_lower: bool, holds: bool, equality: bool, slack: f64) -> Self {
        let (lower, upper) = if bound_is_lower { (Some(bound), None) } else { (None, Some(bound)) };
        Claim {
            label,
            lower,
            middle,
            upper,
            holds,
            equality: Equality::single(equality),
            slack,
        }
    }
}

struct Engine<S: Scalar> {
    scale: TimeScale<S>,
    function: FunctionSpec,
    tolerance: f64,
    regime: &'static str,
    offset: Option<S>,
    ctx: Option<YoungContext<S>>,
    piecewise: Option<PiecewiseFn<S>>,
}

impl<S: Scalar> Engine<S> {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let spec = cfg.scale.as_ref().expect("validated");
        let function = cfg.function.clone().expect("validated");
        let tolerance = cfg.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        let regime = S::mode(tolerance).name();
        Ok(Engine {
            scale: TimeScale::from_spec(spec)?,
            function,
            tolerance,
            regime,
            offset: cfg.middle_offset().map(|r| S::from_rational(&r)),
            ctx: None,
            piecewise: None,
        })
    }

    fn context(&mut self) -> Result<(), CliError> {
        if self.ctx.is_none() {
            let f = self.function.monotone(self.scale.clone())?.with_tolerance(self.tolerance);
            self.ctx = Some(YoungContext::new(f)?);
        }
        Ok(())
    }

    fn piecewise_fn(&mut self) -> Result<(), CliError> {
        if self.piecewise.is_none() {
            self.piecewise = Some(self.function.piecewise(&self.scale)?.with_tolerance(self.tolerance));
        }
        Ok(())
    }

    fn points(&self, listed: &Option<Vec<Rational>>, mesh: Option<usize>, from: &TimeScale<S>) -> Vec<S> {
        match listed {
            Some(v) => v.iter().map(S::from_rational).collect(),
            None => from.sample_points(mesh.unwrap_or(DEFAULT_MESH)),
        }
    }

    fn run(&mut self, check: &Check) -> Result<Vec<Row>, CliError> {
        match check {
            Check::Piecewise { .. } => {
                self.piecewise_fn()?;
            }
            _ => {
                self.context()?;
            }
        }
        self.run_prepared(check)
    }

    fn run_prepared(&self, check: &Check) -> Result<Vec<Row>, CliError> {
        let name = check.name();
        let tol = self.tolerance;
        let rows = match check {
            Check::Young { a, b, mesh } => {
                let ctx = self.ctx.as_ref().unwrap();
                let pairs = product2(&self.points(a, *mesh, ctx.scale()), &self.points(b, *mesh, ctx.image()));
                let inc = ctx.function().is_increasing();
                self.evaluate(name, &pairs, |(a, b)| format!("a={a} b={b}"), |(a, b)| {
                    let c = ctx.young_check(a, b)?;
                    let m = magnitude([a, b, ctx.alpha1(), ctx.beta1()]);
                    Ok(vec![Claim::one_sided(String::new(), S::zero(), c.value, inc, c.holds, c.equality, tol * m * m)])
                })
            }
            Check::Lemma22 { a, b, mesh } => {
                let ctx = self.ctx.as_ref().unwrap();
                let quads = product4(
                    &self.points(a, *mesh, ctx.scale()),
                    &self.points(b, *mesh, ctx.image()),
                    &self.points(a, *mesh, ctx.scale()),
                    &self.points(b, *mesh, ctx.image()),
                );
                let inc = ctx.function().is_increasing();
                self.evaluate(name, &quads, |(a, b, al, be)| format!("a={a} b={b} alpha={al} beta={be}"), |(a, b, al, be)| {
                    let r = ctx.two_point_bound(a, b, al, be)?;
                    let m = magnitude([a, b, al, be, ctx.alpha1(), ctx.beta1()]);
                    Ok(vec![Claim::one_sided(String::new(), r.rhs, r.lhs, inc, r.holds, r.equality, tol * m * m)])
                })
            }
            Check::Sandwich { a, b, variants, mesh } => {
                let ctx = self.ctx.as_ref().unwrap();
                let pa = self.points(a, *mesh, ctx.scale());
                let pb = self.points(b, *mesh, ctx.image());
                let quads = product4(&pa, &pa, &pb, &pb);
                let chosen: Vec<Variant> = variants.clone().unwrap_or_else(|| Variant::ALL.to_vec());
                self.evaluate(name, &quads, |(a, ah, b, bh)| format!("a={a} a_hat={ah} b={b} b_hat={bh}"), |(a, ah, b, bh)| {
                    let all = ctx.sandwich_all(a, ah, b, bh)?;
                    Ok(all
                        .iter()
                        .filter(|r| chosen.contains(&r.variant.unwrap()))
                        .map(|r| Claim::from_report(format!(" variant={}", r.variant.unwrap().name()), r, tol))
                        .collect())
                })
            }
            Check::Legendre { anchor, a, b, mesh } => {
                let anchor = S::from_rational(&anchor.clone().unwrap_or_else(|| Rational::from(0)));
                let ctx = self.ctx.as_ref().unwrap();
                let pair = ctx.legendre_pair(anchor.clone());
                let pa = self.points(a, *mesh, ctx.scale());
                let pb = self.points(b, *mesh, ctx.image());
                let quads = product4(&pa, &pa, &pb, &pb);
                self.evaluate(
                    name,
                    &quads,
                    |(a, ah, b, bh)| format!("anchor={anchor} a={a} a_hat={ah} b={b} b_hat={bh}"),
                    |(a, ah, b, bh)| Ok(vec![Claim::from_report(String::new(), &pair.sandwich(a, ah, b, bh)?, tol)]),
                )
            }
            Check::InverseFree { a, mesh } => {
                let ctx = self.ctx.as_ref().unwrap();
                let pa = self.points(a, *mesh, ctx.scale());
                let quads = product4(&pa, &pa, &pa, &pa);
                self.evaluate(
                    name,
                    &quads,
                    |(a, ah, al, alh)| format!("a={a} a_hat={ah} alpha={al} alpha_hat={alh}"),
                    |(a, ah, al, alh)| Ok(vec![Claim::from_report(String::new(), &ctx.inverse_free_sandwich(a, ah, al, alh)?, tol)]),
                )
            }
            Check::Piecewise { b_first, b_last, mesh } => {
                let pf = self.piecewise.as_ref().unwrap();
                let ends = |listed: &Option<Vec<Rational>>, piece: usize| -> Result<Vec<S>, CliError> {
                    if let Some(v) = listed {
                        return Ok(v.iter().map(S::from_rational).collect());
                    }
                    let knots = pf.knots();
                    let window = pf.scale().restrict(&knots[piece], &knots[piece + 1])?;
                    let p = &pf.pieces()[piece];
                    Ok(window
                        .sample_points(mesh.unwrap_or(DEFAULT_MESH))
                        .iter()
                        .map(|t| p.value(t))
                        .collect::<chronoscale::Result<Vec<S>>>()?)
                };
                let pairs = product2(&ends(b_first, 0)?, &ends(b_last, pf.pieces().len() - 1)?);
                self.evaluate(
                    name,
                    &pairs,
                    |(b1, b2)| format!("b_first={b1} b_last={b2}"),
                    |(b1, b2)| Ok(vec![Claim::from_report(String::new(), &piecewise_sandwich(pf, b1, b2)?, tol)]),
                )
            }
            Check::Examples { .. } => unreachable!("handled without an engine"),
        };
        Ok(rows)
    }

    /// Evaluates `eval` on every task in parallel and flattens the claims
    /// into rows in task order.
    fn evaluate<T: Sync>(
        &self,
        check: &str,
        tasks: &[T],
        label: impl Fn(&T) -> String + Sync,
        eval: impl Fn(&T) -> chronoscale::Result<Vec<Claim<S>>> + Sync,
    ) -> Vec<Row> {
        let chunks: Vec<Vec<Row>> = tasks
            .par_iter()
            .map(|t| match eval(t) {
                Ok(claims) => claims.into_iter().map(|c| self.row(check, &label(t), c)).collect(),
                Err(e) => vec![Row::failed(check, label(t), self.regime, e.to_string())],
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    fn row(&self, check: &str, label: &str, c: Claim<S>) -> Row {
        let Claim { label: suffix, lower, mut middle, upper, mut holds, equality, slack } = c;
        if let Some(off) = &self.offset {
            middle = middle + off.clone();
            holds = holds
                && lower.as_ref().is_none_or(|l| l.le_within(&middle, slack))
                && upper.as_ref().is_none_or(|u| middle.le_within(u, slack));
        }
        let render = |v: &S| v.to_value().to_string();
        Row {
            check: check.to_string(),
            inputs: format!("{label}{suffix}"),
            lower: lower.as_ref().map(render),
            middle: Some(render(&middle)),
            upper: upper.as_ref().map(render),
            holds,
            equality,
            regime: self.regime.to_string(),
            error: None,
        }
    }
}

fn product2<S: Clone>(xs: &[S], ys: &[S]) -> Vec<(S, S)> {
    xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect()
}

fn product4<S: Clone>(w: &[S], x: &[S], y: &[S], z: &[S]) -> Vec<(S, S, S, S)> {
    let mut out = Vec::with_capacity(w.len() * x.len() * y.len() * z.len());
    for a in w {
        for b in x {
            for c in y {
                for d in z {
                    out.push((a.clone(), b.clone(), c.clone(), d.clone()));
                }
            }
        }
    }
    out
}
