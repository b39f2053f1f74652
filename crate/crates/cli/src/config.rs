use std::collections::BTreeMap;

use chronoscale::discrete::ExampleName;
use chronoscale::monotone::{Builtin, PiecewiseSpec};
use chronoscale::{ComponentSpec, FunctionSpec, Rational, Variant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::Format;

/// Default number of sample points per interval when a check does not list
/// its points. Discrete scales are always enumerated in full.
pub const DEFAULT_MESH: usize = 11;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Exact on discrete scales with rational-valued functions, floating otherwise.
    #[default]
    Auto,
    Exact,
    Approx,
}

/// A verification run read from a single JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<ComponentSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Sweep parameters: JSON pointer into this document mapped to the values
    /// it takes. Only read by `sweep`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, Vec<serde_json::Value>>,
    /// Added to every middle value before the bounds are checked.
    #[cfg(feature = "test-hooks")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_middle_offset: Option<Rational>,
}

/// Point lists left out are filled from the scale (for `a`-type inputs) or
/// the image of the function (for `b`-type inputs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `F(a, b)` against zero.
    Young {
        #[serde(default)]
        a: Option<Vec<Rational>>,
        #[serde(default)]
        b: Option<Vec<Rational>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// Two-sided bounds on `F(a,b) − F(â,b̂)` over all `(a, â, b, b̂)`.
    Sandwich {
        #[serde(default)]
        a: Option<Vec<Rational>>,
        #[serde(default)]
        b: Option<Vec<Rational>>,
        #[serde(default)]
        variants: Option<Vec<Variant>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// `F(a,b) + F(α,β)` against `−(α−a)(β−b)` over all `(a, b, α, β)`.
    Lemma22 {
        #[serde(default)]
        a: Option<Vec<Rational>>,
        #[serde(default)]
        b: Option<Vec<Rational>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// Piecewise bound over end values of the first and last pieces.
    Piecewise {
        #[serde(default)]
        b_first: Option<Vec<Rational>>,
        #[serde(default)]
        b_last: Option<Vec<Rational>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// Sandwich expressed through the conjugate pair pinned at `anchor`.
    Legendre {
        #[serde(default)]
        anchor: Option<Rational>,
        #[serde(default)]
        a: Option<Vec<Rational>>,
        #[serde(default)]
        b: Option<Vec<Rational>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// Sandwich at `b = f(α)`, `b̂ = f(α̂)` over all `(a, â, α, α̂)`.
    InverseFree {
        #[serde(default)]
        a: Option<Vec<Rational>>,
        #[serde(default)]
        mesh: Option<usize>,
    },
    /// A closed-form integer chain; needs neither scale nor function.
    Examples {
        example: ExampleName,
        #[serde(default)]
        k: Option<u32>,
        #[serde(default)]
        base: Option<Rational>,
        #[serde(default)]
        range: Option<[i64; 2]>,
    },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::Young { .. } => "young",
            Check::Sandwich { .. } => "sandwich",
            Check::Lemma22 { .. } => "lemma22",
            Check::Piecewise { .. } => "piecewise",
            Check::Legendre { .. } => "legendre",
            Check::InverseFree { .. } => "inverse_free",
            Check::Examples { .. } => "examples",
        }
    }

    pub fn needs_function(&self) -> bool {
        !matches!(self, Check::Examples { .. })
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// A config with no scale or function.
    pub fn with_checks(checks: Vec<Check>) -> Self {
        RunConfig {
            scale: None,
            function: None,
            regime: Regime::Auto,
            tolerance: None,
            format: None,
            checks,
            grid: BTreeMap::new(),
            #[cfg(feature = "test-hooks")]
            test_middle_offset: None,
        }
    }

    pub fn middle_offset(&self) -> Option<Rational> {
        #[cfg(feature = "test-hooks")]
        {
            self.test_middle_offset.clone()
        }
        #[cfg(not(feature = "test-hooks"))]
        {
            None
        }
    }

    /// Rejects configs whose checks cannot run, before any evaluation.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Config(format!("tolerance must be finite and nonnegative, got {t}")));
            }
        }
        let needs_function = self.checks.iter().any(Check::needs_function);
        if needs_function && (self.scale.is_none() || self.function.is_none()) {
            return Err(CliError::Config("checks other than `examples` need both `scale` and `function`".into()));
        }
        let piecewise = matches!(self.function, Some(FunctionSpec::Piecewise { .. }));
        for check in &self.checks {
            match check {
                Check::Piecewise { .. } => {}
                Check::Examples { .. } => {}
                _ if piecewise => {
                    return Err(CliError::Config(format!(
                        "check `{}` needs a single named function, not a piecewise one",
                        check.name()
                    )))
                }
                _ => {}
            }
            if let Check::Examples { range: Some([lo, hi]), .. } = check {
                if lo > hi {
                    return Err(CliError::Config(format!("empty example range [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    /// Whether the exact regime is usable: a discrete scale and no piece
    /// that is only available in floating point.
    pub fn exact_capable(&self) -> bool {
        let discrete = self.scale.as_ref().is_some_and(|s| {
            s.iter().all(|c| !matches!(c, ComponentSpec::Interval(_)))
        });
        let rational = match &self.function {
            None => true,
            Some(FunctionSpec::Named(b)) => rational_builtin(b),
            Some(FunctionSpec::Piecewise { piecewise: PiecewiseSpec { pieces, .. } }) => {
                pieces.iter().all(rational_builtin)
            }
        };
        discrete && rational
    }
}

fn rational_builtin(b: &Builtin) -> bool {
    !matches!(b, Builtin::Sine(_))
}
