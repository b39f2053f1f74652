//! Time-scale calculus and Young-type inequalities for monotone functions.
//!
//! The crate models closed time scales (finite unions of closed intervals
//! and isolated points), delta and nabla integration on them, and a family
//! of sandwich bounds for the Young functional of a monotone function.
//! Every numeric routine is generic over [`Scalar`], implemented by exact
//! [`Rational`] and by `f64`.

pub mod calculus;
pub mod discrete;
pub mod error;
pub mod monotone;
pub mod scalar;
pub mod timescale;
pub mod young;

pub use calculus::{delta_integral, h_n, nabla_integral};
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar, ScalarMode, Value};
pub use timescale::{Component, ComponentSpec, Jumps, TimeScale};
pub use monotone::{make_monotone, make_piecewise, Direction, FunctionSpec, MonotoneFn, PiecewiseFn, PiecewiseMode};
pub use young::{BoundKind, BoundReport, Variant, YoungContext};
pub use discrete::{example_suite, falling_factorial, ExactScalar, ExampleName, ExampleParams, ExampleRow};
