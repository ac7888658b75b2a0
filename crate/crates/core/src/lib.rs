// `!(v > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod harnack;
pub mod kernels;
pub mod montecarlo;
pub mod pricing;
pub mod quadrature;
pub mod value;

pub use bounds::{BoundsConfig, SandwichReport};
pub use error::{Error, Result};
pub use geometry::{CylinderSpec, GPoint};
pub use montecarlo::{McConfig, Scheme, SdeModel};
pub use pricing::{AsianOption, Market};
pub use value::{Branch, ControlSynthesis, PsiValue, TrajectorySample};
