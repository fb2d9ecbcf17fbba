//! Polynomial ergodic averages, exponential sums and circle-method multipliers.
//!
//! The crate computes the objects that appear in pointwise ergodic theorems
//! along polynomial mappings: averaging operators on `Z^d` and their Fourier
//! multipliers, r-variational seminorms, Gauss sums, major/minor arc
//! decompositions with their approximating multipliers, and simple
//! measure-preserving systems. The [`harness`] module bundles desk-scale
//! numerical checks of the inequalities these objects satisfy.

// `!(x > 0.0)` is used on purpose so NaN is rejected with the other bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod expsum;
pub mod averaging;
pub mod circle;
pub mod dynamics;
pub mod polymap;
pub mod rational;
pub mod variation;

pub use error::{Error, Result};
pub use polymap::{
    anisotropic_scale, lift_polynomial_map, DegreeMatrix, LiftedSystem, MultiIndexSet,
    PolynomialMap,
};
pub use rational::{RationalPoint, TorusPoint};
pub use averaging::{LatticeFunction, MultiplierKind, MultiplierValue, QuadratureSpec};
pub use circle::{ArcClass, ArcParams, SplitSchedule};
pub use dynamics::{DynamicalSystem, Observable};
pub use variation::{RealSequence, VariationKind, VariationResult};
