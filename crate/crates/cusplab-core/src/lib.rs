//! Numerical kernels for Diophantine approximation experiments in the
//! Heisenberg group and on the space of unimodular planar lattices.
//!
//! The crate is organized around six concerns:
//! - [`heisenberg`]: floating-point group arithmetic, the Cygan gauge and
//!   distance, the sup-norm reference distance, and the dilation action
//! - [`rational`]: exact rational points, heights, complete enumeration by
//!   height band, counting slopes, and witness searches
//! - [`flow`]: planar lattices under the diagonal flow, shortest vectors by
//!   two-dimensional reduction, continued fractions, excursion profiles and
//!   exponents, and the classical line dimension formulas
//! - [`formulas`]: closed-form dimension evaluators driven by root-space
//!   data, exact over the rationals
//! - [`limsup`]: anisotropic box covers, cube subdivision counts, the
//!   tree-like Cantor construction with its scale schedule and retention
//!   statistics, and the tree lower-bound evaluator
//! - [`boxdim`]: grid box-counting dimension estimates for point clouds
//!
//! Everything is deterministic: enumeration results are independent of the
//! worker count and all randomness sits behind caller-provided seeds.

pub mod boxdim;
pub mod error;
pub mod fit;
pub mod flow;
pub mod formulas;
pub mod heisenberg;
pub mod limsup;
pub mod rational;

pub use error::{Error, Result};
pub use fit::DimensionFit;
pub use heisenberg::{Gauge, HeisenbergPoint};
pub use rational::{Budget, EnumBox, RationalPoint};
