//! Irreducible decompositions of algebraic curvature tensors `R` and of their
//! covariant derivatives `∇R`, for pseudo-Riemannian (`so(p,q)`) and
//! pseudo-Kähler (`u(p,q)`) geometry, at the level of tensors at a point.

pub mod cli;
pub mod coeffs;
pub mod error;
pub mod io;
pub mod kahler;
pub mod metric;
pub mod report;
pub mod riemann;
pub mod selftest;
pub mod spaces;
pub mod tensors;
pub mod tol;

pub use error::{Error, Result};
pub use metric::MetricContext;
pub use spaces::{Element, Space};
pub use tensors::{CovDerivTensor, CurvatureTensor, PrimTensor, Sym2Tensor, Tensor3};
