//! Spectra of self-adjoint matrix Sturm–Liouville problems
//! `−(P y')' + Q y = λ W y` on `[a, b]` under boundary conditions
//! `(A|B) Y(a,b) = 0`, together with the chart and stratum structure of the
//! boundary-condition manifold and the eigenvalue jump experiments built on it.
//!
//! Layout:
//! - [`kernel`]: dense complex linear algebra.
//! - [`model`]: piecewise-constant coefficients.
//! - [`bc`]: boundary conditions, charts, strata and paths.
//! - [`shooting`]: characteristic function, counting, eigenvalues, eigenfunctions.
//! - [`experiments`]: scans and checks with CSV/SVG/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bc;
pub mod experiments;
pub mod kernel;
pub mod model;
pub mod shooting;

pub use num_complex::Complex64;
