//! Extended-range complex polynomials, the operator `T_{n,λ}`, disk norms
//! and the metric `ρ`.

pub mod dd;
pub mod exact;
pub mod factorial;
pub mod json;
pub mod norms;
pub mod operator;
pub mod polynomial;
pub mod xnum;

pub use dd::Dd;
pub use exact::{ExactPolynomial, GaussianRational};
pub use norms::{eval, grid_norm, metric_rho, metric_with, upper_norm};
pub use operator::{apply_op, apply_op_both, apply_op_by_derivatives, Dilation, OperatorSpec};
pub use polynomial::{Polynomial, SparsePoly};
pub use xnum::{XComplex, XFloat};
