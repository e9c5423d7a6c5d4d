//! Numerical building blocks: a second-order forward-mode scalar for exact
//! parameter jets, Gauss-Legendre nodes, and compensated summation.

mod dual;
mod quadrature;
mod sum;

pub use dual::{HyperDual, Real};
pub use quadrature::gauss_legendre;
pub use sum::{neumaier_sum, NeumaierSum};

/// Central-difference step used for first derivatives: `1e-5 * max(1, |x|)`.
pub fn fd_step(x: f64) -> f64 {
    1e-5 * x.abs().max(1.0)
}
