//! Sharp Markov–Bernstein constants in `L²((-1, 1), (1-x)^α (1+x)^β)`.
//!
//! The constant `M_n = sup ‖Q'‖ / ‖Q‖` over polynomials of degree `≤ n` is the
//! reciprocal square root of the smallest eigenvalue of a symmetric-definite
//! pentadiagonal pencil `(A, D)` built from monic Jacobi polynomials. This
//! crate assembles that pencil, solves for the extremal eigenpair, and checks
//! the result against the Bessel-zero asymptotics `M_n ≈ n² / (2 j_ν*)`.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod fd;
pub mod jacobi;
pub mod ode;
pub mod pencil;
pub mod special;

pub use eigen::{
    extremal_polynomial, sharp_constant, smallest_eigenpair, EigenResult, ExtremalPolynomial, SharpConstantReport,
    DEFAULT_TOLERANCE,
};
pub use error::{Error, Result};
pub use jacobi::JacobiWeightParams;
pub use pencil::{build_pencil, BandedPencil};
