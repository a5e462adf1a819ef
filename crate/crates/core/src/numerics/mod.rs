//! Complex linear algebra and reproducible random streams.

mod matrix;
mod rng;
mod solve;

pub use matrix::{CMatrix, CVector};
pub use rng::{complex_gaussian, rng_for_trial, RngStream};
pub use solve::{hermitian_solve, least_squares, orthonormal_basis, Cholesky};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Orthogonal projector onto the null space of a shape matrix `S`.
///
/// Returns `Π = I - S⁺S`, with `S⁺` the Moore-Penrose pseudo-inverse, so that
/// `S Π = 0` and any `f = Π x` satisfies `S f = 0`. For the Hermitian 0/1
/// selection shapes this is `I - S`. The projector is assembled from an
/// orthonormal basis of the row space of `S`, which avoids inverting the
/// rank-deficient Gram matrix.
pub fn projection_from_shape<T: Real>(shape: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !shape.is_square() {
        return Err(invalid(format!(
            "shape matrix must be square, got {}x{}",
            shape.rows(),
            shape.cols()
        )));
    }
    let n = shape.cols();
    // rows of S, conjugated, span range(S^H)
    let rows: Vec<CVector<T>> = (0..shape.rows())
        .map(|i| CVector::from_vec(shape.row(i).iter().map(|z| z.conj()).collect()))
        .collect();
    let basis = orthonormal_basis(&rows);
    let mut pi = CMatrix::identity(n);
    for u in &basis {
        for i in 0..n {
            for j in 0..n {
                pi[(i, j)] -= u[i] * u[j].conj();
            }
        }
    }
    Ok(pi)
}
