//! Dense kernels on single complex blocks.

use super::{CMatrix, NormKind};
use crate::error::{Error, Result};

/// Relative residual tolerance certifying a computed decomposition.
pub const OP2_TOLERANCE: f64 = 1e-10;
/// Iteration cap handed to the SVD and Schur drivers.
pub const OP2_MAX_ITER: usize = 10_000;

const GELFAND_MAX_POWER: usize = 64;

fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_column_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn max_row_sum(a: &CMatrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Norm of one block under the given norm kind.
pub fn block_norm(a: &CMatrix, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::MaxRow => Ok(max_row_sum(a)),
        NormKind::Op2 => op2_norm(a),
    }
}

fn op2_norm(a: &CMatrix) -> Result<f64> {
    if a.nrows() == 1 && a.ncols() == 1 {
        return Ok(a[(0, 0)].norm());
    }
    let fro = frobenius(a);
    if fro == 0.0 {
        return Ok(0.0);
    }
    let lower = max_column_norm(a);
    let fail = |message: &str| Error::NumericalFailure { message: message.to_string(), lower, upper: fro };
    // Largest eigenvalue of the Gram matrix AᴴA. The Hermitian solver is
    // backward stable; the complex SVD driver is not on nearly rank-one
    // inputs, so it is not used here.
    let gram = a.adjoint() * a;
    let eig = gram
        .clone()
        .try_symmetric_eigen(f64::EPSILON, OP2_MAX_ITER)
        .ok_or_else(|| fail("Hermitian eigenvalue iteration did not converge"))?;
    let lambda = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let q = &eig.eigenvectors;
    let n = a.ncols();
    let diag = CMatrix::from_diagonal(&eig.eigenvalues.map(|s| nalgebra::Complex::new(s, 0.0)));
    let gram_norm = frobenius(&gram);
    // Backward error and orthogonality bound the eigenvalue error (Weyl).
    let backward = frobenius(&(&gram - q * diag * q.adjoint())) / gram_norm;
    let ortho = frobenius(&(q.adjoint() * q - CMatrix::identity(n, n)));
    if !lambda.is_finite() || backward.max(ortho) > OP2_TOLERANCE {
        return Err(fail("Gram eigendecomposition failed its residual certificate"));
    }
    let sigma = lambda.max(0.0).sqrt();
    // The exact norm lies in [max column norm, Frobenius]; clamp rounding.
    Ok(sigma.clamp(lower, fro))
}

/// Largest eigenvalue modulus of one block.
pub fn block_spectral_radius(a: &CMatrix) -> Result<f64> {
    let n = a.nrows();
    if n == 1 {
        return Ok(a[(0, 0)].norm());
    }
    if a.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Ok(0.0);
    }
    match a.clone().try_schur(f64::EPSILON, OP2_MAX_ITER) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            Ok((0..n).map(|i| t[(i, i)].norm()).fold(0.0, f64::max))
        }
        None => {
            let (lower, upper) = gelfand_bracket(a);
            Err(Error::NumericalFailure {
                message: "eigenvalue iteration did not converge".to_string(),
                lower,
                upper,
            })
        }
    }
}

/// Bracket for the spectral radius from powers up to 64: the upper end is
/// `min ‖aᵏ‖^{1/k}`, the lower end `max (|tr aᵏ|/n)^{1/k}`.
pub fn gelfand_bracket(a: &CMatrix) -> (f64, f64) {
    let n = a.nrows() as f64;
    let mut power = a.clone();
    let mut log_scale = 0.0_f64;
    let mut lower = 0.0_f64;
    let mut upper = f64::INFINITY;
    for k in 1..=GELFAND_MAX_POWER {
        if k > 1 {
            power = &power * a;
        }
        let fro = frobenius(&power);
        if fro == 0.0 {
            return (0.0, 0.0);
        }
        let kf = k as f64;
        upper = upper.min(((fro.ln() + log_scale) / kf).exp());
        let tr = power.trace().norm();
        if tr > 0.0 {
            lower = lower.max((((tr / n).ln() + log_scale) / kf).exp());
        }
        power /= nalgebra::Complex::new(fro, 0.0);
        log_scale += fro.ln();
    }
    (lower.min(upper), upper)
}
