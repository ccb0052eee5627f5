//! Zero-forcing precoding and sum-rate evaluation.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::C64;

/// Gram matrices with a 1-norm condition number above this are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Column-normalised ZF precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    /// N-by-K, column `k` serves user `k`.
    pub f: DMatrix<C64>,
    pub power: f64,
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of the Hermitian Gram matrix `H H^H`, via Cholesky.
pub fn gram_inverse(h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (k, n) = h.shape();
    if k > n {
        return Err(Error::TooManyUsers { users: k, antennas: n });
    }
    let gram = h * h.adjoint();
    let norm = one_norm(&gram);
    let chol = Cholesky::new(gram).ok_or(Error::SingularGram {
        condition: f64::INFINITY,
    })?;
    let inv = chol.inverse();
    let condition = norm * one_norm(&inv);
    if !condition.is_finite() || condition > MAX_GRAM_CONDITION {
        return Err(Error::SingularGram { condition });
    }
    Ok(inv)
}

/// `F = H^H (H H^H)^{-1}` with every column rescaled to `||f_k||^2 = P/K`.
pub fn zf_precoder(h: &DMatrix<C64>, power: f64) -> Result<PrecodingMatrix> {
    let inv = gram_inverse(h)?;
    let mut f = h.adjoint() * inv;
    let per_user = power / h.nrows() as f64;
    for mut col in f.column_iter_mut() {
        let norm = col.norm();
        col.scale_mut(per_user.sqrt() / norm);
    }
    Ok(PrecodingMatrix { f, power })
}

/// SINR of user `k`: `|h_k^H f_k|^2 / (sum_{i != k} |h_k^H f_i|^2 + noise_var)`.
pub fn sinr(h: &DMatrix<C64>, precoder: &PrecodingMatrix, noise_var: f64, k: usize) -> Result<f64> {
    let users = h.nrows();
    if k >= users {
        return Err(Error::UserIndex { index: k, users });
    }
    if precoder.f.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.ncols(),
            actual: precoder.f.nrows(),
        });
    }
    let row = h.row(k);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, col) in precoder.f.column_iter().enumerate() {
        let g = (row * col)[(0, 0)].norm_sqr();
        if i == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    Ok(signal / (interference + noise_var))
}

/// Per-user rates `log2(1 + SINR_k)` for an arbitrary precoder.
pub fn user_rates(h: &DMatrix<C64>, precoder: &PrecodingMatrix, noise_var: f64) -> Result<Vec<f64>> {
    (0..h.nrows())
        .map(|k| sinr(h, precoder, noise_var, k).map(|s| (1.0 + s).log2()))
        .collect()
}

/// Sum of `log2(1 + SINR_k)` over users, bits/s/Hz.
pub fn sum_rate(h: &DMatrix<C64>, precoder: &PrecodingMatrix, noise_var: f64) -> Result<f64> {
    Ok(user_rates(h, precoder, noise_var)?.iter().sum())
}

/// Per-user rates under ZF with equal power split, from the Gram inverse diagonal.
pub fn zf_user_rates(h: &DMatrix<C64>, power: f64, noise_var: f64) -> Result<Vec<f64>> {
    let inv = gram_inverse(h)?;
    let snr = power / h.nrows() as f64 / noise_var;
    Ok((0..h.nrows()).map(|k| (1.0 + snr / inv[(k, k)].re).log2()).collect())
}

/// Closed-form ZF sum rate `sum_k log2(1 + (P/K)/noise_var / [(H H^H)^{-1}]_kk)`.
pub fn zf_sum_rate(h: &DMatrix<C64>, power: f64, noise_var: f64) -> Result<f64> {
    Ok(zf_user_rates(h, power, noise_var)?.iter().sum())
}
