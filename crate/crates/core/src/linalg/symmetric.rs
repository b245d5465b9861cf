use super::RealVector;
use crate::error::{Error, Result};

/// All elementary symmetric polynomials `S^0..=S^n` of `values`, i.e. the
/// coefficients of `Π (1 + v_i t)` built up one factor at a time.
pub fn elementary_symmetric_all(values: &RealVector) -> Vec<f64> {
    symmetric_coefficients(values.values())
}

pub(crate) fn symmetric_coefficients(values: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; values.len() + 1];
    coeffs[0] = 1.0;
    for (done, &v) in values.iter().enumerate() {
        for l in (1..=done + 1).rev() {
            coeffs[l] += v * coeffs[l - 1];
        }
    }
    coeffs
}

/// `S^l(values)`, the sum of all `l`-fold products of distinct entries.
pub fn elementary_symmetric(values: &RealVector, l: usize) -> Result<f64> {
    if l > values.len() {
        return Err(Error::Index(format!("S^{l} requested for {} values", values.len())));
    }
    Ok(elementary_symmetric_all(values)[l])
}
