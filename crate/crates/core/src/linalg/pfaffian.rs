use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative skew tolerance used by [`pfaffian`].
pub const DEFAULT_SKEW_RTOL: f64 = 1e-12;

/// Pfaffian of a complex skew-symmetric matrix, with the skew check scaled
/// to `1e-12 * max|A|`.
pub fn pfaffian(a: &ComplexMatrix) -> Result<Complex64> {
    pfaffian_with_tol(a, DEFAULT_SKEW_RTOL * a.max_abs())
}

/// Pfaffian with an explicit absolute skew tolerance.
///
/// The input is checked against `max |A + Aᵀ| <= tol`, projected onto its skew
/// part and reduced to block-tridiagonal form by Parlett–Reid elimination with
/// partial pivoting. Each pivot step eliminates one pair of rows/columns, so the
/// Pfaffian is the signed product of the pivots `A[k][k+1]` for even `k`.
pub fn pfaffian_with_tol(a: &ComplexMatrix, tol: f64) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("pfaffian of non-square {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n % 2 == 1 {
        return Err(Error::Dimension(format!("pfaffian of odd order {n}")));
    }
    let defect = a.skew_defect();
    if defect > tol {
        return Err(Error::Shape(format!("matrix is not skew-symmetric (defect {defect:e} > {tol:e})")));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut m: Vec<Complex64> = a.skew_part().entries().to_vec();
    Ok(parlett_reid(&mut m, n))
}

/// In-place Parlett–Reid reduction of a row-major skew matrix of even order `n`.
pub(crate) fn parlett_reid(m: &mut [Complex64], n: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in row k right of the diagonal
        let (mut piv, mut best) = (k + 1, m[k * n + k + 1].norm());
        for j in k + 2..n {
            let v = m[k * n + j].norm();
            if v > best {
                piv = j;
                best = v;
            }
        }
        if best == 0.0 {
            return zero;
        }
        if piv != k + 1 {
            let p = k + 1;
            for c in 0..n {
                m.swap(p * n + c, piv * n + c);
            }
            for r in 0..n {
                m.swap(r * n + p, r * n + piv);
            }
            pf = -pf;
        }
        let head = m[k * n + k + 1];
        pf *= head;
        if k + 2 < n {
            // Gauss transform using column k+1 annihilates row/column k beyond k+1
            // while preserving skew symmetry of the trailing block.
            let tau: Vec<Complex64> = (k + 2..n).map(|j| m[k * n + j] / head).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| m[i * n + k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[i * n + j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Determinant by LU factorization with partial pivoting; closed formula for order <= 2.
pub fn determinant(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("determinant of non-square {}x{} matrix", a.rows(), a.cols())));
    }
    Ok(det_row_major(a.entries(), a.rows()))
}

pub(crate) fn det_row_major(entries: &[Complex64], n: usize) -> Complex64 {
    match n {
        0 => Complex64::new(1.0, 0.0),
        1 => entries[0],
        2 => entries[0] * entries[3] - entries[1] * entries[2],
        _ => {
            let mut m = entries.to_vec();
            let mut det = Complex64::new(1.0, 0.0);
            for k in 0..n {
                let mut piv = k;
                let mut best = m[k * n + k].norm();
                for r in k + 1..n {
                    let v = m[r * n + k].norm();
                    if v > best {
                        piv = r;
                        best = v;
                    }
                }
                if best == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                if piv != k {
                    for c in 0..n {
                        m.swap(k * n + c, piv * n + c);
                    }
                    det = -det;
                }
                let d = m[k * n + k];
                det *= d;
                for r in k + 1..n {
                    let f = m[r * n + k] / d;
                    if f == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in k + 1..n {
                        let t = m[k * n + c];
                        m[r * n + c] -= f * t;
                    }
                }
            }
            det
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_is_upper_entry() {
        let a = ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(3.0, 4.0), c(-3.0, -4.0), c(0.0, 0.0)])
            .unwrap();
        assert_eq!(pfaffian(&a).unwrap(), c(3.0, 4.0));
    }

    #[test]
    fn four_by_four_expansion() {
        let mut a = ComplexMatrix::zeros(4, 4);
        a[(0, 1)] = c(1.0, 0.0);
        a[(1, 0)] = c(-1.0, 0.0);
        a[(2, 3)] = c(2.0, 0.0);
        a[(3, 2)] = c(-2.0, 0.0);
        assert!((pfaffian(&a).unwrap() - c(2.0, 0.0)).norm() < 1e-15);

        // a13 a24 term carries a minus sign; forces a pivot swap
        let mut b = ComplexMatrix::zeros(4, 4);
        b[(0, 2)] = c(1.0, 0.0);
        b[(2, 0)] = c(-1.0, 0.0);
        b[(1, 3)] = c(5.0, 0.0);
        b[(3, 1)] = c(-5.0, 0.0);
        assert!((pfaffian(&b).unwrap() - c(-5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_odd_and_non_skew() {
        assert!(matches!(pfaffian(&ComplexMatrix::zeros(3, 3)), Err(Error::Dimension(_))));
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(pfaffian(&a), Err(Error::Shape(_))));
        assert!(matches!(pfaffian(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(&ComplexMatrix::identity(3)).unwrap(), c(1.0, 0.0));
        let d = ComplexMatrix::diagonal(&[c(2.0, 0.0), c(0.0, 3.0)]);
        assert_eq!(determinant(&d).unwrap(), c(0.0, 6.0));
        let m = ComplexMatrix::from_real(3, 3, &[0.0, 2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0]).unwrap();
        // expansion along row 1: -1 * (2*3 - 1*1)
        assert!((determinant(&m).unwrap() - c(-5.0, 0.0)).norm() < 1e-14);
        assert!(determinant(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_matrix_has_zero_pfaffian() {
        assert_eq!(pfaffian(&ComplexMatrix::zeros(6, 6)).unwrap(), c(0.0, 0.0));
        assert_eq!(pfaffian(&ComplexMatrix::zeros(0, 0)).unwrap(), c(1.0, 0.0));
    }
}
