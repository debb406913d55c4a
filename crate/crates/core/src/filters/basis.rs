use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::SpectralGraph;
use crate::Scalar;

/// `Phi[i, j] = lambda_i^j`, `j = 0..=order`.
pub fn vandermonde<T: Scalar>(eigvals: &[T], order: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(eigvals.len(), order + 1);
    for (i, &lam) in eigvals.iter().enumerate() {
        let mut p = T::one();
        for j in 0..=order {
            m[(i, j)] = p;
            p *= lam;
        }
    }
    m
}

/// LPI design matrix: row 0 is `(1, 0, ..., 0)`, row `i >= 1` holds
/// `lambda_i^-j`, `j = 0..=order`.
pub fn lpi_basis<T: Scalar>(sg: &SpectralGraph<T>, order: usize) -> Result<DMatrix<T>> {
    sg.require_connected()?;
    if order >= sg.n() {
        return Err(Error::OutOfRange {
            what: "LPI order",
            value: order,
            min: 0,
            max: sg.n() - 1,
        });
    }
    lpi_basis_from(sg.eigvals().as_slice(), order)
}

pub fn lpi_basis_from<T: Scalar>(eigvals: &[T], order: usize) -> Result<DMatrix<T>> {
    let n = eigvals.len();
    let mut m = DMatrix::zeros(n, order + 1);
    if n == 0 {
        return Ok(m);
    }
    m[(0, 0)] = T::one();
    for (i, &lam) in eigvals.iter().enumerate().skip(1) {
        if !(lam > T::zero()) {
            return Err(Error::Disconnected { lambda2: lam.as_f64() });
        }
        let inv = T::one() / lam;
        let mut p = T::one();
        for j in 0..=order {
            m[(i, j)] = p;
            p *= inv;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::numerical_rank;

    #[test]
    fn vandermonde_examples() {
        let v = vandermonde(&[0.0, 1.0, 3.0], 2);
        assert_eq!(v, DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 3.0, 9.0]));
        let v0 = vandermonde(&[0.5, 2.0], 0);
        assert_eq!(v0, DMatrix::from_element(2, 1, 1.0));
    }

    #[test]
    fn lpi_basis_examples() {
        let b = lpi_basis_from(&[0.0, 2.0, 4.0], 1).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.5, 1.0, 0.25]));
        let b0 = lpi_basis_from(&[0.0, 2.0, 4.0], 0).unwrap();
        assert_eq!(b0, DMatrix::from_element(3, 1, 1.0));
    }

    #[test]
    fn rank_drops_with_repeats() {
        assert_eq!(numerical_rank(&vandermonde(&[0.0, 1.0, 2.0, 3.0], 3)), 4);
        assert_eq!(numerical_rank(&vandermonde(&[0.0, 1.0, 1.0, 3.0], 3)), 3);
    }
}
