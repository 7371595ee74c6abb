//! Thin dense linear-algebra layer over `faer`.

use faer::{c64, Mat, MatRef, Side};

use crate::{Error, Result};

/// Largest entrywise `|m - m^†|`.
pub fn hermitian_deviation(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Largest entrywise `|m - m^T|`.
pub fn symmetric_deviation(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for j in 0..n {
        for i in 0..j {
            dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    dev
}

fn check_square(nrows: usize, ncols: usize) -> Result<()> {
    if nrows != ncols {
        return Err(Error::DimensionMismatch { expected: nrows, found: ncols });
    }
    Ok(())
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl HermitianEigen {
    pub fn new(m: MatRef<'_, c64>, tol: f64) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        let dev = hermitian_deviation(m);
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    /// `V exp(-i diag(E) t) V^†`.
    pub fn propagator(&self, t: f64) -> Mat<c64> {
        let n = self.values.len();
        let v = &self.vectors;
        let phased = Mat::from_fn(n, n, |i, k| v[(i, k)] * c64::cis(-self.values[k] * t));
        &phased * v.adjoint()
    }
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymmetricEigen {
    pub fn new(m: MatRef<'_, f64>, tol: f64) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        let dev = symmetric_deviation(m);
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().copied().collect();
        Ok(Self { values, vectors: evd.U().to_owned() })
    }

    pub fn eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V exp(-i diag(E) t) V^T` as a dense complex matrix.
    pub fn propagator(&self, t: f64) -> Mat<c64> {
        let n = self.dim();
        let v = to_complex(self.vectors.as_ref());
        let phased = Mat::from_fn(n, n, |i, k| v[(i, k)] * c64::cis(-self.values[k] * t));
        &phased * v.transpose()
    }
}

/// Largest entrywise `|a - b|` of two equally shaped complex matrices.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut dev = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            dev = dev.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_is_unitary_and_composes() {
        let n = 6;
        let h = Mat::<c64>::from_fn(n, n, |i, j| {
            let re = ((i * 3 + j * 3) % 5) as f64 - 2.0;
            let im = if i == j { 0.0 } else { (i as f64 - j as f64) * 0.3 };
            c64::new(re, im)
        });
        let eig = HermitianEigen::new(h.as_ref(), 1e-12).unwrap();
        let u1 = eig.propagator(0.7);
        let u2 = eig.propagator(1.1);
        let u12 = eig.propagator(1.8);
        let id = Mat::<c64>::identity(n, n);
        assert!(max_abs_diff((&u1 * u1.adjoint()).as_ref(), id.as_ref()) < 1e-12);
        assert!(max_abs_diff((&u2 * &u1).as_ref(), u12.as_ref()) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Mat::<f64>::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        assert!(matches!(SymmetricEigen::new(m.as_ref(), 1e-12), Err(Error::NotHermitian(_))));
    }
}
