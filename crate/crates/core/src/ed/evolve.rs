use std::sync::Arc;

use faer::{c64, Mat};

use super::{DenseState, SectorBasis};
use crate::linalg::SymmetricEigen;
use crate::{Error, Result};

/// One eigendecomposition of `H`, reused for every evolution time.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    basis: Arc<SectorBasis>,
    eig: SymmetricEigen,
}

impl ExactPropagator {
    pub fn new(h: &Mat<f64>, basis: Arc<SectorBasis>) -> Result<Self> {
        if h.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: h.nrows() });
        }
        let eig = SymmetricEigen::new(h.as_ref(), 1e-10)?;
        Ok(Self { basis, eig })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eig
    }

    fn from_coefficients(&self, coeffs: impl Fn(usize) -> c64, t: f64) -> DenseState {
        let v = &self.eig.vectors;
        let n = self.eig.dim();
        let phased: Vec<c64> = (0..n).map(|k| coeffs(k) * c64::cis(-self.eig.values[k] * t)).collect();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (k, &p) in phased.iter().enumerate() {
            if p.norm_sqr() == 0.0 {
                continue;
            }
            let col = v.col(k);
            for (o, &x) in out.iter_mut().zip(col.iter()) {
                *o += p * x;
            }
        }
        DenseState::from_parts(self.basis.clone(), out)
    }

    /// `V e^{-iEt} V^T ψ`.
    pub fn evolve(&self, psi: &DenseState, t: f64) -> Result<DenseState> {
        if **psi.basis() != *self.basis {
            return Err(Error::BasisMismatch("state and Hamiltonian live on different sectors".into()));
        }
        let v = &self.eig.vectors;
        let amps = psi.amplitudes();
        let coeffs: Vec<c64> = (0..self.eig.dim())
            .map(|k| v.col(k).iter().zip(amps).fold(c64::new(0.0, 0.0), |acc, (&x, &a)| acc + a * x))
            .collect();
        Ok(self.from_coefficients(|k| coeffs[k], t))
    }

    /// Evolution of the computational basis vector with the given index.
    pub fn evolve_basis_vector(&self, index: usize, t: f64) -> DenseState {
        let v = &self.eig.vectors;
        self.from_coefficients(|k| c64::new(v[(index, k)], 0.0), t)
    }
}

/// `|ψ(t)> = e^{-iHt} |ψ_0>` for every requested time, from one diagonalization.
pub fn evolve_exact(h: &Mat<f64>, psi0: &DenseState, times: &[f64]) -> Result<Vec<DenseState>> {
    let prop = ExactPropagator::new(h, psi0.basis().clone())?;
    times.iter().map(|&t| prop.evolve(psi0, t)).collect()
}

/// One drive period `e^{-i H_B} e^{-i H_0}` as a dense unitary, each factor
/// from its own eigendecomposition.
pub fn floquet_unitary(h0: &Mat<f64>, hb: &Mat<f64>) -> Result<Mat<c64>> {
    let u0 = SymmetricEigen::new(h0.as_ref(), 1e-10)?.propagator(1.0);
    let ub = SymmetricEigen::new(hb.as_ref(), 1e-10)?.propagator(1.0);
    Ok(&ub * &u0)
}

impl DenseState {
    /// Apply a dense unitary on the same basis.
    pub fn apply(&self, u: &Mat<c64>) -> Result<DenseState> {
        let n = self.amplitudes().len();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
        }
        let mut out = vec![c64::new(0.0, 0.0); n];
        for (j, &a) in self.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(u.col(j).iter()) {
                *o += x * a;
            }
        }
        Ok(DenseState::from_parts(self.basis().clone(), out))
    }
}
