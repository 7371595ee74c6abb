use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::linalg::symmetric_deviation;
use crate::{Error, Result};

/// Distance below which `E` counts as hitting the spectrum of `QHQ`.
pub const DEFAULT_RESOLVENT_GUARD: f64 = 1e-8;

/// `H_eff(E) = PHP + PHQ (E - QHQ)^{-1} QHP` written in the column basis of `P`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    /// Orthonormal columns spanning the subspace.
    pub p: Mat<f64>,
    pub energy: f64,
    /// First term alone.
    pub php: Mat<f64>,
    pub heff: Mat<f64>,
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.p.ncols()
    }

    /// `‖H_eff(E) c - E c‖ / ‖c‖` with `c = P^T ψ`; zero when `ψ` has no weight in P.
    pub fn residual(&self, psi: &[f64]) -> Result<f64> {
        if psi.len() != self.p.nrows() {
            return Err(Error::DimensionMismatch { expected: self.p.nrows(), found: psi.len() });
        }
        let v = Mat::from_fn(psi.len(), 1, |i, _| psi[i]);
        let c = self.p.transpose() * &v;
        let norm = c.norm_l2();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let r = &self.heff * &c - &c * faer::Scale(self.energy);
        Ok(r.norm_l2() / norm)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        symmetric_deviation(self.heff.as_ref())
    }
}

/// Build `H_eff(E)` for a real symmetric `h` and orthonormal columns `p`.
/// The complement `Q` is obtained from `I - PP^T`, and the resolvent is
/// applied by an LU solve. Fails when `E` lies within `guard` of the spectrum of `QHQ`.
pub fn effective_hamiltonian(h: &Mat<f64>, p: &Mat<f64>, energy: f64, guard: f64) -> Result<EffectiveHamiltonian> {
    let n = h.nrows();
    if h.ncols() != n || p.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.nrows() });
    }
    let dev = symmetric_deviation(h.as_ref());
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let k = p.ncols();
    let gram = p.transpose() * p;
    let ortho = (&gram - Mat::<f64>::identity(k, k)).norm_max();
    if ortho > 1e-10 {
        return Err(Error::BasisMismatch(format!("P columns are not orthonormal (deviation {ortho:e})")));
    }

    let hp = h * p;
    let php = p.transpose() * &hp;
    if k == n {
        return Ok(EffectiveHamiltonian { p: p.clone(), energy, heff: php.clone(), php });
    }

    let q_proj = Mat::<f64>::identity(n, n) - p * p.transpose();
    let qeig = q_proj.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let qvals = qeig.S().column_vector();
    let qcols: Vec<usize> = (0..n).filter(|&i| qvals[i] > 0.5).collect();
    let qu = qeig.U();
    let qb = Mat::from_fn(n, qcols.len(), |i, j| qu[(i, qcols[j])]);

    let qhq = qb.transpose() * h * &qb;
    let spec = qhq.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let distance = spec.iter().map(|&x| (energy - x).abs()).fold(f64::INFINITY, f64::min);
    if distance < guard {
        return Err(Error::SingularResolvent { energy, distance });
    }

    let m = qcols.len();
    let shifted = Mat::<f64>::from_fn(m, m, |i, j| if i == j { energy - qhq[(i, j)] } else { -qhq[(i, j)] });
    let qhp = qb.transpose() * &hp;
    let x = shifted.partial_piv_lu().solve(&qhp);
    let heff = &php + hp.transpose() * &qb * &x;
    Ok(EffectiveHamiltonian { p: p.clone(), energy, php, heff })
}
