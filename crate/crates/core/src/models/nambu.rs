use faer::{c64, Mat, MatRef};

use super::{terms, ModelSpec, Part, Terms};
use crate::linalg::{hermitian_deviation, HermitianEigen};
use crate::{Error, Result};

/// Single-particle Hamiltonian in the Nambu basis `α = (c_1..c_M, c_1^†..c_M^†)`.
///
/// The many-body operator is `½ α^† H α + constant` with
/// `H = [[A, B], [-B^*, -A^*]]`, `A` Hermitian and `B` antisymmetric, so
/// `constant = ½ Tr A`.
#[derive(Debug, Clone)]
pub struct NambuMatrix {
    modes: usize,
    h: Mat<c64>,
    constant: f64,
}

impl NambuMatrix {
    /// Assemble from the hopping block `A` and the pairing block `B`.
    pub fn from_blocks(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<Self> {
        let m = a.nrows();
        for (r, c) in [(a.nrows(), a.ncols()), (b.nrows(), b.ncols())] {
            if r != m || c != m {
                return Err(Error::DimensionMismatch { expected: m, found: r.max(c) });
            }
        }
        let dev = hermitian_deviation(a);
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        for i in 0..m {
            for j in 0..m {
                let d = (b[(i, j)] + b[(j, i)]).norm();
                if d > 1e-12 {
                    return Err(Error::InvalidModel(format!("pairing block not antisymmetric (|B+B^T| = {d:e})")));
                }
            }
        }
        let h = Mat::from_fn(2 * m, 2 * m, |i, j| match (i < m, j < m) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - m)],
            (false, true) => -b[(i - m, j)].conj(),
            (false, false) => -a[(i - m, j - m)].conj(),
        });
        let constant = 0.5 * (0..m).map(|i| a[(i, i)].re).sum::<f64>();
        Ok(Self { modes: m, h, constant })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// The full `2M x 2M` matrix.
    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.h.as_ref()
    }

    /// Normal-ordering constant `½ Tr A`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Hopping block `A`.
    pub fn hopping(&self) -> MatRef<'_, c64> {
        self.h.as_ref().submatrix(0, 0, self.modes, self.modes)
    }

    /// Pairing block `B`.
    pub fn pairing(&self) -> MatRef<'_, c64> {
        self.h.as_ref().submatrix(0, self.modes, self.modes, self.modes)
    }

    /// Largest entry of `|X H^* X + H|`, zero for a valid Nambu matrix.
    pub fn particle_hole_deviation(&self) -> f64 {
        let m = self.modes;
        let n = 2 * m;
        let swap = |i: usize| if i < m { i + m } else { i - m };
        let mut dev = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                dev = dev.max((self.h[(swap(i), swap(j))].conj() + self.h[(i, j)]).norm());
            }
        }
        dev
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        HermitianEigen::new(self.h.as_ref(), 1e-10)
    }

    /// Non-negative Bogoliubov quasiparticle energies (upper half of the
    /// spectrum of `H`, ascending).
    pub fn quasiparticle_energies(&self) -> Result<Vec<f64>> {
        let eig = self.eigen()?;
        Ok(eig.values[self.modes..].to_vec())
    }

    /// Many-body ground-state energy `constant - ½ Σ ε_k`.
    pub fn ground_energy(&self) -> Result<f64> {
        Ok(self.constant - 0.5 * self.quasiparticle_energies()?.iter().sum::<f64>())
    }
}

/// `2 t0 cos k - mu0`.
pub fn dispersion(k: f64, t0: f64, mu0: f64) -> f64 {
    2.0 * t0 * k.cos() - mu0
}

/// Nambu matrix of `H_0` (or `H_0 + H_B` when `include_boundary`).
pub fn build_nambu(spec: &ModelSpec, include_boundary: bool) -> Result<NambuMatrix> {
    build_nambu_part(spec, if include_boundary { Part::Full } else { Part::Bulk })
}

pub fn build_nambu_part(spec: &ModelSpec, part: Part) -> Result<NambuMatrix> {
    spec.validate()?;
    nambu_unchecked(spec, part)
}

pub(crate) fn nambu_unchecked(spec: &ModelSpec, part: Part) -> Result<NambuMatrix> {
    let t = match terms(spec, part) {
        Terms::Fermion(t) if t.density.iter().all(|&(_, _, u)| u == 0.0) => t,
        Terms::Fermion(_) => {
            return Err(Error::UnsupportedModel("interacting fermion chain with U != 0 has no Nambu form".into()))
        }
        Terms::Spin(_) => return Err(Error::UnsupportedModel("XXZ spin chain has no Nambu form".into())),
    };
    let m = t.modes;
    let mut a = Mat::<c64>::zeros(m, m);
    let mut b = Mat::<c64>::zeros(m, m);
    for &(i, j, amp) in &t.hops {
        a[(i, j)] += c64::new(amp, 0.0);
        a[(j, i)] += c64::new(amp, 0.0);
    }
    for &(i, e) in &t.onsite {
        a[(i, i)] += c64::new(e, 0.0);
    }
    for &(i, j, d) in &t.pairs {
        b[(i, j)] += c64::new(d, 0.0);
        b[(j, i)] -= c64::new(d, 0.0);
    }
    NambuMatrix::from_blocks(a.as_ref(), b.as_ref())
}
