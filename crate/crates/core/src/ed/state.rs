use std::sync::Arc;

use faer::{c64, Mat};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BasisKind, SectorBasis};
use crate::{Error, Result};

/// Normalized amplitude vector on a [`SectorBasis`].
#[derive(Debug, Clone)]
pub struct DenseState {
    basis: Arc<SectorBasis>,
    amps: Vec<c64>,
}

impl DenseState {
    pub fn new(basis: Arc<SectorBasis>, amps: Vec<c64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amps.len() });
        }
        let state = Self { basis, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidModel(format!("state norm {norm} differs from 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_parts(basis: Arc<SectorBasis>, amps: Vec<c64>) -> Self {
        debug_assert_eq!(amps.len(), basis.dim());
        Self { basis, amps }
    }

    /// The computational basis vector `|bits>`.
    pub fn basis_vector(basis: Arc<SectorBasis>, bits: u64) -> Result<Self> {
        let index = basis
            .index_of(bits)
            .ok_or_else(|| Error::UnrealizableCharge(format!("bit string {bits:#b} is not in the sector")))?;
        let mut amps = vec![c64::new(0.0, 0.0); basis.dim()];
        amps[index] = c64::new(1.0, 0.0);
        Ok(Self { basis, amps })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn moments(&self, weight: impl Fn(u64) -> f64) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for (a, &bits) in self.amps.iter().zip(self.basis.states()) {
            let p = a.norm_sqr();
            let w = weight(bits);
            m1 += p * w;
            m2 += p * w * w;
        }
        (m1, m2)
    }

    /// `<Q>` and `<Q^2> - <Q>^2` for a charge diagonal in the occupation basis.
    pub fn diagonal_moments(&self, weight: impl Fn(u64) -> f64) -> (f64, f64) {
        let (m1, m2) = self.moments(weight);
        (m1, (m2 - m1 * m1).max(0.0))
    }

    /// Mean and variance of the number of set bits among `modes`.
    pub fn subsystem_charge(&self, modes: &[usize]) -> Result<(f64, f64)> {
        let mut mask = 0u64;
        for &k in modes {
            if k >= self.basis.modes() {
                return Err(Error::InvalidSites(format!("mode {k} out of range 0..{}", self.basis.modes())));
            }
            mask |= 1 << k;
        }
        Ok(self.diagonal_moments(|b| (b & mask).count_ones() as f64))
    }

    /// `<S^z>` of a spinful-fermion state.
    pub fn spin_z(&self) -> Result<f64> {
        if self.basis.kind() != BasisKind::SpinfulFermion {
            return Err(Error::UnsupportedModel("spin_z needs a spinful-fermion basis".into()));
        }
        let up_mask = (0..self.basis.sites()).fold(0u64, |m, j| m | 1 << (2 * j));
        let (m, _) = self.diagonal_moments(|b| {
            let up = (b & up_mask).count_ones() as f64;
            let down = (b & !up_mask).count_ones() as f64;
            0.5 * (up - down)
        });
        Ok(m)
    }

    /// `<(-1)^N>`.
    pub fn parity(&self) -> f64 {
        self.moments(|b| if b.count_ones() % 2 == 0 { 1.0 } else { -1.0 }).0
    }

    /// `<ψ|H|ψ>` for a real symmetric `H` on the same basis.
    pub fn expectation(&self, h: &Mat<f64>) -> Result<f64> {
        let n = self.amps.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h.nrows() });
        }
        let mut acc = c64::new(0.0, 0.0);
        for j in 0..n {
            let aj = self.amps[j];
            if aj.norm_sqr() == 0.0 {
                continue;
            }
            let col = h.col(j);
            let mut hv = c64::new(0.0, 0.0);
            for i in 0..n {
                hv += self.amps[i].conj() * col[i];
            }
            acc += hv * aj;
        }
        Ok(acc.re)
    }
}

/// `<N>` (or `<S^z>` on a spin basis).
pub fn charge_mean_mb(psi: &DenseState) -> f64 {
    let basis = psi.basis.clone();
    psi.diagonal_moments(|b| basis.charge_of(b)).0
}

/// `<N^2> - <N>^2` (or the `S^z` variance on a spin basis).
pub fn charge_variance_mb(psi: &DenseState) -> f64 {
    let basis = psi.basis.clone();
    psi.diagonal_moments(|b| basis.charge_of(b)).1
}

/// Uniformly random `modes`-bit string with exactly `count` set bits.
pub fn random_bits<R: Rng + ?Sized>(modes: usize, count: usize, rng: &mut R) -> Result<u64> {
    if count > modes || modes > 62 {
        return Err(Error::UnrealizableCharge(format!("{count} particles in {modes} modes")));
    }
    Ok(sample(rng, modes, count).iter().fold(0u64, |b, k| b | 1 << k))
}

/// Spinful filling with one fermion per site and `n_up` random sites spin-up.
pub fn random_spinful_singlet_filling<R: Rng + ?Sized>(sites: usize, n_up: usize, rng: &mut R) -> Result<u64> {
    let up = random_bits(sites, n_up, rng)?;
    Ok((0..sites).fold(0u64, |b, j| b | if up >> j & 1 == 1 { 1 << (2 * j) } else { 1 << (2 * j + 1) }))
}

/// Random computational basis state with the given charge (`N` or `S^z`),
/// reproducible for a fixed seed.
pub fn random_sector_product_state(basis: &Arc<SectorBasis>, charge: f64, seed: u64) -> Result<DenseState> {
    let count = basis.count_for_charge(charge)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = random_bits(basis.modes(), count, &mut rng)?;
    DenseState::basis_vector(basis.clone(), bits)
}
