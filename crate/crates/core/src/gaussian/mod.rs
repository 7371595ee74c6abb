//! Fermionic Gaussian states in the Nambu correlation-matrix representation.
//!
//! A state is stored as `Γ_ab = <α_a α_b^†>` with `α = (c_1..c_M, c_1^†..c_M^†)`.
//! Under `H = ½ α^† h α + const` the Nambu operators evolve as
//! `α(t) = e^{-iht} α`, so `Γ(t) = U Γ U^†` with `U = e^{-iht}`.

use faer::{c64, Mat, MatRef};

use crate::linalg::{hermitian_deviation, HermitianEigen};
use crate::models::NambuMatrix;
use crate::{Error, Result};

/// How single-particle modes map onto sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeLayout {
    /// Mode `j` is site `j`.
    Spinless,
    /// Mode `2j + s` is site `j` with spin `s` (0 = up, 1 = down).
    Spinful,
}

#[derive(Debug, Clone)]
pub struct GaussianState {
    modes: usize,
    layout: ModeLayout,
    gamma: Mat<c64>,
}

/// Cached diagonalization of a Nambu matrix; hands out `e^{-iht}`.
#[derive(Debug, Clone)]
pub struct NambuPropagator {
    modes: usize,
    eig: HermitianEigen,
}

impl NambuPropagator {
    pub fn new(h: &NambuMatrix) -> Result<Self> {
        Ok(Self { modes: h.modes(), eig: h.eigen()? })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn unitary(&self, t: f64) -> Mat<c64> {
        self.eig.propagator(t)
    }
}

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

impl GaussianState {
    /// Occupation-number product state on spinless modes.
    pub fn product_state(occupations: &[bool]) -> Self {
        Self::product_with_layout(occupations, ModeLayout::Spinless)
    }

    /// Occupation-number product state with an explicit mode layout.
    pub fn product_with_layout(occupations: &[bool], layout: ModeLayout) -> Self {
        let m = occupations.len();
        let diag = |a: usize| if a < m { !occupations[a] } else { occupations[a - m] };
        let gamma = Mat::from_fn(2 * m, 2 * m, |a, b| if a == b && diag(a) { c64::new(1.0, 0.0) } else { zero() });
        Self { modes: m, layout, gamma }
    }

    pub fn from_bits(modes: usize, bits: u64, layout: ModeLayout) -> Self {
        let occ: Vec<bool> = (0..modes).map(|k| bits >> k & 1 == 1).collect();
        Self::product_with_layout(&occ, layout)
    }

    /// `U Γ_0 U^†` for the product state `occupations`, using that `Γ_0` is a
    /// 0/1 diagonal: only the selected columns of `U` enter.
    pub fn product_evolved(occupations: &[bool], layout: ModeLayout, u: MatRef<'_, c64>) -> Result<Self> {
        let m = occupations.len();
        if u.nrows() != 2 * m || u.ncols() != 2 * m {
            return Err(Error::DimensionMismatch { expected: 2 * m, found: u.nrows() });
        }
        let cols: Vec<usize> = (0..m).filter(|&i| !occupations[i]).chain((0..m).filter(|&i| occupations[i]).map(|i| i + m)).collect();
        let us = Mat::from_fn(2 * m, cols.len(), |a, k| u[(a, cols[k])]);
        let gamma = &us * us.adjoint();
        Ok(Self { modes: m, layout, gamma })
    }

    /// Build from a correlation matrix; checks shape, Hermiticity, the
    /// particle-hole constraint and purity.
    pub fn from_gamma(gamma: Mat<c64>, layout: ModeLayout) -> Result<Self> {
        let n = gamma.nrows();
        if gamma.ncols() != n || !n.is_multiple_of(2) {
            return Err(Error::DimensionMismatch { expected: n, found: gamma.ncols() });
        }
        let state = Self { modes: n / 2, layout, gamma };
        let dev = state.hermiticity_deviation().max(state.particle_hole_deviation()).max(state.purity_deviation());
        if dev > 1e-9 {
            return Err(Error::InvalidModel(format!("not a pure Gaussian correlation matrix (deviation {dev:e})")));
        }
        Ok(state)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn gamma(&self) -> MatRef<'_, c64> {
        self.gamma.as_ref()
    }

    /// `G_ij = <c_i^† c_j> = δ_ij - Γ_ji`.
    pub fn g(&self, i: usize, j: usize) -> c64 {
        let d = if i == j { c64::new(1.0, 0.0) } else { zero() };
        d - self.gamma[(j, i)]
    }

    /// `F_ij = <c_i c_j>`.
    pub fn f(&self, i: usize, j: usize) -> c64 {
        self.gamma[(i, self.modes + j)]
    }

    /// `U Γ U^†`.
    pub fn transformed(&self, u: MatRef<'_, c64>) -> Result<Self> {
        let n = 2 * self.modes;
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
        }
        let gamma = u * &self.gamma * u.adjoint();
        Ok(Self { modes: self.modes, layout: self.layout, gamma })
    }

    /// `Γ(t) = e^{-iht} Γ e^{iht}`.
    pub fn evolve(&self, h: &NambuMatrix, t: f64) -> Result<Self> {
        if h.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, found: h.modes() });
        }
        let dev = hermitian_deviation(h.matrix());
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        let u = NambuPropagator::new(h)?.unitary(t);
        self.transformed(u.as_ref())
    }

    /// One drive period: `Γ -> (u_B u_0) Γ (u_B u_0)^†`.
    pub fn floquet_step(&self, ub: MatRef<'_, c64>, u0: MatRef<'_, c64>) -> Result<Self> {
        let n = 2 * self.modes;
        for u in [ub, u0] {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
            }
        }
        let period = ub * u0;
        self.transformed(period.as_ref())
    }

    pub fn particle_number(&self) -> f64 {
        (0..self.modes).map(|i| self.g(i, i).re).sum()
    }

    pub fn spin_z(&self) -> Result<f64> {
        if self.layout != ModeLayout::Spinful {
            return Err(Error::UnsupportedModel("spin_z needs the spinful mode layout".into()));
        }
        Ok((0..self.modes / 2).map(|j| 0.5 * (self.g(2 * j, 2 * j).re - self.g(2 * j + 1, 2 * j + 1).re)).sum())
    }

    /// Particle number restricted to `modes`.
    pub fn subsystem_particle_number(&self, modes: &[usize]) -> Result<f64> {
        self.check_modes(modes)?;
        Ok(modes.iter().map(|&i| self.g(i, i).re).sum())
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        if let Some(&bad) = modes.iter().find(|&&i| i >= self.modes) {
            return Err(Error::InvalidSites(format!("mode {bad} out of range 0..{}", self.modes)));
        }
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSites("repeated mode index".into()));
        }
        Ok(())
    }

    /// Wick contraction of `<N_S^2> - <N_S>^2`:
    /// `Σ_{i,j∈S} [G_ij (δ_ij - G_ji) + |F_ij|^2]`, clamped at zero.
    fn wick_variance(&self, modes: &[usize]) -> f64 {
        let mut var = 0.0;
        for &i in modes {
            var += self.g(i, i).re;
            for &j in modes {
                var += -self.g(i, j).norm_sqr() + self.f(i, j).norm_sqr();
            }
        }
        var.max(0.0)
    }

    /// Variance of the total particle number.
    pub fn charge_variance(&self) -> f64 {
        let all: Vec<usize> = (0..self.modes).collect();
        self.wick_variance(&all)
    }

    /// Variance of the particle number on the given modes.
    pub fn subsystem_charge_variance(&self, modes: &[usize]) -> Result<f64> {
        self.check_modes(modes)?;
        Ok(self.wick_variance(modes))
    }

    /// `<½ α^† h α> + const = const - ½ Tr(h Γ)` (the trace of `h` vanishes).
    pub fn energy(&self, h: &NambuMatrix) -> Result<f64> {
        if h.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, found: h.modes() });
        }
        let hm = h.matrix();
        let n = 2 * self.modes;
        let mut tr = zero();
        for a in 0..n {
            for b in 0..n {
                tr += hm[(a, b)] * self.gamma[(b, a)];
            }
        }
        Ok(h.constant() - 0.5 * tr.re)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermitian_deviation(self.gamma.as_ref())
    }

    /// Largest entry of `|Γ + X Γ^T X - I|`.
    pub fn particle_hole_deviation(&self) -> f64 {
        let m = self.modes;
        let swap = |a: usize| if a < m { a + m } else { a - m };
        let mut dev = 0.0_f64;
        for a in 0..2 * m {
            for b in 0..2 * m {
                let id = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((self.gamma[(a, b)] + self.gamma[(swap(b), swap(a))] - c64::new(id, 0.0)).norm());
            }
        }
        dev
    }

    /// Largest entry of `|Γ^2 - Γ|`.
    pub fn purity_deviation(&self) -> f64 {
        let sq = &self.gamma * &self.gamma;
        crate::linalg::max_abs_diff(sq.as_ref(), self.gamma.as_ref())
    }

    /// Largest entry of `|F + F^T|`.
    pub fn pairing_antisymmetry_deviation(&self) -> f64 {
        let m = self.modes;
        let mut dev = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                dev = dev.max((self.f(i, j) + self.f(j, i)).norm());
            }
        }
        dev
    }
}
