use serde::{Deserialize, Serialize};

use crate::models::{ModelKind, ModelSpec};
use crate::{Error, Result};

/// What a set bit means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    /// Bit `j` set: site `j` occupied.
    Fermion,
    /// Bit `j` set: spin `j` up (`σ^z = +1`).
    Spin,
    /// Bit `2j + s` set: site `j` occupied with spin `s` (0 = up, 1 = down).
    SpinfulFermion,
}

impl BasisKind {
    pub fn for_model(kind: ModelKind) -> Self {
        match kind {
            ModelKind::XxzSpin => Self::Spin,
            ModelKind::SpinfulFermion => Self::SpinfulFermion,
            _ => Self::Fermion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(bits: u64) -> Self {
        if bits.count_ones().is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }
}

/// Symmetry constraint selecting the sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    None,
    /// Fixed number of set bits: particle number `N`, or number of up
    /// spins `S^z + L/2`.
    FixedCount(usize),
    /// Fixed parity of the number of set bits.
    Parity(Parity),
}

/// Occupation bit strings of one symmetry sector, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    kind: BasisKind,
    sites: usize,
    constraint: Constraint,
    states: Vec<u64>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl SectorBasis {
    /// Enumerate a sector; errors with [`Error::CapExceeded`] before
    /// allocating when the dimension exceeds `cap`.
    pub fn enumerate(kind: BasisKind, sites: usize, constraint: Constraint, cap: usize) -> Result<Self> {
        let modes = match kind {
            BasisKind::SpinfulFermion => 2 * sites,
            _ => sites,
        };
        if modes == 0 || modes > 62 {
            return Err(Error::InvalidModel(format!("{modes} modes is outside the supported range 1..=62")));
        }
        let dim: u128 = match constraint {
            Constraint::None => 1u128 << modes,
            Constraint::FixedCount(n) => binomial(modes, n),
            Constraint::Parity(_) => 1u128 << (modes - 1),
        };
        if dim > cap as u128 {
            return Err(Error::CapExceeded { dim: usize::try_from(dim).unwrap_or(usize::MAX), cap });
        }
        if dim == 0 {
            return Err(Error::UnrealizableCharge(format!("{constraint:?} with {modes} modes")));
        }
        let states = match constraint {
            Constraint::None => (0..1u64 << modes).collect(),
            Constraint::Parity(p) => (0..1u64 << modes).filter(|&s| Parity::of(s) == p).collect(),
            Constraint::FixedCount(0) => vec![0],
            Constraint::FixedCount(n) => {
                let mut out = Vec::with_capacity(dim as usize);
                let limit = 1u64 << modes;
                let mut s = (1u64 << n) - 1;
                while s < limit {
                    out.push(s);
                    // next integer with the same popcount
                    let c = s & s.wrapping_neg();
                    let r = s + c;
                    s = (((r ^ s) >> 2) / c) | r;
                }
                out
            }
        };
        debug_assert_eq!(states.len() as u128, dim);
        Ok(Self { kind, sites, constraint, states })
    }

    /// Sector of the many-body model `spec` with the default dimension cap.
    pub fn for_model(spec: &ModelSpec, constraint: Constraint) -> Result<Self> {
        Self::enumerate(BasisKind::for_model(spec.kind), spec.l, constraint, crate::models::DEFAULT_DIM_CAP)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn modes(&self) -> usize {
        match self.kind {
            BasisKind::SpinfulFermion => 2 * self.sites,
            _ => self.sites,
        }
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.states.binary_search(&bits).ok()
    }

    pub fn contains(&self, bits: u64) -> bool {
        self.index_of(bits).is_some()
    }

    /// Charge carried by a bit string: `N` for fermions, `S^z` for spins.
    pub fn charge_of(&self, bits: u64) -> f64 {
        let n = bits.count_ones() as f64;
        match self.kind {
            BasisKind::Spin => n - 0.5 * self.sites as f64,
            _ => n,
        }
    }

    /// Number of set bits that realizes `charge`, if any.
    pub fn count_for_charge(&self, charge: f64) -> Result<usize> {
        let count = match self.kind {
            BasisKind::Spin => charge + 0.5 * self.sites as f64,
            _ => charge,
        };
        if count < -1e-9 || count > self.modes() as f64 + 1e-9 || (count - count.round()).abs() > 1e-9 {
            return Err(Error::UnrealizableCharge(format!("{charge} on {} sites", self.sites)));
        }
        Ok(count.round() as usize)
    }

    /// Same sector geometry (kind and size) as `other`.
    pub fn compatible_with(&self, other: &SectorBasis) -> bool {
        self.kind == other.kind && self.sites == other.sites
    }
}
