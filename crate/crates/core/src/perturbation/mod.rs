//! Degenerate perturbation theory around `H_0`: sector-resolved spectra,
//! near-degenerate cross-charge pairs, boundary matrix elements and the
//! energy-dependent effective Hamiltonian.

mod effective;

use std::sync::Arc;

use faer::Mat;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ed::{BasisKind, Constraint, SectorBasis};
use crate::linalg::SymmetricEigen;
use crate::models::{boundary_action, build_many_body, ModelKind, ModelSpec};
use crate::{Error, Result};

pub use effective::{effective_hamiltonian, EffectiveHamiltonian, DEFAULT_RESOLVENT_GUARD};

/// Fermion energy window used for the matrix-element criterion.
pub const FERMION_ENERGY_TOL: f64 = 0.1;
/// Spin-chain energy window used for the matrix-element criterion.
pub const SPIN_ENERGY_TOL: f64 = 0.3;

/// Eigen-decomposition of `H_0` restricted to one charge sector.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub charge: f64,
    pub basis: Arc<SectorBasis>,
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: Mat<f64>,
}

impl SectorSpectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector `k` written in a larger basis that contains this sector.
    pub fn embed(&self, k: usize, target: &SectorBasis) -> Result<Vec<f64>> {
        if !self.basis.compatible_with(target) {
            return Err(Error::BasisMismatch("target basis has a different geometry".into()));
        }
        let mut out = vec![0.0; target.dim()];
        for (i, &bits) in self.basis.states().iter().enumerate() {
            let j = target
                .index_of(bits)
                .ok_or_else(|| Error::BasisMismatch(format!("state {bits:#b} missing from target basis")))?;
            out[j] = self.vectors[(i, k)];
        }
        Ok(out)
    }
}

/// Number of set bits that realizes `charge` (`N`, or `S^z` for spins).
fn count_for(spec: &ModelSpec, charge: f64) -> Result<usize> {
    let offset = if spec.kind.is_spin() { spec.l as f64 / 2.0 } else { 0.0 };
    let c = charge + offset;
    if (c - c.round()).abs() > 1e-9 || c.round() < 0.0 || c.round() as usize > spec.modes() {
        return Err(Error::UnrealizableCharge(format!("charge {charge} in a system of {} modes", spec.modes())));
    }
    Ok(c.round() as usize)
}

/// Every charge label of the model: `0..=modes` for fermions, `-L/2..=L/2` for spins.
pub fn all_charges(spec: &ModelSpec) -> Vec<f64> {
    let offset = if spec.kind.is_spin() { spec.l as f64 / 2.0 } else { 0.0 };
    (0..=spec.modes()).map(|n| n as f64 - offset).collect()
}

/// The charge change produced by the boundary term of the model.
pub fn boundary_charge_step(spec: &ModelSpec) -> Result<f64> {
    match spec.kind {
        ModelKind::XxzSpin => Ok(1.0),
        ModelKind::Transport => Err(Error::UnsupportedModel("the transport coupling conserves total charge".into())),
        _ => Ok(2.0),
    }
}

/// Complete spectra of `H_0` (boundary off) in each requested charge sector.
pub fn sector_spectra(spec: &ModelSpec, charges: &[f64]) -> Result<Vec<SectorSpectrum>> {
    spec.validate()?;
    let counts = charges.iter().map(|&c| count_for(spec, c)).collect::<Result<Vec<_>>>()?;
    charges
        .par_iter()
        .zip(counts)
        .map(|(&charge, count)| {
            let basis = Arc::new(SectorBasis::for_model(spec, Constraint::FixedCount(count))?);
            let h0 = build_many_body(spec, &basis, false)?;
            let eig = SymmetricEigen::new(h0.as_ref(), 1e-10)?;
            Ok(SectorSpectrum { charge, basis, values: eig.values, vectors: eig.vectors })
        })
        .collect()
}

/// Two eigenstates of `H_0` in different charge sectors with nearly equal energy.
/// States are referenced by `(sector index, eigen index)` into the spectra list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneratePair {
    pub sector_a: usize,
    pub state_a: usize,
    pub charge_a: f64,
    pub energy_a: f64,
    pub sector_b: usize,
    pub state_b: usize,
    pub charge_b: f64,
    pub energy_b: f64,
    pub gap: f64,
}

/// Row range `lo..hi` of sector `b` that pairs with state `i` of sector `a`.
struct Block {
    a: usize,
    b: usize,
    i: usize,
    lo: usize,
    hi: usize,
}

/// Pairs `(A, B)` with `charge_B - charge_A = delta_charge` and
/// `|E_A - E_B| < energy_tol`. If more than `max_pairs` qualify, a uniform
/// sample of that size is drawn with `seed`; the result is ordered by sector
/// then energy index either way.
pub fn find_pairs(
    spectra: &[SectorSpectrum],
    delta_charge: f64,
    energy_tol: f64,
    max_pairs: usize,
    seed: u64,
) -> Vec<DegeneratePair> {
    let (blocks, total) = pair_blocks(spectra, delta_charge, energy_tol);
    let picks: Vec<usize> = if total <= max_pairs {
        (0..total).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = sample(&mut rng, total, max_pairs).into_vec();
        v.sort_unstable();
        v
    };

    let mut out = Vec::with_capacity(picks.len());
    let mut offset = 0;
    let mut next = picks.iter().peekable();
    for blk in &blocks {
        let end = offset + (blk.hi - blk.lo);
        while let Some(&&p) = next.peek() {
            if p >= end {
                break;
            }
            let (sa, sb) = (&spectra[blk.a], &spectra[blk.b]);
            let j = blk.lo + (p - offset);
            out.push(DegeneratePair {
                sector_a: blk.a,
                state_a: blk.i,
                charge_a: sa.charge,
                energy_a: sa.values[blk.i],
                sector_b: blk.b,
                state_b: j,
                charge_b: sb.charge,
                energy_b: sb.values[j],
                gap: (sa.values[blk.i] - sb.values[j]).abs(),
            });
            next.next();
        }
        offset = end;
    }
    out
}

/// Number of qualifying pairs, without materializing them.
pub fn count_pairs(spectra: &[SectorSpectrum], delta_charge: f64, energy_tol: f64) -> usize {
    pair_blocks(spectra, delta_charge, energy_tol).1
}

fn pair_blocks(spectra: &[SectorSpectrum], delta_charge: f64, energy_tol: f64) -> (Vec<Block>, usize) {
    let mut blocks = Vec::new();
    let mut total = 0;
    for (a, sa) in spectra.iter().enumerate() {
        for (b, sb) in spectra.iter().enumerate() {
            if ((sb.charge - sa.charge) - delta_charge).abs() > 1e-6 {
                continue;
            }
            for (i, &e) in sa.values.iter().enumerate() {
                let lo = sb.values.partition_point(|&x| x <= e - energy_tol);
                let hi = sb.values.partition_point(|&x| x < e + energy_tol);
                if hi > lo {
                    total += hi - lo;
                    blocks.push(Block { a, b, i, lo, hi });
                }
            }
        }
    }
    (blocks, total)
}

/// `|<B|H_B|A>|` for each pair, plus their mean.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryElements {
    pub values: Vec<f64>,
    pub mean: f64,
}

/// Boundary matrix elements between the paired eigenvectors, with `H_B`
/// taken from `spec` (forced on). The mean is zero for an empty list.
pub fn boundary_matrix_element(spec: &ModelSpec, spectra: &[SectorSpectrum], pairs: &[DegeneratePair]) -> Result<BoundaryElements> {
    let mut cache: std::collections::HashMap<(usize, usize), Vec<(usize, usize, f64)>> = Default::default();
    let mut values = Vec::with_capacity(pairs.len());
    for p in pairs {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry((p.sector_a, p.sector_b)) {
            let action = boundary_action(spec, &spectra[p.sector_a].basis, &spectra[p.sector_b].basis)?;
            e.insert(action);
        }
        let action = &cache[&(p.sector_a, p.sector_b)];
        let va = spectra[p.sector_a].vectors.col(p.state_a);
        let vb = spectra[p.sector_b].vectors.col(p.state_b);
        let el: f64 = action.iter().map(|&(col, row, amp)| vb[row] * amp * va[col]).sum();
        values.push(el.abs());
    }
    let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
    Ok(BoundaryElements { values, mean })
}

/// Outcome of the matrix-element criterion at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionPoint {
    pub mean_element: f64,
    pub n_pairs: usize,
    pub n_qualifying: usize,
    pub energy_tol: f64,
}

/// Default energy window for the model family.
pub fn default_energy_tol(spec: &ModelSpec) -> f64 {
    if spec.kind.is_spin() {
        SPIN_ENERGY_TOL
    } else {
        FERMION_ENERGY_TOL
    }
}

/// Spectra over every charge sector, up to `max_pairs` sampled pairs across
/// the whole spectrum, and their mean boundary element.
pub fn boundary_criterion(spec: &ModelSpec, energy_tol: f64, max_pairs: usize, seed: u64) -> Result<CriterionPoint> {
    let step = boundary_charge_step(spec)?;
    let spectra = sector_spectra(spec, &all_charges(spec))?;
    let n_qualifying = count_pairs(&spectra, step, energy_tol);
    let pairs = find_pairs(&spectra, step, energy_tol, max_pairs, seed);
    let el = boundary_matrix_element(spec, &spectra, &pairs)?;
    Ok(CriterionPoint { mean_element: el.mean, n_pairs: pairs.len(), n_qualifying, energy_tol })
}

/// Cross-charge block statistics of `PHP` at one system size.
#[derive(Debug, Clone, Serialize)]
pub struct OffDiagRow {
    pub l: usize,
    pub n_pairs: usize,
    pub mean: f64,
    pub max: f64,
}

/// For each size, all cross-charge pairs within `energy_tol` and the mean and
/// largest `|<M+step|H_B|M>|` among them.
pub fn php_offdiag_scaling(spec: &ModelSpec, sizes: &[usize], energy_tol: f64) -> Result<Vec<OffDiagRow>> {
    let step = boundary_charge_step(spec)?;
    sizes
        .iter()
        .map(|&l| {
            let mut s = spec.clone();
            s.l = l;
            let spectra = sector_spectra(&s, &all_charges(&s))?;
            let pairs = find_pairs(&spectra, step, energy_tol, usize::MAX, 0);
            let el = boundary_matrix_element(&s, &spectra, &pairs)?;
            let max = el.values.iter().copied().fold(0.0, f64::max);
            Ok(OffDiagRow { l, n_pairs: pairs.len(), mean: el.mean, max })
        })
        .collect()
}

/// The basis of every state with the given kind and size, for embedding.
pub fn full_basis(spec: &ModelSpec) -> Result<SectorBasis> {
    SectorBasis::enumerate(BasisKind::for_model(spec.kind), spec.l, Constraint::None, crate::models::DEFAULT_DIM_CAP)
}

#[cfg(test)]
mod tests;
