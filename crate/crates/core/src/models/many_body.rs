//! Dense many-body matrices on an occupation bit-string basis.

use faer::Mat;

use super::{terms, FermionTerms, ModelSpec, Part, SpinTerms, Terms};
use crate::ed::{BasisKind, Constraint, SectorBasis};
use crate::{Error, Result};

/// Default largest sector dimension accepted by the builders.
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Jordan-Wigner sign `(-1)^{#occupied modes below k}`.
#[inline]
fn jw_sign(bits: u64, k: usize) -> f64 {
    if (bits & ((1u64 << k) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn annihilate(bits: u64, k: usize) -> Option<(u64, f64)> {
    (bits >> k & 1 == 1).then(|| (bits ^ (1 << k), jw_sign(bits, k)))
}

#[inline]
fn create(bits: u64, k: usize) -> Option<(u64, f64)> {
    (bits >> k & 1 == 0).then(|| (bits | (1 << k), jw_sign(bits, k)))
}

/// `c_i^† c_j` on `bits`.
fn hop(bits: u64, i: usize, j: usize) -> Option<(u64, f64)> {
    let (b, s1) = annihilate(bits, j)?;
    let (b, s2) = create(b, i)?;
    Some((b, s1 * s2))
}

/// `c_i^† c_j^†` on `bits`.
fn pair_create(bits: u64, i: usize, j: usize) -> Option<(u64, f64)> {
    let (b, s1) = create(bits, j)?;
    let (b, s2) = create(b, i)?;
    Some((b, s1 * s2))
}

/// `c_j c_i` on `bits`.
fn pair_annihilate(bits: u64, i: usize, j: usize) -> Option<(u64, f64)> {
    let (b, s1) = annihilate(bits, i)?;
    let (b, s2) = annihilate(b, j)?;
    Some((b, s1 * s2))
}

#[inline]
fn occ(bits: u64, k: usize) -> f64 {
    (bits >> k & 1) as f64
}

fn fermion_row(t: &FermionTerms, bits: u64, out: &mut Vec<(u64, f64)>) {
    let mut diag = 0.0;
    for &(i, e) in &t.onsite {
        diag += e * occ(bits, i);
    }
    for &(i, j, u) in &t.density {
        diag += u * occ(bits, i) * occ(bits, j);
    }
    if diag != 0.0 {
        out.push((bits, diag));
    }
    for &(i, j, amp) in &t.hops {
        if i == j {
            out.push((bits, 2.0 * amp * occ(bits, i)));
            continue;
        }
        if let Some((b, s)) = hop(bits, i, j) {
            out.push((b, amp * s));
        }
        if let Some((b, s)) = hop(bits, j, i) {
            out.push((b, amp * s));
        }
    }
    for &(i, j, d) in t.pairs.iter().filter(|p| p.2 != 0.0) {
        if let Some((b, s)) = pair_create(bits, i, j) {
            out.push((b, d * s));
        }
        if let Some((b, s)) = pair_annihilate(bits, i, j) {
            out.push((b, d * s));
        }
    }
}

fn spin_row(t: &SpinTerms, bits: u64, out: &mut Vec<(u64, f64)>) {
    let z = |k: usize| 2.0 * occ(bits, k) - 1.0;
    let mut diag = 0.0;
    for &(i, j, jz) in &t.zz {
        diag += jz * z(i) * z(j);
    }
    for &(i, h) in &t.field {
        diag += h * z(i);
    }
    if diag != 0.0 {
        out.push((bits, diag));
    }
    // X_i X_j + Y_i Y_j = 2 (S^+_i S^-_j + S^-_i S^+_j)
    for &(i, j, jp) in &t.exchange {
        if (bits >> i & 1) != (bits >> j & 1) {
            out.push((bits ^ (1 << i) ^ (1 << j), 2.0 * jp));
        }
    }
    for &(i, d) in t.flip_x.iter().filter(|f| f.1 != 0.0) {
        out.push((bits ^ (1 << i), d));
    }
}

/// All `(bits', amplitude)` with `<bits'|H|bits> = amplitude` (duplicates summed by the caller).
pub(crate) fn row(terms: &Terms, bits: u64, out: &mut Vec<(u64, f64)>) {
    out.clear();
    match terms {
        Terms::Fermion(t) => fermion_row(t, bits, out),
        Terms::Spin(t) => spin_row(t, bits, out),
    }
}

fn check_basis(spec: &ModelSpec, sector: &SectorBasis, terms: &Terms) -> Result<()> {
    let expected = BasisKind::for_model(spec.kind);
    if sector.kind() != expected || sector.sites() != spec.l {
        return Err(Error::BasisMismatch(format!(
            "model {:?} on L = {} needs a {expected:?} basis on {} sites, got {:?} on {}",
            spec.kind,
            spec.l,
            spec.l,
            sector.kind(),
            sector.sites()
        )));
    }
    let (conserves_charge, conserves_parity) = match terms {
        Terms::Fermion(t) => (t.conserves_charge(), true),
        Terms::Spin(t) => (t.conserves_charge(), t.conserves_charge()),
    };
    match sector.constraint() {
        Constraint::FixedCount(_) if !conserves_charge => Err(Error::SectorIncompatible(
            "fixed-charge sector requested but the boundary term changes the charge".into(),
        )),
        Constraint::Parity(_) if !conserves_parity => Err(Error::SectorIncompatible(
            "fixed-parity sector requested but the Hamiltonian changes the parity".into(),
        )),
        _ => Ok(()),
    }
}

/// Dense real-symmetric matrix of `H_0` (or `H_0 + H_B`) on `sector`.
///
/// Every model in scope has real matrix elements in the occupation basis,
/// so the matrix is returned as `f64`.
pub fn build_many_body(spec: &ModelSpec, sector: &SectorBasis, include_boundary: bool) -> Result<Mat<f64>> {
    build_many_body_part(spec, sector, if include_boundary { Part::Full } else { Part::Bulk })
}

pub fn build_many_body_part(spec: &ModelSpec, sector: &SectorBasis, part: Part) -> Result<Mat<f64>> {
    spec.validate()?;
    many_body_unchecked(spec, sector, part)
}

pub(crate) fn many_body_unchecked(spec: &ModelSpec, sector: &SectorBasis, part: Part) -> Result<Mat<f64>> {
    if sector.dim() > DEFAULT_DIM_CAP {
        return Err(Error::CapExceeded { dim: sector.dim(), cap: DEFAULT_DIM_CAP });
    }
    let terms = terms(spec, part);
    check_basis(spec, sector, &terms)?;
    let dim = sector.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    let mut buf = Vec::new();
    for (col, &bits) in sector.states().iter().enumerate() {
        row(&terms, bits, &mut buf);
        for &(target, amp) in &buf {
            let r = sector.index_of(target).ok_or_else(|| {
                Error::SectorIncompatible(format!("state {target:#b} generated from {bits:#b} is outside the sector"))
            })?;
            h[(r, col)] += amp;
        }
    }
    Ok(h)
}

/// Sparse action of the boundary term between two sectors:
/// `(column in from, row in to, <to_row|H_B|from_col>)`.
pub fn boundary_action(spec: &ModelSpec, from: &SectorBasis, to: &SectorBasis) -> Result<Vec<(usize, usize, f64)>> {
    if !from.compatible_with(to) {
        return Err(Error::BasisMismatch("boundary action between sectors of different geometry".into()));
    }
    let mut spec = spec.clone();
    spec.boundary_on = true;
    let terms = terms(&spec, Part::Boundary);
    let expected = BasisKind::for_model(spec.kind);
    if from.kind() != expected || from.sites() != spec.l {
        return Err(Error::BasisMismatch(format!("{:?} basis does not match model {:?}", from.kind(), spec.kind)));
    }
    let mut out = Vec::new();
    let mut buf = Vec::new();
    for (col, &bits) in from.states().iter().enumerate() {
        row(&terms, bits, &mut buf);
        for &(target, amp) in &buf {
            if let Some(r) = to.index_of(target) {
                out.push((col, r, amp));
            }
        }
    }
    Ok(out)
}
