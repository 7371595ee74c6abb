use faer::Mat;
use proptest::prelude::*;

use super::*;
use crate::ed::Parity;
use crate::models::{build_many_body_part, dispersion, Part};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn free_sector_spectra_are_dispersion_sums() {
    let l = 8;
    let (t0, mu0) = (1.0, 0.7);
    let spec = ModelSpec::free(l, t0, mu0, 1.0);
    let eps: Vec<f64> = (0..l).map(|n| dispersion(2.0 * std::f64::consts::PI * n as f64 / l as f64, t0, mu0)).collect();
    let spectra = sector_spectra(&spec, &[0.0, 3.0, 4.0]).unwrap();
    for s in &spectra {
        let n = s.charge as u32;
        let expected = sorted((0u32..1 << l).filter(|b| b.count_ones() == n).map(|b| (0..l).filter(|&k| b >> k & 1 == 1).map(|k| eps[k]).sum()).collect());
        assert_eq!(s.dim(), expected.len());
        for (x, y) in s.values.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn spectra_are_sorted_and_orthonormal() {
    let spec = ModelSpec::interacting(8, 1.0, 1.0, 2.0, 1.0);
    for s in sector_spectra(&spec, &all_charges(&spec)).unwrap() {
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = s.vectors.transpose() * &s.vectors;
        let id = Mat::<f64>::identity(s.dim(), s.dim());
        assert!((&gram - &id).norm_max() < 1e-10);
    }
    assert!(sector_spectra(&spec, &[]).unwrap().is_empty());
    assert!(matches!(sector_spectra(&spec, &[9.0]), Err(Error::UnrealizableCharge(_))));
}

#[test]
fn spin_field_shifts_sectors_by_two_h_sz() {
    let h = 1.3;
    let base = ModelSpec::xxz(8, 1.0, 0.6, 0.0, 1.0);
    let field = ModelSpec::xxz(8, 1.0, 0.6, h, 1.0);
    let charges = all_charges(&base);
    assert_eq!(charges.first(), Some(&-4.0));
    for (a, b) in sector_spectra(&base, &charges).unwrap().iter().zip(sector_spectra(&field, &charges).unwrap()) {
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((y - x - 2.0 * h * a.charge).abs() < 1e-10);
        }
    }
}

fn brute_force_pairs(spectra: &[SectorSpectrum], delta: f64, tol: f64) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for (a, sa) in spectra.iter().enumerate() {
        for (b, sb) in spectra.iter().enumerate() {
            if ((sb.charge - sa.charge) - delta).abs() > 1e-6 {
                continue;
            }
            for i in 0..sa.dim() {
                for j in 0..sb.dim() {
                    if (sa.values[i] - sb.values[j]).abs() < tol {
                        out.push((a, i, b, j));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn exhaustive_pairs_match_brute_force() {
    let spec = ModelSpec::interacting(8, 1.0, 2.0, 2.0, 1.0);
    let spectra = sector_spectra(&spec, &all_charges(&spec)).unwrap();
    let brute = brute_force_pairs(&spectra, 2.0, 0.1);
    let found: Vec<_> = find_pairs(&spectra, 2.0, 0.1, usize::MAX, 0).iter().map(|p| (p.sector_a, p.state_a, p.sector_b, p.state_b)).collect();
    assert!(!brute.is_empty());
    assert_eq!(found, brute);
    assert_eq!(count_pairs(&spectra, 2.0, 0.1), brute.len());

    let spin = ModelSpec::xxz(8, 1.0, 1.0, 0.5, 1.0);
    let spectra = sector_spectra(&spin, &all_charges(&spin)).unwrap();
    assert_eq!(count_pairs(&spectra, 1.0, 0.3), brute_force_pairs(&spectra, 1.0, 0.3).len());
    assert_eq!(count_pairs(&spectra, -1.0, 0.3), count_pairs(&spectra, 1.0, 0.3));
}

#[test]
fn sampled_pairs_are_a_deterministic_subset() {
    let spec = ModelSpec::interacting(8, 1.0, 2.0, 2.0, 1.0);
    let spectra = sector_spectra(&spec, &all_charges(&spec)).unwrap();
    let all = find_pairs(&spectra, 2.0, 0.1, usize::MAX, 0);
    let a = find_pairs(&spectra, 2.0, 0.1, 50, 3);
    let b = find_pairs(&spectra, 2.0, 0.1, 50, 3);
    let c = find_pairs(&spectra, 2.0, 0.1, 50, 4);
    assert_eq!(a.len(), 50);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.iter().all(|p| all.contains(p) && p.gap < 0.1 && (p.charge_b - p.charge_a - 2.0).abs() < 1e-12));
    assert!(find_pairs(&spectra, 2.0, 0.0, 1000, 0).is_empty());
}

#[test]
fn matrix_elements_match_dense_boundary_operator() {
    let spec = ModelSpec::interacting(8, 1.0, 0.5, 2.0, 1.0);
    let spectra = sector_spectra(&spec, &all_charges(&spec)).unwrap();
    let pairs = find_pairs(&spectra, 2.0, 0.1, 40, 1);
    let el = boundary_matrix_element(&spec, &spectra, &pairs).unwrap();

    let full = full_basis(&spec).unwrap();
    let hb = build_many_body_part(&spec, &full, Part::Boundary).unwrap();
    for (p, &v) in pairs.iter().zip(&el.values) {
        let a = spectra[p.sector_a].embed(p.state_a, &full).unwrap();
        let b = spectra[p.sector_b].embed(p.state_b, &full).unwrap();
        let mut acc = 0.0;
        for i in 0..full.dim() {
            for j in 0..full.dim() {
                acc += b[i] * hb[(i, j)] * a[j];
            }
        }
        assert!((acc.abs() - v).abs() < 1e-12);
    }
    assert!((el.mean - el.values.iter().sum::<f64>() / el.values.len() as f64).abs() < 1e-15);
}

#[test]
fn matrix_elements_are_swap_symmetric_and_linear_in_delta() {
    let spec = ModelSpec::interacting(8, 1.0, 1.0, 2.0, 1.0);
    let spectra = sector_spectra(&spec, &all_charges(&spec)).unwrap();
    let pairs = find_pairs(&spectra, 2.0, 0.1, 30, 9);
    let forward = boundary_matrix_element(&spec, &spectra, &pairs).unwrap();

    let swapped: Vec<DegeneratePair> = pairs
        .iter()
        .map(|p| DegeneratePair {
            sector_a: p.sector_b,
            state_a: p.state_b,
            charge_a: p.charge_b,
            energy_a: p.energy_b,
            sector_b: p.sector_a,
            state_b: p.state_a,
            charge_b: p.charge_a,
            energy_b: p.energy_a,
            gap: p.gap,
        })
        .collect();
    let backward = boundary_matrix_element(&spec, &spectra, &swapped).unwrap();
    for (x, y) in forward.values.iter().zip(&backward.values) {
        assert!((x - y).abs() < 1e-12);
    }

    let mut doubled = spec.clone();
    doubled.delta = 2.0;
    let twice = boundary_matrix_element(&doubled, &spectra, &pairs).unwrap();
    for (x, y) in forward.values.iter().zip(&twice.values) {
        assert!((2.0 * x - y).abs() < 1e-12);
    }

    let mut off = spec.clone();
    off.delta = 0.0;
    assert!(boundary_matrix_element(&off, &spectra, &pairs).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn embedding_rejects_other_geometry() {
    let spec = ModelSpec::free(6, 1.0, 0.0, 1.0);
    let s = &sector_spectra(&spec, &[2.0]).unwrap()[0];
    let other = full_basis(&ModelSpec::free(8, 1.0, 0.0, 1.0)).unwrap();
    assert!(matches!(s.embed(0, &other), Err(Error::BasisMismatch(_))));
    let odd = SectorBasis::for_model(&spec, Constraint::Parity(Parity::Odd)).unwrap();
    assert!(matches!(s.embed(0, &odd), Err(Error::BasisMismatch(_))));
}

#[test]
fn gapped_free_chain_has_no_cross_charge_elements() {
    let rows = php_offdiag_scaling(&ModelSpec::free(8, 1.0, 3.0, 1.0), &[6, 8], 1.0).unwrap();
    assert!(rows.iter().all(|r| r.max < 1e-10));
    let off = php_offdiag_scaling(&ModelSpec::free(8, 1.0, 0.0, 0.0), &[8], 1e-6).unwrap();
    assert!(off[0].n_pairs > 0 && off[0].max == 0.0);
    assert!(php_offdiag_scaling(&ModelSpec::transport(8, 1.0, 1.0, 0.0, 0.0, 1.0), &[8], 0.1).is_err());
}

/// Setup shared by the effective-Hamiltonian tests: `H = H_0 + H_B` on the
/// even-parity sector and `P` spanned by the `H_0` eigenstates in a window.
fn heff_setup(spec: &ModelSpec, center: f64, width: f64) -> (SectorBasis, Mat<f64>, Mat<f64>) {
    let basis = SectorBasis::for_model(spec, Constraint::Parity(Parity::Even)).unwrap();
    let h = build_many_body(spec, &basis, true).unwrap();
    let charges: Vec<f64> = all_charges(spec).into_iter().filter(|c| (*c as usize).is_multiple_of(2)).collect();
    let spectra = sector_spectra(spec, &charges).unwrap();
    let mut cols = Vec::new();
    for s in &spectra {
        for k in 0..s.dim() {
            if (s.values[k] - center).abs() < width {
                cols.push(s.embed(k, &basis).unwrap());
            }
        }
    }
    let p = Mat::from_fn(basis.dim(), cols.len(), |i, j| cols[j][i]);
    (basis, h, p)
}

#[test]
fn full_subspace_reproduces_h() {
    let spec = ModelSpec::interacting(6, 1.0, 0.5, 2.0, 1.0);
    let (_, h, p) = heff_setup(&spec, 0.0, 1e6);
    assert_eq!(p.ncols(), p.nrows());
    let eff = effective_hamiltonian(&h, &p, 0.3, DEFAULT_RESOLVENT_GUARD).unwrap();
    let back = &p * &eff.heff * p.transpose();
    assert!((&back - &h).norm_max() < 1e-10);
}

#[test]
fn single_eigenvector_gives_its_eigenvalue() {
    let spec = ModelSpec::interacting(6, 1.0, 0.5, 2.0, 1.0);
    let basis = SectorBasis::for_model(&spec, Constraint::Parity(Parity::Even)).unwrap();
    let h = build_many_body(&spec, &basis, true).unwrap();
    let eig = SymmetricEigen::new(h.as_ref(), 1e-10).unwrap();
    let k = 7;
    let p = Mat::from_fn(basis.dim(), 1, |i, _| eig.vectors[(i, k)]);
    for shift in [0.37, -1.1] {
        let e = eig.values[k] + shift;
        let eff = effective_hamiltonian(&h, &p, e, DEFAULT_RESOLVENT_GUARD).unwrap();
        assert_eq!(eff.dim(), 1);
        assert!((eff.heff[(0, 0)] - eig.values[k]).abs() < 1e-10);
        assert!((eff.php[(0, 0)] - eig.values[k]).abs() < 1e-10);
    }
}

#[test]
fn exact_eigenpairs_satisfy_projected_equation() {
    for (spec, center) in [(ModelSpec::interacting(8, 1.0, 0.5, 2.0, 1.0), -2.0), (ModelSpec::free(8, 1.0, 3.0, 1.0), -12.0)] {
        let (basis, h, p) = heff_setup(&spec, center, 1.5);
        assert!(p.ncols() > 1 && p.ncols() < basis.dim());
        let eig = SymmetricEigen::new(h.as_ref(), 1e-10).unwrap();
        let mut checked = 0;
        for k in 0..basis.dim() {
            let psi: Vec<f64> = eig.vectors.col(k).iter().copied().collect();
            // the projected equation is only informative where ψ has weight in P
            let weight = (p.transpose() * Mat::from_fn(psi.len(), 1, |i, _| psi[i])).norm_l2();
            if weight < 0.1 {
                continue;
            }
            match effective_hamiltonian(&h, &p, eig.values[k], DEFAULT_RESOLVENT_GUARD) {
                Ok(eff) => {
                    assert!(eff.residual(&psi).unwrap() < 1e-8, "{:?} k={k}", spec.kind);
                    assert!(eff.hermiticity_deviation() < 1e-10);
                    checked += 1;
                }
                Err(Error::SingularResolvent { .. }) => {}
                Err(e) => panic!("{e}"),
            }
            if checked == 20 {
                break;
            }
        }
        assert_eq!(checked, 20, "{:?}", spec.kind);
    }
}

#[test]
fn gapped_php_is_block_diagonal_in_charge() {
    let spec = ModelSpec::free(8, 1.0, 3.0, 1.0);
    let (basis, h, p) = heff_setup(&spec, -12.0, 1.0);
    let eff = effective_hamiltonian(&h, &p, -11.7, DEFAULT_RESOLVENT_GUARD).unwrap();
    let charge = |j: usize| (0..basis.dim()).filter(|&i| p[(i, j)].abs() > 1e-8).map(|i| basis.state(i).count_ones()).next().unwrap();
    for i in 0..p.ncols() {
        for j in 0..p.ncols() {
            if charge(i) != charge(j) {
                assert!(eff.php[(i, j)].abs() < 1e-12);
            }
        }
    }
}

#[test]
fn resolvent_guard_and_input_checks() {
    let spec = ModelSpec::interacting(6, 1.0, 0.5, 2.0, 1.0);
    let (_, h, p) = heff_setup(&spec, -1.0, 1.0);
    let eff = effective_hamiltonian(&h, &p, 0.0, 0.0).unwrap();
    // an eigenvalue of QHQ sits exactly on the pole
    let n = h.nrows();
    let q = Mat::<f64>::identity(n, n) - &p * p.transpose();
    let qeig = SymmetricEigen::new((&q * &h * &q).as_ref(), 1e-9).unwrap();
    let pole = qeig.values.iter().copied().find(|v| v.abs() > 1e-6).unwrap();
    assert!(matches!(effective_hamiltonian(&h, &p, pole, 1e-6), Err(Error::SingularResolvent { .. })));
    assert_eq!(eff.dim(), p.ncols());

    let skew = Mat::from_fn(p.nrows(), 2, |i, j| if i == j || i == 0 { 1.0 } else { 0.0 });
    assert!(matches!(effective_hamiltonian(&h, &skew, 0.0, 0.0), Err(Error::BasisMismatch(_))));
    let small = Mat::<f64>::identity(3, 3);
    assert!(effective_hamiltonian(&small, &p, 0.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn heff_is_hermitian_off_the_poles(e in -6.0f64..6.0, width in 0.3f64..2.0) {
        let spec = ModelSpec::interacting(6, 1.0, 1.0, 2.0, 1.0);
        let (_, h, p) = heff_setup(&spec, -1.0, width);
        prop_assume!(p.ncols() > 0);
        match effective_hamiltonian(&h, &p, e, 1e-6) {
            Ok(eff) => prop_assert!(eff.hermiticity_deviation() < 1e-10 * (1.0 + eff.heff.norm_max())),
            Err(Error::SingularResolvent { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(other.to_string())),
        }
    }
}
