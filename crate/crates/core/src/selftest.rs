//! Oracle-equivalence suite: Gaussian dynamics against exact
//! diagonalization, the Wick variance against a dense `N^2` operator,
//! effective-Hamiltonian residuals, energy conservation and the
//! zero-pairing limit.

use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ed::{charge_mean_mb, charge_variance_mb, random_bits, Constraint, DenseState, ExactPropagator, Parity, SectorBasis};
use crate::gaussian::{GaussianState, ModeLayout};
use crate::linalg::SymmetricEigen;
use crate::models::{build_many_body, build_nambu, ModelKind, ModelSpec};
use crate::perturbation::{all_charges, effective_hamiltonian, sector_spectra, DEFAULT_RESOLVENT_GUARD};
use crate::Result;

/// Number of random cases per check.
pub const CASES: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Largest observed deviation.
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.worst < self.tolerance
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn layout(spec: &ModelSpec) -> ModeLayout {
    if spec.kind == ModelKind::SpinfulFermion {
        ModeLayout::Spinful
    } else {
        ModeLayout::Spinless
    }
}

fn random_quadratic(rng: &mut ChaCha8Rng) -> ModelSpec {
    match rng.random_range(0..4) {
        0 | 1 => {
            let l = [4, 6, 8][rng.random_range(0..3)];
            ModelSpec::free(l, rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0), rng.random_range(0.2..2.0))
        }
        2 => ModelSpec::spinful(4, rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0), rng.random_range(0.2..2.0)),
        _ => ModelSpec::transport(8, 1.0, rng.random_range(0.5..1.5), rng.random_range(-3.0..0.0), rng.random_range(-4.0..4.0), 1.0),
    }
}

struct Trajectory {
    gaussian: GaussianState,
    gaussian_e0: f64,
    gaussian_e: f64,
    psi: DenseState,
    h: Mat<f64>,
    ed_e0: f64,
}

/// One random product state of a quadratic model evolved both ways on the full Fock space.
fn trajectory(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Trajectory> {
    let m = spec.modes();
    let bits = random_bits(m, rng.random_range(0..=m), rng)?;
    let t = rng.random_range(0.0..2.0 * spec.l as f64);
    let nambu = build_nambu(spec, true)?;
    let g0 = GaussianState::from_bits(m, bits, layout(spec));
    let g = g0.evolve(&nambu, t)?;
    let basis = Arc::new(SectorBasis::for_model(spec, Constraint::None)?);
    let h = build_many_body(spec, &basis, true)?;
    let psi0 = DenseState::basis_vector(basis.clone(), bits)?;
    let psi = ExactPropagator::new(&h, basis)?.evolve(&psi0, t)?;
    Ok(Trajectory {
        gaussian_e0: g0.energy(&nambu)?,
        gaussian_e: g.energy(&nambu)?,
        gaussian: g,
        ed_e0: psi0.expectation(&h)?,
        psi,
        h,
    })
}

/// Gaussian vs ED: `<N>`, `δN^2`, energy and right-half charge statistics.
fn gaussian_vs_ed(tr: &Trajectory) -> Result<f64> {
    let (g, psi) = (&tr.gaussian, &tr.psi);
    let m = g.modes();
    let right: Vec<usize> = (m / 2..m).collect();
    let (mean_r, var_r) = psi.subsystem_charge(&right)?;
    let mut dev = [
        g.particle_number() - charge_mean_mb(psi),
        g.charge_variance() - charge_variance_mb(psi),
        tr.gaussian_e - psi.expectation(&tr.h)?,
        g.subsystem_particle_number(&right)? - mean_r,
        g.subsystem_charge_variance(&right)? - var_r,
    ]
    .iter()
    .fold(0.0_f64, |a, d| a.max(d.abs()));
    if g.layout() == ModeLayout::Spinful {
        dev = dev.max((g.spin_z()? - psi.spin_z()?).abs());
    }
    Ok(dev)
}

/// `<N^2> - <N>^2` from dense `N` and `N^2` operators.
fn brute_force_variance(psi: &DenseState) -> Result<f64> {
    let basis = psi.basis();
    let d = basis.dim();
    let n = Mat::<f64>::from_fn(d, d, |i, j| if i == j { basis.state(i).count_ones() as f64 } else { 0.0 });
    let n2 = &n * &n;
    let mean = psi.expectation(&n)?;
    Ok(psi.expectation(&n2)? - mean * mean)
}

fn energy_drift(tr: &Trajectory) -> Result<f64> {
    Ok((tr.gaussian_e - tr.gaussian_e0).abs().max((tr.psi.expectation(&tr.h)? - tr.ed_e0).abs()))
}

/// Projected eigen-equation residuals for exact eigenpairs with weight in `P`.
fn heff_residuals(spec: &ModelSpec, center: f64, width: f64, wanted: usize) -> Result<(usize, f64)> {
    let basis = SectorBasis::for_model(spec, Constraint::Parity(Parity::Even))?;
    let h = build_many_body(spec, &basis, true)?;
    let charges: Vec<f64> = all_charges(spec).into_iter().filter(|c| (*c as usize).is_multiple_of(2)).collect();
    let mut cols = Vec::new();
    for s in sector_spectra(spec, &charges)? {
        for k in 0..s.dim() {
            if (s.values[k] - center).abs() < width {
                cols.push(s.embed(k, &basis)?);
            }
        }
    }
    let p = Mat::from_fn(basis.dim(), cols.len(), |i, j| cols[j][i]);
    let eig = SymmetricEigen::new(h.as_ref(), 1e-10)?;
    let (mut count, mut worst) = (0, 0.0_f64);
    for k in 0..basis.dim() {
        let psi: Vec<f64> = eig.vectors.col(k).iter().copied().collect();
        let weight = (p.transpose() * Mat::from_fn(psi.len(), 1, |i, _| psi[i])).norm_l2();
        if weight < 0.1 {
            continue;
        }
        let Ok(eff) = effective_hamiltonian(&h, &p, eig.values[k], DEFAULT_RESOLVENT_GUARD) else { continue };
        worst = worst.max(eff.residual(&psi)?).max(eff.hermiticity_deviation());
        count += 1;
        if count == wanted {
            break;
        }
    }
    Ok((count, worst))
}

/// Largest charge variance reached by every model family at `Δ = 0`
/// (right-half charge for transport).
fn zero_pairing_variance(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let models = [
        ModelSpec::free(8, 1.0, rng.random_range(-3.0..3.0), 0.0),
        ModelSpec::interacting(8, 1.0, rng.random_range(-3.0..3.0), 2.0, 0.0),
        ModelSpec::xxz(8, 1.0, 1.0, rng.random_range(-3.0..3.0), 0.0),
        ModelSpec::spinful(4, 1.0, rng.random_range(-3.0..3.0), 0.0),
        ModelSpec::transport(8, 1.0, 1.0, -2.0, rng.random_range(-4.0..4.0), 0.0),
    ];
    let (mut cases, mut worst) = (0, 0.0_f64);
    for spec in &models {
        let basis = Arc::new(SectorBasis::for_model(spec, Constraint::None)?);
        let prop = ExactPropagator::new(&build_many_body(spec, &basis, true)?, basis.clone())?;
        let right: Vec<usize> = (spec.modes() / 2..spec.modes()).collect();
        for _ in 0..4 {
            let bits = random_bits(spec.modes(), rng.random_range(0..=spec.modes()), rng)?;
            let t = rng.random_range(0.0..2.0 * spec.l as f64);
            let psi = prop.evolve(&DenseState::basis_vector(basis.clone(), bits)?, t)?;
            let transport = spec.kind == ModelKind::Transport;
            worst = worst.max(if transport { psi.subsystem_charge(&right)?.1 } else { charge_variance_mb(&psi) });
            if spec.is_quadratic() {
                let g = GaussianState::from_bits(spec.modes(), bits, layout(spec)).evolve(&build_nambu(spec, true)?, t)?;
                worst = worst.max(if transport { g.subsystem_charge_variance(&right)? } else { g.charge_variance() });
            }
            cases += 1;
        }
    }
    Ok((cases, worst))
}

/// Run every oracle check from one seed.
pub fn run(seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut drift = 0.0_f64;
    let mut worst = 0.0_f64;
    for _ in 0..CASES {
        let spec = random_quadratic(&mut rng);
        let tr = trajectory(&spec, &mut rng)?;
        worst = worst.max(gaussian_vs_ed(&tr)?);
        drift = drift.max(energy_drift(&tr)?);
    }
    checks.push(Check { name: "gaussian_vs_ed".into(), cases: CASES, worst, tolerance: 1e-8 });

    let mut worst = 0.0_f64;
    for _ in 0..CASES {
        let l = [4, 6, 8][rng.random_range(0..3)];
        let spec = ModelSpec::free(l, rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0), rng.random_range(0.2..2.0));
        let tr = trajectory(&spec, &mut rng)?;
        worst = worst.max((tr.gaussian.charge_variance() - brute_force_variance(&tr.psi)?).abs());
        drift = drift.max(energy_drift(&tr)?);
    }
    checks.push(Check { name: "wick_vs_brute_force".into(), cases: CASES, worst, tolerance: 1e-8 });

    let (a, wa) = heff_residuals(&ModelSpec::interacting(8, 1.0, 0.5, 2.0, 1.0), -2.0, 1.5, CASES)?;
    let (b, wb) = heff_residuals(&ModelSpec::free(8, 1.0, 3.0, 1.0), -12.0, 1.5, CASES)?;
    let cases = if a >= CASES && b >= CASES { a + b } else { 0 };
    checks.push(Check { name: "heff_eigenpair_residual".into(), cases, worst: wa.max(wb), tolerance: 1e-8 });

    checks.push(Check { name: "energy_conservation".into(), cases: 2 * CASES, worst: drift, tolerance: 1e-8 });

    let (cases, worst) = zero_pairing_variance(&mut rng)?;
    checks.push(Check { name: "zero_pairing_variance".into(), cases, worst, tolerance: 1e-12 });

    Ok(Report { seed, checks })
}
