//! Sampled protocols: steady-state scans, quench with energy tracking,
//! Floquet scans, half-chain transport, phase diagrams and the
//! matrix-element criterion over a parameter grid.

mod output;
mod protocol;

use std::sync::Arc;

use faer::{c64, Mat};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ed::{
    charge_mean_mb, charge_variance_mb, floquet_unitary, BasisKind, Constraint, DenseState, ExactPropagator, Parity, SectorBasis,
};
use crate::gaussian::{GaussianState, ModeLayout, NambuPropagator};
use crate::models::{build_many_body, build_many_body_part, build_nambu, build_nambu_part, ModelKind, ModelSpec, Part};
use crate::perturbation::{boundary_criterion, default_energy_tol};
use crate::{Error, Result};

pub use output::{CriterionRow, CriterionScan, PhaseCell, PhaseDiagram, PhaseLabel, QuenchPoint, QuenchSeries, ScanResult, ScanRow};
pub use protocol::{parse_range, Engine, Protocol, ProtocolKind, Sweep};

/// Largest sector dimension the dense ED engine accepts by default.
pub const DEFAULT_ED_CAP: usize = 1 << 13;
/// Spin-z drift above which a spinful run is rejected.
pub const SZ_DRIFT_LIMIT: f64 = 1e-9;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one sample, independent of evaluation order.
pub fn sample_seed(master: u64, grid_index: u64, sample_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ grid_index) ^ sample_index)
}

fn filling_count(nu: f64, sites: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::Config(format!("filling {nu} outside [0, 1]")));
    }
    Ok((nu * sites as f64).round() as usize)
}

/// Initial product-state layout of a model at the protocol's fillings.
#[derive(Debug, Clone, Copy)]
struct Filling {
    /// Set bits on the whole register.
    total: usize,
    /// Transport only: set bits on each half.
    halves: Option<(usize, usize)>,
}

impl Filling {
    fn new(spec: &ModelSpec, nu: f64, nu_r: f64) -> Result<Self> {
        let l = spec.l;
        Ok(match spec.kind {
            ModelKind::Transport => {
                let (left, right) = (filling_count(nu, l / 2)?, filling_count(nu_r, l / 2)?);
                Self { total: left + right, halves: Some((left, right)) }
            }
            // one fermion per site with a fraction `nu` of the sites spin-up
            ModelKind::SpinfulFermion => {
                filling_count(nu, l)?;
                Self { total: l, halves: None }
            }
            _ => Self { total: filling_count(nu, l)?, halves: None },
        })
    }

    /// Random occupations of every mode.
    fn draw(&self, spec: &ModelSpec, nu: f64, rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
        let l = spec.l;
        match (spec.kind, self.halves) {
            (ModelKind::Transport, Some((left, right))) => {
                let half = l / 2;
                Ok([draw_occupations(half, left, rng), draw_occupations(half, right, rng)].concat())
            }
            (ModelKind::SpinfulFermion, _) => {
                let up = draw_occupations(l, filling_count(nu, l)?, rng);
                Ok(up.iter().flat_map(|&u| [u, !u]).collect())
            }
            _ => Ok(draw_occupations(l, self.total, rng)),
        }
    }
}

/// `count` of `modes` entries set, uniformly at random.
fn draw_occupations(modes: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut occ = vec![false; modes];
    for k in sample(rng, modes, count) {
        occ[k] = true;
    }
    occ
}

fn to_bits(occ: &[bool]) -> Result<u64> {
    if occ.len() > 62 {
        return Err(Error::CapExceeded { dim: occ.len(), cap: 62 });
    }
    Ok(occ.iter().enumerate().fold(0u64, |b, (k, &o)| if o { b | 1 << k } else { b }))
}

/// Which charge a scan records.
fn observed_modes(spec: &ModelSpec) -> Option<Vec<usize>> {
    (spec.kind == ModelKind::Transport).then(|| (spec.l / 2..spec.l).collect())
}

fn initial_charge(spec: &ModelSpec, occ: &[bool]) -> f64 {
    let count = |o: &[bool]| o.iter().filter(|&&x| x).count() as f64;
    match spec.kind {
        ModelKind::Transport => count(&occ[spec.l / 2..]),
        ModelKind::XxzSpin => count(occ) - spec.l as f64 / 2.0,
        _ => count(occ),
    }
}

fn layout(spec: &ModelSpec) -> ModeLayout {
    if spec.kind == ModelKind::SpinfulFermion {
        ModeLayout::Spinful
    } else {
        ModeLayout::Spinless
    }
}

/// Smallest symmetry sector that holds the evolution of a state with `count` set bits.
fn ed_constraint(spec: &ModelSpec, count: usize) -> Constraint {
    let breaks_charge = spec.boundary_on && spec.delta != 0.0 && spec.kind != ModelKind::Transport;
    match (breaks_charge, spec.kind.is_spin()) {
        (false, _) => Constraint::FixedCount(count),
        (true, false) => Constraint::Parity(if count.is_multiple_of(2) { Parity::Even } else { Parity::Odd }),
        (true, true) => Constraint::None,
    }
}

fn resolve_engine(engine: Engine, spec: &ModelSpec) -> Result<Engine> {
    match engine {
        Engine::Auto => Ok(if spec.is_quadratic() { Engine::Gaussian } else { Engine::Ed }),
        Engine::Gaussian if !spec.is_quadratic() => {
            Err(Error::UnsupportedModel(format!("{:?} with these couplings needs the ed engine", spec.kind)))
        }
        e => Ok(e),
    }
}

/// `w^n` by repeated squaring.
fn matrix_power(w: &Mat<c64>, mut n: usize) -> Mat<c64> {
    let mut out = Mat::<c64>::identity(w.nrows(), w.ncols());
    let mut base = w.clone();
    while n > 0 {
        if n & 1 == 1 {
            out = &out * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Drive {
    /// `e^{-iHt}` with the boundary on from `t = 0`.
    Hamiltonian,
    /// `(e^{-iH_B} e^{-iH_0})^n`.
    Floquet,
}

struct Measurement {
    var: f64,
    mean: f64,
    sz: Option<(f64, f64)>,
}

/// Per-grid-point evolution operator shared by every sample.
enum Evolver {
    Gaussian { u: Mat<c64>, layout: ModeLayout },
    Ed { basis: Arc<SectorBasis>, prop: ExactPropagator, t: f64 },
    EdFloquet { basis: Arc<SectorBasis>, w: Mat<c64> },
}

impl Evolver {
    fn new(protocol: &Protocol, spec: &ModelSpec, drive: Drive, filling: &Filling) -> Result<Self> {
        let engine = resolve_engine(protocol.engine, spec)?;
        let t = protocol.time.unwrap_or(2.0 * spec.l as f64);
        let periods = (t / 2.0).round() as usize;
        match engine {
            Engine::Gaussian => {
                let u = match drive {
                    Drive::Hamiltonian => NambuPropagator::new(&build_nambu(spec, true)?)?.unitary(t),
                    Drive::Floquet => {
                        let u0 = NambuPropagator::new(&build_nambu(spec, false)?)?.unitary(1.0);
                        let ub = NambuPropagator::new(&build_nambu_part(spec, Part::Boundary)?)?.unitary(1.0);
                        matrix_power(&(&ub * &u0), periods)
                    }
                };
                Ok(Self::Gaussian { u, layout: layout(spec) })
            }
            _ => {
                let kind = BasisKind::for_model(spec.kind);
                let basis = Arc::new(SectorBasis::enumerate(kind, spec.l, ed_constraint(spec, filling.total), protocol.dim_cap)?);
                match drive {
                    Drive::Hamiltonian => {
                        let h = build_many_body(spec, &basis, true)?;
                        Ok(Self::Ed { prop: ExactPropagator::new(&h, basis.clone())?, basis, t })
                    }
                    Drive::Floquet => {
                        let h0 = build_many_body(spec, &basis, false)?;
                        let hb = build_many_body_part(spec, &basis, Part::Boundary)?;
                        Ok(Self::EdFloquet { w: matrix_power(&floquet_unitary(&h0, &hb)?, periods), basis })
                    }
                }
            }
        }
    }

    fn measure(&self, occ: &[bool], observed: Option<&[usize]>) -> Result<Measurement> {
        match self {
            Self::Gaussian { u, layout } => {
                let s0 = GaussianState::product_with_layout(occ, *layout);
                let s = GaussianState::product_evolved(occ, *layout, u.as_ref())?;
                let (mean, var) = match observed {
                    Some(modes) => (s.subsystem_particle_number(modes)?, s.subsystem_charge_variance(modes)?),
                    None => (s.particle_number(), s.charge_variance()),
                };
                let sz = if *layout == ModeLayout::Spinful { Some((s0.spin_z()?, s.spin_z()?)) } else { None };
                Ok(Measurement { var, mean, sz })
            }
            Self::Ed { basis, prop, t } => {
                let bits = to_bits(occ)?;
                let idx = basis.index_of(bits).ok_or_else(|| Error::BasisMismatch("initial state outside the sector".into()))?;
                Self::measure_dense(&prop.evolve_basis_vector(idx, *t), bits, observed)
            }
            Self::EdFloquet { basis, w } => {
                let bits = to_bits(occ)?;
                let psi = DenseState::basis_vector(basis.clone(), bits)?.apply(w)?;
                Self::measure_dense(&psi, bits, observed)
            }
        }
    }

    fn measure_dense(psi: &DenseState, bits: u64, observed: Option<&[usize]>) -> Result<Measurement> {
        let (mean, var) = match observed {
            Some(modes) => psi.subsystem_charge(modes)?,
            None => (charge_mean_mb(psi), charge_variance_mb(psi)),
        };
        let sz = if psi.basis().kind() == BasisKind::SpinfulFermion {
            let up = (0..psi.basis().sites()).filter(|j| bits >> (2 * j) & 1 == 1).count() as f64;
            let down = (0..psi.basis().sites()).filter(|j| bits >> (2 * j + 1) & 1 == 1).count() as f64;
            Some((0.5 * (up - down), psi.spin_z()?))
        } else {
            None
        };
        Ok(Measurement { var, mean, sz })
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation over `√n`; zero for a single sample.
fn standard_error(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Transport window outside of which a single pump is gapped.
pub fn frozen_window(spec: &ModelSpec) -> (f64, f64) {
    let w = 2.0 * (spec.tl.abs() + spec.tr.abs());
    (spec.mul - w, spec.mul + w)
}

fn scan_point(protocol: &Protocol, spec: &ModelSpec, params: Vec<f64>, drive: Drive, grid_index: u64) -> Result<ScanRow> {
    spec.validate()?;
    let filling = Filling::new(spec, protocol.nu, protocol.nu_r)?;
    let evolver = Evolver::new(protocol, spec, drive, &filling)?;
    let observed = observed_modes(spec);

    let results: Vec<(f64, f64, Option<f64>, f64)> = (0..protocol.n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(protocol.seed, grid_index, k));
            let occ = filling.draw(spec, protocol.nu, &mut rng)?;
            let n0 = initial_charge(spec, &occ);
            let m = evolver.measure(&occ, observed.as_deref())?;
            let drift = m.sz.map(|(a, b)| (a - b).abs());
            Ok((m.var, m.mean - n0, drift, n0))
        })
        .collect::<Result<_>>()?;

    let var_samples: Vec<f64> = results.iter().map(|r| r.0).collect();
    let dn_samples: Vec<f64> = results.iter().map(|r| r.1).collect();
    let sz_drift = results.iter().filter_map(|r| r.2).reduce(f64::max);
    if let Some(d) = sz_drift {
        if d > SZ_DRIFT_LIMIT {
            return Err(Error::SymmetryViolation(format!("S^z drifted by {d:e}")));
        }
    }
    let mean_var = mean(&var_samples);
    Ok(ScanRow {
        params,
        l: spec.l,
        n0: results[0].3,
        mean_var_density: mean_var / spec.l as f64,
        mean_var,
        mean_dn: mean(&dn_samples),
        stderr: standard_error(&var_samples),
        n_samples: protocol.n_samples,
        seed: protocol.seed,
        var_samples,
        dn_samples,
        sz_drift,
        frozen_window: (spec.kind == ModelKind::Transport).then(|| frozen_window(spec)),
    })
}

fn run_grid(protocol: &Protocol, drive: Drive) -> Result<ScanResult> {
    protocol.validate()?;
    let mut rows = Vec::new();
    for (index, (spec, params)) in protocol.points()?.into_iter().enumerate() {
        rows.push(scan_point(protocol, &spec, params, drive, index as u64)?);
    }
    Ok(ScanResult { param_names: protocol.param_names(), rows })
}

/// Hamiltonian evolution to `t = 2L` (or the protocol time) at every grid point.
pub fn run_steady_scan(protocol: &Protocol) -> Result<ScanResult> {
    run_grid(protocol, Drive::Hamiltonian)
}

/// `L` drive periods (or `time / 2`) at every grid point; spinful runs
/// fail if any sample's `S^z` drifts.
pub fn run_floquet_scan(protocol: &Protocol) -> Result<ScanResult> {
    run_grid(protocol, Drive::Floquet)
}

/// Right-half charge statistics of the two-half chain; rows carry the
/// analytic frozen window.
pub fn run_transport_scan(protocol: &Protocol) -> Result<ScanResult> {
    if protocol.model.kind != ModelKind::Transport {
        return Err(Error::Config("transport scans need the transport model".into()));
    }
    run_grid(protocol, Drive::Hamiltonian)
}

/// Evolve with `H_0` on `[0, L]`, then with `H_0 + H_B` on `[L, 2L]`,
/// recording `<N>` and the energy of the active Hamiltonian.
pub fn run_quench_energy(protocol: &Protocol) -> Result<QuenchSeries> {
    protocol.validate()?;
    let points = protocol.points()?;
    let [(spec, _)] = points.as_slice() else {
        return Err(Error::Config("a quench runs at a single parameter point and size".into()));
    };
    if !spec.is_quadratic() || protocol.engine == Engine::Ed {
        return Err(Error::UnsupportedModel("the quench protocol uses the Gaussian engine".into()));
    }
    spec.validate()?;
    let steps = protocol.time_steps.max(2).next_multiple_of(2);
    let switch = spec.l as f64;
    let filling = Filling::new(spec, protocol.nu, protocol.nu_r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(protocol.seed, 0, 0));
    let occ = filling.draw(spec, protocol.nu, &mut rng)?;

    let h0 = build_nambu(spec, false)?;
    let h = build_nambu(spec, true)?;
    let (p0, p) = (NambuPropagator::new(&h0)?, NambuPropagator::new(&h)?);
    let s0 = GaussianState::product_with_layout(&occ, layout(spec));
    let s_switch = s0.transformed(p0.unitary(switch).as_ref())?;

    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = 2.0 * switch * k as f64 / steps as f64;
        let (s, energy, boundary) = if k <= steps / 2 {
            let s = s0.transformed(p0.unitary(t).as_ref())?;
            let e = s.energy(&h0)?;
            (s, e, false)
        } else {
            let s = s_switch.transformed(p.unitary(t - switch).as_ref())?;
            let e = s.energy(&h)?;
            (s, e, true)
        };
        rows.push(QuenchPoint { t, n: s.particle_number(), energy, boundary_on: boundary });
    }
    Ok(QuenchSeries { l: spec.l, n0: initial_charge(spec, &occ), seed: protocol.seed, rows })
}

/// Steady scan over two swept parameters at every size, labelled at the
/// largest size: frozen iff `δ²/L < threshold` and, when the next smaller
/// size (`L_max - 2`) was run, `δ²(L_max)/δ²(L_max - 2) < growth_ratio`.
pub fn run_phase_diagram(protocol: &Protocol) -> Result<PhaseDiagram> {
    if protocol.sweeps.len() != 2 {
        return Err(Error::Config("a phase diagram needs exactly two swept parameters".into()));
    }
    let scan = run_steady_scan(protocol)?;
    let l_max = *protocol.sizes.iter().max().expect("validated");
    let prev = protocol.sizes.iter().copied().filter(|&l| l + 2 == l_max).max();
    let (xs, ys) = (&protocol.sweeps[0], &protocol.sweeps[1]);
    let mut cells = Vec::new();
    for &x in &xs.values {
        for &y in &ys.values {
            let at = |l: usize| scan.rows.iter().find(|r| r.l == l && r.params[0] == x && r.params[1] == y);
            let top = at(l_max).expect("every size was scanned");
            let growth = prev.and_then(at).map(|r| if r.mean_var > 0.0 { top.mean_var / r.mean_var } else { f64::INFINITY });
            let frozen = top.mean_var_density < protocol.threshold && growth.is_none_or(|g| g < protocol.growth_ratio);
            let densities = protocol.sizes.iter().map(|&l| at(l).expect("scanned").mean_var_density).collect();
            cells.push(PhaseCell {
                x,
                y,
                label: if frozen { PhaseLabel::Frozen } else { PhaseLabel::Fluctuating },
                density: top.mean_var_density,
                growth,
                densities,
            });
        }
    }
    Ok(PhaseDiagram {
        x_param: xs.param.clone(),
        y_param: ys.param.clone(),
        x_values: xs.values.clone(),
        y_values: ys.values.clone(),
        sizes: protocol.sizes.clone(),
        l_max,
        threshold: protocol.threshold,
        growth_ratio: protocol.growth_ratio,
        cells,
        scan,
    })
}

/// Mean boundary matrix element between near-degenerate cross-charge
/// eigenstates of `H_0` at every grid point.
pub fn criterion_scan(protocol: &Protocol) -> Result<CriterionScan> {
    protocol.validate()?;
    let mut rows = Vec::new();
    for (index, (spec, params)) in protocol.points()?.into_iter().enumerate() {
        let tol = protocol.energy_tol.unwrap_or_else(|| default_energy_tol(&spec));
        let point = boundary_criterion(&spec, tol, protocol.max_pairs, sample_seed(protocol.seed, index as u64, 0))?;
        rows.push(CriterionRow {
            params,
            l: spec.l,
            mean_element: point.mean_element,
            n_pairs: point.n_pairs,
            n_qualifying: point.n_qualifying,
            energy_tol: tol,
            seed: protocol.seed,
        });
    }
    Ok(CriterionScan { param_names: protocol.param_names(), rows })
}

/// Result of any protocol.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum RunOutput {
    Scan(ScanResult),
    Quench(QuenchSeries),
    Phase(PhaseDiagram),
    Criterion(CriterionScan),
}

pub fn run(protocol: &Protocol) -> Result<RunOutput> {
    Ok(match protocol.kind {
        ProtocolKind::SteadyScan => RunOutput::Scan(run_steady_scan(protocol)?),
        ProtocolKind::FloquetScan => RunOutput::Scan(run_floquet_scan(protocol)?),
        ProtocolKind::TransportScan => RunOutput::Scan(run_transport_scan(protocol)?),
        ProtocolKind::QuenchEnergy => RunOutput::Quench(run_quench_energy(protocol)?),
        ProtocolKind::PhaseDiagram2d => RunOutput::Phase(run_phase_diagram(protocol)?),
        ProtocolKind::CriterionScan => RunOutput::Criterion(criterion_scan(protocol)?),
    })
}

#[cfg(test)]
mod tests;
