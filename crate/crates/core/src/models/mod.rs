//! Chain models and their Hamiltonians.
//!
//! Every model is described by a flat [`ModelSpec`]. Fermion sites are
//! numbered `0..L` internally (site `j` here is site `j + 1` in the usual
//! 1-based labelling) and the Jordan-Wigner string runs over lower mode
//! indices. Spinful modes are interleaved as `(0↑, 0↓, 1↑, 1↓, ...)`.

mod config;
mod many_body;
mod nambu;
mod terms;

pub use many_body::{boundary_action, build_many_body, build_many_body_part, DEFAULT_DIM_CAP};
pub use nambu::{build_nambu, build_nambu_part, dispersion, NambuMatrix};
pub use terms::Part;

pub(crate) use terms::{terms, FermionTerms, SpinTerms, Terms};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The five chain families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Nearest-neighbour hopping ring with pairing on the first bond.
    #[serde(alias = "free")]
    FreeFermion,
    /// [`ModelKind::FreeFermion`] plus density-density repulsion `U n_j n_{j+1}`.
    #[serde(alias = "interacting")]
    InteractingFermion,
    /// XXZ ring in a longitudinal field with a transverse field on site 0.
    #[serde(alias = "xxz", alias = "spin")]
    XxzSpin,
    /// Two-component hopping ring with inter-spin pairing on the first bond.
    #[serde(alias = "spinful")]
    SpinfulFermion,
    /// Two open half-chains joined by a single hopping bond.
    #[serde(alias = "transport")]
    Transport,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "free" | "free_fermion" | "freefermion" => Ok(Self::FreeFermion),
            "interacting" | "interacting_fermion" | "interactingfermion" => Ok(Self::InteractingFermion),
            "xxz" | "spin" | "xxz_spin" | "xxzspin" => Ok(Self::XxzSpin),
            "spinful" | "spinful_fermion" | "spinfulfermion" => Ok(Self::SpinfulFermion),
            "transport" => Ok(Self::Transport),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }

    pub fn is_spin(self) -> bool {
        matches!(self, Self::XxzSpin)
    }
}

/// Parameters of one chain Hamiltonian `H_0 + H_B`.
///
/// Field names follow the customary symbols; the serialized keys are
/// `t0, mu0, Delta, U, Jperp, Jz, h, tl, tr, mul, mur, L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "model")]
    pub kind: ModelKind,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default = "one")]
    pub t0: f64,
    #[serde(default)]
    pub mu0: f64,
    /// Boundary strength: pairing amplitude, transverse field, or the
    /// half-chain coupling for [`ModelKind::Transport`].
    #[serde(rename = "Delta", default = "one")]
    pub delta: f64,
    #[serde(rename = "U", default)]
    pub u: f64,
    #[serde(rename = "Jperp", default = "one")]
    pub jperp: f64,
    #[serde(rename = "Jz", default = "one")]
    pub jz: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default = "one")]
    pub tl: f64,
    #[serde(default = "one")]
    pub tr: f64,
    #[serde(default)]
    pub mul: f64,
    #[serde(default)]
    pub mur: f64,
    #[serde(default = "yes")]
    pub boundary_on: bool,
    /// Ring (true) or open chain. Ignored for [`ModelKind::Transport`],
    /// which is always open.
    #[serde(default = "yes")]
    pub periodic: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Names accepted by [`ModelSpec::set_param`].
pub const PARAM_NAMES: [&str; 11] = ["t0", "mu0", "Delta", "U", "Jperp", "Jz", "h", "tl", "tr", "mul", "mur"];

impl ModelSpec {
    /// A spec with the default couplings (`t0 = Delta = Jperp = Jz = tl = tr = 1`,
    /// everything else zero, boundary on, periodic).
    pub fn new(kind: ModelKind, l: usize) -> Self {
        Self {
            kind,
            l,
            t0: 1.0,
            mu0: 0.0,
            delta: 1.0,
            u: 0.0,
            jperp: 1.0,
            jz: 1.0,
            h: 0.0,
            tl: 1.0,
            tr: 1.0,
            mul: 0.0,
            mur: 0.0,
            boundary_on: true,
            periodic: true,
        }
    }

    pub fn free(l: usize, t0: f64, mu0: f64, delta: f64) -> Self {
        Self { t0, mu0, delta, ..Self::new(ModelKind::FreeFermion, l) }
    }

    pub fn interacting(l: usize, t0: f64, mu0: f64, u: f64, delta: f64) -> Self {
        Self { t0, mu0, u, delta, ..Self::new(ModelKind::InteractingFermion, l) }
    }

    pub fn xxz(l: usize, jperp: f64, jz: f64, h: f64, delta: f64) -> Self {
        Self { jperp, jz, h, delta, ..Self::new(ModelKind::XxzSpin, l) }
    }

    pub fn spinful(l: usize, t0: f64, mu0: f64, delta: f64) -> Self {
        Self { t0, mu0, delta, ..Self::new(ModelKind::SpinfulFermion, l) }
    }

    pub fn transport(l: usize, tl: f64, tr: f64, mul: f64, mur: f64, coupling: f64) -> Self {
        Self { tl, tr, mul, mur, delta: coupling, periodic: false, ..Self::new(ModelKind::Transport, l) }
    }

    /// Public-API validation: `L >= 4`, even `L` for transport, finite couplings.
    pub fn validate(&self) -> Result<()> {
        self.validate_min_len(4)
    }

    pub(crate) fn validate_min_len(&self, min_l: usize) -> Result<()> {
        if self.l < min_l {
            return Err(Error::InvalidModel(format!("L = {} is below the minimum of {min_l}", self.l)));
        }
        if self.kind == ModelKind::Transport && !self.l.is_multiple_of(2) {
            return Err(Error::InvalidModel(format!("transport chain needs even L, got {}", self.l)));
        }
        for name in PARAM_NAMES {
            let v = self.param(name).expect("known name");
            if !v.is_finite() {
                return Err(Error::InvalidModel(format!("coupling {name} = {v} is not finite")));
            }
        }
        Ok(())
    }

    /// Whether the full Hamiltonian is quadratic in fermion operators.
    pub fn is_quadratic(&self) -> bool {
        match self.kind {
            ModelKind::FreeFermion | ModelKind::SpinfulFermion | ModelKind::Transport => true,
            ModelKind::InteractingFermion => self.u == 0.0,
            ModelKind::XxzSpin => false,
        }
    }

    /// Number of single-particle modes (bits of an occupation string).
    pub fn modes(&self) -> usize {
        match self.kind {
            ModelKind::SpinfulFermion => 2 * self.l,
            _ => self.l,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic && self.kind != ModelKind::Transport
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        Some(match name {
            "t0" => self.t0,
            "mu0" => self.mu0,
            "Delta" => self.delta,
            "U" => self.u,
            "Jperp" => self.jperp,
            "Jz" => self.jz,
            "h" => self.h,
            "tl" => self.tl,
            "tr" => self.tr,
            "mul" => self.mul,
            "mur" => self.mur,
            _ => return None,
        })
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "t0" => &mut self.t0,
            "mu0" => &mut self.mu0,
            "Delta" => &mut self.delta,
            "U" => &mut self.u,
            "Jperp" => &mut self.jperp,
            "Jz" => &mut self.jz,
            "h" => &mut self.h,
            "tl" => &mut self.tl,
            "tr" => &mut self.tr,
            "mul" => &mut self.mul,
            "mur" => &mut self.mur,
            other => return Err(Error::Config(format!("unknown parameter '{other}'"))),
        };
        *slot = value;
        Ok(())
    }
}
