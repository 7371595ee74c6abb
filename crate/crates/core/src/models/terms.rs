//! Operator term lists shared by the Nambu and many-body builders.

use super::{ModelKind, ModelSpec};

/// Which part of `H = H_0 + H_B` to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `H_0` only.
    Bulk,
    /// `H_B` only.
    Boundary,
    /// `H_0 + H_B` (the boundary is dropped when `boundary_on` is false).
    Full,
}

impl Part {
    fn bulk(self) -> bool {
        matches!(self, Part::Bulk | Part::Full)
    }

    fn boundary(self, spec: &ModelSpec) -> bool {
        spec.boundary_on && matches!(self, Part::Boundary | Part::Full)
    }
}

/// `sum t (c_i^† c_j + h.c.) + sum e n_i + sum D (c_i^† c_j^† + c_j c_i) + sum U n_i n_j`
#[derive(Debug, Clone, Default)]
pub(crate) struct FermionTerms {
    pub modes: usize,
    pub hops: Vec<(usize, usize, f64)>,
    pub onsite: Vec<(usize, f64)>,
    pub pairs: Vec<(usize, usize, f64)>,
    pub density: Vec<(usize, usize, f64)>,
}

impl FermionTerms {
    pub fn conserves_charge(&self) -> bool {
        self.pairs.iter().all(|&(_, _, d)| d == 0.0)
    }
}

/// `sum J (X_i X_j + Y_i Y_j) + sum Jz Z_i Z_j + sum h Z_i + sum D X_i`
#[derive(Debug, Clone, Default)]
pub(crate) struct SpinTerms {
    pub exchange: Vec<(usize, usize, f64)>,
    pub zz: Vec<(usize, usize, f64)>,
    pub field: Vec<(usize, f64)>,
    pub flip_x: Vec<(usize, f64)>,
}

impl SpinTerms {
    pub fn conserves_charge(&self) -> bool {
        self.flip_x.iter().all(|&(_, d)| d == 0.0)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Terms {
    Fermion(FermionTerms),
    Spin(SpinTerms),
}

/// Nearest-neighbour bonds; the ring closes with `(n-1, 0)`, so `n = 2`
/// yields a doubled bond.
fn bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|j| (j, j + 1)).collect();
    if periodic && n >= 2 {
        out.push((n - 1, 0));
    }
    out
}

pub(crate) fn terms(spec: &ModelSpec, part: Part) -> Terms {
    let l = spec.l;
    let periodic = spec.is_periodic();
    let bulk = part.bulk();
    let boundary = part.boundary(spec);
    match spec.kind {
        ModelKind::FreeFermion | ModelKind::InteractingFermion => {
            let mut t = FermionTerms { modes: l, ..Default::default() };
            if bulk {
                t.hops = bonds(l, periodic).into_iter().map(|(i, j)| (i, j, spec.t0)).collect();
                t.onsite = (0..l).map(|j| (j, -spec.mu0)).collect();
                if spec.kind == ModelKind::InteractingFermion && spec.u != 0.0 {
                    t.density = bonds(l, periodic).into_iter().map(|(i, j)| (i, j, spec.u)).collect();
                }
            }
            if boundary {
                t.pairs.push((0, 1, spec.delta));
            }
            Terms::Fermion(t)
        }
        ModelKind::SpinfulFermion => {
            let mode = |site: usize, down: usize| 2 * site + down;
            let mut t = FermionTerms { modes: 2 * l, ..Default::default() };
            if bulk {
                for (i, j) in bonds(l, periodic) {
                    for s in 0..2 {
                        t.hops.push((mode(i, s), mode(j, s), spec.t0));
                    }
                }
                t.onsite = (0..2 * l).map(|m| (m, -spec.mu0)).collect();
            }
            if boundary {
                t.pairs.push((mode(0, 0), mode(1, 1), spec.delta));
            }
            Terms::Fermion(t)
        }
        ModelKind::Transport => {
            let half = l / 2;
            let mut t = FermionTerms { modes: l, ..Default::default() };
            if bulk {
                for (i, j) in bonds(half, false) {
                    t.hops.push((i, j, spec.tl));
                    t.hops.push((i + half, j + half, spec.tr));
                }
                t.onsite = (0..l).map(|j| (j, if j < half { -spec.mul } else { -spec.mur })).collect();
            }
            if boundary {
                t.hops.push((half - 1, half, spec.delta));
            }
            Terms::Fermion(t)
        }
        ModelKind::XxzSpin => {
            let mut t = SpinTerms::default();
            if bulk {
                for (i, j) in bonds(l, periodic) {
                    t.exchange.push((i, j, spec.jperp));
                    t.zz.push((i, j, spec.jz));
                }
                t.field = (0..l).map(|j| (j, spec.h)).collect();
            }
            if boundary {
                t.flip_x.push((0, spec.delta));
            }
            Terms::Spin(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_bonds() {
        assert_eq!(bonds(4, true), vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(bonds(4, false), vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(bonds(2, true), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn boundary_switch() {
        let mut spec = ModelSpec::free(6, 1.0, 0.5, 1.0);
        let Terms::Fermion(full) = terms(&spec, Part::Full) else { panic!() };
        assert_eq!(full.pairs, vec![(0, 1, 1.0)]);
        let Terms::Fermion(bdy) = terms(&spec, Part::Boundary) else { panic!() };
        assert!(bdy.hops.is_empty() && bdy.onsite.is_empty());
        spec.boundary_on = false;
        let Terms::Fermion(off) = terms(&spec, Part::Full) else { panic!() };
        assert!(off.pairs.is_empty());
    }

    #[test]
    fn spinful_pairing_links_up_and_down() {
        let spec = ModelSpec::spinful(4, 1.0, 0.0, 0.7);
        let Terms::Fermion(t) = terms(&spec, Part::Full) else { panic!() };
        assert_eq!(t.pairs, vec![(0, 3, 0.7)]);
        assert_eq!(t.hops.len(), 8);
    }
}
