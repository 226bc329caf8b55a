use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::model::{SpinConfiguration, MAX_SITES};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// `H = J1 Σ_⟨ij⟩ σ_i·σ_j + J2 Σ_⟨⟨ij⟩⟩ σ_i·σ_j` on an `lx × ly` square lattice,
/// Pauli convention. Site `(x, y)` has index `y * lx + x`.
///
/// Nearest bonds join horizontal and vertical neighbors; next-nearest bonds
/// are both diagonals of every unit plaquette. Duplicate bonds produced by
/// wrapping on narrow periodic lattices are merged.
#[derive(Clone, Debug, PartialEq)]
pub struct J1J2Hamiltonian {
    lx: usize,
    ly: usize,
    j1: f64,
    j2: f64,
    boundary: Boundary,
    nearest: Vec<(usize, usize)>,
    next_nearest: Vec<(usize, usize)>,
}

impl J1J2Hamiltonian {
    pub fn new(lx: usize, ly: usize, j1: f64, j2: f64, boundary: Boundary) -> Result<Self> {
        let n = lx * ly;
        if lx == 0 || ly == 0 || n > MAX_SITES {
            return config_err(format!("lattice {lx}x{ly} outside 1..={MAX_SITES} sites"));
        }
        if !j1.is_finite() || !j2.is_finite() {
            return config_err("couplings must be finite");
        }
        let periodic = boundary == Boundary::Periodic;
        let site = |x: usize, y: usize| (y % ly) * lx + (x % lx);
        let mut nearest = BTreeSet::new();
        let mut next_nearest = BTreeSet::new();
        let push = |set: &mut BTreeSet<(usize, usize)>, a: usize, b: usize| {
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        };
        for y in 0..ly {
            for x in 0..lx {
                let right = x + 1 < lx || periodic;
                let down = y + 1 < ly || periodic;
                if right {
                    push(&mut nearest, site(x, y), site(x + 1, y));
                }
                if down {
                    push(&mut nearest, site(x, y), site(x, y + 1));
                }
                if right && down {
                    push(&mut next_nearest, site(x, y), site(x + 1, y + 1));
                    push(&mut next_nearest, site(x + 1, y), site(x, y + 1));
                }
            }
        }
        Ok(Self {
            lx,
            ly,
            j1,
            j2,
            boundary,
            nearest: nearest.into_iter().collect(),
            next_nearest: next_nearest.into_iter().collect(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.lx, self.ly)
    }

    pub fn couplings(&self) -> (f64, f64) {
        (self.j1, self.j2)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn nearest_bonds(&self) -> &[(usize, usize)] {
        &self.nearest
    }

    pub fn next_nearest_bonds(&self) -> &[(usize, usize)] {
        &self.next_nearest
    }

    fn bonds(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nn = self.nearest.iter().map(move |&(i, j)| (i, j, self.j1));
        let nnn = self.next_nearest.iter().map(move |&(i, j)| (i, j, self.j2));
        nn.chain(nnn).filter(|&(_, _, j)| j != 0.0)
    }

    /// `Σ J z_i z_j`.
    pub fn diagonal(&self, x: SpinConfiguration) -> f64 {
        let bits = x.bits();
        self.bonds()
            .map(|(i, j, c)| if (bits >> i) & 1 == (bits >> j) & 1 { c } else { -c })
            .sum()
    }

    /// Diagonal entry, then one `2J` entry per antiparallel bond.
    pub fn for_each_connected<F: FnMut(SpinConfiguration, f64)>(&self, x: SpinConfiguration, mut f: F) {
        f(x, self.diagonal(x));
        let bits = x.bits();
        for (i, j, c) in self.bonds() {
            if (bits >> i) & 1 != (bits >> j) & 1 {
                f(x.exchanged(i, j), 2.0 * c);
            }
        }
    }
}
