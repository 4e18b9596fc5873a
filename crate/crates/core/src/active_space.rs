//! Active-window selection around the Fermi surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilsson::{AsymptoticLabel, NilssonLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Proton,
    Neutron,
}

impl Species {
    pub fn as_str(&self) -> &'static str {
        match self {
            Species::Proton => "proton",
            Species::Neutron => "neutron",
        }
    }
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proton" | "p" => Ok(Species::Proton),
            "neutron" | "n" => Ok(Species::Neutron),
            other => Err(Error::InvalidArgument(format!("unknown species '{other}'"))),
        }
    }
}

/// `m` doubly degenerate levels around the Fermi surface. Level `k` owns the
/// spin orbitals (qubits) `2k` (`k+`) and `2k + 1` (`k-`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActiveSpace {
    pub species: Species,
    pub levels: Vec<NilssonLevel>,
    /// Single-particle energies of the window, ascending.
    pub energies: Vec<f64>,
    pub n_act: usize,
    pub lambda_f: f64,
    /// Index of the first window level in the full spectrum.
    pub offset: usize,
}

impl ActiveSpace {
    /// Window from bare energies (no Nilsson eigenvectors). Used for model
    /// problems; `lambda_f` is recentered on construction.
    pub fn from_energies(species: Species, energies: Vec<f64>, n_act: usize) -> Result<Self> {
        let m = energies.len();
        if n_act % 2 != 0 || n_act == 0 || n_act > 2 * m {
            return Err(Error::InvalidArgument(format!("n_act = {n_act} invalid for m = {m}")));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("window energies must be finite and ascending".into()));
        }
        let mut space = ActiveSpace {
            species,
            levels: Vec::new(),
            energies,
            n_act,
            lambda_f: 0.0,
            offset: 0,
        };
        space.lambda_f = recenter_lambda(&space);
        Ok(space)
    }

    pub fn m(&self) -> usize {
        self.energies.len()
    }

    pub fn qubits(&self) -> usize {
        2 * self.m()
    }

    pub fn n_pairs(&self) -> usize {
        self.n_act / 2
    }

    pub fn labels(&self) -> Vec<AsymptoticLabel> {
        self.levels.iter().map(|l| l.label).collect()
    }
}

/// Picks `m` levels around the naive Fermi level of `particle_count`
/// particles; the occupied side gets `ceil(m/2)` levels.
pub fn select_window(species: Species, spectrum: &[NilssonLevel], particle_count: usize, m: usize) -> Result<ActiveSpace> {
    if particle_count % 2 != 0 || particle_count == 0 {
        return Err(Error::InvalidArgument(format!("particle count {particle_count} must be even and positive")));
    }
    if m < 2 {
        return Err(Error::InvalidArgument(format!("window size {m} must be at least 2")));
    }
    let filled = particle_count / 2;
    let n_occ = m.div_ceil(2);
    let lo = filled as i64 - n_occ as i64;
    let hi = lo + m as i64;
    if lo < 0 || hi as usize > spectrum.len() {
        return Err(Error::WindowOutOfRange { lo, hi, len: spectrum.len() });
    }
    let (lo, hi) = (lo as usize, hi as usize);
    let levels: Vec<NilssonLevel> = spectrum[lo..hi].to_vec();
    let energies = levels.iter().map(|l| l.energy).collect();
    let mut space = ActiveSpace {
        species,
        levels,
        energies,
        n_act: 2 * n_occ,
        lambda_f: 0.0,
        offset: lo,
    };
    space.lambda_f = recenter_lambda(&space);
    Ok(space)
}

/// Midpoint between the highest occupied and lowest empty window level at
/// the reference filling; the top level when the window is full.
pub fn recenter_lambda(active: &ActiveSpace) -> f64 {
    let occ = active.n_act / 2;
    let e = &active.energies;
    if occ >= e.len() {
        return e[e.len() - 1];
    }
    0.5 * (e[occ - 1] + e[occ])
}
