//! Deformed Nilsson single-particle spectrum.
//!
//! The one-body Hamiltonian is diagonalized in the spherical oscillator basis
//! `|N l Lambda Sigma>` block by block in `(N, Omega)`; quadrupole coupling
//! between different major shells is not included. Oscillator lengths are the
//! unit of `r`, so every matrix element is a multiple of `hbar omega`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::angular::{raising, y20_element};
use crate::error::{Error, Result};

/// Highest oscillator shell the parameter tables cover.
pub const MAX_SHELL: u32 = 7;

/// Shell-dependent spin-orbit and orbit-orbit strengths plus the spherical
/// oscillator quantum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilssonParams {
    pub kappa_by_shell: [f64; 8],
    pub mu_by_shell: [f64; 8],
    /// Spherical oscillator quantum in MeV.
    pub hbar_omega0: f64,
}

impl NilssonParams {
    pub const DEFAULT_KAPPA: [f64; 8] = [0.05, 0.05, 0.05, 0.05, 0.05, 0.0637, 0.0637, 0.06];
    pub const DEFAULT_MU: [f64; 8] = [0.0, 0.0, 0.0, 0.35, 0.625, 0.600, 0.600, 0.54];

    /// Default kappa/mu tables with an explicit oscillator quantum.
    pub fn with_hbar_omega0(hbar_omega0: f64) -> Self {
        Self {
            kappa_by_shell: Self::DEFAULT_KAPPA,
            mu_by_shell: Self::DEFAULT_MU,
            hbar_omega0,
        }
    }

    /// Default tables with `hbar omega0 = 41 A^(-1/3)` MeV.
    pub fn for_mass_number(a: u32) -> Self {
        Self::with_hbar_omega0(41.0 * (a as f64).powf(-1.0 / 3.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar_omega0.is_finite() && self.hbar_omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hbar_omega0 must be positive, got {}",
                self.hbar_omega0
            )));
        }
        if self.kappa_by_shell.iter().chain(&self.mu_by_shell).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite kappa/mu entry".into()));
        }
        Ok(())
    }
}

/// Volume-conserving oscillator frequency ratio `omega~0(delta) / omega0`.
pub fn frequency_ratio(delta: f64) -> f64 {
    (1.0 - 4.0 / 3.0 * delta * delta - 16.0 / 27.0 * delta.powi(3)).powf(-1.0 / 6.0)
}

/// One spherical oscillator state `|N l Lambda Sigma>`. `two_sigma` is `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SphericalBasisState {
    pub n: u32,
    pub l: u32,
    pub lambda: i32,
    pub two_sigma: i32,
}

impl SphericalBasisState {
    pub fn two_omega(&self) -> i32 {
        2 * self.lambda + self.two_sigma
    }

    pub fn parity(&self) -> i32 {
        if self.n % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Image under `T = exp(-i pi j_y) K`: returns the phase and the partner state.
    pub fn time_reversed(&self) -> (f64, SphericalBasisState) {
        // (-1)^(l - Lambda) (-1)^(1/2 - Sigma)
        let exponent = self.l as i32 - self.lambda + (1 - self.two_sigma) / 2;
        let phase = if exponent.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (
            phase,
            SphericalBasisState {
                lambda: -self.lambda,
                two_sigma: -self.two_sigma,
                ..*self
            },
        )
    }
}

/// All oscillator states with `N <= n_max`, ordered lexicographically in
/// `(N, l, Lambda, Sigma)`.
pub fn build_spherical_basis(n_max: u32) -> Result<Vec<SphericalBasisState>> {
    if n_max > MAX_SHELL {
        return Err(Error::ShellCutoff(n_max));
    }
    let mut states = Vec::new();
    for n in 0..=n_max {
        for l in (n % 2..=n).step_by(2) {
            for lambda in -(l as i32)..=(l as i32) {
                for two_sigma in [-1, 1] {
                    states.push(SphericalBasisState { n, l, lambda, two_sigma });
                }
            }
        }
    }
    Ok(states)
}

/// `<N l' | r^2 | N l>` restricted to one major shell.
fn radial_r2(n: u32, l_prime: u32, l: u32) -> f64 {
    let (n, lp, l) = (n as f64, l_prime as f64, l as f64);
    if lp == l {
        n + 1.5
    } else if lp == l + 2.0 {
        -((n - l) * (n + l + 3.0)).sqrt()
    } else if l == lp + 2.0 {
        -((n - lp) * (n + lp + 3.0)).sqrt()
    } else {
        0.0
    }
}

/// Dimensionless `<N l' Lambda | r^2 Y20 | N l Lambda>` within a shell.
pub(crate) fn quadrupole_element(n: u32, l_prime: u32, l: u32, lambda: i32) -> f64 {
    if lambda.unsigned_abs() > l.min(l_prime) {
        return 0.0;
    }
    radial_r2(n, l_prime, l) * y20_element(l_prime, l, lambda)
}

/// Matrix element of `<a| 2 l.s |b>` (requires equal `N` and `l`).
fn two_l_dot_s(a: &SphericalBasisState, b: &SphericalBasisState) -> f64 {
    if a.n != b.n || a.l != b.l {
        return 0.0;
    }
    let l2 = 2 * a.l as i32;
    if a == b {
        return (a.lambda * a.two_sigma) as f64;
    }
    // l+ s- and l- s+ pieces
    if a.two_omega() != b.two_omega() {
        return 0.0;
    }
    if a.lambda == b.lambda + 1 && b.two_sigma == 1 {
        raising(l2, 2 * b.lambda)
    } else if b.lambda == a.lambda + 1 && a.two_sigma == 1 {
        raising(l2, 2 * a.lambda)
    } else {
        0.0
    }
}

/// Element of the Nilsson Hamiltonian between two states of the same shell, in MeV.
pub(crate) fn hamiltonian_element(
    params: &NilssonParams,
    delta: f64,
    a: &SphericalBasisState,
    b: &SphericalBasisState,
) -> f64 {
    if a.n != b.n || a.two_omega() != b.two_omega() {
        return 0.0;
    }
    let n = a.n;
    let hw0 = params.hbar_omega0;
    let hw = hw0 * frequency_ratio(delta);
    let kappa = params.kappa_by_shell[n as usize];
    let mu = params.mu_by_shell[n as usize];

    let mut value = 0.0;
    if a.lambda == b.lambda && a.two_sigma == b.two_sigma {
        let q = quadrupole_element(n, a.l, b.l, a.lambda);
        value -= delta * hw * (4.0 / 3.0) * (PI / 5.0).sqrt() * q;
    }
    if a == b {
        let l = a.l as f64;
        let nn = n as f64;
        value += hw * (nn + 1.5);
        value -= kappa * hw0 * mu * (l * (l + 1.0) - nn * (nn + 3.0) / 2.0);
    }
    value -= kappa * hw0 * two_l_dot_s(a, b);
    value
}

/// Asymptotic Nilsson label `Omega[N n_z Lambda]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AsymptoticLabel {
    pub two_omega: i32,
    pub n: u32,
    pub n_z: u32,
    pub lambda: u32,
}

impl fmt::Display for AsymptoticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2[{}{}{}]", self.two_omega, self.n, self.n_z, self.lambda)
    }
}

/// A Kramers-degenerate deformed orbital. The stored eigenvector is the
/// positive-`Omega` member; its partner is obtained by time reversal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NilssonLevel {
    /// Single-particle energy in MeV.
    pub energy: f64,
    pub two_omega: i32,
    pub parity: i32,
    pub shell: u32,
    pub states: Vec<SphericalBasisState>,
    pub eigenvector: Vec<f64>,
    pub label: AsymptoticLabel,
}

impl NilssonLevel {
    /// Components of the time-reversed partner `T|k+>`.
    pub fn time_reversed_components(&self) -> Vec<(SphericalBasisState, f64)> {
        self.states
            .iter()
            .zip(&self.eigenvector)
            .map(|(s, c)| {
                let (phase, partner) = s.time_reversed();
                (partner, phase * c)
            })
            .collect()
    }

    pub fn components(&self) -> Vec<(SphericalBasisState, f64)> {
        self.states.iter().copied().zip(self.eigenvector.iter().copied()).collect()
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-14 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Asymptotic label by largest overlap with the eigenvectors of the
/// shell-projected quadrupole operator, whose eigenvalues are
/// `sqrt(5/16pi) (3 n_z - N)`.
fn assign_label(n: u32, two_omega: i32, states: &[SphericalBasisState], vector: &[f64]) -> AsymptoticLabel {
    let unit = (5.0 / (16.0 * PI)).sqrt();
    let mut best = (f64::NEG_INFINITY, 0u32, 0u32);
    let lambdas: Vec<i32> = {
        let mut ls: Vec<i32> = states.iter().map(|s| s.lambda).collect();
        ls.dedup();
        ls.sort_unstable();
        ls.dedup();
        ls
    };
    for lambda in lambdas {
        let comps: Vec<(u32, f64)> = states
            .iter()
            .zip(vector)
            .filter(|(s, _)| s.lambda == lambda)
            .map(|(s, c)| (s.l, *c))
            .collect();
        let dim = comps.len();
        let q = DMatrix::from_fn(dim, dim, |i, j| quadrupole_element(n, comps[i].0, comps[j].0, lambda));
        let eig = SymmetricEigen::new(q);
        for k in 0..dim {
            let overlap: f64 = (0..dim).map(|i| eig.eigenvectors[(i, k)] * comps[i].1).sum();
            let weight = overlap * overlap;
            let n_z = ((eig.eigenvalues[k] / unit + n as f64) / 3.0).round().max(0.0) as u32;
            if weight > best.0 + 1e-12 {
                best = (weight, n_z, lambda.unsigned_abs());
            }
        }
    }
    AsymptoticLabel { two_omega, n, n_z: best.1, lambda: best.2 }
}

/// Nilsson levels at deformation `delta`, sorted by energy.
pub fn diagonalize(params: &NilssonParams, delta: f64, n_max: u32) -> Result<Vec<NilssonLevel>> {
    params.validate()?;
    if !(delta.is_finite() && delta.abs() <= 0.5 + 1e-12) {
        return Err(Error::InvalidArgument(format!("deformation {delta} outside [-0.5, 0.5]")));
    }
    let basis = build_spherical_basis(n_max)?;
    let mut levels = Vec::new();
    for n in 0..=n_max {
        for two_omega in (1..=(2 * n as i32 + 1)).step_by(2) {
            let block: Vec<SphericalBasisState> = basis
                .iter()
                .filter(|s| s.n == n && s.two_omega() == two_omega)
                .copied()
                .collect();
            let dim = block.len();
            let h = DMatrix::from_fn(dim, dim, |i, j| hamiltonian_element(params, delta, &block[i], &block[j]));
            if h.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("N={n}, 2Omega={two_omega}")));
            }
            let eig = h.clone().try_symmetric_eigen(1e-14, 10_000).ok_or_else(|| {
                Error::Eigensolver(format!("N={n}, 2Omega={two_omega}"))
            })?;
            for k in 0..dim {
                let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
                fix_sign(&mut v);
                let label = assign_label(n, two_omega, &block, &v);
                levels.push(NilssonLevel {
                    energy: eig.eigenvalues[k],
                    two_omega,
                    parity: if n % 2 == 0 { 1 } else { -1 },
                    shell: n,
                    states: block.clone(),
                    eigenvector: v,
                    label,
                });
            }
        }
    }
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.shell.cmp(&b.shell))
            .then(a.two_omega.cmp(&b.two_omega))
    });
    Ok(levels)
}

/// `<a| j_x |b>` between spherical states (in units of hbar).
pub(crate) fn jx_element(a: &SphericalBasisState, b: &SphericalBasisState) -> f64 {
    if a.n != b.n || a.l != b.l {
        return 0.0;
    }
    let l2 = 2 * a.l as i32;
    let mut value = 0.0;
    if a.two_sigma == b.two_sigma {
        if a.lambda == b.lambda + 1 {
            value += 0.5 * raising(l2, 2 * b.lambda);
        } else if a.lambda + 1 == b.lambda {
            value += 0.5 * raising(l2, 2 * a.lambda);
        }
    }
    if a.lambda == b.lambda && a.two_sigma != b.two_sigma {
        value += 0.5;
    }
    value
}

/// Spin-orbital components in the `(k+, k-)` layout: entry `2k` is level `k`,
/// entry `2k + 1` its time-reversed partner.
pub fn spin_orbital_components(levels: &[NilssonLevel]) -> Vec<Vec<(SphericalBasisState, f64)>> {
    levels
        .iter()
        .flat_map(|lv| [lv.components(), lv.time_reversed_components()])
        .collect()
}

/// Intrinsic `j_x` over the spin orbitals `{k+, k-}` of `levels`.
pub fn jx_matrix(levels: &[NilssonLevel], basis: &[SphericalBasisState]) -> Result<DMatrix<f64>> {
    let index: HashMap<SphericalBasisState, usize> = basis.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    for lv in levels {
        if lv.states.len() != lv.eigenvector.len() {
            return Err(Error::BasisMismatch("eigenvector length differs from state list".into()));
        }
        for s in &lv.states {
            if !index.contains_key(s) {
                return Err(Error::BasisMismatch(format!("state {s:?} missing from basis")));
            }
        }
    }
    let orbitals = spin_orbital_components(levels);
    let dim = orbitals.len();
    let mut jx = DMatrix::zeros(dim, dim);
    for p in 0..dim {
        for q in 0..dim {
            let mut v = 0.0;
            for (sa, ca) in &orbitals[p] {
                for (sb, cb) in &orbitals[q] {
                    v += ca * cb * jx_element(sa, sb);
                }
            }
            jx[(p, q)] = v;
        }
    }
    let dev = (&jx - jx.transpose()).amax();
    if dev > 1e-12 {
        return Err(Error::NonHermitian(dev));
    }
    Ok(jx)
}

/// Debug dump: `index,energy_MeV,two_omega,parity,label`.
pub fn write_levels_csv<W: Write>(levels: &[NilssonLevel], mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,energy_MeV,two_omega,parity,label")?;
    for (i, lv) in levels.iter().enumerate() {
        writeln!(out, "{},{:.10},{},{},{}", i, lv.energy, lv.two_omega, lv.parity, lv.label)?;
    }
    Ok(())
}
