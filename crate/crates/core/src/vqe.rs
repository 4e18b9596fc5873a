//! Variational minimization of the Routhian over the structured ansatz.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzProgram, CompiledAnsatz};
use crate::error::{Error, Result};
use crate::optimize::{minimize as lbfgsb, LbfgsbSettings};
use crate::pauli::PauliSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    pub max_iter: usize,
    /// MeV
    pub tol_energy: f64,
    pub tol_grad: f64,
    /// Central-difference step in radians.
    pub fd_step: f64,
    pub memory: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Number of randomized restarts in multistart diagnostics.
    pub multistart: usize,
    /// Standard deviation of multistart perturbations (radians).
    pub sigma: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        let b = LbfgsbSettings::default();
        OptimizerSettings {
            max_iter: b.max_iter,
            tol_energy: b.tol_energy,
            tol_grad: b.tol_grad,
            fd_step: 1e-6,
            memory: b.memory,
            lower_bound: b.lower,
            upper_bound: b.upper,
            multistart: 4,
            sigma: 0.1,
        }
    }
}

impl OptimizerSettings {
    fn lbfgsb(&self) -> LbfgsbSettings {
        LbfgsbSettings {
            max_iter: self.max_iter,
            tol_energy: self.tol_energy,
            tol_grad: self.tol_grad,
            memory: self.memory,
            lower: self.lower_bound,
            upper: self.upper_bound,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VqeResult {
    /// Minimized Routhian, MeV.
    pub energy: f64,
    pub parameters: Vec<f64>,
    pub n_fev: usize,
    pub n_it: usize,
    /// `|Delta E|` of the last accepted iteration, MeV.
    pub last_step: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Minimize with a per-iteration hook receiving `(iteration, angles, energy)`.
pub fn minimize_with_callback(
    program: &AnsatzProgram,
    h: &PauliSum,
    init: &[f64],
    settings: &OptimizerSettings,
    callback: impl FnMut(usize, &[f64], f64),
) -> Result<VqeResult> {
    if init.len() != program.parameter_count() {
        return Err(Error::Dimension(format!("{} initial angles for {} gates", init.len(), program.parameter_count())));
    }
    let mut objective = CompiledAnsatz::new(program, h, settings.fd_step)?;
    minimize_compiled(&mut objective, init, settings, callback)
}

/// Minimization over an already compiled ansatz (its `fd_step` is used).
pub fn minimize_compiled(
    objective: &mut CompiledAnsatz,
    init: &[f64],
    settings: &OptimizerSettings,
    callback: impl FnMut(usize, &[f64], f64),
) -> Result<VqeResult> {
    if init.len() != objective.parameter_count() {
        return Err(Error::Dimension(format!("{} initial angles for {} gates", init.len(), objective.parameter_count())));
    }
    let out = lbfgsb(objective, init, &settings.lbfgsb(), callback)?;
    Ok(VqeResult {
        energy: out.f,
        converged: out.converged(),
        parameters: out.x,
        n_fev: out.n_fev,
        n_it: out.n_it,
        last_step: if out.n_it == 0 { 0.0 } else { out.last_step },
        trace: out.trace,
    })
}

pub fn minimize(program: &AnsatzProgram, h: &PauliSum, init: &[f64], settings: &OptimizerSettings) -> Result<VqeResult> {
    minimize_with_callback(program, h, init, settings, |_, _, _| {})
}

/// Walks an ascending frequency mesh at fixed deformation, seeding each
/// frequency with the previous optimum (the first starts from zero angles).
pub fn warm_start_sequence<F>(
    program: &AnsatzProgram,
    omega_mesh: &[f64],
    mut hamiltonian_at: F,
    settings: &OptimizerSettings,
) -> Result<Vec<VqeResult>>
where
    F: FnMut(f64) -> Result<PauliSum>,
{
    if omega_mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("frequency mesh must be strictly ascending".into()));
    }
    let mut results: Vec<VqeResult> = Vec::with_capacity(omega_mesh.len());
    for &omega in omega_mesh {
        let annotate = |e: Error| Error::AtFrequency { omega, source: Box::new(e) };
        let h = hamiltonian_at(omega).map_err(annotate)?;
        let init = match results.last() {
            Some(prev) => prev.parameters.clone(),
            None => vec![0.0; program.parameter_count()],
        };
        results.push(minimize(program, &h, &init, settings).map_err(annotate)?);
    }
    Ok(results)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultistartReport {
    pub runs: Vec<VqeResult>,
    pub best_energy: f64,
    /// Largest final energy minus the best, MeV.
    pub spread: f64,
}

/// Runs from `reference_init` plus `n_random` Gaussian perturbations of it.
pub fn multistart(
    program: &AnsatzProgram,
    h: &PauliSum,
    reference_init: &[f64],
    n_random: usize,
    sigma: f64,
    seed: u64,
    settings: &OptimizerSettings,
) -> Result<MultistartReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut inits = vec![reference_init.to_vec()];
    for _ in 0..n_random {
        inits.push(reference_init.iter().map(|x| x + normal.sample(&mut rng)).collect());
    }
    let runs = inits
        .iter()
        .map(|x0| minimize(program, h, x0, settings))
        .collect::<Result<Vec<_>>>()?;
    let best = runs.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
    let worst = runs.iter().map(|r| r.energy).fold(f64::NEG_INFINITY, f64::max);
    Ok(MultistartReport { runs, best_energy: best, spread: worst - best })
}
