use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ScanConfig;
use super::{vqe_sequence, SectorProblem};
use crate::active_space::Species;
use crate::bcs::calibrate_g;
use crate::error::{Error, Result};
use crate::observables::{ObservableOperators, SectorObservables};
use crate::oracle::{exact_ground, exact_pair_ground};
use crate::routhian::routhian_pauli;
use crate::sector::FixedNSector;
use crate::vqe::minimize;

/// Pairing strength reproducing the reference gap as the mean ω = 0 BCS gap
/// over both species of the calibration isotope.
pub fn calibrate(config: &ScanConfig) -> Result<f64> {
    let iso = config.isotope_or(&config.pairing.calibration_isotope, true)?;
    let windows = config
        .species
        .iter()
        .map(|&s| {
            SectorProblem::for_isotope(iso, s, config.pairing.calibration_delta, config.m, config.n_max, config.jx_threshold)
                .map(|p| p.active)
        })
        .collect::<Result<Vec<_>>>()?;
    calibrate_g(config.pairing.reference_gap, &windows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub isotope: String,
    pub delta: f64,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub m: usize,
    pub species: String,
    pub qubits: usize,
    pub parameters: usize,
    #[serde(rename = "routhian_MeV")]
    pub routhian: Option<f64>,
    #[serde(rename = "jx_hbar")]
    pub jx: Option<f64>,
    #[serde(rename = "delta_coh_MeV")]
    pub delta_coh: Option<f64>,
    #[serde(rename = "delta_kappa_MeV")]
    pub delta_kappa: Option<f64>,
    pub n_fev: Option<usize>,
    pub status: String,
}

/// Fixed (delta, omega) VQE points repeated for every window size in `m_values`.
pub fn sensitivity(config: &ScanConfig, g: f64, m_values: &[usize]) -> Result<Vec<SensitivityRow>> {
    let sc = &config.sensitivity;
    let iso = config.isotope_or(&sc.isotope, false)?;
    let mut omegas = sc.omegas.clone();
    omegas.sort_by(f64::total_cmp);
    if omegas.is_empty() || m_values.is_empty() {
        return Err(Error::Config("sensitivity needs at least one omega and one m".into()));
    }
    let mut rows = Vec::new();
    for &m in m_values {
        let ops = ObservableOperators::new(m)?;
        let sector = FixedNSector::new(2 * m, 2 * m.div_ceil(2))?;
        let observables = SectorObservables::new(&ops, &sector)?;
        for &species in &config.species {
            let problem = SectorProblem::for_isotope(iso, species, sc.delta, m, config.n_max, config.jx_threshold)?;
            let results = vqe_sequence(&problem, &omegas, g, config.lambda_p, &config.optimizer, &observables);
            for (&w, res) in omegas.iter().zip(results) {
                let mut row = SensitivityRow {
                    isotope: iso.name.clone(),
                    delta: sc.delta,
                    omega: w,
                    m,
                    species: species.as_str().into(),
                    qubits: 2 * m,
                    parameters: problem.program.parameter_count(),
                    routhian: None,
                    jx: None,
                    delta_coh: None,
                    delta_kappa: None,
                    n_fev: None,
                    status: "ok".into(),
                };
                match res {
                    Ok((v, o)) => {
                        row.routhian = Some(v.energy);
                        row.jx = Some(o.jx);
                        row.delta_coh = Some(o.delta_coh);
                        row.delta_kappa = Some(o.delta_kappa);
                        row.n_fev = Some(v.n_fev);
                        if !v.converged {
                            row.status = "unconverged".into();
                        }
                    }
                    Err(e) => row.status = format!("failed: {e}"),
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckRow {
    pub m: usize,
    pub species: String,
    pub delta: f64,
    #[serde(rename = "g_MeV")]
    pub g: f64,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    #[serde(rename = "vqe_MeV")]
    pub vqe: f64,
    #[serde(rename = "exact_MeV")]
    pub exact: f64,
    /// `vqe - exact`
    #[serde(rename = "bound_gap_MeV")]
    pub bound_gap: f64,
    /// Doubles-only VQE at ω = 0.
    #[serde(rename = "doubles_vqe_MeV")]
    pub doubles_vqe: f64,
    /// Exact pair-sector (seniority-zero) minimum at ω = 0.
    #[serde(rename = "pair_exact_MeV")]
    pub pair_exact: f64,
    #[serde(rename = "pair_gap_MeV")]
    pub pair_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckReport {
    pub rows: Vec<OracleCheckRow>,
    /// Draws with VQE below the exact fixed-N energy (beyond 1e-9 MeV).
    pub bound_violations: usize,
    /// Fraction of draws with the doubles-only energy within 1e-6 MeV of the pair minimum.
    pub pair_agreement: f64,
    /// Draws with the doubles-only energy below the pair minimum (beyond 1e-9 MeV).
    pub pair_below: usize,
    pub passed: bool,
}

/// Slack for round-off when comparing variational and exact energies, MeV.
const ROUND_OFF: f64 = 1e-9;

/// Random `(G, omega)` draws on Nilsson windows of the first isotope for each
/// `m`: full VQE against the fixed-N oracle, and doubles-only VQE at ω = 0
/// against the exact pair-sector minimum.
pub fn oracle_check(config: &ScanConfig, m_values: &[usize], draws: usize, seed: u64) -> Result<OracleCheckReport> {
    let iso = &config.isotopes[0];
    let deltas = config.delta_mesh.points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &m in m_values {
        for _ in 0..draws {
            let species = if rng.gen_bool(0.5) { Species::Proton } else { Species::Neutron };
            let delta = deltas[rng.gen_range(0..deltas.len())];
            let g = rng.gen_range(0.1..1.0);
            let omega = rng.gen_range(0.0..1.0);
            let problem = SectorProblem::for_isotope(iso, species, delta, m, config.n_max, config.jx_threshold)?;
            let zeros = vec![0.0; problem.program.parameter_count()];

            let spec = problem.spec(g, omega, config.lambda_p);
            let vqe = minimize(&problem.program, &routhian_pauli(&spec)?, &zeros, &config.optimizer)?.energy;
            let exact = exact_ground(&spec)?.energy;

            let spec0 = problem.spec(g, 0.0, config.lambda_p);
            let doubles = problem.program.doubles_only();
            let d0 = vec![0.0; doubles.parameter_count()];
            let doubles_vqe = minimize(&doubles, &routhian_pauli(&spec0)?, &d0, &config.optimizer)?.energy;
            let pair_exact = exact_pair_ground(m, problem.active.n_pairs(), g, &spec0.shifted_energies())?;

            rows.push(OracleCheckRow {
                m,
                species: species.as_str().into(),
                delta,
                g,
                omega,
                vqe,
                exact,
                bound_gap: vqe - exact,
                doubles_vqe,
                pair_exact,
                pair_gap: doubles_vqe - pair_exact,
            });
        }
    }
    let bound_violations = rows.iter().filter(|r| r.bound_gap < -ROUND_OFF).count();
    let pair_below = rows.iter().filter(|r| r.pair_gap < -ROUND_OFF).count();
    let within = rows.iter().filter(|r| r.pair_gap.abs() <= 1e-6).count();
    let pair_agreement = if rows.is_empty() { 1.0 } else { within as f64 / rows.len() as f64 };
    Ok(OracleCheckReport {
        passed: bound_violations == 0 && pair_below == 0 && pair_agreement >= 0.9,
        rows,
        bound_violations,
        pair_agreement,
        pair_below,
    })
}
