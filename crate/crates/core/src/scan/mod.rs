//! Grid scans over deformation and cranking frequency.

mod checks;
mod config;
mod output;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::active_space::{select_window, ActiveSpace, Species};
use crate::ansatz::{build_graph, AnsatzProgram, CompiledAnsatz};
use crate::bcs::solve_bcs_with;
use crate::error::{Error, Result};
use crate::nilsson::{build_spherical_basis, diagonalize, jx_matrix, NilssonLevel, NilssonParams, SphericalBasisState};
use crate::observables::{dynamical_moi, measure_sector, ObservableOperators, SectorObservables};
use crate::oracle::{binomial, exact_ground, one_body_expectation, pair_density};
use crate::routhian::{jx_pauli, routhian_pauli, RouthianSpec};
use crate::sector::{FixedNSector, SectorOperator};
use crate::vqe::{minimize_compiled, multistart, OptimizerSettings};

pub use checks::{calibrate, oracle_check, sensitivity, OracleCheckReport, OracleCheckRow, SensitivityRow};
pub use config::{Isotope, Mesh, Methods, MultistartConfig, PairingConfig, ScanConfig, SensitivityConfig};
pub use output::{
    derive_paths, derive_pairing, derive_summary, read_records, render_summary_markdown, scaling_table, write_csv,
    Diagnostics, EndpointDiagnostics, MultistartDiagnostics, PairingRow, PathRow, ScalingRow, SummaryRow,
    REFERENCE_LAST_STEP_MEV,
};

/// Largest fixed-N basis the scan hands to the exact oracle.
pub const ORACLE_SCAN_LIMIT: usize = 20_000;

pub const METHOD_ORDER: [&str; 3] = ["vqe", "bcs", "oracle"];

/// One output row: `(isotope, species, method, delta, omega)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub isotope: String,
    /// `proton`, `neutron` or `total`
    pub species: String,
    /// `vqe`, `bcs` or `oracle`
    pub method: String,
    pub delta: f64,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    #[serde(rename = "routhian_MeV")]
    pub routhian: Option<f64>,
    #[serde(rename = "routhian_shifted_MeV")]
    pub routhian_shifted: Option<f64>,
    #[serde(rename = "jx_hbar")]
    pub jx: Option<f64>,
    #[serde(rename = "j2_hbar2_per_MeV")]
    pub j2: Option<f64>,
    pub one_sided: Option<bool>,
    #[serde(rename = "delta_kappa_MeV")]
    pub delta_kappa: Option<f64>,
    #[serde(rename = "delta_coh_MeV")]
    pub delta_coh: Option<f64>,
    pub n_mean: Option<f64>,
    pub n_var: Option<f64>,
    pub n_fev: Option<usize>,
    pub n_it: Option<usize>,
    #[serde(rename = "last_step_MeV")]
    pub last_step: Option<f64>,
    pub branch: Option<String>,
    pub is_minimum: bool,
    pub status: String,
}

impl ScanRecord {
    pub fn blank(isotope: &str, species: &str, method: &str, delta: f64, omega: f64) -> Self {
        ScanRecord {
            isotope: isotope.to_string(),
            species: species.to_string(),
            method: method.to_string(),
            delta,
            omega,
            routhian: None,
            routhian_shifted: None,
            jx: None,
            j2: None,
            one_sided: None,
            delta_kappa: None,
            delta_coh: None,
            n_mean: None,
            n_var: None,
            n_fev: None,
            n_it: None,
            last_step: None,
            branch: None,
            is_minimum: false,
            status: "ok".into(),
        }
    }

    pub fn ok(&self) -> bool {
        !self.status.starts_with("failed")
    }

    pub fn failed(&self) -> bool {
        !self.ok()
    }
}

/// Nilsson spectrum and spherical basis of an isotope at one deformation.
pub fn nilsson_spectrum(iso: &Isotope, delta: f64, n_max: u32) -> Result<(Vec<NilssonLevel>, Vec<SphericalBasisState>)> {
    let params = NilssonParams::for_mass_number(iso.mass_number());
    Ok((diagonalize(&params, delta, n_max)?, build_spherical_basis(n_max)?))
}

/// Window, `j_x` and ansatz program of one species at one deformation.
#[derive(Debug, Clone)]
pub struct SectorProblem {
    pub active: ActiveSpace,
    pub jx: DMatrix<f64>,
    pub program: AnsatzProgram,
}

impl SectorProblem {
    pub fn build(
        levels: &[NilssonLevel],
        basis: &[SphericalBasisState],
        species: Species,
        particles: usize,
        m: usize,
        jx_threshold: f64,
    ) -> Result<Self> {
        let active = select_window(species, levels, particles, m)?;
        let jx = jx_matrix(&active.levels, basis)?;
        let graph = build_graph(m, &jx, jx_threshold)?;
        let program = AnsatzProgram::new(graph, active.qubits(), active.n_act);
        Ok(SectorProblem { active, jx, program })
    }

    pub fn for_isotope(iso: &Isotope, species: Species, delta: f64, m: usize, n_max: u32, jx_threshold: f64) -> Result<Self> {
        let (levels, basis) = nilsson_spectrum(iso, delta, n_max)?;
        Self::build(&levels, &basis, species, iso.particles(species), m, jx_threshold)
    }

    pub fn spec(&self, g: f64, omega: f64, lambda_p: f64) -> RouthianSpec {
        RouthianSpec { active: self.active.clone(), g, omega, lambda_p, jx: self.jx.clone() }
    }
}

/// VQE walk over an ascending frequency mesh with warm starts, measuring
/// every converged state. Failed frequencies restart the next from zero.
pub fn vqe_sequence(
    problem: &SectorProblem,
    omegas: &[f64],
    g: f64,
    lambda_p: f64,
    settings: &OptimizerSettings,
    observables: &SectorObservables,
) -> Vec<Result<(crate::vqe::VqeResult, crate::observables::ObservableSet)>> {
    let mut out = Vec::with_capacity(omegas.len());
    let jx_op = jx_pauli(&problem.jx).and_then(|p| SectorOperator::from_pauli(&observables.sector, &p));
    let mut init = vec![0.0; problem.program.parameter_count()];
    for &omega in omegas {
        let point = (|| {
            let jx_op = jx_op.as_ref().map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let h = routhian_pauli(&problem.spec(g, omega, lambda_p))?;
            let mut compiled = CompiledAnsatz::new(&problem.program, &h, settings.fd_step)?;
            let result = minimize_compiled(&mut compiled, &init, settings, |_, _, _| {})?;
            let amps = compiled.amplitudes(&result.parameters);
            let obs = measure_sector(&amps, observables, jx_op, g, result.energy)?;
            Ok((result, obs))
        })()
        .map_err(|e: Error| Error::AtFrequency { omega, source: Box::new(e) });
        init = match &point {
            Ok((r, _)) => r.parameters.clone(),
            Err(_) => vec![0.0; problem.program.parameter_count()],
        };
        out.push(point);
    }
    out
}

struct Task<'a> {
    iso: &'a Isotope,
    species: Species,
    delta: f64,
}

fn failed_rows(task: &Task, method: &str, omegas: &[f64], err: &Error) -> Vec<ScanRecord> {
    omegas
        .iter()
        .map(|&w| {
            let mut r = ScanRecord::blank(&task.iso.name, task.species.as_str(), method, task.delta, w);
            r.status = format!("failed: {err}");
            r
        })
        .collect()
}

fn run_task(config: &ScanConfig, g: f64, task: &Task, omegas: &[f64], observables: &SectorObservables) -> Vec<ScanRecord> {
    let mut rows = Vec::new();
    let methods: Vec<&str> = METHOD_ORDER
        .iter()
        .copied()
        .filter(|m| match *m {
            "vqe" => config.methods.vqe,
            "bcs" => config.methods.bcs,
            _ => config.methods.oracle,
        })
        .collect();
    let problem = match SectorProblem::for_isotope(task.iso, task.species, task.delta, config.m, config.n_max, config.jx_threshold) {
        Ok(p) => p,
        Err(e) => {
            for m in methods {
                rows.extend(failed_rows(task, m, omegas, &e));
            }
            return rows;
        }
    };
    let blank = |method: &str, w: f64| ScanRecord::blank(&task.iso.name, task.species.as_str(), method, task.delta, w);

    for method in methods {
        match method {
            "vqe" => {
                let results = vqe_sequence(&problem, omegas, g, config.lambda_p, &config.optimizer, observables);
                for (&w, res) in omegas.iter().zip(results) {
                    let mut r = blank("vqe", w);
                    match res {
                        Ok((v, o)) => {
                            r.routhian = Some(v.energy);
                            r.jx = Some(o.jx);
                            r.delta_kappa = Some(o.delta_kappa);
                            r.delta_coh = Some(o.delta_coh);
                            r.n_mean = Some(o.n_mean);
                            r.n_var = Some(o.n_var);
                            r.n_fev = Some(v.n_fev);
                            r.n_it = Some(v.n_it);
                            r.last_step = Some(v.last_step);
                            if !v.converged {
                                r.status = "unconverged".into();
                            }
                        }
                        Err(e) => r.status = format!("failed: {e}"),
                    }
                    rows.push(r);
                }
            }
            "bcs" => {
                for &w in omegas {
                    let mut r = blank("bcs", w);
                    match solve_bcs_with(&problem.active, g, w, &problem.jx, 1.0, &config.bcs) {
                        Ok(s) => {
                            r.routhian = Some(s.routhian);
                            r.jx = Some(s.jx);
                            r.delta_kappa = Some(s.gap);
                            r.n_mean = Some(s.particle_number);
                            r.n_var = Some(s.number_variance);
                            r.n_it = Some(s.iterations);
                            r.branch = Some(s.branch.as_str().into());
                            if !s.converged {
                                r.status = "unconverged".into();
                            }
                        }
                        Err(e) => r.status = format!("failed: {e}"),
                    }
                    rows.push(r);
                }
            }
            _ => {
                let dim = binomial(problem.active.qubits() as u64, problem.active.n_act as u64) as usize;
                if dim > ORACLE_SCAN_LIMIT {
                    continue;
                }
                for &w in omegas {
                    let mut r = blank("oracle", w);
                    match exact_ground(&problem.spec(g, w, config.lambda_p)) {
                        Ok(gs) => {
                            let rho = pair_density(&gs.basis, &gs.vector);
                            let off: f64 = (0..rho.nrows())
                                .flat_map(|k| (0..rho.ncols()).map(move |l| (k, l)))
                                .filter(|(k, l)| k != l)
                                .map(|(k, l)| rho[(k, l)].abs())
                                .sum();
                            r.routhian = Some(gs.energy);
                            r.jx = Some(one_body_expectation(&gs.basis, &gs.vector, &problem.jx));
                            r.delta_kappa = Some(0.0);
                            r.delta_coh = Some(g * off.sqrt());
                            r.n_mean = Some(problem.active.n_act as f64);
                            r.n_var = Some(0.0);
                        }
                        Err(e) => r.status = format!("failed: {e}"),
                    }
                    rows.push(r);
                }
            }
        }
    }
    rows
}

fn species_rank(s: &str) -> usize {
    match s {
        "proton" => 0,
        "neutron" => 1,
        _ => 2,
    }
}

fn method_rank(m: &str) -> usize {
    METHOD_ORDER.iter().position(|x| *x == m).unwrap_or(METHOD_ORDER.len())
}

/// Key for the deterministic output order.
fn order_key(isotopes: &[String], r: &ScanRecord) -> (usize, usize, usize, i64, i64) {
    let iso = isotopes.iter().position(|n| *n == r.isotope).unwrap_or(usize::MAX);
    (iso, method_rank(&r.method), species_rank(&r.species), (r.delta * 1e9).round() as i64, (r.omega * 1e9).round() as i64)
}

fn key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

/// Appends `total` rows (sum over `species`) for every (method, isotope, delta, omega).
pub fn add_totals(records: &mut Vec<ScanRecord>, species: &[Species]) {
    let mut groups: BTreeMap<(String, String, i64, i64), Vec<&ScanRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.species != "total") {
        groups.entry((r.isotope.clone(), r.method.clone(), key(r.delta), key(r.omega))).or_default().push(r);
    }
    let mut totals = Vec::new();
    for ((iso, method, _, _), rows) in groups {
        let first = rows[0];
        let mut t = ScanRecord::blank(&iso, "total", &method, first.delta, first.omega);
        let complete = species.iter().all(|s| rows.iter().any(|r| r.species == s.as_str()));
        if !complete || rows.iter().any(|r| r.failed()) {
            t.status = "failed: species result missing".into();
        } else {
            let sum = |f: fn(&ScanRecord) -> Option<f64>| rows.iter().map(|r| f(r)).sum::<Option<f64>>();
            t.routhian = sum(|r| r.routhian);
            t.jx = sum(|r| r.jx);
            t.n_mean = sum(|r| r.n_mean);
            t.n_var = sum(|r| r.n_var);
            t.n_fev = rows.iter().map(|r| r.n_fev).sum::<Option<usize>>();
            t.n_it = rows.iter().map(|r| r.n_it).sum::<Option<usize>>();
            t.last_step = rows.iter().map(|r| r.last_step).try_fold(0.0f64, |a, b| b.map(|b| a.max(b)));
            if rows.iter().any(|r| r.status == "unconverged") {
                t.status = "unconverged".into();
            }
        }
        totals.push(t);
    }
    records.extend(totals);
}

/// Deformation minimum among `(delta, energy)`: lowest energy, ties (1e-9 MeV)
/// to smaller `|delta|`, then to negative delta.
pub fn select_minimum(points: &[(f64, f64)]) -> Option<f64> {
    let best = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    points
        .iter()
        .filter(|p| p.1 <= best + 1e-9)
        .map(|p| p.0)
        .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)))
}

/// Marks `is_minimum`, fills shifted energies and the path `J2` columns.
pub fn finalize_records(records: &mut [ScanRecord]) -> Result<()> {
    // delta* per (method, isotope, omega) from the total rows
    let mut totals: BTreeMap<(String, String, i64), Vec<(f64, f64)>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.species == "total" && r.ok()) {
        if let Some(e) = r.routhian {
            totals.entry((r.method.clone(), r.isotope.clone(), key(r.omega))).or_default().push((r.delta, e));
        }
    }
    let minima: BTreeMap<(String, String, i64), f64> =
        totals.iter().filter_map(|(k, pts)| select_minimum(pts).map(|d| (k.clone(), d))).collect();

    // per-(method, isotope, species, omega) minimum for the shifted column
    let mut floor: BTreeMap<(String, String, String, i64), f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.ok()) {
        if let Some(e) = r.routhian {
            let k = (r.method.clone(), r.isotope.clone(), r.species.clone(), key(r.omega));
            let f = floor.entry(k).or_insert(f64::INFINITY);
            *f = f.min(e);
        }
    }
    for r in records.iter_mut() {
        r.is_minimum = minima.get(&(r.method.clone(), r.isotope.clone(), key(r.omega))).map(|d| key(*d) == key(r.delta)).unwrap_or(false);
        r.routhian_shifted = match (r.routhian, floor.get(&(r.method.clone(), r.isotope.clone(), r.species.clone(), key(r.omega)))) {
            (Some(e), Some(f)) if r.ok() => Some(e - f),
            _ => None,
        };
        r.j2 = None;
        r.one_sided = None;
    }

    // J2 along delta*(omega)
    let mut paths: BTreeMap<(String, String, String), Vec<(f64, f64, usize)>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if r.is_minimum && r.ok() {
            if let Some(jx) = r.jx {
                paths.entry((r.method.clone(), r.isotope.clone(), r.species.clone())).or_default().push((r.omega, jx, i));
            }
        }
    }
    for (_, mut pts) in paths {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.len() < 2 {
            continue;
        }
        let series: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
        for (moi, p) in dynamical_moi(&series)?.into_iter().zip(&pts) {
            records[p.2].j2 = Some(moi.j2);
            records[p.2].one_sided = Some(moi.one_sided);
        }
    }
    Ok(())
}

/// Everything a scan produces.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub g: f64,
    pub records: Vec<ScanRecord>,
    pub paths: Vec<PathRow>,
    pub pairing: Vec<PairingRow>,
    pub summary: Vec<SummaryRow>,
    pub diagnostics: Diagnostics,
    pub scaling: Vec<ScalingRow>,
}

impl ScanOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.species != "total" && r.failed()).count()
    }

    /// Writes `records.csv`, `surfaces.csv`, `path.csv`, `pairing.csv`,
    /// `summary.csv`, `summary.md`, `diagnostics.json` and `scaling.csv`.
    pub fn write(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_csv(&dir.join("records.csv"), &self.records)?;
        let surfaces: Vec<&ScanRecord> = self.records.iter().filter(|r| r.method != "oracle").collect();
        write_csv(&dir.join("surfaces.csv"), &surfaces)?;
        write_csv(&dir.join("path.csv"), &self.paths)?;
        write_csv(&dir.join("pairing.csv"), &self.pairing)?;
        write_csv(&dir.join("summary.csv"), &self.summary)?;
        std::fs::write(dir.join("summary.md"), render_summary_markdown(&self.summary))?;
        let json = serde_json::to_string_pretty(&self.diagnostics).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(dir.join("diagnostics.json"), json + "\n")?;
        write_csv(&dir.join("scaling.csv"), &self.scaling)?;
        Ok(())
    }
}

/// Pairing strength from the config (calibrated when requested).
pub fn resolve_g(config: &ScanConfig) -> Result<f64> {
    if config.pairing.calibrate {
        calibrate(config)
    } else {
        Ok(config.pairing.g)
    }
}

/// Full pipeline: sector solves on the (delta, omega) grid, totals,
/// deformation path, derived tables and diagnostics.
pub fn run_scan(config: &ScanConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<ScanOutput> {
    config.validate()?;
    let g = resolve_g(config)?;
    let deltas = config.delta_mesh.points();
    let omegas = config.omega_mesh.points();

    let ops = ObservableOperators::new(config.m)?;
    let sector = FixedNSector::new(2 * config.m, 2 * config.m.div_ceil(2))?;
    let observables = Arc::new(SectorObservables::new(&ops, &sector)?);

    let deltas = &deltas;
    let tasks: Vec<Task> = config
        .isotopes
        .iter()
        .flat_map(|iso| config.species.iter().flat_map(move |&s| deltas.iter().map(move |&d| Task { iso, species: s, delta: d })))
        .collect();
    let total = tasks.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let mut records: Vec<ScanRecord> = tasks
        .par_iter()
        .flat_map_iter(|t| {
            let rows = run_task(config, g, t, &omegas, &observables);
            let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            progress(&format!("[{n}/{total}] {} {} delta={:+.4}", t.iso.name, t.species, t.delta));
            rows
        })
        .collect();

    add_totals(&mut records, &config.species);
    let names: Vec<String> = config.isotopes.iter().map(|i| i.name.clone()).collect();
    records.sort_by_key(|r| order_key(&names, r));
    finalize_records(&mut records)?;

    let paths = derive_paths(&records, &names);
    let pairing = derive_pairing(&records, &names);
    let summary = derive_summary(&records, &names);
    let mut diagnostics = Diagnostics::from_records(&records, &names, g, config.pairing.calibrate);
    if config.multistart.enabled && config.methods.vqe {
        progress("multistart diagnostics");
        diagnostics.multistart = Some(run_multistart(config, g)?);
    }
    let scaling = scaling_table(2, 12.max(config.m));
    Ok(ScanOutput { g, records, paths, pairing, summary, diagnostics, scaling })
}

/// Records of one species at one deformation over `omegas` (ascending, warm
/// started), with every method enabled in `config`.
pub fn point_records(config: &ScanConfig, g: f64, iso: &Isotope, species: Species, delta: f64, omegas: &[f64]) -> Result<Vec<ScanRecord>> {
    if omegas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("frequencies must be ascending".into()));
    }
    let ops = ObservableOperators::new(config.m)?;
    let sector = FixedNSector::new(2 * config.m, 2 * config.m.div_ceil(2))?;
    let observables = SectorObservables::new(&ops, &sector)?;
    Ok(run_task(config, g, &Task { iso, species, delta }, omegas, &observables))
}

/// Multistart robustness check at the configured point.
pub fn run_multistart(config: &ScanConfig, g: f64) -> Result<MultistartDiagnostics> {
    let ms = &config.multistart;
    let iso = config.isotope_or(&ms.isotope, false)?;
    let problem = SectorProblem::for_isotope(iso, ms.species, ms.delta, ms.m, config.n_max, config.jx_threshold)?;
    let h = routhian_pauli(&problem.spec(g, ms.omega, config.lambda_p))?;
    let init = vec![0.0; problem.program.parameter_count()];
    let report = multistart(
        &problem.program,
        &h,
        &init,
        config.optimizer.multistart,
        config.optimizer.sigma,
        config.seed,
        &config.optimizer,
    )?;
    Ok(MultistartDiagnostics::from_report(iso, ms, problem.program.parameter_count(), &report))
}
