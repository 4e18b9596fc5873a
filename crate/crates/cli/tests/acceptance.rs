//! Acceptance checks. One `[PASS]`/`[FAIL]` line per criterion. With
//! `QCRANK_ACCEPTANCE_STRICT=1` the binary exits nonzero when any criterion fails.
//!
//! Criteria 7, 9, 11 and 12 read a production scan. Set `QCRANK_ACCEPTANCE_SCAN`
//! to an existing output directory to reuse it; otherwise the scan is run
//! once with `configs/production.toml` and cached under the target tmpdir.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qcrank_core::active_space::{ActiveSpace, Species};
use qcrank_core::ansatz::{build_graph, prepare_state, AnsatzProgram};
use qcrank_core::bcs::{calibrate_g, solve_bcs};
use qcrank_core::fermion::{jordan_wigner, FermionOperator, Ladder};
use qcrank_core::observables::{measure, ObservableOperators};
use qcrank_core::oracle::binomial;
use qcrank_core::pauli::pauli_matrix;
use qcrank_core::routhian::{build_routhian, jx_pauli, routhian_pauli, RouthianSpec};
use qcrank_core::scan::{self, read_records, ScanConfig, ScanRecord, SectorProblem};
use qcrank_core::statevector::StateVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

/// Changes of Delta_coh below this (MeV) along a path count as flat.
const DCOH_RESOLUTION: f64 = 1e-6;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn production_config() -> ScanConfig {
    let mut c = ScanConfig::load(&workspace().join("configs/production.toml")).expect("production config");
    c.output_dir = None;
    c
}

fn within(start: Instant, limit: Duration) -> std::result::Result<(), String> {
    if start.elapsed() > limit {
        Err(format!("took {:.1} s, limit {} s", start.elapsed().as_secs_f64(), limit.as_secs()))
    } else {
        Ok(())
    }
}

/// Occupation-number matrix of `op`, from the canonical ordering sign.
fn fock_matrix(op: &FermionOperator, modes: usize) -> DMatrix<f64> {
    let dim = 1usize << modes;
    let mut out = DMatrix::zeros(dim, dim);
    for term in &op.terms {
        for col in 0..dim as u64 {
            let mut state = col;
            let mut sign = 1.0;
            let mut alive = true;
            for l in term.ops.iter().rev() {
                let bit = 1u64 << l.mode;
                if (state & bit != 0) == l.dagger {
                    alive = false;
                    break;
                }
                if (state & (bit - 1)).count_ones() % 2 == 1 {
                    sign = -sign;
                }
                state ^= bit;
            }
            if alive {
                out[(state as usize, col as usize)] += sign * term.coeff.re;
            }
        }
    }
    out
}

fn random_symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-scale..scale);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

fn random_spec(rng: &mut impl Rng, m: usize) -> RouthianSpec {
    let mut e: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
    e.sort_by(f64::total_cmp);
    let active = ActiveSpace::from_energies(Species::Neutron, e, 2 * m.div_ceil(2)).unwrap();
    let jx = random_symmetric(rng, 2 * m, 1.5);
    let g = rng.gen_range(0.05..1.0);
    let omega = rng.gen_range(0.0..1.0);
    RouthianSpec { active, g, omega, lambda_p: 5.0, jx }
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - Complex64::new(*y, 0.0)).norm()).fold(0.0, f64::max)
}

fn jw_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut terms = 0;
    for m in 1..=3 {
        for _ in 0..3 {
            let spec = random_spec(&mut rng, m);
            let modes = 2 * m;
            let full = build_routhian(&spec).map_err(|e| e.to_string())?;
            let mut pieces: Vec<FermionOperator> = full
                .terms
                .iter()
                .map(|t| FermionOperator { terms: vec![t.clone()] })
                .collect();
            pieces.push(full);
            for op in &pieces {
                let image = pauli_matrix(&jordan_wigner(op, modes).map_err(|e| e.to_string())?, modes).map_err(|e| e.to_string())?;
                worst = worst.max(max_diff(&image, &fock_matrix(op, modes)));
                terms += 1;
            }
        }
    }
    within(start, Duration::from_secs(10))?;
    if worst < 1e-12 {
        Ok(format!("{terms} operators, max deviation {worst:.1e}"))
    } else {
        Err(format!("max deviation {worst:.3e} over {terms} operators"))
    }
}

fn random_state(rng: &mut impl Rng, qubits: usize) -> StateVector {
    let mut amps: Vec<Complex64> =
        (0..1usize << qubits).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector { qubits, amplitudes: amps }
}

fn gate_deviation(state: &StateVector, after: &StateVector, generator: &FermionOperator, angle: f64) -> std::result::Result<f64, String> {
    let q = state.qubits;
    let g = pauli_matrix(&jordan_wigner(generator, q).map_err(|e| e.to_string())?, q).map_err(|e| e.to_string())?;
    let imag = g.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > 1e-15 {
        return Err(format!("generator has imaginary entries ({imag:.1e})"));
    }
    let u = (g.map(|c| c.re) * (0.5 * angle)).exp().map(|x| Complex64::new(x, 0.0));
    let expected = u * DVector::from_column_slice(&state.amplitudes);
    Ok(expected.iter().zip(&after.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

fn gate_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut gates = 0;
    for m in 1..=4 {
        let q = 2 * m;
        for p in 0..q {
            for r in 0..q {
                if p == r {
                    continue;
                }
                let phi = rng.gen_range(-3.0..3.0);
                let state = random_state(&mut rng, q);
                let mut after = state.clone();
                after.apply_single_excitation(p, r, phi).map_err(|e| e.to_string())?;
                let mut gen = FermionOperator::new();
                gen.push(1.0, vec![Ladder::create(p), Ladder::annihilate(r)]);
                gen.push(-1.0, vec![Ladder::create(r), Ladder::annihilate(p)]);
                worst = worst.max(gate_deviation(&state, &after, &gen, phi)?);
                gates += 1;
            }
        }
        for k in 0..m {
            for l in 0..m {
                if k == l {
                    continue;
                }
                let theta = rng.gen_range(-3.0..3.0);
                let state = random_state(&mut rng, q);
                let mut after = state.clone();
                after.apply_pair_excitation(k, l, theta).map_err(|e| e.to_string())?;
                // a_{2k}^+ a_{2k+1}^+ a_{2l} a_{2l+1} - h.c.
                let mut gen = FermionOperator::new();
                gen.push(
                    1.0,
                    vec![Ladder::create(2 * k), Ladder::create(2 * k + 1), Ladder::annihilate(2 * l), Ladder::annihilate(2 * l + 1)],
                );
                gen.push(
                    -1.0,
                    vec![Ladder::create(2 * l + 1), Ladder::create(2 * l), Ladder::annihilate(2 * k + 1), Ladder::annihilate(2 * k)],
                );
                worst = worst.max(gate_deviation(&state, &after, &gen, theta)?);
                gates += 1;
            }
        }
    }
    within(start, Duration::from_secs(30))?;
    if worst < 1e-10 {
        Ok(format!("{gates} gates up to 8 qubits, max deviation {worst:.1e}"))
    } else {
        Err(format!("max deviation {worst:.3e} over {gates} gates"))
    }
}

fn symmetry_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = 4;
    let spec = random_spec(&mut rng, m);
    // every spin-orbital pair coupled, so every single gate is exercised
    let graph = build_graph(m, &spec.jx, 1e-12).map_err(|e| e.to_string())?;
    let program = AnsatzProgram::new(graph, 2 * m, spec.active.n_act);
    let h = routhian_pauli(&spec).map_err(|e| e.to_string())?;
    let jx = jx_pauli(&spec.jx).map_err(|e| e.to_string())?;
    let ops = ObservableOperators::new(m).map_err(|e| e.to_string())?;
    let (mut dn, mut var, mut kappa) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let params: Vec<f64> =
            (0..program.parameter_count()).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let state = prepare_state(&params, &program).map_err(|e| e.to_string())?;
        let o = measure(&state, &spec.active, spec.g, &jx, &h, &ops).map_err(|e| e.to_string())?;
        dn = dn.max((o.n_mean - spec.active.n_act as f64).abs());
        var = var.max(o.n_var);
        kappa = kappa.max(o.delta_kappa);
    }
    within(start, Duration::from_secs(60))?;
    let detail = format!(
        "1000 vectors, {} gates: max |<N> - n_act| {dn:.1e}, max Var(N) {var:.1e}, max Delta_kappa {kappa:.1e}",
        program.parameter_count()
    );
    if dn < 1e-10 && var < 1e-10 && kappa < 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let config = production_config();
    let rep = scan::oracle_check(&config, &[2, 3, 4], 20, config.seed).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(300))?;
    let below = rep.rows.iter().filter(|r| r.vqe < r.exact - 1e-9).count();
    let pair_below = rep.rows.iter().filter(|r| r.doubles_vqe < r.pair_exact - 1e-9).count();
    let agree = rep.rows.iter().filter(|r| (r.doubles_vqe - r.pair_exact).abs() <= 1e-6).count();
    let frac = agree as f64 / rep.rows.len() as f64;
    let worst_gap = rep.rows.iter().map(|r| r.vqe - r.exact).fold(0.0, f64::max);
    let detail = format!(
        "{} draws: {below} below exact, doubles-only within 1e-6 MeV on {:.0}%, {pair_below} below pair minimum, largest VQE - exact {worst_gap:.3} MeV",
        rep.rows.len(),
        100.0 * frac
    );
    if below == 0 && pair_below == 0 && frac >= 0.9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn penalty_sector() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut draws = 0;
    for m in 1..=4 {
        for _ in 0..8 {
            let spec = random_spec(&mut rng, m);
            let q = 2 * m;
            let h = pauli_matrix(&routhian_pauli(&spec).map_err(|e| e.to_string())?, q).map_err(|e| e.to_string())?;
            let real = h.map(|c| c.re);
            let eig = real.symmetric_eigen();
            let i = eig.eigenvalues.imin();
            let v = eig.eigenvectors.column(i);
            let n: f64 = v.iter().enumerate().map(|(b, a)| a * a * (b as u64).count_ones() as f64).sum();
            worst = worst.max((n - spec.active.n_act as f64).abs());
            draws += 1;
        }
    }
    within(start, Duration::from_secs(60))?;
    if worst < 1e-10 {
        Ok(format!("{draws} spectra, max |<N> - n_act| {worst:.1e}"))
    } else {
        Err(format!("max |<N> - n_act| {worst:.3e} over {draws} spectra"))
    }
}

/// Particle number `sum_k 2 v_k^2` and lambda by bisection at fixed gap.
fn lambda_for(e: &[f64], gap: f64, n: f64) -> f64 {
    let count = |lam: f64| e.iter().map(|&x| 1.0 - (x - lam) / ((x - lam).powi(2) + gap * gap).sqrt()).sum::<f64>();
    let (mut lo, mut hi) = (e[0] - 100.0, e[e.len() - 1] + 100.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Nested bisection of `1 = (G/2) sum_k 1/E_k`, `N = sum_k 2 v_k^2`;
/// `None` when no paired solution exists.
fn bisect_bcs(e: &[f64], g: f64, n: f64) -> Option<(f64, f64)> {
    let excess = |gap: f64| {
        let lam = lambda_for(e, gap, n);
        0.5 * g * e.iter().map(|&x| 1.0 / ((x - lam).powi(2) + gap * gap).sqrt()).sum::<f64>() - 1.0
    };
    let (mut lo, mut hi) = (1e-9, g * e.len() as f64 + 10.0);
    if excess(lo) <= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gap = 0.5 * (lo + hi);
    // a vanishing root leaves lambda anywhere inside the Fermi gap
    (gap > 1e-6).then(|| (gap, lambda_for(e, gap, n)))
}

fn bcs_solver() -> Outcome {
    let start = Instant::now();
    let config = production_config();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut windows: Vec<ActiveSpace> = Vec::new();
    for iso in &config.isotopes {
        for species in [Species::Proton, Species::Neutron] {
            for delta in [-0.25, 0.0, 0.25] {
                let p = SectorProblem::for_isotope(iso, species, delta, config.m, config.n_max, config.jx_threshold)
                    .map_err(|e| e.to_string())?;
                windows.push(p.active);
            }
        }
    }
    for _ in 0..20 {
        let m: usize = rng.gen_range(2..=8);
        let mut e: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
        e.sort_by(f64::total_cmp);
        windows.push(ActiveSpace::from_energies(Species::Neutron, e, 2 * m.div_ceil(2)).unwrap());
    }
    let (mut worst, mut paired, mut collapsed) = (0.0f64, 0, 0);
    for (i, w) in windows.iter().enumerate() {
        let g = if i % 2 == 0 { config.pairing.g } else { rng.gen_range(0.1..1.0) };
        let jx = DMatrix::zeros(w.qubits(), w.qubits());
        let s = solve_bcs(w, g, 0.0, &jx, 1.0).map_err(|e| e.to_string())?;
        match bisect_bcs(&w.energies, g, w.n_act as f64) {
            Some((gap, lam)) => {
                let d = (s.gap - gap).abs().max((s.lambda - lam).abs());
                worst = worst.max(d);
                paired += 1;
            }
            None => {
                if s.gap != 0.0 {
                    return Err(format!("window {i}: no paired solution, solver gap {}", s.gap));
                }
                collapsed += 1;
            }
        }
    }
    if worst >= 1e-8 {
        return Err(format!("max (gap, lambda) deviation {worst:.3e} MeV"));
    }

    let mut closed = 0.0f64;
    for (m, pairs, g) in [(6usize, 3usize, 0.4), (6, 2, 0.3), (5, 1, 0.7), (8, 5, 0.25)] {
        let w = ActiveSpace::from_energies(Species::Proton, vec![0.3; m], 2 * pairs).unwrap();
        let s = solve_bcs(&w, g, 0.0, &DMatrix::zeros(2 * m, 2 * m), 0.5).map_err(|e| e.to_string())?;
        closed = closed.max((s.gap - g * ((pairs * (m - pairs)) as f64).sqrt()).abs());
    }
    if closed >= 1e-8 {
        return Err(format!("degenerate-level gap off by {closed:.3e} MeV"));
    }

    let iso = config.isotopes.last().unwrap();
    let cal: Vec<ActiveSpace> = [Species::Proton, Species::Neutron]
        .iter()
        .map(|&s| SectorProblem::for_isotope(iso, s, 0.0, config.m, config.n_max, config.jx_threshold).map(|p| p.active))
        .collect::<qcrank_core::Result<_>>()
        .map_err(|e| e.to_string())?;
    let g0 = 0.4317;
    let target = cal
        .iter()
        .map(|w| solve_bcs(w, g0, 0.0, &DMatrix::zeros(w.qubits(), w.qubits()), 1.0).map(|s| s.gap))
        .sum::<qcrank_core::Result<f64>>()
        .map_err(|e| e.to_string())?
        / cal.len() as f64;
    let g = calibrate_g(target, &cal).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(60))?;
    if (g - g0).abs() >= 1e-4 {
        return Err(format!("calibrate_g returned {g:.6} for {g0}"));
    }
    Ok(format!(
        "{paired} paired windows within {worst:.1e} MeV, {collapsed} without a paired solution, closed form {closed:.1e}, G round trip {g:.6} (from {g0})"
    ))
}

fn count_singles(jx: &DMatrix<f64>, threshold: f64) -> usize {
    let n = jx.nrows();
    (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).filter(|&(p, q)| jx[(p, q)].abs() > threshold).count()
}

fn parameter_count_law() -> Outcome {
    let config = production_config();
    let mut counts = std::collections::BTreeMap::new();
    let mut windows = 0;
    for iso in &config.isotopes {
        for &species in &config.species {
            for delta in config.delta_mesh.points() {
                let p = SectorProblem::for_isotope(iso, species, delta, 8, config.n_max, config.jx_threshold)
                    .map_err(|e| e.to_string())?;
                if p.program.graph.doubles.len() != 28 {
                    return Err(format!("{} {species} delta={delta}: {} doubles", iso.name, p.program.graph.doubles.len()));
                }
                let edges = count_singles(&p.jx, config.jx_threshold);
                if p.program.graph.singles.len() != edges {
                    return Err(format!(
                        "{} {species} delta={delta}: {} singles for {edges} nonzero couplings",
                        iso.name,
                        p.program.graph.singles.len()
                    ));
                }
                if p.program.parameter_count() != 28 + edges {
                    return Err("parameter count differs from doubles + singles".into());
                }
                *counts.entry(edges).or_insert(0) += 1;
                windows += 1;
            }
        }
    }
    let hist: Vec<String> = counts.iter().map(|(k, v)| format!("{k} singles x{v}")).collect();
    Ok(format!("{windows} windows, 28 doubles each; {} (reference 14)", hist.join(", ")))
}

struct Production {
    dir: PathBuf,
    records: Vec<ScanRecord>,
    omegas: Vec<f64>,
    isotopes: Vec<String>,
}

fn production_scan() -> std::result::Result<Production, String> {
    let config = production_config();
    let dir = match std::env::var_os("QCRANK_ACCEPTANCE_SCAN") {
        Some(d) => PathBuf::from(d),
        None => {
            let cache = Path::new(env!("CARGO_TARGET_TMPDIR")).join("production-scan");
            let cached = std::fs::read_to_string(cache.join("config.toml"))
                .ok()
                .and_then(|t| ScanConfig::from_toml(&t).ok())
                .is_some_and(|c| c == config)
                && cache.join("records.csv").exists();
            if !cached {
                eprintln!("running the production scan into {} (long)", cache.display());
                let out = Command::new(env!("CARGO_BIN_EXE_qcrank"))
                    .arg("--config")
                    .arg(workspace().join("configs/production.toml"))
                    .arg("--out")
                    .arg(&cache)
                    .arg("scan")
                    .output()
                    .map_err(|e| e.to_string())?;
                let log = String::from_utf8_lossy(&out.stderr);
                eprintln!("{}", log.lines().last().unwrap_or(""));
                if out.status.code() == Some(2) || out.status.code().is_none() {
                    return Err(format!("production scan exited with {}: {log}", out.status));
                }
            }
            cache
        }
    };
    let records = read_records(&dir.join("records.csv")).map_err(|e| format!("{}: {e}", dir.display()))?;
    Ok(Production {
        dir,
        records,
        omegas: config.omega_mesh.points(),
        isotopes: config.isotopes.iter().map(|i| i.name.clone()).collect(),
    })
}

fn path_rows<'a>(p: &'a Production, method: &str, iso: &str, species: &str) -> Vec<&'a ScanRecord> {
    let mut rows: Vec<&ScanRecord> = p
        .records
        .iter()
        .filter(|r| r.method == method && r.isotope == iso && r.species == species && r.is_minimum)
        .collect();
    rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    rows
}

fn at_rest_alignment(p: &Production) -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for iso in &p.isotopes {
        for species in ["proton", "neutron", "total"] {
            let rows = path_rows(p, "vqe", iso, species);
            let r = rows.first().filter(|r| r.omega == p.omegas[0]).ok_or(format!("{iso} {species}: no omega = 0 minimum"))?;
            if r.status != "ok" {
                return Err(format!("{iso} {species}: omega = 0 minimum is {}", r.status));
            }
            worst = worst.max(r.jx.ok_or("missing jx")?.abs());
            n += 1;
        }
    }
    if worst < 1e-6 {
        Ok(format!("{n} omega = 0 minima, max |Jx| {worst:.1e}"))
    } else {
        Err(format!("max |Jx| {worst:.3e} at omega = 0"))
    }
}

fn endpoint_total(p: &Production, method: &str, iso: &str) -> std::result::Result<f64, String> {
    let last = *p.omegas.last().unwrap();
    path_rows(p, method, iso, "total")
        .into_iter()
        .find(|r| r.omega == last)
        .and_then(|r| r.jx)
        .ok_or(format!("{method} {iso}: no omega = {last} minimum"))
}

fn table_trends(p: &Production) -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();

    let bad: Vec<&ScanRecord> = p
        .records
        .iter()
        .filter(|r| r.method == "vqe" && r.species != "total" && r.status == "ok")
        .filter(|r| !r.delta_coh.is_some_and(f64::is_finite))
        .collect();
    if !bad.is_empty() {
        failures.push(format!("(a) {} converged points without a finite Delta_coh", bad.len()));
    }
    for iso in &p.isotopes {
        for species in ["proton", "neutron"] {
            let path: Vec<f64> = path_rows(p, "vqe", iso, species).iter().filter_map(|r| r.delta_coh).collect();
            let rises: Vec<usize> = (1..path.len()).filter(|&i| path[i] > path[i - 1] + DCOH_RESOLUTION).collect();
            let rise = (1..path.len()).map(|i| path[i] - path[i - 1]).fold(f64::NEG_INFINITY, f64::max);
            notes.push(format!(
                "{iso} {species} Dcoh {:.3}->{:.3} (largest step {rise:+.1e})",
                path.first().copied().unwrap_or(f64::NAN),
                path.last().copied().unwrap_or(f64::NAN)
            ));
            if path.len() != p.omegas.len() || !rises.is_empty() {
                let steps: Vec<String> = rises.iter().map(|&i| format!("{:.6}->{:.6}", path[i - 1], path[i])).collect();
                failures.push(format!("(a) {iso} {species} Dcoh rises along the path: {}", steps.join(", ")));
            }
        }
    }

    let vqe: Vec<(String, f64)> = p
        .isotopes
        .iter()
        .map(|i| endpoint_total(p, "vqe", i).map(|j| (i.clone(), j)))
        .collect::<std::result::Result<_, _>>()?;
    notes.push(format!("VQE Jx(1.0): {}", vqe.iter().map(|(i, j)| format!("{i} {j:.2}")).collect::<Vec<_>>().join(", ")));
    let top = vqe.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    if top.0 != "82Zr" {
        failures.push(format!("(b) largest VQE Jx at omega = 1.0 is {} ({:.2})", top.0, top.1));
    }

    for (iso, jv) in &vqe {
        let jb = endpoint_total(p, "bcs", iso)?;
        notes.push(format!("BCS {iso} {jb:.2}"));
        if jb <= *jv {
            failures.push(format!("(c) {iso}: BCS Jx {jb:.2} does not exceed VQE {jv:.2}"));
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn determinism() -> Outcome {
    let config = workspace().join("configs/minimal.toml");
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let out = Command::new(env!("CARGO_BIN_EXE_qcrank"))
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir.path())
            .arg("scan")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("scan exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
        }
        dirs.push(dir);
    }
    let mut names: Vec<String> = std::fs::read_dir(dirs[0].path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    if !names.iter().any(|n| n.ends_with(".json")) || names.iter().filter(|n| n.ends_with(".csv")).count() < 5 {
        return Err(format!("unexpected bundle: {names:?}"));
    }
    Ok(format!("{} files byte-identical: {}", names.len(), names.join(" ")))
}

fn optimizer_diagnostics(p: &Production) -> Outcome {
    let (lo, hi) = (3081.0 / 10.0, 6201.0 * 10.0);
    let ends = [p.omegas[0], *p.omegas.last().unwrap()];
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut max_step = 0.0f64;
    for iso in &p.isotopes {
        for species in ["proton", "neutron"] {
            for r in path_rows(p, "vqe", iso, species).into_iter().filter(|r| ends.contains(&r.omega)) {
                let step = r.last_step.map(f64::abs).unwrap_or(f64::INFINITY);
                let fev = r.n_fev.unwrap_or(0);
                max_step = max_step.max(step);
                notes.push(format!("{iso} {species} w={} d*={:+.4} n_fev={fev} dE={step:.1e}", r.omega, r.delta));
                if step > 1e-10 {
                    failures.push(format!("{iso} {species} omega={}: |dE_last| {step:.2e}", r.omega));
                }
                if !((fev as f64) >= lo && (fev as f64) <= hi) {
                    failures.push(format!("{iso} {species} omega={}: n_fev {fev} outside [{lo}, {hi}]", r.omega));
                }
            }
        }
    }
    let diag: serde_json::Value = serde_json::from_slice(&std::fs::read(p.dir.join("diagnostics.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let spread = diag["multistart"]["spread_keV"].as_f64();
    notes.push(format!(
        "max |dE_last| {max_step:.1e} MeV (reference {:.1e}); multistart spread {} keV",
        scan::REFERENCE_LAST_STEP_MEV,
        spread.map_or("n/a".into(), |s| format!("{s:.4}"))
    ));
    if spread.is_none() {
        failures.push("no multistart diagnostics".into());
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn scaling_table(p: &Production) -> Outcome {
    let mut rdr = csv::Reader::from_path(p.dir.join("scaling.csv")).map_err(|e| e.to_string())?;
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or(format!("scaling.csv lacks {name}"));
    let (mc, dc) = (col("m")?, col("fixed_n_dimension")?);
    let mut found = None;
    for row in rdr.records() {
        let row = row.map_err(|e| e.to_string())?;
        let m: u64 = row[mc].parse().map_err(|_| "bad m")?;
        let d: u64 = row[dc].parse().map_err(|_| "bad dimension")?;
        if d != binomial(2 * m, m) {
            return Err(format!("m = {m}: {d} != C(2m, m)"));
        }
        if m == 8 {
            found = Some(d);
        }
    }
    match found {
        Some(12870) => Ok("C(16, 8) = 12870 at M = 8".into()),
        other => Err(format!("M = 8 entry {other:?}")),
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[PASS] {n:>2} {name}: {d} ({secs:.1} s)"),
            Err(d) => {
                failed += 1;
                println!("[FAIL] {n:>2} {name}: {d} ({secs:.1} s)")
            }
        }
    };

    let t = Instant::now();
    report(1, "Jordan-Wigner correctness", t, jw_correctness());
    let t = Instant::now();
    report(2, "gate exactness", t, gate_exactness());
    let t = Instant::now();
    report(3, "number and anomalous-density symmetry", t, symmetry_suite());
    let t = Instant::now();
    report(4, "variational bound and oracle equivalence", t, oracle_equivalence());
    let t = Instant::now();
    report(5, "penalty sector", t, penalty_sector());
    let t = Instant::now();
    report(6, "cranked BCS solver", t, bcs_solver());

    let t = Instant::now();
    let production = production_scan();
    if let Ok(p) = &production {
        eprintln!("production scan: {} ({:.0} s)", p.dir.display(), t.elapsed().as_secs_f64());
    }
    let needs_scan = |f: &dyn Fn(&Production) -> Outcome| match &production {
        Ok(p) => f(p),
        Err(e) => Err(format!("production scan unavailable: {e}")),
    };

    let t = Instant::now();
    report(7, "zero alignment at rest", t, needs_scan(&at_rest_alignment));
    let t = Instant::now();
    report(8, "parameter-count law", t, parameter_count_law());
    let t = Instant::now();
    report(9, "qualitative pairing and alignment trends", t, needs_scan(&table_trends));
    let t = Instant::now();
    report(10, "determinism", t, determinism());
    let t = Instant::now();
    report(11, "optimizer diagnostics at endpoints", t, needs_scan(&optimizer_diagnostics));
    let t = Instant::now();
    report(12, "scaling table", t, needs_scan(&scaling_table));

    println!("{} of 12 criteria passed", 12 - failed);
    let strict = std::env::var_os("QCRANK_ACCEPTANCE_STRICT").is_some_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
