//! Self-consistent cranked BCS on an active window.
//!
//! Quasiparticle matrix over the `2m` spin orbitals
//!
//! ```text
//! [  h'   D ]      h' = diag(eps - lambda) - omega j_x
//! [ -D  -h' ]      D_{k+,k-} = -Delta,  D_{k-,k+} = +Delta
//! ```
//!
//! with `Delta = G sum_k kappa_{k+,k-}`. The vacuum keeps the `2m` largest
//! eigenvectors `(U; V)`; `rho = V V^T`, `kappa = V U^T`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::active_space::ActiveSpace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Paired,
    Collapsed,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Paired => "paired",
            Branch::Collapsed => "collapsed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcsSettings {
    /// Convergence threshold on the gap-equation residual, MeV.
    pub tol: f64,
    /// Log-spaced gap values scanned for sign changes of the gap equation.
    pub grid: usize,
}

impl Default for BcsSettings {
    fn default() -> Self {
        BcsSettings { tol: 1e-10, grid: 24 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BcsSolution {
    /// MeV
    pub gap: f64,
    /// MeV
    pub lambda: f64,
    /// `Tr[(h - omega j_x) rho] - Delta^2 / G`, MeV
    pub routhian: f64,
    pub jx: f64,
    /// `v_k^2` per level
    pub occupations: Vec<f64>,
    pub particle_number: f64,
    /// `2 Tr(rho - rho^2)`
    pub number_variance: f64,
    pub converged: bool,
    pub branch: Branch,
    /// Gap-equation evaluations.
    pub iterations: usize,
    /// Routhian of the branch that was not selected.
    pub other_branch_routhian: Option<f64>,
}

fn window_hamiltonian(active: &ActiveSpace, jx: &DMatrix<f64>, omega: f64) -> DMatrix<f64> {
    let mut h = jx.scale(-omega);
    for (k, e) in active.energies.iter().enumerate() {
        let d = e - active.lambda_f;
        h[(2 * k, 2 * k)] += d;
        h[(2 * k + 1, 2 * k + 1)] += d;
    }
    h
}

fn check(active: &ActiveSpace, g: f64, omega: f64, jx: &DMatrix<f64>) -> Result<()> {
    let n = active.qubits();
    if jx.nrows() != n || jx.ncols() != n {
        return Err(Error::Dimension(format!("j_x is {}x{}, window has {n} spin orbitals", jx.nrows(), jx.ncols())));
    }
    if !(g >= 0.0 && g.is_finite() && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("G = {g}, omega = {omega}")));
    }
    Ok(())
}

/// Quasiparticle matrix at chemical potential `lambda` (absolute, MeV).
pub fn quasiparticle_matrix(active: &ActiveSpace, jx: &DMatrix<f64>, omega: f64, gap: f64, lambda: f64) -> DMatrix<f64> {
    let n = active.qubits();
    let mut h = window_hamiltonian(active, jx, omega);
    let shift = lambda - active.lambda_f;
    for i in 0..n {
        h[(i, i)] -= shift;
    }
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            big[(i, j)] = h[(i, j)];
            big[(n + i, n + j)] = -h[(i, j)];
        }
    }
    for k in 0..active.m() {
        let (p, m) = (2 * k, 2 * k + 1);
        // D and -D blocks
        big[(p, n + m)] = -gap;
        big[(m, n + p)] = gap;
        big[(n + p, m)] = gap;
        big[(n + m, p)] = -gap;
    }
    big
}

struct Densities {
    rho: DMatrix<f64>,
    kappa: DMatrix<f64>,
}

fn densities(active: &ActiveSpace, jx: &DMatrix<f64>, omega: f64, gap: f64, lambda: f64) -> Densities {
    let n = active.qubits();
    let eig = SymmetricEigen::new(quasiparticle_matrix(active, jx, omega, gap, lambda));
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut u = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for (col, &idx) in order.iter().take(n).enumerate() {
        for i in 0..n {
            u[(i, col)] = eig.eigenvectors[(i, idx)];
            v[(i, col)] = eig.eigenvectors[(n + i, idx)];
        }
    }
    Densities { rho: &v * v.transpose(), kappa: &v * u.transpose() }
}

fn pair_sum(active: &ActiveSpace, kappa: &DMatrix<f64>) -> f64 {
    (0..active.m()).map(|k| kappa[(2 * k, 2 * k + 1)]).sum()
}

/// Bracketed Illinois false position for an increasing `f` with
/// `f(lo) < 0 < f(hi)`.
fn illinois<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64, xtol: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo < xtol {
            break;
        }
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if fx.abs() < 1e-14 {
            return Ok(x);
        }
    }
    Ok(if -flo < fhi { lo } else { hi })
}

/// Chemical potential giving `Tr rho = n_act` at fixed gap.
fn solve_lambda(active: &ActiveSpace, jx: &DMatrix<f64>, omega: f64, gap: f64, guess: f64) -> Result<(f64, Densities)> {
    let target = active.n_act as f64;
    let excess = |lam: f64| -> Result<f64> { Ok(densities(active, jx, omega, gap, lam).rho.trace() - target) };
    let spread = active.energies.last().unwrap() - active.energies[0] + gap + omega * jx.amax() * 2.0 + 1.0;
    let mut width = 0.25;
    let (mut lo, mut hi) = (guess - width, guess + width);
    let mut flo = excess(lo)?;
    while flo > 0.0 {
        width *= 2.0;
        hi = lo;
        lo = guess - width;
        flo = excess(lo)?;
        if width > 1e3 * spread {
            return Err(Error::Bracket("particle number above target at every lambda".into()));
        }
    }
    let mut fhi = excess(hi)?;
    width = 0.25;
    while fhi < 0.0 {
        width *= 2.0;
        lo = hi;
        flo = fhi;
        hi = guess + width;
        fhi = excess(hi)?;
        if width > 1e3 * spread {
            return Err(Error::Bracket("particle number below target at every lambda".into()));
        }
    }
    let lam = illinois(excess, lo, hi, flo, fhi, 1e-13)?;
    Ok((lam, densities(active, jx, omega, gap, lam)))
}

fn finish(
    active: &ActiveSpace,
    jx: &DMatrix<f64>,
    omega: f64,
    g: f64,
    gap: f64,
    lambda: f64,
    rho: &DMatrix<f64>,
    branch: Branch,
    converged: bool,
    iterations: usize,
) -> BcsSolution {
    let h = window_hamiltonian(active, jx, omega);
    let one_body = h.component_mul(rho).sum();
    let pairing = if g > 0.0 { gap * gap / g } else { 0.0 };
    let occupations = (0..active.m()).map(|k| 0.5 * (rho[(2 * k, 2 * k)] + rho[(2 * k + 1, 2 * k + 1)])).collect();
    BcsSolution {
        gap,
        lambda,
        routhian: one_body - pairing,
        jx: jx.component_mul(rho).sum(),
        occupations,
        particle_number: rho.trace(),
        number_variance: (2.0 * (rho - rho * rho).trace()).max(0.0),
        converged,
        branch,
        iterations,
        other_branch_routhian: None,
    }
}

/// Unpaired branch: lowest `n_act` eigenstates of `h - omega j_x`.
fn collapsed(active: &ActiveSpace, jx: &DMatrix<f64>, omega: f64, g: f64) -> BcsSolution {
    let n = active.qubits();
    let eig = SymmetricEigen::new(window_hamiltonian(active, jx, omega));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut rho = DMatrix::zeros(n, n);
    for &idx in order.iter().take(active.n_act) {
        let c = eig.eigenvectors.column(idx);
        rho += &c * c.transpose();
    }
    let lambda = if active.n_act < n {
        active.lambda_f + 0.5 * (eig.eigenvalues[order[active.n_act - 1]] + eig.eigenvalues[order[active.n_act]])
    } else {
        active.lambda_f + eig.eigenvalues[order[n - 1]]
    };
    finish(active, jx, omega, g, 0.0, lambda, &rho, Branch::Collapsed, true, 0)
}

fn paired(
    active: &ActiveSpace,
    g: f64,
    omega: f64,
    jx: &DMatrix<f64>,
    init_gap: f64,
    settings: &BcsSettings,
) -> Result<Option<BcsSolution>> {
    let mut evals = 0usize;
    // phi(Delta) = F(Delta) / Delta - 1 vanishes at non-trivial gap solutions
    let mut phi = |gap: f64| -> Result<f64> {
        evals += 1;
        let (_, d) = solve_lambda(active, jx, omega, gap, active.lambda_f)?;
        Ok(g * pair_sum(active, &d.kappa).abs() / gap - 1.0)
    };
    let top = g * active.m() as f64 + 1.0;
    let lo = 1e-6;
    let mut grid: Vec<f64> = (0..settings.grid).map(|i| lo * (top / lo).powf(i as f64 / (settings.grid - 1) as f64)).collect();
    if init_gap > lo && init_gap < top {
        grid.push(init_gap);
        grid.sort_by(f64::total_cmp);
    }
    let values = grid.iter().map(|&x| phi(x)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<BcsSolution> = None;
    for i in 0..grid.len() - 1 {
        // stable solutions: phi crosses from positive to negative
        if !(values[i] > 0.0 && values[i + 1] <= 0.0) {
            continue;
        }
        let gap = illinois(|x| phi(x).map(|v| -v), grid[i], grid[i + 1], -values[i], -values[i + 1], settings.tol * 1e-3)?;
        let residual = phi(gap)?.abs() * gap;
        let (lam, d) = solve_lambda(active, jx, omega, gap, active.lambda_f)?;
        let number_error = (d.rho.trace() - active.n_act as f64).abs();
        // crossings in the quasiparticle spectrum make F and N(lambda)
        // discontinuous; a bracket around a jump is not a solution
        if residual > settings.tol || number_error > 1e-8 {
            continue;
        }
        let sol = finish(active, jx, omega, g, gap, lam, &d.rho, Branch::Paired, true, 0);
        if best.as_ref().map_or(true, |b| sol.routhian < b.routhian) {
            best = Some(sol);
        }
    }
    Ok(best.map(|mut b| {
        b.iterations = evals;
        b
    }))
}

/// Cranked BCS with default settings.
pub fn solve_bcs(active: &ActiveSpace, g: f64, omega: f64, jx: &DMatrix<f64>, init_gap: f64) -> Result<BcsSolution> {
    solve_bcs_with(active, g, omega, jx, init_gap, &BcsSettings::default())
}

/// Lowest-Routhian solution among the self-consistent paired solutions and
/// the `Delta = 0` branch. The gap equation is scanned on a log grid (plus
/// `init_gap`); `init_gap <= 0` skips the paired branch.
pub fn solve_bcs_with(
    active: &ActiveSpace,
    g: f64,
    omega: f64,
    jx: &DMatrix<f64>,
    init_gap: f64,
    settings: &BcsSettings,
) -> Result<BcsSolution> {
    check(active, g, omega, jx)?;
    if settings.grid < 2 || !(settings.tol > 0.0) {
        return Err(Error::InvalidArgument("BCS settings need grid >= 2 and tol > 0".into()));
    }
    let unpaired = collapsed(active, jx, omega, g);
    if g == 0.0 || init_gap <= 0.0 {
        return Ok(unpaired);
    }
    match paired(active, g, omega, jx, init_gap, settings)? {
        Some(mut p) if p.routhian <= unpaired.routhian => {
            p.other_branch_routhian = Some(unpaired.routhian);
            Ok(p)
        }
        Some(p) => {
            let mut u = unpaired;
            u.other_branch_routhian = Some(p.routhian);
            Ok(u)
        }
        None => Ok(unpaired),
    }
}

/// Pairing strength whose mean ground-state gap over `windows` (at
/// `omega = 0`) equals `reference_gap`.
pub fn calibrate_g(reference_gap: f64, windows: &[ActiveSpace]) -> Result<f64> {
    if !(reference_gap > 0.0) || windows.is_empty() {
        return Err(Error::InvalidArgument("reference gap must be positive and windows non-empty".into()));
    }
    let mean_gap = |g: f64| -> Result<f64> {
        let mut s = 0.0;
        for w in windows {
            let jx = DMatrix::zeros(w.qubits(), w.qubits());
            s += solve_bcs(w, g, 0.0, &jx, 1.0)?.gap;
        }
        Ok(s / windows.len() as f64)
    };
    let mut lo = 0.01;
    let mut hi = 2.0;
    let mut flo = mean_gap(lo)? - reference_gap;
    if flo > 0.0 {
        return Err(Error::Bracket(format!("gap at G = {lo} already exceeds {reference_gap}")));
    }
    let mut fhi = mean_gap(hi)? - reference_gap;
    let mut expansions = 0;
    while fhi < 0.0 {
        (lo, flo) = (hi, fhi);
        hi *= 2.0;
        fhi = mean_gap(hi)? - reference_gap;
        expansions += 1;
        if expansions > 20 {
            return Err(Error::Bracket(format!("no G up to {hi} reaches gap {reference_gap}")));
        }
    }
    // the gap is flat (zero) below the critical strength; false position
    // handles the kink through its bisection fallback
    illinois(|g| Ok(mean_gap(g)? - reference_gap), lo, hi, flo, fhi, 1e-9)
}
