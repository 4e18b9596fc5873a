//! Fixtures shared by the benchmarks.

use qcrank_core::scan::{Isotope, SectorProblem};
use qcrank_core::{RouthianSpec, Species, DEFAULT_G, DEFAULT_LAMBDA_P};

/// 80Zr proton window at a production-size `m`.
pub fn zr80_problem(m: usize, delta: f64) -> SectorProblem {
    let iso = Isotope::new("80Zr", 40, 40);
    SectorProblem::for_isotope(&iso, Species::Proton, delta, m, 7, 1e-8).expect("80Zr window")
}

pub fn zr80_spec(m: usize, delta: f64, omega: f64) -> (SectorProblem, RouthianSpec) {
    let p = zr80_problem(m, delta);
    let spec = p.spec(DEFAULT_G, omega, DEFAULT_LAMBDA_P);
    (p, spec)
}

/// Deterministic angles in `[-0.5, 0.5)`.
pub fn angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect()
}
