#![allow(dead_code)]

use nalgebra::DMatrix;
use qcrank_core::active_space::{ActiveSpace, Species};
use qcrank_core::fermion::FermionOperator;
use qcrank_core::routhian::RouthianSpec;
use qcrank_core::scan::SectorProblem;
use qcrank_core::scan::Isotope;
use rand::Rng;

/// Occupation-number matrix of `op` on `modes` spin orbitals, built from the
/// canonical ordering sign (occupied modes below the acted-on mode).
pub fn fock_matrix(op: &FermionOperator, modes: usize) -> DMatrix<f64> {
    let dim = 1usize << modes;
    let mut out = DMatrix::zeros(dim, dim);
    for term in &op.terms {
        assert!(term.coeff.im.abs() < 1e-15);
        for col in 0..dim as u64 {
            let mut state = col;
            let mut sign = 1.0;
            let mut alive = true;
            for l in term.ops.iter().rev() {
                let bit = 1u64 << l.mode;
                let occupied = state & bit != 0;
                if occupied == l.dagger {
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

pub fn random_symmetric(rng: &mut impl Rng, n: usize, scale: f64) -> DMatrix<f64> {
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

/// Window of `m` random levels around zero at the reference filling.
pub fn random_window(rng: &mut impl Rng, m: usize) -> ActiveSpace {
    let mut e: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
    e.sort_by(f64::total_cmp);
    ActiveSpace::from_energies(Species::Neutron, e, 2 * m.div_ceil(2)).unwrap()
}

pub fn random_spec(rng: &mut impl Rng, m: usize) -> RouthianSpec {
    let active = random_window(rng, m);
    let jx = random_symmetric(rng, 2 * m, 1.5);
    RouthianSpec { active, g: rng.gen_range(0.05..1.0), omega: rng.gen_range(0.0..1.0), lambda_p: 5.0, jx }
}

pub fn zr80() -> Isotope {
    Isotope::new("80Zr", 40, 40)
}

/// Nilsson window of 80Zr.
pub fn nilsson_problem(species: Species, delta: f64, m: usize) -> SectorProblem {
    SectorProblem::for_isotope(&zr80(), species, delta, m, 7, 1e-8).unwrap()
}
