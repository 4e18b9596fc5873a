//! The cranked pairing Routhian over an active space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::active_space::ActiveSpace;
use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator, FermionTerm, Ladder};
use crate::pauli::{PauliString, PauliSum};

/// Pairing strength shared by both species, MeV.
pub const DEFAULT_G: f64 = 0.5202;
/// Number-penalty weight, MeV.
pub const DEFAULT_LAMBDA_P: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct RouthianSpec {
    pub active: ActiveSpace,
    /// Pairing strength G (MeV).
    pub g: f64,
    /// Cranking frequency hbar omega (MeV).
    pub omega: f64,
    /// Number-penalty weight (MeV).
    pub lambda_p: f64,
    /// `j_x` over the `2m` spin orbitals, in hbar.
    pub jx: DMatrix<f64>,
}

impl RouthianSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.active.qubits();
        if self.jx.nrows() != n || self.jx.ncols() != n {
            return Err(Error::Dimension(format!(
                "j_x is {}x{}, active space has {} spin orbitals",
                self.jx.nrows(),
                self.jx.ncols(),
                n
            )));
        }
        if self.g < 0.0 || self.omega < 0.0 || self.lambda_p < 0.0 {
            return Err(Error::InvalidArgument("G, omega and lambda_p must be non-negative".into()));
        }
        Ok(())
    }

    pub fn shifted_energies(&self) -> Vec<f64> {
        self.active.energies.iter().map(|e| e - self.active.lambda_f).collect()
    }
}

/// `sum_ij (j_x)_ij a_i^+ a_j`
pub fn one_body_operator(matrix: &DMatrix<f64>) -> FermionOperator {
    let mut op = FermionOperator::new();
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            let v = matrix[(i, j)];
            if v != 0.0 {
                op.push(v, vec![Ladder::create(i), Ladder::annihilate(j)]);
            }
        }
    }
    op
}

/// The four-part Routhian: single-particle, pairing (all `k, l` including
/// `k = l`), cranking, and the `(N - N_act)^2` penalty.
pub fn build_routhian(spec: &RouthianSpec) -> Result<FermionOperator> {
    spec.validate()?;
    let m = spec.active.m();
    let modes = 2 * m;
    let mut op = FermionOperator::new();

    for (k, e) in spec.shifted_energies().iter().enumerate() {
        for p in [2 * k, 2 * k + 1] {
            op.push(*e, vec![Ladder::create(p), Ladder::annihilate(p)]);
        }
    }

    if spec.g != 0.0 {
        for k in 0..m {
            for l in 0..m {
                op.extend(FermionOperator::pair_transfer(k, l, -spec.g));
            }
        }
    }

    if spec.omega != 0.0 {
        op.extend(one_body_operator(&(-spec.omega * &spec.jx)));
    }

    if spec.lambda_p != 0.0 {
        let lp = spec.lambda_p;
        let n_act = spec.active.n_act as f64;
        for p in 0..modes {
            for q in 0..modes {
                op.push(
                    lp,
                    vec![Ladder::create(p), Ladder::annihilate(p), Ladder::create(q), Ladder::annihilate(q)],
                );
            }
            op.push(-2.0 * lp * n_act, vec![Ladder::create(p), Ladder::annihilate(p)]);
        }
        op.terms.push(FermionTerm { coeff: Complex64::new(lp * n_act * n_act, 0.0), ops: vec![] });
    }
    Ok(op)
}

/// Qubit image of the Routhian.
pub fn routhian_pauli(spec: &RouthianSpec) -> Result<PauliSum> {
    let op = build_routhian(spec)?;
    let h = jordan_wigner(&op, spec.active.qubits())?;
    if h.max_imag() > 1e-12 {
        return Err(Error::NonHermitian(h.max_imag()));
    }
    Ok(h)
}

/// Qubit image of `N`.
pub fn number_pauli(qubits: usize) -> PauliSum {
    let mut s = PauliSum::new(qubits);
    s.add_term(PauliString::IDENTITY, Complex64::new(qubits as f64 / 2.0, 0.0));
    for q in 0..qubits {
        s.add_term(PauliString::z(q), Complex64::new(-0.5, 0.0));
    }
    s
}

/// Qubit image of `J_x`.
pub fn jx_pauli(jx: &DMatrix<f64>) -> Result<PauliSum> {
    jordan_wigner(&one_body_operator(jx), jx.nrows())
}
