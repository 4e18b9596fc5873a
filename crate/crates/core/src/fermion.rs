//! Second-quantized operators and their Jordan-Wigner image.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }
    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
}

/// Coefficient times an ordered product of ladder operators (leftmost acts last).
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub ops: Vec<Ladder>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionOperator {
    pub terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coeff: f64, ops: Vec<Ladder>) {
        self.terms.push(FermionTerm { coeff: Complex64::new(coeff, 0.0), ops });
    }

    pub fn extend(&mut self, other: FermionOperator) {
        self.terms.extend(other.terms);
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.ops.iter().map(|o| o.mode)).max()
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> FermionOperator {
        FermionOperator {
            terms: self
                .terms
                .iter()
                .map(|t| FermionTerm {
                    coeff: t.coeff.conj(),
                    ops: t.ops.iter().rev().map(|o| Ladder { mode: o.mode, dagger: !o.dagger }).collect(),
                })
                .collect(),
        }
    }

    /// `n_p`
    pub fn number(p: usize) -> FermionOperator {
        let mut op = FermionOperator::new();
        op.push(1.0, vec![Ladder::create(p), Ladder::annihilate(p)]);
        op
    }

    /// Total number operator over `modes` spin orbitals.
    pub fn total_number(modes: usize) -> FermionOperator {
        let mut op = FermionOperator::new();
        for p in 0..modes {
            op.push(1.0, vec![Ladder::create(p), Ladder::annihilate(p)]);
        }
        op
    }

    /// `P_k^dagger P_l = a_{2k}^+ a_{2k+1}^+ a_{2l+1} a_{2l}` (times `coeff`).
    pub fn pair_transfer(k: usize, l: usize, coeff: f64) -> FermionOperator {
        let mut op = FermionOperator::new();
        op.push(
            coeff,
            vec![
                Ladder::create(2 * k),
                Ladder::create(2 * k + 1),
                Ladder::annihilate(2 * l + 1),
                Ladder::annihilate(2 * l),
            ],
        );
        op
    }

    /// `P_k = a_{2k+1} a_{2k}`.
    pub fn pair_annihilation(k: usize) -> FermionOperator {
        let mut op = FermionOperator::new();
        op.push(1.0, vec![Ladder::annihilate(2 * k + 1), Ladder::annihilate(2 * k)]);
        op
    }
}

fn ladder_image(op: Ladder) -> [(Complex64, PauliString); 2] {
    // a_p = Z_{<p} (X_p + i Y_p)/2,  a_p^+ = Z_{<p} (X_p - i Y_p)/2
    let string = (1u64 << op.mode) - 1;
    let x = PauliString { x: 1 << op.mode, z: string };
    let y = PauliString { x: 1 << op.mode, z: string | (1 << op.mode) };
    let sign = if op.dagger { -1.0 } else { 1.0 };
    [(Complex64::new(0.5, 0.0), x), (Complex64::new(0.0, 0.5 * sign), y)]
}

/// Jordan-Wigner image of `op` on `qubits` qubits; spin orbital `p` is qubit `p`.
pub fn jordan_wigner(op: &FermionOperator, qubits: usize) -> Result<PauliSum> {
    if qubits > 63 {
        return Err(Error::TooManyQubits(qubits));
    }
    let mut out = PauliSum::new(qubits);
    for term in &op.terms {
        let mut partial: Vec<(Complex64, PauliString)> = vec![(term.coeff, PauliString::IDENTITY)];
        for ladder in &term.ops {
            if ladder.mode >= qubits {
                return Err(Error::IndexOutOfRange { index: ladder.mode, count: qubits });
            }
            let image = ladder_image(*ladder);
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (c, p) in &partial {
                for (ci, pi) in &image {
                    let (phase, prod) = p.mul(pi);
                    next.push((c * ci * phase, prod));
                }
            }
            partial = next;
        }
        for (c, p) in partial {
            out.add_term(p, c);
        }
    }
    out.prune();
    Ok(out)
}
