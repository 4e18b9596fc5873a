//! Dense statevector with exact number-conserving excitation gates.
//!
//! Basis index bit `q` is the occupation of qubit (spin orbital) `q`.
//! Both gates are rotations inside two-dimensional invariant subspaces
//! `{|u>, |v>}` with generator `G|u> = s|v>`, `G|v> = -s|u>`:
//!
//! * single `(p, q)`: `G = a_p^+ a_q - a_q^+ a_p`, `|u>` has `q` occupied and
//!   `p` empty, `s` is the parity of occupied orbitals strictly between them;
//! * pair `(k, l)`: `G = a_{k+}^+ a_{k-}^+ a_{l+} a_{l-} - h.c.`, `|u>` has pair
//!   `l` full and pair `k` empty, and `s = -1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

/// Largest register the dense engine accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

/// Mask of bits strictly between `p` and `q`.
#[inline]
pub(crate) fn between_mask(p: usize, q: usize) -> u64 {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1)
}

impl StateVector {
    pub fn basis_state(qubits: usize, index: u64) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(qubits));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        if index >= amplitudes.len() as u64 {
            return Err(Error::IndexOutOfRange { index: index as usize, count: amplitudes.len() });
        }
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { qubits, amplitudes })
    }

    /// Reference determinant with the lowest `n_act / 2` pair orbitals filled.
    pub fn reference(qubits: usize, n_act: usize) -> Result<Self> {
        if n_act % 2 != 0 || n_act > qubits {
            return Err(Error::InvalidArgument(format!("n_act = {n_act} invalid for {qubits} qubits")));
        }
        Self::basis_state(qubits, (1u64 << n_act) - 1)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::IndexOutOfRange { index: q, count: self.qubits });
        }
        Ok(())
    }

    #[inline]
    fn rotate(&mut self, u: usize, v: usize, s: f64, cos: f64, sin: f64) {
        let a = self.amplitudes[u];
        let b = self.amplitudes[v];
        self.amplitudes[u] = a * cos - b * (s * sin);
        self.amplitudes[v] = a * (s * sin) + b * cos;
    }

    /// `exp[(phi/2)(a_p^+ a_q - a_q^+ a_p)]`
    pub fn apply_single_excitation(&mut self, p: usize, q: usize, phi: f64) -> Result<()> {
        self.check_qubit(p)?;
        self.check_qubit(q)?;
        if p == q {
            return Err(Error::InvalidArgument("single excitation needs p != q".into()));
        }
        if phi == 0.0 {
            return Ok(());
        }
        let (sin, cos) = (0.5 * phi).sin_cos();
        let (bp, bq) = (1u64 << p, 1u64 << q);
        let between = between_mask(p, q);
        for u in 0..self.amplitudes.len() as u64 {
            if u & bq != 0 && u & bp == 0 {
                let v = u ^ bp ^ bq;
                let s = if (u & between).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                self.rotate(u as usize, v as usize, s, cos, sin);
            }
        }
        Ok(())
    }

    /// Pair transfer between levels `k` and `l` (qubits `2k, 2k+1, 2l, 2l+1`).
    pub fn apply_pair_excitation(&mut self, k: usize, l: usize, theta: f64) -> Result<()> {
        if k == l {
            return Err(Error::InvalidArgument("pair excitation needs k != l".into()));
        }
        self.check_qubit(2 * k + 1)?;
        self.check_qubit(2 * l + 1)?;
        if theta == 0.0 {
            return Ok(());
        }
        let (sin, cos) = (0.5 * theta).sin_cos();
        let (mk, ml) = (0b11u64 << (2 * k), 0b11u64 << (2 * l));
        for u in 0..self.amplitudes.len() as u64 {
            if u & ml == ml && u & mk == 0 {
                let v = u ^ mk ^ ml;
                self.rotate(u as usize, v as usize, -1.0, cos, sin);
            }
        }
        Ok(())
    }

    /// `<psi|op|psi>` for a Hermitian Pauli sum.
    pub fn expectation(&self, op: &PauliSum) -> Result<f64> {
        if op.max_imag() > 1e-12 {
            return Err(Error::NonHermitian(op.max_imag()));
        }
        let total = self.expectation_complex(op);
        if total.im.abs() > 1e-10 * total.re.abs().max(1.0) {
            return Err(Error::NonHermitian(total.im.abs()));
        }
        Ok(total.re)
    }

    /// `<psi|op|psi>` for an arbitrary Pauli sum.
    pub fn expectation_complex(&self, op: &PauliSum) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (p, c) in &op.terms {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, amp) in self.amplitudes.iter().enumerate() {
                if amp.re == 0.0 && amp.im == 0.0 {
                    continue;
                }
                let (phase, j) = p.apply(i as u64);
                acc += self.amplitudes[j as usize].conj() * phase * amp;
            }
            total += c * acc;
        }
        total
    }
}
