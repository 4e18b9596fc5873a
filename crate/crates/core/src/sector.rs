//! Fixed-particle-number kernels for the variational hot loop.
//!
//! Both ansatz gate types conserve particle number, so a state built from
//! the reference determinant never leaves the `N = n_act` sector. The
//! compiled forms here act only on that sector and use real amplitudes;
//! they reproduce the dense [`StateVector`] path exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::statevector::{between_mask, StateVector, MAX_QUBITS};

/// Occupation words with a fixed popcount, ascending.
#[derive(Debug, Clone)]
pub struct FixedNSector {
    pub qubits: usize,
    pub particles: usize,
    pub states: Vec<u64>,
    position: Vec<u32>,
}

impl FixedNSector {
    pub fn new(qubits: usize, particles: usize) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(qubits));
        }
        if particles > qubits {
            return Err(Error::InvalidArgument(format!("{particles} particles on {qubits} qubits")));
        }
        let mut position = vec![u32::MAX; 1 << qubits];
        let mut states = Vec::new();
        for w in 0..(1u64 << qubits) {
            if w.count_ones() as usize == particles {
                position[w as usize] = states.len() as u32;
                states.push(w);
            }
        }
        Ok(FixedNSector { qubits, particles, states, position })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn index_of(&self, word: u64) -> Option<usize> {
        match self.position.get(word as usize) {
            Some(&p) if p != u32::MAX => Some(p as usize),
            _ => None,
        }
    }

    pub fn embed(&self, amplitudes: &[f64]) -> StateVector {
        let mut sv = StateVector {
            qubits: self.qubits,
            amplitudes: vec![Complex64::new(0.0, 0.0); 1 << self.qubits],
        };
        for (w, a) in self.states.iter().zip(amplitudes) {
            sv.amplitudes[*w as usize] = Complex64::new(*a, 0.0);
        }
        sv
    }
}

/// Real symmetric sparse matrix of a number-conserving Pauli sum on one sector (CSR).
#[derive(Debug, Clone)]
pub struct SectorOperator {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SectorOperator {
    pub fn from_pauli(sector: &FixedNSector, op: &PauliSum) -> Result<Self> {
        // group strings by flip mask; a whole group is skipped when the flip leaves the sector
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (p, c) in &op.terms {
            let phase = PauliString { x: p.x, z: p.z }.apply(0).0;
            groups.entry(p.x).or_default().push((p.z, c * phase));
        }
        let groups: Vec<(u64, Vec<(u64, Complex64)>)> = groups.into_iter().collect();

        let mut row_ptr = Vec::with_capacity(sector.dim() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for &word in &sector.states {
            row.clear();
            for (x, zs) in &groups {
                let target = word ^ x;
                let Some(j) = sector.index_of(target) else { continue };
                // <target| P |word> summed over the group
                let mut acc = Complex64::new(0.0, 0.0);
                for (z, c) in zs {
                    if (word & z).count_ones() % 2 == 0 {
                        acc += c;
                    } else {
                        acc -= c;
                    }
                }
                if acc.im.abs() > 1e-10 {
                    return Err(Error::NonHermitian(acc.im.abs()));
                }
                if acc.re != 0.0 {
                    row.push((j as u32, acc.re));
                }
            }
            row.sort_by_key(|e| e.0);
            for (j, v) in &row {
                cols.push(*j);
                vals.push(*v);
            }
            row_ptr.push(cols.len());
        }
        Ok(SectorOperator { row_ptr, cols, vals })
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `<psi|H|psi>` with a fixed summation order.
    pub fn expectation(&self, psi: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, a) in psi.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[e] * psi[self.cols[e] as usize];
            }
            total += a * acc;
        }
        total
    }

    pub fn apply(&self, psi: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[e] * psi[self.cols[e] as usize];
            }
            *o = acc;
        }
    }
}

/// A two-level rotation `exp(angle/2 G)` listed as `(u, v, s)` sector index triples.
#[derive(Debug, Clone)]
pub struct SectorGate {
    entries: Vec<(u32, u32, f64)>,
}

impl SectorGate {
    pub fn single(sector: &FixedNSector, p: usize, q: usize) -> Self {
        let (bp, bq) = (1u64 << p, 1u64 << q);
        let between = between_mask(p, q);
        let mut entries = Vec::new();
        for (iu, &u) in sector.states.iter().enumerate() {
            if u & bq != 0 && u & bp == 0 {
                let v = u ^ bp ^ bq;
                let s = if (u & between).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let iv = sector.index_of(v).expect("number-conserving partner");
                entries.push((iu as u32, iv as u32, s));
            }
        }
        SectorGate { entries }
    }

    pub fn pair(sector: &FixedNSector, k: usize, l: usize) -> Self {
        let (mk, ml) = (0b11u64 << (2 * k), 0b11u64 << (2 * l));
        let mut entries = Vec::new();
        for (iu, &u) in sector.states.iter().enumerate() {
            if u & ml == ml && u & mk == 0 {
                let iv = sector.index_of(u ^ mk ^ ml).expect("number-conserving partner");
                entries.push((iu as u32, iv as u32, -1.0));
            }
        }
        SectorGate { entries }
    }

    #[inline]
    pub fn apply(&self, psi: &mut [f64], angle: f64) {
        if angle == 0.0 {
            return;
        }
        let (sin, cos) = (0.5 * angle).sin_cos();
        for &(u, v, s) in &self.entries {
            let (u, v) = (u as usize, v as usize);
            let (a, b) = (psi[u], psi[v]);
            psi[u] = a * cos - s * sin * b;
            psi[v] = s * sin * a + b * cos;
        }
    }
}
