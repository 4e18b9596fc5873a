//! Pauli strings in the symplectic `(x, z)` bit representation.
//!
//! A string with bits `(x, z)` denotes `i^{|x & z|} X^x Z^z`, so a qubit with
//! both bits set is `Y = iXZ`. Qubit `q` is bit `q` of a basis index.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped after merging.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Largest register `pauli_matrix` will materialize.
pub const DENSE_QUBIT_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        PauliString { x: 1 << q, z: 0 }
    }
    pub fn y(q: usize) -> Self {
        PauliString { x: 1 << q, z: 1 << q }
    }
    pub fn z(q: usize) -> Self {
        PauliString { x: 0, z: 1 << q }
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Product `self * other = phase * result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let out = PauliString { x: self.x ^ other.x, z: self.z ^ other.z };
        let e = (self.x & self.z).count_ones() + (other.x & other.z).count_ones() + 2 * (self.z & other.x).count_ones() + 4
            - (out.x & out.z).count_ones() % 4;
        (i_pow(e), out)
    }

    /// `P|i> = phase(i) |i ^ x>`.
    #[inline]
    pub fn apply(&self, index: u64) -> (Complex64, u64) {
        let mut k = (self.x & self.z).count_ones();
        if (index & self.z).count_ones() % 2 == 1 {
            k += 2;
        }
        (i_pow(k), index ^ self.x)
    }

    /// Word with qubit 0 leftmost.
    pub fn word(&self, qubits: usize) -> String {
        (0..qubits)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }

    pub fn parse(word: &str) -> Result<Self> {
        let mut p = PauliString::IDENTITY;
        for (q, c) in word.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.x |= 1 << q,
                'Z' => p.z |= 1 << q,
                'Y' => {
                    p.x |= 1 << q;
                    p.z |= 1 << q;
                }
                other => return Err(Error::InvalidArgument(format!("bad Pauli letter '{other}'"))),
            }
        }
        Ok(p)
    }
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    pub qubits: usize,
    pub terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn new(qubits: usize) -> Self {
        PauliSum { qubits, terms: BTreeMap::new() }
    }

    pub fn from_terms(qubits: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut s = PauliSum::new(qubits);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s.prune();
        s
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.qubits = out.qubits.max(other.qubits);
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: Complex64) -> PauliSum {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new(self.qubits.max(other.qubits));
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let (phase, p) = pa.mul(pb);
                out.add_term(p, phase * ca * cb);
            }
        }
        out.prune();
        out
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self.mul(other).add(&other.mul(self).scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Text dump, one `coefficient pauli_word` line per term.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (p, c) in &self.terms {
            writeln!(out, "{:+.15e} {}", c.re, p.word(self.qubits))?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.terms {
            writeln!(f, "({:+.6}{:+.6}i) {}", c.re, c.im, p.word(self.qubits))?;
        }
        Ok(())
    }
}

/// Dense `2^n x 2^n` matrix of `op` (test and oracle support).
pub fn pauli_matrix(op: &PauliSum, qubits: usize) -> Result<DMatrix<Complex64>> {
    if qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::TooManyQubits(qubits));
    }
    let dim = 1usize << qubits;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (p, c) in &op.terms {
        if (p.x | p.z) >> qubits != 0 {
            return Err(Error::IndexOutOfRange { index: 63 - (p.x | p.z).leading_zeros() as usize, count: qubits });
        }
        for col in 0..dim as u64 {
            let (phase, row) = p.apply(col);
            m[(row as usize, col as usize)] += c * phase;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_products() {
        let (x, y, z) = (PauliString::x(0), PauliString::y(0), PauliString::z(0));
        assert_eq!(x.mul(&z), (Complex64::new(0.0, -1.0), y));
        assert_eq!(z.mul(&x), (Complex64::new(0.0, 1.0), y));
        assert_eq!(x.mul(&y), (Complex64::new(0.0, 1.0), z));
        assert_eq!(y.mul(&y), (c(1.0), PauliString::IDENTITY));
    }

    #[test]
    fn z_matrix() {
        let m = pauli_matrix(&PauliSum::from_terms(1, [(PauliString::z(0), c(1.0))]), 1).unwrap();
        assert_eq!(m[(0, 0)], c(1.0));
        assert_eq!(m[(1, 1)], c(-1.0));
        assert_eq!(m[(0, 1)], c(0.0));
    }

    #[test]
    fn hop_matrix() {
        let xx = PauliString { x: 0b11, z: 0 };
        let yy = PauliString { x: 0b11, z: 0b11 };
        let m = pauli_matrix(&PauliSum::from_terms(2, [(xx, c(0.5)), (yy, c(0.5))]), 2).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if (r, col) == (1, 2) || (r, col) == (2, 1) { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m[(r, col)].re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(m[(r, col)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn product_matches_dense_product() {
        let a = PauliSum::from_terms(3, [(PauliString::parse("XYZ").unwrap(), c(0.7)), (PauliString::parse("IZY").unwrap(), Complex64::new(0.1, 0.3))]);
        let b = PauliSum::from_terms(3, [(PauliString::parse("YYI").unwrap(), c(-1.2)), (PauliString::parse("ZXX").unwrap(), c(0.4))]);
        let dense = pauli_matrix(&a, 3).unwrap() * pauli_matrix(&b, 3).unwrap();
        let via = pauli_matrix(&a.mul(&b), 3).unwrap();
        assert!((dense - via).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn word_roundtrip() {
        let p = PauliString::parse("IXYZ").unwrap();
        assert_eq!(p.word(4), "IXYZ");
        assert_eq!(p.weight(), 3);
    }

    #[test]
    fn dense_limit() {
        assert!(matches!(pauli_matrix(&PauliSum::new(9), 9), Err(Error::TooManyQubits(9))));
    }
}
