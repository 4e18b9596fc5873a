//! Exact diagonalization in the fixed-N determinant basis.
//!
//! Matrix elements come from applying ladder operators to occupation words
//! with the sign `(-1)^(occupied modes below p)`; no qubit mapping is used.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::routhian::RouthianSpec;

/// Largest basis diagonalized densely.
pub const DENSE_LIMIT: usize = 2_000;
/// Largest basis handled at all.
pub const ITERATIVE_LIMIT: usize = 2_000_000;

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// All `2m`-bit occupation words with popcount `n`, ascending.
#[derive(Debug, Clone)]
pub struct FixedNBasis {
    pub m: usize,
    pub n: usize,
    pub determinants: Vec<u64>,
    pub index: HashMap<u64, usize>,
}

impl FixedNBasis {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        let modes = 2 * m;
        if modes > 40 || n > modes {
            return Err(Error::InvalidArgument(format!("{n} particles in {modes} modes")));
        }
        let size = binomial(modes as u64, n as u64) as usize;
        if size > ITERATIVE_LIMIT {
            return Err(Error::BasisTooLarge(size));
        }
        let mut determinants = Vec::with_capacity(size);
        // Gosper's hack enumerates fixed-popcount words in ascending order
        if n == 0 {
            determinants.push(0);
        } else {
            let mut w: u64 = (1 << n) - 1;
            while w < (1u64 << modes) {
                determinants.push(w);
                let c = w & w.wrapping_neg();
                let r = w + c;
                w = (((r ^ w) >> 2) / c) | r;
            }
        }
        let index = determinants.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        Ok(FixedNBasis { m, n, determinants, index })
    }

    pub fn len(&self) -> usize {
        self.determinants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.determinants.is_empty()
    }
}

/// `a_p^+` or `a_p` on a word: `None` if it annihilates the state.
fn ladder(word: u64, p: usize, create: bool) -> Option<(f64, u64)> {
    let bit = 1u64 << p;
    let occupied = word & bit != 0;
    if occupied == create {
        return None;
    }
    let sign = if (word & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, word ^ bit))
}

/// Applies ladder operators right to left; `ops` is `(mode, create)` in written order.
fn apply(word: u64, ops: &[(usize, bool)]) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut w = word;
    for &(p, create) in ops.iter().rev() {
        let (s, next) = ladder(w, p, create)?;
        sign *= s;
        w = next;
    }
    Some((sign, w))
}

/// Sparse symmetric Hamiltonian on a [`FixedNBasis`] (row lists).
#[derive(Debug, Clone)]
pub struct BasisHamiltonian {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl BasisHamiltonian {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|(j, v)| v * x[*j]).sum();
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                h[(i, *j)] += v;
            }
        }
        h
    }

    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.transpose()).amax()
    }
}

/// Routhian matrix in the determinant basis with `n_act` particles.
pub fn routhian_matrix(spec: &RouthianSpec, basis: &FixedNBasis) -> Result<BasisHamiltonian> {
    spec.validate()?;
    let m = spec.active.m();
    if basis.m != m || basis.n != spec.active.n_act {
        return Err(Error::Dimension(format!(
            "basis (m = {}, n = {}) does not match the window (m = {m}, n = {})",
            basis.m, basis.n, spec.active.n_act
        )));
    }
    let modes = 2 * m;
    let eps = spec.shifted_energies();
    let mut one_body = spec.jx.scale(-spec.omega);
    for k in 0..m {
        one_body[(2 * k, 2 * k)] += eps[k];
        one_body[(2 * k + 1, 2 * k + 1)] += eps[k];
    }
    let penalty = {
        let d = basis.n as f64 - spec.active.n_act as f64;
        spec.lambda_p * d * d
    };
    let mut rows = Vec::with_capacity(basis.len());
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for &word in &basis.determinants {
        acc.clear();
        let mut push = |w: u64, v: f64| {
            if let Some(&j) = basis.index.get(&w) {
                *acc.entry(j).or_insert(0.0) += v;
            }
        };
        for p in 0..modes {
            for q in 0..modes {
                let h = one_body[(p, q)];
                if h == 0.0 {
                    continue;
                }
                if let Some((s, w)) = apply(word, &[(p, true), (q, false)]) {
                    push(w, h * s);
                }
            }
        }
        for k in 0..m {
            for l in 0..m {
                let ops = [(2 * k, true), (2 * k + 1, true), (2 * l + 1, false), (2 * l, false)];
                if let Some((s, w)) = apply(word, &ops) {
                    push(w, -spec.g * s);
                }
            }
        }
        push(word, penalty);
        let mut row: Vec<(usize, f64)> = acc.iter().map(|(j, v)| (*j, *v)).filter(|(_, v)| *v != 0.0).collect();
        row.sort_by_key(|e| e.0);
        rows.push(row);
    }
    Ok(BasisHamiltonian { rows })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Amplitudes in [`FixedNBasis`] order.
    pub vector: Vec<f64>,
    pub basis: FixedNBasis,
}

/// Lowest eigenpair of `h` by restarted Lanczos with full reorthogonalization.
pub fn lanczos_ground(h: &BasisHamiltonian, tol: f64, seed: u64) -> Result<(f64, Vec<f64>)> {
    let n = h.dim();
    let krylov = n.min(80);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut w = vec![0.0; n];
    let mut best = (f64::INFINITY, start.clone());
    for _restart in 0..200 {
        let nrm = start.iter().map(|x| x * x).sum::<f64>().sqrt();
        start.iter_mut().for_each(|x| *x /= nrm);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..krylov {
            h.apply(&basis[j], &mut w);
            let a: f64 = w.iter().zip(&basis[j]).map(|(x, y)| x * y).sum();
            alpha.push(a);
            for v in &basis {
                let c: f64 = w.iter().zip(v).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
            let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if j + 1 == krylov || b < 1e-14 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or_else(|| Error::Eigensolver("empty Krylov space".into()))?;
        let y = eig.eigenvectors.column(imin);
        let mut ritz = vec![0.0; n];
        for (c, v) in y.iter().zip(&basis) {
            ritz.iter_mut().zip(v).for_each(|(r, x)| *r += c * x);
        }
        let nrm = ritz.iter().map(|x| x * x).sum::<f64>().sqrt();
        ritz.iter_mut().for_each(|x| *x /= nrm);
        h.apply(&ritz, &mut w);
        let e: f64 = w.iter().zip(&ritz).map(|(x, y)| x * y).sum();
        let residual = w.iter().zip(&ritz).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
        best = (e, ritz.clone());
        if residual < tol || k == n {
            return Ok(best);
        }
        start = ritz;
    }
    Err(Error::Eigensolver(format!("Lanczos did not converge (energy {})", best.0)))
}

/// Ground state of the Routhian in the `n_act`-particle sector.
pub fn exact_ground(spec: &RouthianSpec) -> Result<GroundState> {
    let basis = FixedNBasis::new(spec.active.m(), spec.active.n_act)?;
    let h = routhian_matrix(spec, &basis)?;
    let (energy, vector) = if basis.len() <= DENSE_LIMIT {
        let eig = SymmetricEigen::new(h.to_dense());
        let (i, e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, e)| (i, *e))
            .ok_or_else(|| Error::Eigensolver("empty basis".into()))?;
        (e, eig.eigenvectors.column(i).iter().copied().collect())
    } else {
        lanczos_ground(&h, 1e-9, 7)?
    };
    Ok(GroundState { energy, vector, basis })
}

/// `<psi| sum_pq M_pq a_p^+ a_q |psi>` for a state in determinant coordinates.
pub fn one_body_expectation(basis: &FixedNBasis, vector: &[f64], matrix: &DMatrix<f64>) -> f64 {
    let modes = 2 * basis.m;
    let mut total = 0.0;
    for (i, &word) in basis.determinants.iter().enumerate() {
        if vector[i] == 0.0 {
            continue;
        }
        for p in 0..modes {
            for q in 0..modes {
                let v = matrix[(p, q)];
                if v == 0.0 {
                    continue;
                }
                if let Some((s, w)) = apply(word, &[(p, true), (q, false)]) {
                    if let Some(&j) = basis.index.get(&w) {
                        total += v * s * vector[j] * vector[i];
                    }
                }
            }
        }
    }
    total
}

/// `rho_kl = <P_k^+ P_l>` for a state in determinant coordinates.
pub fn pair_density(basis: &FixedNBasis, vector: &[f64]) -> DMatrix<f64> {
    let m = basis.m;
    let mut rho = DMatrix::zeros(m, m);
    for (i, &word) in basis.determinants.iter().enumerate() {
        for k in 0..m {
            for l in 0..m {
                let ops = [(2 * k, true), (2 * k + 1, true), (2 * l + 1, false), (2 * l, false)];
                if let Some((s, w)) = apply(word, &ops) {
                    if let Some(&j) = basis.index.get(&w) {
                        rho[(k, l)] += s * vector[j] * vector[i];
                    }
                }
            }
        }
    }
    rho
}

/// Ground energy of the pairing Hamiltonian in the seniority-zero space of
/// `n_pairs` pairs on `m` levels with shifted energies `energies`.
pub fn exact_pair_ground(m: usize, n_pairs: usize, g: f64, energies: &[f64]) -> Result<f64> {
    if energies.len() != m || n_pairs > m || m > 40 {
        return Err(Error::Dimension(format!("{n_pairs} pairs, m = {m}, {} energies", energies.len())));
    }
    let size = binomial(m as u64, n_pairs as u64) as usize;
    if size > ITERATIVE_LIMIT {
        return Err(Error::BasisTooLarge(size));
    }
    let words: Vec<u64> = (0u64..(1u64 << m)).filter(|w| w.count_ones() as usize == n_pairs).collect();
    let index: HashMap<u64, usize> = words.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let mut rows = Vec::with_capacity(words.len());
    for &w in &words {
        let mut row = Vec::new();
        let diag: f64 = (0..m).filter(|k| w >> k & 1 == 1).map(|k| 2.0 * energies[k]).sum::<f64>() - g * n_pairs as f64;
        row.push((index[&w], diag));
        for l in (0..m).filter(|l| w >> l & 1 == 1) {
            for k in (0..m).filter(|k| w >> k & 1 == 0) {
                row.push((index[&(w ^ (1 << l) ^ (1 << k))], -g));
            }
        }
        row.sort_by_key(|e| e.0);
        rows.push(row);
    }
    let h = BasisHamiltonian { rows };
    if h.dim() <= DENSE_LIMIT {
        let d = h.to_dense();
        Ok(d.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b)))
    } else {
        Ok(lanczos_ground(&h, 1e-9, 11)?.0)
    }
}

/// Ground state of the pair Hamiltonian as a vector over pair-occupation words.
pub fn pair_ground_vector(m: usize, n_pairs: usize, g: f64, energies: &[f64]) -> Result<(f64, DVector<f64>)> {
    if m > 16 {
        return Err(Error::BasisTooLarge(binomial(m as u64, n_pairs as u64) as usize));
    }
    let words: Vec<u64> = (0u64..(1u64 << m)).filter(|w| w.count_ones() as usize == n_pairs).collect();
    let index: HashMap<u64, usize> = words.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let d = words.len();
    let mut h = DMatrix::zeros(d, d);
    for (i, &w) in words.iter().enumerate() {
        h[(i, i)] = (0..m).filter(|k| w >> k & 1 == 1).map(|k| 2.0 * energies[k]).sum::<f64>() - g * n_pairs as f64;
        for l in (0..m).filter(|l| w >> l & 1 == 1) {
            for k in (0..m).filter(|k| w >> k & 1 == 0) {
                h[(index[&(w ^ (1 << l) ^ (1 << k))], i)] = -g;
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let (i, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, e)| (i, *e))
        .ok_or_else(|| Error::Eigensolver("empty pair basis".into()))?;
    Ok((e, eig.eigenvectors.column(i).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::active_space::{ActiveSpace, Species};

    fn spec(energies: Vec<f64>, n_act: usize, g: f64) -> RouthianSpec {
        let m = energies.len();
        let active = ActiveSpace::from_energies(Species::Neutron, energies, n_act).unwrap();
        RouthianSpec { active, g, omega: 0.0, lambda_p: 5.0, jx: DMatrix::zeros(2 * m, 2 * m) }
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(FixedNBasis::new(2, 2).unwrap().len(), 6);
        assert_eq!(FixedNBasis::new(8, 8).unwrap().len(), 12870);
        assert_eq!(binomial(16, 8), 12870);
        let b = FixedNBasis::new(3, 2).unwrap();
        assert!(b.determinants.windows(2).all(|w| w[0] < w[1]));
        assert!(b.determinants.iter().all(|w| w.count_ones() == 2));
    }

    #[test]
    fn single_pair() {
        let s = spec(vec![0.7], 2, 0.3);
        let gs = exact_ground(&s).unwrap();
        let eps = 0.7 - s.active.lambda_f;
        assert!((gs.energy - (2.0 * eps - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn two_level_pairing_closed_form() {
        let s = spec(vec![-0.4, 0.9], 2, 0.5);
        let e = s.shifted_energies();
        let (a, d, b) = (2.0 * e[0] - 0.5, 2.0 * e[1] - 0.5, -0.5);
        let lower = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
        assert!((exact_ground(&s).unwrap().energy - lower).abs() < 1e-12);
        assert!((exact_pair_ground(2, 1, 0.5, &e).unwrap() - lower).abs() < 1e-12);
    }

    #[test]
    fn full_pair_sector_is_one_configuration() {
        let e = [0.1, -0.3, 0.5];
        let v = exact_pair_ground(3, 3, 0.4, &e).unwrap();
        assert!((v - (2.0 * (0.1 - 0.3 + 0.5) - 0.4 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn strong_coupling_condensate() {
        let e = [-0.5, -0.1, 0.2, 0.6];
        let g = 1e3 * 1.1;
        let (_, v) = pair_ground_vector(4, 2, g, &e).unwrap();
        let uniform = DVector::from_element(v.len(), 1.0 / (v.len() as f64).sqrt());
        assert!(v.dot(&uniform).abs() > 1.0 - 1e-6);
    }

    #[test]
    fn lanczos_matches_dense() {
        let s = spec(vec![-1.0, -0.6, -0.1, 0.3, 0.8, 1.4], 6, 0.7);
        let basis = FixedNBasis::new(6, 6).unwrap();
        let h = routhian_matrix(&s, &basis).unwrap();
        assert!(h.asymmetry() < 1e-14);
        let dense = h.to_dense().symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let (e, _) = lanczos_ground(&h, 1e-10, 3).unwrap();
        assert!((e - dense).abs() < 1e-10);
    }

    #[test]
    fn mismatched_basis_rejected() {
        let s = spec(vec![0.0, 1.0], 2, 0.5);
        let b = FixedNBasis::new(2, 4).unwrap();
        assert!(routhian_matrix(&s, &b).is_err());
    }
}
