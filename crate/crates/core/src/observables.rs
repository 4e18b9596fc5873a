//! Observables of a converged variational state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::active_space::ActiveSpace;
use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator};
use crate::pauli::PauliSum;
use crate::routhian::number_pauli;
use crate::sector::{FixedNSector, SectorOperator};
use crate::statevector::StateVector;

/// `rho_kl = <P_k^+ P_l>`.
#[derive(Debug, Clone)]
pub struct PairDensity {
    pub rho: DMatrix<Complex64>,
}

impl PairDensity {
    pub fn m(&self) -> usize {
        self.rho.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    /// `sum_{k != l} |rho_kl|`
    pub fn off_diagonal_abs_sum(&self) -> f64 {
        let m = self.m();
        let mut s = 0.0;
        for k in 0..m {
            for l in 0..m {
                if k != l {
                    s += self.rho[(k, l)].norm();
                }
            }
        }
        s
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()).scale(0.5);
        h.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }
}

#[derive(Debug, Clone)]
pub struct ObservableSet {
    /// MeV
    pub energy: f64,
    /// hbar
    pub jx: f64,
    /// MeV
    pub delta_kappa: f64,
    /// MeV
    pub delta_coh: f64,
    pub n_mean: f64,
    pub n_var: f64,
    pub rho: PairDensity,
}

/// Qubit images of every operator [`measure`] needs, for one window size.
#[derive(Debug, Clone)]
pub struct ObservableOperators {
    pub m: usize,
    pub number: PauliSum,
    pub number_squared: PauliSum,
    /// `P_k`
    pub pair_annihilation: Vec<PauliSum>,
    /// `P_k^+ P_l`, row-major
    pub pair_transfer: Vec<PauliSum>,
}

impl ObservableOperators {
    pub fn new(m: usize) -> Result<Self> {
        let qubits = 2 * m;
        let number = number_pauli(qubits);
        let number_squared = number.mul(&number);
        let pair_annihilation = (0..m)
            .map(|k| jordan_wigner(&FermionOperator::pair_annihilation(k), qubits))
            .collect::<Result<Vec<_>>>()?;
        let mut pair_transfer = Vec::with_capacity(m * m);
        for k in 0..m {
            for l in 0..m {
                pair_transfer.push(jordan_wigner(&FermionOperator::pair_transfer(k, l, 1.0), qubits)?);
            }
        }
        Ok(ObservableOperators { m, number, number_squared, pair_annihilation, pair_transfer })
    }
}

pub fn pair_density(state: &StateVector, ops: &ObservableOperators) -> PairDensity {
    let m = ops.m;
    let rho = DMatrix::from_fn(m, m, |k, l| state.expectation_complex(&ops.pair_transfer[k * m + l]));
    PairDensity { rho }
}

/// `G * sqrt(sum_{k != l} |rho_kl|)`
pub fn delta_coh(rho: &PairDensity, g: f64) -> f64 {
    g * rho.off_diagonal_abs_sum().sqrt()
}

/// Evaluates all observables on `state`; `h` supplies the energy.
pub fn measure(
    state: &StateVector,
    active: &ActiveSpace,
    g: f64,
    jx_pauli: &PauliSum,
    h: &PauliSum,
    ops: &ObservableOperators,
) -> Result<ObservableSet> {
    if ops.m != active.m() || state.qubits != active.qubits() {
        return Err(Error::Dimension(format!(
            "state on {} qubits, window m = {}, operators for m = {}",
            state.qubits,
            active.m(),
            ops.m
        )));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Norm(norm));
    }
    let energy = state.expectation(h)?;
    let jx = state.expectation(jx_pauli)?;
    let kappa_sum: Complex64 = ops.pair_annihilation.iter().map(|p| state.expectation_complex(p)).sum();
    let n_mean = state.expectation(&ops.number)?;
    let n2 = state.expectation(&ops.number_squared)?;
    let rho = pair_density(state, ops);
    Ok(ObservableSet {
        energy,
        jx,
        delta_kappa: g * kappa_sum.norm(),
        delta_coh: delta_coh(&rho, g),
        n_mean,
        n_var: (n2 - n_mean * n_mean).max(0.0),
        rho,
    })
}

/// [`ObservableOperators`] compiled onto one fixed-N sector (real states).
#[derive(Debug, Clone)]
pub struct SectorObservables {
    pub sector: FixedNSector,
    number: SectorOperator,
    number_squared: SectorOperator,
    pair_transfer: Vec<SectorOperator>,
    pair_annihilation: Vec<PauliSum>,
    m: usize,
}

impl SectorObservables {
    pub fn new(ops: &ObservableOperators, sector: &FixedNSector) -> Result<Self> {
        if sector.qubits != 2 * ops.m {
            return Err(Error::Dimension(format!("sector on {} qubits, operators for m = {}", sector.qubits, ops.m)));
        }
        Ok(SectorObservables {
            sector: sector.clone(),
            number: SectorOperator::from_pauli(sector, &ops.number)?,
            number_squared: SectorOperator::from_pauli(sector, &ops.number_squared)?,
            pair_transfer: ops
                .pair_transfer
                .iter()
                .map(|p| SectorOperator::from_pauli(sector, p))
                .collect::<Result<Vec<_>>>()?,
            pair_annihilation: ops.pair_annihilation.clone(),
            m: ops.m,
        })
    }
}

/// [`measure`] for real sector amplitudes; `jx` is the compiled `J_x` image
/// and `energy` the already-known `<H'>`.
pub fn measure_sector(
    amplitudes: &[f64],
    compiled: &SectorObservables,
    jx: &SectorOperator,
    g: f64,
    energy: f64,
) -> Result<ObservableSet> {
    if amplitudes.len() != compiled.sector.dim() {
        return Err(Error::Dimension(format!("{} amplitudes for a sector of {}", amplitudes.len(), compiled.sector.dim())));
    }
    let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Norm(norm));
    }
    let m = compiled.m;
    let rho = DMatrix::from_fn(m, m, |k, l| Complex64::new(compiled.pair_transfer[k * m + l].expectation(amplitudes), 0.0));
    let rho = PairDensity { rho };
    // P_k leaves the sector; evaluate it on the embedded register state
    let full = compiled.sector.embed(amplitudes);
    let kappa_sum: Complex64 = compiled.pair_annihilation.iter().map(|p| full.expectation_complex(p)).sum();
    let n_mean = compiled.number.expectation(amplitudes);
    let n2 = compiled.number_squared.expectation(amplitudes);
    Ok(ObservableSet {
        energy,
        jx: jx.expectation(amplitudes),
        delta_kappa: g * kappa_sum.norm(),
        delta_coh: delta_coh(&rho, g),
        n_mean,
        n_var: (n2 - n_mean * n_mean).max(0.0),
        rho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoiPoint {
    pub omega: f64,
    pub j2: f64,
    pub one_sided: bool,
}

/// `J2 = dJx/domega` on the mesh: central differences inside, one-sided at the ends.
pub fn dynamical_moi(path: &[(f64, f64)]) -> Result<Vec<MoiPoint>> {
    let n = path.len();
    if n < 2 {
        return Err(Error::InvalidArgument("dynamical moment of inertia needs at least two frequencies".into()));
    }
    if path.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("frequency mesh must be strictly ascending".into()));
    }
    let slope = |a: usize, b: usize| (path[b].1 - path[a].1) / (path[b].0 - path[a].0);
    Ok((0..n)
        .map(|i| {
            let (j2, one_sided) = if i == 0 {
                (slope(0, 1), true)
            } else if i == n - 1 {
                (slope(n - 2, n - 1), true)
            } else {
                (slope(i - 1, i + 1), false)
            };
            MoiPoint { omega: path[i].0, j2, one_sided }
        })
        .collect())
}
