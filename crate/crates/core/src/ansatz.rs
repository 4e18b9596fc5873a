//! Structured number-conserving ansatz: pair-transfer doubles on the complete
//! level graph followed by singles on the nonzero `j_x` graph.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{central_difference, Objective};
use crate::pauli::PauliSum;
use crate::sector::{FixedNSector, SectorGate, SectorOperator};
use crate::statevector::StateVector;

/// Couplings at or below this magnitude do not receive a single-excitation gate.
pub const DEFAULT_JX_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcitationGraph {
    /// Level pairs `(k, l)`, `k < l`.
    pub doubles: Vec<(usize, usize)>,
    /// Spin-orbital pairs `(p, q)`, `p < q`.
    pub singles: Vec<(usize, usize)>,
}

pub fn build_graph(m: usize, jx: &DMatrix<f64>, jx_threshold: f64) -> Result<ExcitationGraph> {
    if jx.nrows() != 2 * m || jx.ncols() != 2 * m {
        return Err(Error::Dimension(format!("j_x is {}x{}, expected {}", jx.nrows(), jx.ncols(), 2 * m)));
    }
    let mut doubles = Vec::with_capacity(m * (m - 1) / 2);
    for k in 0..m {
        for l in k + 1..m {
            doubles.push((k, l));
        }
    }
    let mut singles = Vec::new();
    for p in 0..2 * m {
        for q in p + 1..2 * m {
            if jx[(p, q)].abs() > jx_threshold {
                singles.push((p, q));
            }
        }
    }
    Ok(ExcitationGraph { doubles, singles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Pair { k: usize, l: usize },
    Single { p: usize, q: usize },
}

/// Gate sequence on a `qubits` register starting from the `n_act` reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzProgram {
    pub graph: ExcitationGraph,
    pub qubits: usize,
    pub n_act: usize,
}

impl AnsatzProgram {
    pub fn new(graph: ExcitationGraph, qubits: usize, n_act: usize) -> Self {
        AnsatzProgram { graph, qubits, n_act }
    }

    /// Same program without the single-excitation layer.
    pub fn doubles_only(&self) -> Self {
        AnsatzProgram {
            graph: ExcitationGraph { doubles: self.graph.doubles.clone(), singles: vec![] },
            ..self.clone()
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.graph.doubles.len() + self.graph.singles.len()
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.graph
            .doubles
            .iter()
            .map(|&(k, l)| Gate::Pair { k, l })
            .chain(self.graph.singles.iter().map(|&(p, q)| Gate::Single { p, q }))
            .collect()
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::Dimension(format!(
                "{} angles for {} gates",
                params.len(),
                self.parameter_count()
            )));
        }
        Ok(())
    }
}

/// Reference determinant followed by every gate in program order.
pub fn prepare_state(params: &[f64], program: &AnsatzProgram) -> Result<StateVector> {
    program.check(params)?;
    let mut state = StateVector::reference(program.qubits, program.n_act)?;
    for (gate, &angle) in program.gates().iter().zip(params) {
        match *gate {
            Gate::Pair { k, l } => state.apply_pair_excitation(k, l, angle)?,
            Gate::Single { p, q } => state.apply_single_excitation(p, q, angle)?,
        }
    }
    Ok(state)
}

/// `<psi(params)| H |psi(params)>` on the dense statevector.
pub fn energy(params: &[f64], program: &AnsatzProgram, h: &PauliSum) -> Result<f64> {
    if h.qubits != program.qubits {
        return Err(Error::Dimension(format!("operator on {} qubits, program on {}", h.qubits, program.qubits)));
    }
    prepare_state(params, program)?.expectation(h)
}

/// The ansatz energy compiled onto the fixed-`n_act` sector.
#[derive(Debug, Clone)]
pub struct CompiledAnsatz {
    pub sector: FixedNSector,
    gates: Vec<SectorGate>,
    hamiltonian: SectorOperator,
    reference: usize,
    fd_step: f64,
}

impl CompiledAnsatz {
    pub fn new(program: &AnsatzProgram, h: &PauliSum, fd_step: f64) -> Result<Self> {
        if h.qubits != program.qubits {
            return Err(Error::Dimension(format!("operator on {} qubits, program on {}", h.qubits, program.qubits)));
        }
        let sector = FixedNSector::new(program.qubits, program.n_act)?;
        let gates = program
            .gates()
            .iter()
            .map(|g| match *g {
                Gate::Pair { k, l } => SectorGate::pair(&sector, k, l),
                Gate::Single { p, q } => SectorGate::single(&sector, p, q),
            })
            .collect();
        let hamiltonian = SectorOperator::from_pauli(&sector, h)?;
        let reference = sector.index_of((1u64 << program.n_act) - 1).expect("reference lies in its sector");
        Ok(CompiledAnsatz { sector, gates, hamiltonian, reference, fd_step })
    }

    pub fn parameter_count(&self) -> usize {
        self.gates.len()
    }

    pub fn reference_amplitudes(&self) -> Vec<f64> {
        let mut psi = vec![0.0; self.sector.dim()];
        psi[self.reference] = 1.0;
        psi
    }

    pub fn amplitudes(&self, params: &[f64]) -> Vec<f64> {
        let mut psi = self.reference_amplitudes();
        for (g, a) in self.gates.iter().zip(params) {
            g.apply(&mut psi, *a);
        }
        psi
    }

    pub fn state(&self, params: &[f64]) -> StateVector {
        self.sector.embed(&self.amplitudes(params))
    }

    pub fn energy(&self, params: &[f64]) -> f64 {
        self.hamiltonian.expectation(&self.amplitudes(params))
    }

    /// Central-difference gradient reusing the gate prefix shared by each
    /// stencil pair; values are bitwise those of [`Self::energy`].
    pub fn fd_gradient(&self, params: &[f64], grad: &mut [f64]) -> usize {
        let n = params.len();
        let h = self.fd_step;
        let mut prefix = Vec::with_capacity(n);
        let mut psi = self.reference_amplitudes();
        for (g, a) in self.gates.iter().zip(params) {
            prefix.push(psi.clone());
            g.apply(&mut psi, *a);
        }
        let mut work = vec![0.0; psi.len()];
        for i in 0..n {
            let mut eval = |angle: f64| {
                work.copy_from_slice(&prefix[i]);
                self.gates[i].apply(&mut work, angle);
                for j in i + 1..n {
                    self.gates[j].apply(&mut work, params[j]);
                }
                self.hamiltonian.expectation(&work)
            };
            let fp = eval(params[i] + h);
            let fm = eval(params[i] - h);
            grad[i] = (fp - fm) / (2.0 * h);
        }
        2 * n
    }
}

impl Objective for CompiledAnsatz {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.energy(x)
    }

    fn gradient(&mut self, x: &[f64], _fx: f64, grad: &mut [f64]) -> usize {
        self.fd_gradient(x, grad)
    }
}

/// Plain central differences through [`CompiledAnsatz::energy`] (no prefix reuse).
pub fn plain_fd_gradient(c: &CompiledAnsatz, params: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; params.len()];
    central_difference(|x| c.energy(x), params, h, &mut g);
    g
}
