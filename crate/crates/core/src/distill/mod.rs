//! Entanglement distillation with bilateral CNOTs and post-selection.
//!
//! The basic round `D` works on four qubits, labelled
//! `[1.1, 1.2, 2.1, 2.2] = [0, 1, 2, 3]`. Pairs `(1.1, 1.2)` and `(2.1, 2.2)`
//! start in `|Φ⁺⟩`; Alice holds `1.1, 2.1`, Bob holds `1.2, 2.2`. The
//! transmitted qubits `1.2` and `2.2` pass jointly through the error channel.
//! Alice applies CNOT `1.1 → 2.1`, Bob CNOT `1.2 → 2.2`, both measure `σz`
//! on their target and the pair `(1.1, 1.2)` is kept when the outcomes agree.
//!
//! The full protocol runs `D` twice, applies Hadamards to all four surviving
//! qubits and repeats the CNOT / measure / post-select step on the two pairs.

mod state;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel1q::{choi_from_ptm, PauliChannelParams};
use crate::channel2q::{
    choi2, correlated_normal_ptm, correlated_pauli_ptm, CorrelatedPauliParams, IsotropicNormalParams,
};
use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub use state::{DensityMatrix, MAX_QUBITS};
use state::{apply_channel, apply_unitary, project_and_trace};

/// Post-selection probabilities below this are treated as impossible.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;

/// Qubits carrying the error channel in a round of `D`.
pub const TRANSMITTED: [usize; 2] = [1, 3];

#[derive(Debug, Clone, PartialEq)]
pub struct DistillOutcome {
    /// Post-selected, renormalized state of the kept pair.
    pub state: DensityMatrix,
    pub success_prob: f64,
    pub fidelity: f64,
}

impl DistillOutcome {
    fn from_unnormalized(rho: CMatrix) -> Result<Self> {
        let (state, success_prob) = DensityMatrix::from_unnormalized(rho)?;
        let fidelity = state.bell_fidelity()?;
        Ok(Self { state, success_prob, fidelity })
    }
}

pub fn cnot() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[(r, c)] = Complex64::new(1.0, 0.0);
    }
    u
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    )
}

/// CNOTs `0 → 2`, `1 → 3`, keep equal `σz` outcomes on `2, 3`, trace them out.
/// Returns the unnormalized state of `(0, 1)`.
fn bilateral_step(rho: &CMatrix) -> Result<CMatrix> {
    let cx = cnot();
    let rho = apply_unitary(rho, 4, &cx, &[0, 2])?;
    let rho = apply_unitary(&rho, 4, &cx, &[1, 3])?;
    project_and_trace(&rho, 4, &[0, 1], &[2, 3], |o| o == 0b00 || o == 0b11)
}

fn check_two_qubit(channel: &ChoiMatrix) -> Result<()> {
    if channel.dim() != 4 {
        return Err(Error::Dimension(format!(
            "error channel must act on two qubits, acts on dimension {}",
            channel.dim()
        )));
    }
    Ok(())
}

/// Unnormalized output of `D`; its trace is the success probability.
fn basic_unnormalized(channel: &ChoiMatrix) -> Result<CMatrix> {
    check_two_qubit(channel)?;
    let bell = DensityMatrix::bell_pair();
    let four = bell.tensor(&bell)?;
    let rho = apply_channel(four.matrix(), 4, channel, &TRANSMITTED)?;
    bilateral_step(&rho)
}

/// One round of `D` under the two-qubit error `channel`.
pub fn basic_distill(channel: &ChoiMatrix) -> Result<DistillOutcome> {
    DistillOutcome::from_unnormalized(basic_unnormalized(channel)?)
}

/// `D_u`: two independent rounds of `D` (using `channel1` and `channel2`),
/// Hadamards on all four qubits, then one more bilateral step. The success
/// probability is the joint probability of all three post-selections.
pub fn full_distill(channel1: &ChoiMatrix, channel2: &ChoiMatrix) -> Result<DistillOutcome> {
    let a = basic_unnormalized(channel1)?;
    let b = basic_unnormalized(channel2)?;
    let mut rho = a.kronecker(&b);
    let h = hadamard();
    for q in 0..4 {
        rho = apply_unitary(&rho, 4, &h, &[q])?;
    }
    DistillOutcome::from_unnormalized(bilateral_step(&rho)?)
}

/// The two families of correlated two-qubit errors compared in the sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorModel {
    /// Mixture of independent and identical Pauli errors, weight `m`.
    CorrelatedPauli,
    /// Normal channel with isotropic blocks and correlation `ρ`.
    CorrelatedNormal,
}

impl ErrorModel {
    /// Error channel with per-qubit isotropic probability `p` on both qubits.
    pub fn channel(&self, p: f64, correlation: f64) -> Result<ChoiMatrix> {
        let ptm = match self {
            Self::CorrelatedPauli => correlated_pauli_ptm(&CorrelatedPauliParams::new(p, p, correlation)?),
            Self::CorrelatedNormal => {
                correlated_normal_ptm(&IsotropicNormalParams::from_probabilities(p, p, correlation)?)
            }
        };
        Ok(choi2(&ptm))
    }
}

/// Fidelity of one Bell pair whose second qubit suffers an isotropic Pauli error.
pub fn undistilled_fidelity(p: f64) -> Result<f64> {
    let ch = choi_from_ptm(&PauliChannelParams::isotropic(p)?.ptm());
    DensityMatrix::bell_pair().apply_channel(&ch, &[1])?.bell_fidelity()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub correlation: f64,
    pub f_n: f64,
    /// `NaN` when post-selection is degenerate.
    pub f_u: f64,
    pub success_prob: f64,
    pub degenerate: bool,
}

/// `D_u` fidelities on the grid points `(p, correlation)`, in input order.
pub fn fidelity_sweep(model: ErrorModel, points: &[(f64, f64)]) -> Result<Vec<SweepRow>> {
    points
        .par_iter()
        .map(|&(p, correlation)| {
            let f_n = undistilled_fidelity(p)?;
            let ch = model.channel(p, correlation)?;
            match full_distill(&ch, &ch) {
                Ok(out) => Ok(SweepRow {
                    p,
                    correlation,
                    f_n,
                    f_u: out.fidelity,
                    success_prob: out.success_prob,
                    degenerate: false,
                }),
                Err(Error::DegenerateOutcome { probability }) => Ok(SweepRow {
                    p,
                    correlation,
                    f_n,
                    f_u: f64::NAN,
                    success_prob: probability,
                    degenerate: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}
