//! Pauli operators and the conversion between Pauli-transfer and Choi forms.
//!
//! An `n`-qubit Pauli-transfer matrix (PTM) is `R_{μν} = tr(P_μ Λ[P_ν]) / d`
//! with `d = 2ⁿ` and `P_μ = σ_{μ₁} ⊗ … ⊗ σ_{μₙ}` indexed lexicographically,
//! `μ = Σ_k μ_k 4^{n−1−k}`. Row and column 0 belong to the identity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix};

/// `σ₀ = 1`, `σ₁ = X`, `σ₂ = Y`, `σ₃ = Z`.
pub fn sigma(k: usize) -> CMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        1 => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Digits of a lexicographic Pauli index, most significant qubit first.
pub fn pauli_digits(mut index: usize, n_qubits: usize) -> Vec<usize> {
    let mut digits = vec![0; n_qubits];
    for k in (0..n_qubits).rev() {
        digits[k] = index % 4;
        index /= 4;
    }
    digits
}

pub fn pauli_string(digits: &[usize]) -> CMatrix {
    digits
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, &k| kron(&acc, &sigma(k)))
}

fn n_qubits_of_ptm(ptm: &DMatrix<f64>) -> Result<usize> {
    let n = ptm.nrows();
    let qubits = (n.max(1).trailing_zeros() / 2) as usize;
    if !ptm.is_square() || n != 1usize << (2 * qubits) || n < 4 {
        return Err(Error::Dimension(format!(
            "PTM must be 4ⁿ×4ⁿ, got {}x{}",
            ptm.nrows(),
            ptm.ncols()
        )));
    }
    Ok(qubits)
}

/// `C = (1/d) Σ_{μν} R_{μν} P_νᵀ ⊗ P_μ`.
pub fn ptm_to_choi(ptm: &DMatrix<f64>) -> Result<ChoiMatrix> {
    let qubits = n_qubits_of_ptm(ptm)?;
    let d = 1usize << qubits;
    let paulis: Vec<CMatrix> = (0..d * d)
        .map(|mu| pauli_string(&pauli_digits(mu, qubits)))
        .collect();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for nu in 0..d * d {
        let pt = paulis[nu].transpose();
        for mu in 0..d * d {
            let r = ptm[(mu, nu)];
            if r != 0.0 {
                choi += kron(&pt, &paulis[mu]) * Complex64::new(r / d as f64, 0.0);
            }
        }
    }
    ChoiMatrix::new(choi)
}

/// `R_{μν} = tr((P_νᵀ ⊗ P_μ) C) / d`.
pub fn choi_to_ptm(choi: &ChoiMatrix) -> Result<DMatrix<f64>> {
    let d = choi.dim();
    let qubits = d.trailing_zeros() as usize;
    if 1usize << qubits != d {
        return Err(Error::Dimension(format!("Choi dimension {d} is not a power of two")));
    }
    let paulis: Vec<CMatrix> = (0..d * d)
        .map(|mu| pauli_string(&pauli_digits(mu, qubits)))
        .collect();
    let c = choi.matrix();
    Ok(DMatrix::from_fn(d * d, d * d, |mu, nu| {
        let basis = kron(&paulis[nu].transpose(), &paulis[mu]);
        (&basis * c).trace().re / d as f64
    }))
}
