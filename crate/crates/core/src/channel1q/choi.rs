use num_complex::Complex64;

use super::{m1_matrix, NormalParams1Q, PauliTransferMatrix1Q};
use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, expm, CMatrix};
use crate::pauli::{choi_to_ptm, ptm_to_choi};

pub fn choi_from_ptm(r: &PauliTransferMatrix1Q) -> ChoiMatrix {
    ptm_to_choi(&r.full()).expect("4x4 transfer matrix")
}

/// Bloch block of the transfer matrix encoded by a single-qubit Choi matrix.
pub fn ptm_from_choi(choi: &ChoiMatrix) -> Result<PauliTransferMatrix1Q> {
    if choi.dim() != 2 {
        return Err(Error::Dimension(format!("expected a 4x4 Choi matrix, got dimension {}", choi.dim())));
    }
    let full = choi_to_ptm(choi)?;
    Ok(PauliTransferMatrix1Q(linalg::to_matrix3(
        &full.view((1, 1), (3, 3)).into_owned(),
    )))
}

/// Choi matrix assembled from the spin-1 Fourier coefficient `exp(−𝓜₁)`.
///
/// Only five elements are independent; the rest follow from Hermiticity,
/// trace preservation and unitality.
pub fn choi_from_fourier(params: &NormalParams1Q) -> ChoiMatrix {
    // Rows/columns of F are indexed by m = 1, 0, −1.
    let f = expm(&(-m1_matrix(params))).expect("finite exponent");
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let r2 = std::f64::consts::SQRT_2;

    // Λ[|i⟩⟨j|]_{kl}, i.e. lam[i][j][k][l].
    let mut lam = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    lam[0][0][0][0] = half + half * f[(1, 1)];
    lam[0][0][1][0] = f[(2, 1)] / r2;
    lam[1][0][0][0] = f[(1, 2)] / r2;
    lam[1][0][1][0] = f[(2, 2)];
    lam[1][0][0][1] = -f[(0, 2)];

    lam[0][0][1][1] = one - lam[0][0][0][0];
    lam[0][0][0][1] = lam[0][0][1][0].conj();
    lam[1][1][1][1] = lam[0][0][0][0];
    lam[1][1][0][0] = one - lam[1][1][1][1];
    lam[1][1][1][0] = -lam[0][0][1][0];
    lam[1][1][0][1] = lam[1][1][1][0].conj();
    lam[1][0][1][1] = -lam[1][0][0][0];
    for k in 0..2 {
        for l in 0..2 {
            lam[0][1][k][l] = lam[1][0][l][k].conj();
        }
    }

    let c = CMatrix::from_fn(4, 4, |row, col| {
        let (i, k) = (row / 2, row % 2);
        let (j, l) = (col / 2, col % 2);
        lam[i][j][k][l]
    });
    ChoiMatrix::new(c).expect("4x4 finite")
}
