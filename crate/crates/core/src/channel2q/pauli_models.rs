use nalgebra::{DMatrix, DVector, Matrix3, SMatrix};

use super::PauliTransferMatrix2Q;
use crate::error::{Error, Result};

const TABLE_SUM_TOL: f64 = 1e-12;

/// Probabilities `pᵢⱼ` of applying `σᵢ⊗σⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTable([[f64; 4]; 4]);

impl PauliTable {
    pub fn new(p: [[f64; 4]; 4]) -> Result<Self> {
        if p.iter().flatten().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParams("Pauli table entries must be finite and non-negative".into()));
        }
        let sum: f64 = p.iter().flatten().sum();
        if (sum - 1.0).abs() > TABLE_SUM_TOL {
            return Err(Error::InvalidParams(format!("Pauli table must sum to 1, sums to {sum}")));
        }
        Ok(Self(p))
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.0
    }
}

/// Isotropic single-qubit error probabilities `p`, `q` per Pauli, with
/// weight `m` on applying the same Pauli to both qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedPauliParams {
    pub p: f64,
    pub q: f64,
    pub m: f64,
}

impl CorrelatedPauliParams {
    pub fn new(p: f64, q: f64, m: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=0.25).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1/4], got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidParams(format!("correlation weight must lie in [0, 1], got {m}")));
        }
        Ok(Self { p, q, m })
    }

    /// `pᵢⱼ = (1−m) pᵢ qⱼ + m (pᵢ + qᵢ)/2 δᵢⱼ`.
    pub fn table(&self) -> PauliTable {
        let single = |x: f64| [1.0 - 3.0 * x, x, x, x];
        let (p, q) = (single(self.p), single(self.q));
        let mut t = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                t[i][j] = (1.0 - self.m) * p[i] * q[j];
                if i == j {
                    t[i][j] += self.m * (p[i] + q[i]) / 2.0;
                }
            }
        }
        PauliTable::new(t).expect("convex combination of distributions")
    }
}

/// `+1` if `σᵢ` commutes with `σⱼ`, else `−1`.
fn commutation_sign(i: usize, j: usize) -> f64 {
    if i == 0 || j == 0 || i == j {
        1.0
    } else {
        -1.0
    }
}

/// Transfer matrix of `ρ → Σ pᵢⱼ (σᵢ⊗σⱼ) ρ (σᵢ⊗σⱼ)`; diagonal in the Pauli basis.
pub fn general_pauli_ptm(table: &PauliTable) -> PauliTransferMatrix2Q {
    let p = table.entries();
    let diag = DVector::from_fn(16, |mu, _| {
        let (c, d) = (mu / 4, mu % 4);
        let mut r = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                r += p[i][j] * commutation_sign(i, c) * commutation_sign(j, d);
            }
        }
        r
    });
    PauliTransferMatrix2Q::from_lexicographic(DMatrix::from_diagonal(&diag)).expect("16x16")
}

/// Closed form `1 ⊕ (R_P(p) + c) ⊕ (R_P(q) − c) ⊕ W` of the isotropic
/// correlated Pauli channel.
pub fn correlated_pauli_ptm(params: &CorrelatedPauliParams) -> PauliTransferMatrix2Q {
    let CorrelatedPauliParams { p, q, m } = *params;
    let c = 2.0 * m * (p - q);
    let r1 = Matrix3::identity() * (1.0 - 4.0 * p + c);
    let r2 = Matrix3::identity() * (1.0 - 4.0 * q - c);
    let w1 = 1.0 + 4.0 * (m - 1.0) * (p + q * (1.0 - 4.0 * p));
    let w2 = w1 - 2.0 * m * (p + q);
    let w = SMatrix::<f64, 9, 9>::from_fn(|i, j| match (i == j, i % 4 == 0) {
        (true, true) => w1,
        (true, false) => w2,
        _ => 0.0,
    });
    PauliTransferMatrix2Q::from_blocks(&r1, &r2, &w)
}
