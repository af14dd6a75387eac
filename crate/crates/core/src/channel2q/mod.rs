//! Two-qubit normal channels on SU(2)⊗SU(2) and correlated Pauli channels.
//!
//! Transfer matrices are stored in the lexicographic Pauli basis
//! `½ σⱼ⊗σₖ`, index `4j + k`. The block form `1 ⊕ R1 ⊕ R2 ⊕ W` lists
//! `(0,0)`, then `(j,0)`, then `(0,k)`, then `(j,k)` with `j` major; see
//! [`BLOCK_ORDER`].

mod pauli_models;
mod walk;

use nalgebra::{DMatrix, Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;

use crate::channel1q::{self, clip_psd, NormalParams1Q, PauliTransferMatrix1Q};
use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{expm, kron, skew, CMatrix};
use crate::pauli::ptm_to_choi;
use crate::su2::{generators, Spin};

pub use pauli_models::{
    correlated_pauli_ptm, general_pauli_ptm, CorrelatedPauliParams, PauliTable,
};
pub use walk::random_walk_ptm2;

pub type Matrix6 = SMatrix<f64, 6, 6>;
pub type Vector6 = SVector<f64, 6>;

/// Lexicographic index of each position of the block form.
pub const BLOCK_ORDER: [usize; 16] = [0, 4, 8, 12, 1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15];

/// Capped diffusion used when an error probability reaches `1/4`.
pub const DEPOLARIZING_DIFFUSION: f64 = 50.0;
const DEPOLARIZING_GUARD: f64 = 1e-12;

/// `A = [[A1, F], [Fᵀ, A2]]` and `b = (b1, b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalParams2Q {
    a: Matrix6,
    b: Vector6,
}

impl NormalParams2Q {
    pub fn new(a: Matrix6, b: Vector6) -> Result<Self> {
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("drift vector"));
        }
        Ok(Self { a: clip_psd(&a, "diffusion matrix")?, b })
    }

    pub fn from_blocks(
        a1: &Matrix3<f64>,
        a2: &Matrix3<f64>,
        f: &Matrix3<f64>,
        b1: &Vector3<f64>,
        b2: &Vector3<f64>,
    ) -> Result<Self> {
        let mut a = Matrix6::zeros();
        a.fixed_view_mut::<3, 3>(0, 0).copy_from(a1);
        a.fixed_view_mut::<3, 3>(3, 3).copy_from(a2);
        a.fixed_view_mut::<3, 3>(0, 3).copy_from(f);
        a.fixed_view_mut::<3, 3>(3, 0).copy_from(&f.transpose());
        let mut b = Vector6::zeros();
        b.fixed_rows_mut::<3>(0).copy_from(b1);
        b.fixed_rows_mut::<3>(3).copy_from(b2);
        Self::new(a, b)
    }

    /// Independent qubits.
    pub fn product(q1: &NormalParams1Q, q2: &NormalParams1Q) -> Result<Self> {
        Self::from_blocks(
            q1.diffusion(),
            q2.diffusion(),
            &Matrix3::zeros(),
            q1.drift(),
            q2.drift(),
        )
    }

    pub fn diffusion(&self) -> &Matrix6 {
        &self.a
    }

    pub fn drift(&self) -> &Vector6 {
        &self.b
    }

    pub fn a1(&self) -> Matrix3<f64> {
        self.a.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn a2(&self) -> Matrix3<f64> {
        self.a.fixed_view::<3, 3>(3, 3).into_owned()
    }

    /// Cross block coupling qubit-1 generator `i` to qubit-2 generator `j`.
    pub fn f(&self) -> Matrix3<f64> {
        self.a.fixed_view::<3, 3>(0, 3).into_owned()
    }

    pub fn b1(&self) -> Vector3<f64> {
        self.b.fixed_rows::<3>(0).into_owned()
    }

    pub fn b2(&self) -> Vector3<f64> {
        self.b.fixed_rows::<3>(3).into_owned()
    }

    /// Marginal distribution of qubit `k ∈ {0, 1}`.
    pub fn marginal(&self, k: usize) -> NormalParams1Q {
        let (a, b) = if k == 0 { (self.a1(), self.b1()) } else { (self.a2(), self.b2()) };
        NormalParams1Q::new(a, b).expect("principal block of a PSD matrix is PSD")
    }
}

/// Isotropic errors `A1 = a1·1`, `A2 = a2·1`, `F = ρ√(a1a2)·1`, no drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicNormalParams {
    pub a1: f64,
    pub a2: f64,
    pub rho: f64,
}

/// Diffusion strength of an isotropic single-qubit error with probability `p`
/// per Pauli, `a = −ln(1 − 4p)`, capped near the depolarizing limit.
pub fn diffusion_for_probability(p: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&p) {
        return Err(Error::InvalidParams(format!("error probability must lie in [0, 1/4], got {p}")));
    }
    if p >= 0.25 - DEPOLARIZING_GUARD {
        return Ok(DEPOLARIZING_DIFFUSION);
    }
    Ok((-(1.0 - 4.0 * p).ln()).min(DEPOLARIZING_DIFFUSION))
}

impl IsotropicNormalParams {
    pub fn new(a1: f64, a2: f64, rho: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && a1 >= 0.0 && a2 >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "isotropic diffusion strengths must be finite and non-negative, got {a1}, {a2}"
            )));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParams(format!("correlation must lie in [-1, 1], got {rho}")));
        }
        Ok(Self { a1, a2, rho })
    }

    /// Parameters reproducing single-qubit isotropic Pauli errors `p`, `q`.
    pub fn from_probabilities(p: f64, q: f64, rho: f64) -> Result<Self> {
        Self::new(diffusion_for_probability(p)?, diffusion_for_probability(q)?, rho)
    }

    pub fn a12(&self) -> f64 {
        self.rho * (self.a1 * self.a2).sqrt()
    }

    pub fn to_params(&self) -> NormalParams2Q {
        let i = Matrix3::identity();
        NormalParams2Q::from_blocks(
            &(i * self.a1),
            &(i * self.a2),
            &(i * self.a12()),
            &Vector3::zeros(),
            &Vector3::zeros(),
        )
        .expect("|rho| <= 1 keeps the isotropic diffusion matrix PSD")
    }
}

/// Two-qubit transfer matrix, stored in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTransferMatrix2Q(DMatrix<f64>);

impl PauliTransferMatrix2Q {
    pub fn from_lexicographic(m: DMatrix<f64>) -> Result<Self> {
        if m.shape() != (16, 16) {
            return Err(Error::Dimension(format!("two-qubit PTM must be 16x16, got {:?}", m.shape())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("transfer matrix"));
        }
        Ok(Self(m))
    }

    /// `1 ⊕ R1 ⊕ R2 ⊕ W` with all other couplings zero.
    pub fn from_blocks(r1: &Matrix3<f64>, r2: &Matrix3<f64>, w: &SMatrix<f64, 9, 9>) -> Self {
        let mut block = DMatrix::zeros(16, 16);
        block[(0, 0)] = 1.0;
        block.view_mut((1, 1), (3, 3)).copy_from(r1);
        block.view_mut((4, 4), (3, 3)).copy_from(r2);
        block.view_mut((7, 7), (9, 9)).copy_from(w);
        Self::from_block_form(&block).expect("16x16")
    }

    pub fn from_block_form(m: &DMatrix<f64>) -> Result<Self> {
        if m.shape() != (16, 16) {
            return Err(Error::Dimension(format!("two-qubit PTM must be 16x16, got {:?}", m.shape())));
        }
        let mut lex = DMatrix::zeros(16, 16);
        for (i, &li) in BLOCK_ORDER.iter().enumerate() {
            for (j, &lj) in BLOCK_ORDER.iter().enumerate() {
                lex[(li, lj)] = m[(i, j)];
            }
        }
        Self::from_lexicographic(lex)
    }

    pub fn identity() -> Self {
        Self(DMatrix::identity(16, 16))
    }

    /// Transfer matrix of two independent single-qubit channels.
    pub fn product(r1: &PauliTransferMatrix1Q, r2: &PauliTransferMatrix1Q) -> Self {
        Self(kron(&r1.full(), &r2.full()))
    }

    pub fn lexicographic(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn block_form(&self) -> DMatrix<f64> {
        DMatrix::from_fn(16, 16, |i, j| self.0[(BLOCK_ORDER[i], BLOCK_ORDER[j])])
    }

    pub fn r1(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[(4 * (i + 1), 4 * (j + 1))])
    }

    pub fn r2(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[(i + 1, j + 1)])
    }

    /// Correlation block, rows and columns `(j,k)` with `j` major.
    pub fn w(&self) -> SMatrix<f64, 9, 9> {
        let b = self.block_form();
        SMatrix::from_fn(|i, j| b[(7 + i, 7 + j)])
    }

    pub fn max_singular_value(&self) -> f64 {
        self.0.clone().singular_values().max()
    }
}

/// Generator of the two-qubit channel in block form `0 ⊕ 𝓛1 ⊕ 𝓛2 ⊕ M`.
///
/// Block `(i,j)` of `M` (first-qubit indices) is `𝓛1ᵢⱼ·1 + δᵢⱼ𝓛2` plus, for
/// `i ≠ j`, `ε_{a j i}[F_a]×` with `a` the remaining index and `F_a` the
/// vector of couplings between qubit-1 generator `a` and the three qubit-2
/// generators (row `a` of `F`).
pub fn generator2(params: &NormalParams2Q) -> DMatrix<f64> {
    let l1 = channel1q::generator(&params.marginal(0));
    let l2 = channel1q::generator(&params.marginal(1));
    let f = params.f();
    let mut g = DMatrix::zeros(16, 16);
    g.view_mut((1, 1), (3, 3)).copy_from(&l1);
    g.view_mut((4, 4), (3, 3)).copy_from(&l2);
    for i in 0..3 {
        for j in 0..3 {
            let mut block = Matrix3::identity() * l1[(i, j)];
            if i == j {
                block += l2;
            } else {
                let a = 3 - i - j;
                let row = Vector3::new(f[(a, 0)], f[(a, 1)], f[(a, 2)]);
                block += skew(&row) * levi_civita(a, j, i);
            }
            g.view_mut((7 + 3 * i, 7 + 3 * j), (3, 3)).copy_from(&block);
        }
    }
    g
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `exp(generator2)` as a transfer matrix.
pub fn ptm2(params: &NormalParams2Q) -> PauliTransferMatrix2Q {
    let block = expm(&generator2(params)).expect("finite generator");
    PauliTransferMatrix2Q::from_block_form(&block).expect("16x16")
}

/// Closed-form transfer matrix of the correlated isotropic normal channel.
pub fn correlated_normal_ptm(params: &IsotropicNormalParams) -> PauliTransferMatrix2Q {
    let [e1, e2, e3, e4] = correlation_coefficients(params);
    let mut w = SMatrix::<f64, 9, 9>::zeros();
    for c in 0..3 {
        for d in 0..3 {
            let row = 3 * c + d;
            if c == d {
                for e in 0..3 {
                    w[(row, 4 * e)] = if e == c { e1 } else { e2 };
                }
            } else {
                w[(row, row)] = e3;
                w[(row, 3 * d + c)] = e4;
            }
        }
    }
    let r1 = Matrix3::identity() * (-params.a1).exp();
    let r2 = Matrix3::identity() * (-params.a2).exp();
    PauliTransferMatrix2Q::from_blocks(&r1, &r2, &w)
}

/// `[E1, E2, E3, E4]` of the correlated isotropic normal channel.
pub fn correlation_coefficients(params: &IsotropicNormalParams) -> [f64; 4] {
    let e0 = (-params.a1 - params.a2).exp();
    let a12 = params.a12();
    let (up2, up, down) = ((2.0 * a12).exp(), a12.exp(), (-a12).exp());
    [
        e0 * (up2 + 2.0 * down) / 3.0,
        e0 * (up2 - down) / 3.0,
        e0 * (up + down) / 2.0,
        e0 * (down - up) / 2.0,
    ]
}

fn spin_generators(s: u8) -> Result<(usize, [CMatrix; 3])> {
    match s {
        0 => Ok((1, std::array::from_fn(|_| CMatrix::zeros(1, 1)))),
        1 => Ok((3, generators(Spin::One))),
        _ => Err(Error::InvalidParams(format!("unsupported spin {s} for a Fourier coefficient"))),
    }
}

/// Fourier coefficient `exp(−𝓜_{s1,s2})` for `(s1, s2) ∈ {(0,1), (1,0), (1,1)}`,
/// rows and columns indexed by `(m1, m2)` with `m = 1, 0, −1` and `m1` major.
pub fn fourier_coeff2(params: &NormalParams2Q, s1: u8, s2: u8) -> Result<CMatrix> {
    if (s1, s2) == (0, 0) {
        return Err(Error::InvalidParams("spin pair (0, 0) is trivial and not supported".into()));
    }
    let (d1, g1) = spin_generators(s1)?;
    let (d2, g2) = spin_generators(s2)?;
    let l: Vec<CMatrix> = g1
        .iter()
        .map(|g| kron(g, &CMatrix::identity(d2, d2)))
        .chain(g2.iter().map(|g| kron(&CMatrix::identity(d1, d1), g)))
        .collect();
    let (a, b) = (params.diffusion(), params.drift());
    let n = d1 * d2;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..6 {
        m += &l[i] * Complex64::new(0.0, b[i]);
        for j in 0..6 {
            if a[(i, j)] != 0.0 {
                m += &l[i] * &l[j] * Complex64::new(0.5 * a[(i, j)], 0.0);
            }
        }
    }
    expm(&(-m))
}

/// Choi matrix of the two-qubit map with transfer matrix `ptm`.
pub fn choi2(ptm: &PauliTransferMatrix2Q) -> ChoiMatrix {
    ptm_to_choi(ptm.lexicographic()).expect("16x16 transfer matrix")
}
