//! Single-qubit normal channels.
//!
//! A normal distribution on SU(2) is fixed by a positive semi-definite
//! diffusion matrix `A` and a drift vector `b`. It induces a unital channel
//! whose Bloch-vector action is `R = exp(𝓛)` with
//! `𝓛 = ½(A − tr(A)·1) + [b]×`, and whose spin-1 Fourier coefficient is
//! `exp(−𝓜₁)` with `𝓜₁ = ½ Lᵀ A L + i b·L`.

mod choi;
mod equivalence;
mod walk;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, complexify, expm, skew, CMatrix};
use crate::su2::{generators, Spin};

pub use choi::{choi_from_fourier, choi_from_ptm, ptm_from_choi};
pub use equivalence::{equivalence_class, EquivalenceClass, DEDUP_TOL, MAX_CLASS_SIZE, MEMBER_PSD_TOL};
pub use walk::{random_walk_ptm, MonteCarloEstimate, MIN_SAMPLES, MIN_STEPS};
pub(crate) use walk::{bloch_rotation, check_sizes, Moments};

const SYMMETRY_TOL: f64 = 1e-12;
pub(crate) const PARAM_PSD_TOL: f64 = 1e-10;

/// Diffusion matrix `A` (real, symmetric, PSD) and drift vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalParams1Q {
    a: Matrix3<f64>,
    b: Vector3<f64>,
}

/// Symmetrizes `a` and clips eigenvalues in `[−tol, 0)` to zero.
pub(crate) fn clip_psd<const D: usize>(
    a: &nalgebra::SMatrix<f64, D, D>,
    what: &str,
) -> Result<nalgebra::SMatrix<f64, D, D>> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("diffusion matrix"));
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > SYMMETRY_TOL * a.abs().max().max(1.0) {
        return Err(Error::InvalidParams(format!("{what} is not symmetric ({asym:.3e})")));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(DMatrix::from_fn(D, D, |i, j| sym[(i, j)]));
    let min = eigen.eigenvalues.min();
    if min < -PARAM_PSD_TOL {
        return Err(Error::InvalidParams(format!(
            "{what} is not positive semi-definite (eigenvalue {min:.3e})"
        )));
    }
    if min >= 0.0 {
        return Ok(sym);
    }
    let clipped = eigen.eigenvalues.map(|l| l.max(0.0));
    let v = &eigen.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    Ok(nalgebra::SMatrix::from_fn(|i, j| 0.5 * (rebuilt[(i, j)] + rebuilt[(j, i)])))
}

impl NormalParams1Q {
    pub fn new(a: Matrix3<f64>, b: Vector3<f64>) -> Result<Self> {
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("drift vector"));
        }
        Ok(Self { a: clip_psd(&a, "diffusion matrix")?, b })
    }

    pub fn diagonal(a: [f64; 3], b: Vector3<f64>) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vector3::from(a)), b)
    }

    /// Point mass at the identity.
    pub fn zero() -> Self {
        Self { a: Matrix3::zeros(), b: Vector3::zeros() }
    }

    pub fn diffusion(&self) -> &Matrix3<f64> {
        &self.a
    }

    pub fn drift(&self) -> &Vector3<f64> {
        &self.b
    }

    /// `‖A − A′‖ + ‖b − b′‖` in Frobenius / Euclidean norms.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.a - other.a).norm() + (self.b - other.b).norm()
    }
}

/// Bloch-vector action of a unital single-qubit channel, `n′ = R n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMatrix1Q(pub Matrix3<f64>);

impl PauliTransferMatrix1Q {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// `1 ⊕ R` in the basis `{1, σx, σy, σz}`.
    pub fn full(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = 1.0;
        m.view_mut((1, 1), (3, 3)).copy_from(&self.0);
        m
    }

    pub fn max_singular_value(&self) -> f64 {
        self.0.singular_values().max()
    }
}

/// Probabilities of the Pauli channel `ρ → p₀ρ + Σ pⱼ σⱼρσⱼ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannelParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PauliChannelParams {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Result<Self> {
        let p = [p1, p2, p3];
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) || p1 + p2 + p3 > 1.0 + 1e-15 {
            return Err(Error::InvalidParams(format!(
                "Pauli probabilities must be non-negative and sum to at most 1, got {p:?}"
            )));
        }
        Ok(Self { p1, p2, p3 })
    }

    pub fn isotropic(p: f64) -> Result<Self> {
        Self::new(p, p, p)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// `R_P = 1 − 2 diag(p₂+p₃, p₁+p₃, p₁+p₂)`.
    pub fn ptm(&self) -> PauliTransferMatrix1Q {
        let [p1, p2, p3] = self.as_array();
        PauliTransferMatrix1Q(Matrix3::from_diagonal(&Vector3::new(
            1.0 - 2.0 * (p2 + p3),
            1.0 - 2.0 * (p1 + p3),
            1.0 - 2.0 * (p1 + p2),
        )))
    }
}

/// `𝓛 = ½(A − tr(A)·1) + [b]×`.
pub fn generator(params: &NormalParams1Q) -> Matrix3<f64> {
    let a = params.diffusion();
    (a - Matrix3::identity() * a.trace()) * 0.5 + skew(params.drift())
}

/// `𝓜₁ = ½ Σᵢⱼ Aᵢⱼ LᵢLⱼ + i Σᵢ bᵢ Lᵢ` with spin-1 generators in the basis `m = (1, 0, −1)`.
pub fn m1_matrix(params: &NormalParams1Q) -> CMatrix {
    spin1_exponent(params.diffusion(), params.drift())
}

pub(crate) fn spin1_exponent(a: &Matrix3<f64>, b: &Vector3<f64>) -> CMatrix {
    let l = generators(Spin::One);
    let mut m = CMatrix::zeros(3, 3);
    for i in 0..3 {
        m += &l[i] * Complex64::new(0.0, b[i]);
        for j in 0..3 {
            if a[(i, j)] != 0.0 {
                m += &l[i] * &l[j] * Complex64::new(0.5 * a[(i, j)], 0.0);
            }
        }
    }
    m
}

/// `R = exp(𝓛)`.
pub fn ptm(params: &NormalParams1Q) -> PauliTransferMatrix1Q {
    let g = generator(params);
    let r = expm(&DMatrix::from_fn(3, 3, |i, j| g[(i, j)]))
        .expect("generator of validated parameters is finite");
    PauliTransferMatrix1Q(linalg::to_matrix3(&r))
}

/// Pauli probabilities of the channel with diagonal `A` and no drift.
pub fn pauli_probs(a_diag: [f64; 3]) -> Result<PauliChannelParams> {
    if a_diag.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParams(format!(
            "diagonal diffusion entries must be finite and non-negative, got {a_diag:?}"
        )));
    }
    let tr: f64 = a_diag.iter().sum();
    let p = |j: usize| {
        let s: f64 = (0..3)
            .map(|k| if j == k { -(a_diag[k] / 2.0).exp() } else { (a_diag[k] / 2.0).exp() })
            .sum();
        0.25 * (1.0 - (-tr / 2.0).exp() * s)
    };
    // Clamp roundoff below zero for tiny diffusion.
    let [p1, p2, p3] = [0, 1, 2].map(|j| p(j).max(0.0));
    PauliChannelParams::new(p1, p2, p3)
}

/// Diagonal diffusion matrix reproducing a Pauli channel with all `pⱼ < 1/4`.
pub fn diffusion_from_pauli(p: &PauliChannelParams) -> Result<[f64; 3]> {
    let r = p.ptm().0.diagonal();
    if r.iter().any(|x| *x <= 0.0) {
        return Err(Error::InvalidParams(
            "Pauli channel has a non-positive transfer eigenvalue; no normal distribution".into(),
        ));
    }
    // R_jj = exp(−(A_kk + A_ll)/2) for {j, k, l} = {1, 2, 3}.
    let s = r.map(|x| -2.0 * x.ln());
    let a = [
        0.5 * (s[1] + s[2] - s[0]),
        0.5 * (s[0] + s[2] - s[1]),
        0.5 * (s[0] + s[1] - s[2]),
    ];
    if a.iter().any(|x| *x < -PARAM_PSD_TOL) {
        return Err(Error::InvalidParams(format!(
            "Pauli channel is not generated by a normal distribution (A = {a:?})"
        )));
    }
    Ok(a.map(|x| x.max(0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub magnitude: f64,
    pub eigenvalues: [Complex64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenTrace {
    pub points: Vec<TracePoint>,
    /// First magnitude at which a complex-conjugate pair is present.
    pub pair_formation: Option<f64>,
}

/// Eigenvalues of `𝓛(A, m·b̂)` for each drift magnitude `m`.
pub fn eigenvalue_trace(
    a: &Matrix3<f64>,
    b_dir: &Vector3<f64>,
    magnitudes: &[f64],
) -> Result<EigenTrace> {
    if (b_dir.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "drift direction must be a unit vector, norm is {}",
            b_dir.norm()
        )));
    }
    let mut points = Vec::with_capacity(magnitudes.len());
    let mut pair_formation = None;
    for &m in magnitudes {
        let params = NormalParams1Q::new(*a, b_dir * m)?;
        let g = generator(&params);
        let dec = linalg::eig(&complexify(&g))?;
        let eigenvalues = [dec.values[0], dec.values[1], dec.values[2]];
        let tol = linalg::PAIR_TOLERANCE * g.norm().max(1e-300);
        if pair_formation.is_none() && eigenvalues.iter().any(|z| z.im.abs() > tol) {
            pair_formation = Some(m);
        }
        points.push(TracePoint { magnitude: m, eigenvalues });
    }
    Ok(EigenTrace { points, pair_formation })
}
