//! Density matrices of up to eight qubits and the operations acting on them.
//!
//! Qubit 0 is the most significant bit of a basis index, so for `n` qubits
//! basis state `|x₀x₁…x_{n−1}⟩` has index `Σ xₖ 2^{n−1−k}`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const MAX_QUBITS: usize = 8;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: CMatrix,
}

fn qubits_of(dim: usize) -> Result<usize> {
    let n = dim.trailing_zeros() as usize;
    if dim == 0 || 1usize << n != dim || n > MAX_QUBITS {
        return Err(Error::Dimension(format!(
            "density matrix dimension must be 2ⁿ with n ≤ {MAX_QUBITS}, got {dim}"
        )));
    }
    Ok(n)
}

impl DensityMatrix {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::Dimension(format!("density matrix must be square, got {:?}", rho.shape())));
        }
        let n_qubits = qubits_of(rho.nrows())?;
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let herm = (&rho - rho.adjoint()).norm();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidParams(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidParams(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = SymmetricEigen::new((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0))
            .eigenvalues
            .min();
        if min < -PSD_TOL {
            return Err(Error::InvalidParams(format!(
                "density matrix not positive semi-definite (eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { n_qubits, rho })
    }

    /// Normalizes a post-selected operator, returning it with its trace.
    pub fn from_unnormalized(rho: CMatrix) -> Result<(Self, f64)> {
        let p = rho.trace().re;
        if !(p >= super::MIN_SUCCESS_PROBABILITY) {
            return Err(Error::DegenerateOutcome { probability: p });
        }
        let hermitian = (&rho + rho.adjoint()) * Complex64::new(0.5 / p, 0.0);
        Ok((Self::new(hermitian)?, p))
    }

    /// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn bell_pair() -> Self {
        let mut rho = CMatrix::zeros(4, 4);
        for &i in &[0, 3] {
            for &j in &[0, 3] {
                rho[(i, j)] = Complex64::new(0.5, 0.0);
            }
        }
        Self { n_qubits: 2, rho }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    /// State of `self` on the leading qubits and `other` on the rest.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.n_qubits + other.n_qubits > MAX_QUBITS {
            return Err(Error::Dimension(format!("at most {MAX_QUBITS} qubits are supported")));
        }
        Ok(Self { n_qubits: self.n_qubits + other.n_qubits, rho: self.rho.kronecker(&other.rho) })
    }

    /// `⟨Φ⁺|ρ|Φ⁺⟩` on a two-qubit state.
    pub fn bell_fidelity(&self) -> Result<f64> {
        if self.n_qubits != 2 {
            return Err(Error::Dimension(format!("Bell fidelity needs two qubits, have {}", self.n_qubits)));
        }
        Ok(bell_fidelity(&self.rho))
    }

    pub fn apply_unitary(&self, u: &CMatrix, targets: &[usize]) -> Result<Self> {
        Ok(Self { n_qubits: self.n_qubits, rho: apply_unitary(&self.rho, self.n_qubits, u, targets)? })
    }

    pub fn apply_channel(&self, channel: &ChoiMatrix, targets: &[usize]) -> Result<Self> {
        Ok(Self { n_qubits: self.n_qubits, rho: apply_channel(&self.rho, self.n_qubits, channel, targets)? })
    }

    /// Reduced state on `keep` (in the listed order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let rho = project_and_trace(&self.rho, self.n_qubits, keep, &traced, |_| true)?;
        Ok(Self { n_qubits: keep.len(), rho })
    }
}

pub(crate) fn bell_fidelity(rho: &CMatrix) -> f64 {
    0.5 * (rho[(0, 0)] + rho[(0, 3)] + rho[(3, 0)] + rho[(3, 3)]).re
}

fn check_targets(n_qubits: usize, targets: &[usize], arity: usize) -> Result<()> {
    if targets.len() != arity {
        return Err(Error::Dimension(format!(
            "operation acts on {arity} qubit(s) but {} target(s) were given",
            targets.len()
        )));
    }
    for (k, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(Error::Dimension(format!("target qubit {t} out of range for {n_qubits} qubits")));
        }
        if targets[..k].contains(&t) {
            return Err(Error::Dimension(format!("target qubit {t} listed twice")));
        }
    }
    Ok(())
}

/// Splits full indices into (target bits, remaining bits) and back.
struct Layout {
    n_qubits: usize,
    targets: Vec<usize>,
    rest: Vec<usize>,
}

impl Layout {
    fn new(n_qubits: usize, targets: &[usize]) -> Self {
        let rest = (0..n_qubits).filter(|q| !targets.contains(q)).collect();
        Self { n_qubits, targets: targets.to_vec(), rest }
    }

    fn compose(&self, t: usize, r: usize) -> usize {
        let mut index = 0;
        let k = self.targets.len();
        for (pos, &q) in self.targets.iter().enumerate() {
            index |= ((t >> (k - 1 - pos)) & 1) << (self.n_qubits - 1 - q);
        }
        let m = self.rest.len();
        for (pos, &q) in self.rest.iter().enumerate() {
            index |= ((r >> (m - 1 - pos)) & 1) << (self.n_qubits - 1 - q);
        }
        index
    }
}

/// `ρ → UρU†` with `U` acting on `targets` (first target most significant).
pub(crate) fn apply_unitary(rho: &CMatrix, n_qubits: usize, u: &CMatrix, targets: &[usize]) -> Result<CMatrix> {
    let k = targets.len();
    if u.shape() != (1 << k, 1 << k) {
        return Err(Error::Dimension(format!("gate is {:?}, expected {}x{}", u.shape(), 1 << k, 1 << k)));
    }
    check_targets(n_qubits, targets, k)?;
    let layout = Layout::new(n_qubits, targets);
    let dt = 1 << k;
    let dr = 1 << (n_qubits - k);
    let dim = 1 << n_qubits;
    // Left multiplication, then right multiplication by U†.
    let mut left = CMatrix::zeros(dim, dim);
    for r in 0..dr {
        for a in 0..dt {
            let row = layout.compose(a, r);
            for b in 0..dt {
                let uab = u[(a, b)];
                if uab == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = layout.compose(b, r);
                for col in 0..dim {
                    left[(row, col)] += uab * rho[(src, col)];
                }
            }
        }
    }
    let mut out = CMatrix::zeros(dim, dim);
    for r in 0..dr {
        for a in 0..dt {
            let col = layout.compose(a, r);
            for b in 0..dt {
                let uab = u[(a, b)].conj();
                if uab == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src = layout.compose(b, r);
                for row in 0..dim {
                    out[(row, col)] += left[(row, src)] * uab;
                }
            }
        }
    }
    Ok(out)
}

/// Applies the map with Choi matrix `channel` on `targets`, identity elsewhere:
/// `ρ′[(k,e),(l,e′)] = Σᵢⱼ C[(i,k),(j,l)] ρ[(i,e),(j,e′)]`.
pub(crate) fn apply_channel(
    rho: &CMatrix,
    n_qubits: usize,
    channel: &ChoiMatrix,
    targets: &[usize],
) -> Result<CMatrix> {
    let dt = channel.dim();
    let k = dt.trailing_zeros() as usize;
    if 1 << k != dt {
        return Err(Error::Dimension(format!("channel dimension {dt} is not a power of two")));
    }
    check_targets(n_qubits, targets, k)?;
    let layout = Layout::new(n_qubits, targets);
    let dr = 1 << (n_qubits - k);
    let dim = 1 << n_qubits;
    let c = channel.matrix();
    let mut out = CMatrix::zeros(dim, dim);
    for e in 0..dr {
        for e2 in 0..dr {
            for i in 0..dt {
                for j in 0..dt {
                    let x = rho[(layout.compose(i, e), layout.compose(j, e2))];
                    if x == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for kk in 0..dt {
                        for l in 0..dt {
                            let w = c[(i * dt + kk, j * dt + l)];
                            if w != Complex64::new(0.0, 0.0) {
                                out[(layout.compose(kk, e), layout.compose(l, e2))] += w * x;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Σ_o ⟨o|ρ|o⟩` over computational outcomes `o` of `traced` accepted by
/// `accept`, leaving an operator on `keep` (in the listed order).
pub(crate) fn project_and_trace(
    rho: &CMatrix,
    n_qubits: usize,
    keep: &[usize],
    traced: &[usize],
    accept: impl Fn(usize) -> bool,
) -> Result<CMatrix> {
    let mut all: Vec<usize> = keep.iter().chain(traced).copied().collect();
    all.sort_unstable();
    if all != (0..n_qubits).collect::<Vec<_>>() {
        return Err(Error::Dimension("kept and traced qubits must partition the register".into()));
    }
    let layout = Layout::new(n_qubits, keep);
    let dk = 1 << keep.len();
    let mut out = CMatrix::zeros(dk, dk);
    let outcomes: Vec<usize> = (0..1usize << traced.len()).filter(|&o| accept(o)).collect();
    for a in 0..dk {
        for b in 0..dk {
            let mut s = Complex64::new(0.0, 0.0);
            for &o in &outcomes {
                // Outcome bits follow the order of `traced`; the layout's rest
                // order is ascending, so reorder.
                let r = reorder(o, traced, &layout.rest);
                s += rho[(layout.compose(a, r), layout.compose(b, r))];
            }
            out[(a, b)] = s;
        }
    }
    Ok(out)
}

fn reorder(bits: usize, from: &[usize], to: &[usize]) -> usize {
    let m = from.len();
    to.iter().fold(0, |acc, q| {
        let pos = from.iter().position(|f| f == q).expect("same qubit set");
        (acc << 1) | ((bits >> (m - 1 - pos)) & 1)
    })
}
