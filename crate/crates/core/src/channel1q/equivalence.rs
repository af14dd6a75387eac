use nalgebra::{Matrix3, SymmetricEigen};

use super::{ptm, NormalParams1Q};
#[cfg(test)]
use super::generator;
use crate::error::{Error, Result};
use crate::linalg::{complexify, eig, logm_real_branches, skew, unskew, PAIR_TOLERANCE};

/// Smallest eigenvalue a recovered diffusion matrix may have.
pub const MEMBER_PSD_TOL: f64 = 1e-10;
/// Members closer than this (in `‖ΔA‖ + ‖Δb‖`) are merged.
pub const DEDUP_TOL: f64 = 1e-8;
const COMMUTE_TOL: f64 = 1e-9;
/// Largest number of members reported for a finite class.
pub const MAX_CLASS_SIZE: usize = 12;

/// Normal distributions producing the same channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    pub members: Vec<NormalParams1Q>,
    /// The drift commutes with the diffusion matrix, so the drift can be
    /// shifted by any multiple of `2π` along its axis; `members` is truncated.
    pub infinite: bool,
    /// More members were found than reported; finite classes keep the
    /// `MAX_CLASS_SIZE` members on the lowest branches.
    pub truncated: bool,
}

impl EquivalenceClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Inverts `𝓛 = ½(A − tr(A)·1) + [b]×`: with `S` the symmetric part,
/// `tr S = −tr A`, so `A = 2S − tr(S)·1`.
fn params_from_generator(l: &Matrix3<f64>) -> (Matrix3<f64>, nalgebra::Vector3<f64>) {
    let s = (l + l.transpose()) * 0.5;
    (s * 2.0 - Matrix3::identity() * s.trace(), unskew(l))
}

fn drift_commutes(params: &NormalParams1Q) -> bool {
    let b = params.drift();
    if b.norm() == 0.0 {
        return false;
    }
    let bx = skew(b);
    let a = params.diffusion();
    (a * bx - bx * a).norm() <= COMMUTE_TOL * b.norm().max(1.0)
}

/// All normal distributions whose channel equals that of `params`, on
/// logarithm branches `|k| ≤ k_max`. The input comes first. Finite classes
/// are cut at `MAX_CLASS_SIZE`; infinite ones keep every branch.
pub fn equivalence_class(params: &NormalParams1Q, k_max: u32) -> Result<EquivalenceClass> {
    let r = ptm(params);
    let branches = match logm_real_branches(&r.0, k_max) {
        Err(Error::ExceptionalPoint { condition, threshold, .. }) => {
            return Err(Error::ExceptionalPoint {
                condition,
                threshold,
                context: "the complex-conjugate eigenvalue pair of the transfer matrix has coalesced"
                    .into(),
            })
        }
        other => other?,
    };
    let spectrum = eig(&complexify(&r.0))?;
    let complex_pair = spectrum
        .values
        .iter()
        .any(|z| z.im.abs() > PAIR_TOLERANCE * r.0.norm());

    let mut members: Vec<NormalParams1Q> = Vec::new();
    for l in &branches {
        let (a, b) = params_from_generator(l);
        let sym = (a + a.transpose()) * 0.5;
        if SymmetricEigen::new(sym).eigenvalues.min() < -MEMBER_PSD_TOL {
            continue;
        }
        let candidate = NormalParams1Q::new(sym, b)?;
        if members.iter().all(|m| m.distance(&candidate) >= DEDUP_TOL) {
            members.push(candidate);
        }
    }
    if let Some(pos) = members.iter().position(|m| m.distance(params) < DEDUP_TOL) {
        members.remove(pos);
    }
    members.insert(0, params.clone());
    let infinite = complex_pair && drift_commutes(params);
    let truncated = infinite || members.len() > MAX_CLASS_SIZE;
    if !infinite {
        members.truncate(MAX_CLASS_SIZE);
    }
    Ok(EquivalenceClass { members, infinite, truncated })
}
