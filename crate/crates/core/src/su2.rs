//! SU(2) representations for spin 1/2 and spin 1.
//!
//! Conventions: generators are `σ/2` for spin 1/2 and the standard
//! angular-momentum matrices in the basis `m = (1, 0, −1)` for spin 1, with
//! `[L_x, L_y] = i L_z`. Group elements are `exp(−i n·L)` and Euler angles
//! follow `D(α, β, γ) = exp(−iα L_z) exp(−iβ L_y) exp(−iγ L_z)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, Matrix2, SMatrix, SVector, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const PSD_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Half,
    One,
}

impl Spin {
    pub fn dim(self) -> usize {
        match self {
            Spin::Half => 2,
            Spin::One => 3,
        }
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        if s == 0.5 {
            Ok(Spin::Half)
        } else if s == 1.0 {
            Ok(Spin::One)
        } else {
            Err(Error::InvalidParams(format!("unsupported spin {s}; expected 1/2 or 1")))
        }
    }
}

/// Euler angles with `β ∈ [0, π]`, `α ∈ [0, 2π)` and `γ ∈ [0, 4π)`.
///
/// `γ` ranges over `4π` so that the angles cover SU(2) rather than SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && gamma.is_finite()) || !(0.0..=PI).contains(&beta) {
            return Err(Error::InvalidParams(format!(
                "Euler angles need finite α, γ and β in [0, π], got β = {beta}"
            )));
        }
        Ok(Self {
            alpha: alpha.rem_euclid(2.0 * PI),
            beta,
            gamma: gamma.rem_euclid(4.0 * PI),
        })
    }
}

/// Coefficients of the generators, `g = exp(−i n·L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector(pub Vector3<f64>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn generators(s: Spin) -> [CMatrix; 3] {
    match s {
        Spin::Half => [
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]),
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]),
        ],
        Spin::One => {
            let r = FRAC_1_SQRT_2;
            let z = c(0.0, 0.0);
            [
                CMatrix::from_row_slice(3, 3, &[z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z, c(r, 0.0), z]),
                CMatrix::from_row_slice(
                    3,
                    3,
                    &[z, c(0.0, -r), z, c(0.0, r), z, c(0.0, -r), z, c(0.0, r), z],
                ),
                CMatrix::from_row_slice(3, 3, &[c(1.0, 0.0), z, z, z, z, z, z, z, c(-1.0, 0.0)]),
            ]
        }
    }
}

pub fn wigner_d(s: Spin, g: &EulerAngles) -> CMatrix {
    let (a, b, y) = (g.alpha, g.beta, g.gamma);
    match s {
        Spin::Half => {
            let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::from_polar(cb, -(a + y) / 2.0),
                    Complex64::from_polar(-sb, -(a - y) / 2.0),
                    Complex64::from_polar(sb, (a - y) / 2.0),
                    Complex64::from_polar(cb, (a + y) / 2.0),
                ],
            )
        }
        Spin::One => {
            let (cb, sb) = (b.cos(), b.sin());
            let r = FRAC_1_SQRT_2;
            let small_d = [
                [(1.0 + cb) / 2.0, -sb * r, (1.0 - cb) / 2.0],
                [sb * r, cb, -sb * r],
                [(1.0 - cb) / 2.0, sb * r, (1.0 + cb) / 2.0],
            ];
            let m = [1.0, 0.0, -1.0];
            CMatrix::from_fn(3, 3, |i, j| {
                Complex64::from_polar(small_d[i][j], -m[i] * a - m[j] * y)
            })
        }
    }
}

/// `exp(−i n·σ/2)` in closed form.
pub fn exp_map_half(n: &Vector3<f64>) -> Matrix2<Complex64> {
    let theta = n.norm();
    let (cos, sinc) = if theta > 1e-300 {
        ((theta / 2.0).cos(), (theta / 2.0).sin() / theta)
    } else {
        (1.0, 0.5)
    };
    // cos(θ/2) 1 − i sin(θ/2) n̂·σ
    Matrix2::new(
        c(cos, -sinc * n.z),
        c(-sinc * n.y, -sinc * n.x),
        c(sinc * n.y, -sinc * n.x),
        c(cos, sinc * n.z),
    )
}

pub fn exp_map(n: &TangentVector, s: Spin) -> CMatrix {
    match s {
        Spin::Half => {
            let u = exp_map_half(&n.0);
            CMatrix::from_fn(2, 2, |i, j| u[(i, j)])
        }
        Spin::One => {
            let theta = n.0.norm();
            let id = CMatrix::identity(3, 3);
            if theta == 0.0 {
                return id;
            }
            let l = generators(Spin::One);
            let axis = n.0 / theta;
            let nl = &l[0] * c(axis.x, 0.0) + &l[1] * c(axis.y, 0.0) + &l[2] * c(axis.z, 0.0);
            // (n̂·L)³ = n̂·L for spin 1.
            &id - &nl * c(0.0, theta.sin()) + &nl * &nl * c(theta.cos() - 1.0, 0.0)
        }
    }
}

/// Gaussian sampler in a `D`-dimensional tangent space.
///
/// The covariance is factored through its eigen-decomposition; eigenvalues
/// down to `−1e-12` are clipped to zero so rank-deficient covariances work.
#[derive(Debug, Clone)]
pub struct GaussianStep<const D: usize> {
    mean: SVector<f64, D>,
    factor: SMatrix<f64, D, D>,
}

impl<const D: usize> GaussianStep<D> {
    pub fn new(cov: &SMatrix<f64, D, D>, mean: &SVector<f64, D>) -> Result<Self> {
        if cov.iter().chain(mean.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Gaussian step parameters"));
        }
        let sym = (cov + cov.transpose()) * 0.5;
        let eigen = SymmetricEigen::new(DMatrix::from_fn(D, D, |i, j| sym[(i, j)]));
        let min = eigen.eigenvalues.min();
        if min < -PSD_CLIP {
            return Err(Error::InvalidParams(format!(
                "covariance is not positive semi-definite (eigenvalue {min:.3e})"
            )));
        }
        let roots = eigen.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = SMatrix::<f64, D, D>::from_fn(|i, j| eigen.eigenvectors[(i, j)] * roots[j]);
        Ok(Self { mean: *mean, factor })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SVector<f64, D> {
        let z = SVector::<f64, D>::from_fn(|_, _| rng.sample(StandardNormal));
        self.mean + self.factor * z
    }
}

/// One Gaussian draw with covariance `cov` and mean `mean`.
pub fn sample_step<R: Rng + ?Sized>(
    cov: &SMatrix<f64, 3, 3>,
    mean: &Vector3<f64>,
    rng: &mut R,
) -> Result<TangentVector> {
    Ok(TangentVector(GaussianStep::new(cov, mean)?.sample(rng)))
}

/// Haar-distributed element of SU(2): density `∝ sin β` on the Euler angles.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> EulerAngles {
    let alpha = rng.random_range(0.0..2.0 * PI);
    let gamma = rng.random_range(0.0..4.0 * PI);
    let beta = (1.0 - 2.0 * rng.random::<f64>()).clamp(-1.0, 1.0).acos();
    EulerAngles { alpha, beta, gamma }
}
