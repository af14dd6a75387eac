use nalgebra::{DMatrix, Matrix2, Matrix3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{NormalParams1Q, PauliTransferMatrix1Q};
use crate::error::{Error, Result};
use crate::rng::{chunks, stream};
use crate::su2::{exp_map_half, GaussianStep};

pub const MIN_STEPS: usize = 50;
pub const MIN_SAMPLES: usize = 1000;

/// Entry-wise sample mean and standard error of a matrix-valued estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// Largest `|mean − exact| / stderr` over all entries. Entries with zero
    /// spread count as infinitely far unless they match to 1e-12.
    pub fn max_z_score(&self, exact: &DMatrix<f64>) -> f64 {
        self.mean
            .iter()
            .zip(self.stderr.iter())
            .zip(exact.iter())
            .map(|((m, s), e)| {
                let d = (m - e).abs();
                if *s > 0.0 {
                    d / s
                } else if d <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn within(&self, exact: &DMatrix<f64>, sigmas: f64) -> bool {
        self.max_z_score(exact) <= sigmas
    }
}

/// Running mean and centred second moment of a matrix-valued sample
/// (Welford updates, Chan merges), combined in a fixed order. Identical
/// samples give exactly zero spread.
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    mean: Vec<f64>,
    m2: Vec<f64>,
    count: usize,
}

impl Moments {
    pub(crate) fn new(len: usize) -> Self {
        Self { mean: vec![0.0; len], m2: vec![0.0; len], count: 0 }
    }

    pub(crate) fn push(&mut self, x: impl IntoIterator<Item = f64>) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, q), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *q += d * (v - *m);
        }
    }

    pub(crate) fn merge(mut self, other: &Self) -> Self {
        if other.count == 0 {
            return self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.count += other.count;
        self
    }

    /// Column-major `rows×cols` estimate.
    pub(crate) fn estimate(&self, rows: usize, cols: usize) -> MonteCarloEstimate {
        let n = self.count as f64;
        let mean = DMatrix::from_column_slice(rows, cols, &self.mean);
        let stderr = DMatrix::from_iterator(rows, cols, self.m2.iter().map(|q| (q / (n - 1.0) / n).sqrt()));
        MonteCarloEstimate { mean, stderr, samples: self.count }
    }
}

pub(crate) fn check_sizes(n_steps: usize, n_samples: usize) -> Result<()> {
    if n_steps < MIN_STEPS || n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "random walk needs at least {MIN_STEPS} steps and {MIN_SAMPLES} samples, got {n_steps} and {n_samples}"
        )));
    }
    Ok(())
}

/// Bloch rotation of `ρ → UρU†`, i.e. `Rᵢⱼ = ½ tr(σᵢ U σⱼ U†)`, for
/// `U = w − i(xσx + yσy + zσz)`.
pub(crate) fn bloch_rotation(u: &Matrix2<Complex64>) -> Matrix3<f64> {
    let (w, z) = (u[(0, 0)].re, -u[(0, 0)].im);
    let (y, x) = (u[(1, 0)].re, -u[(1, 0)].im);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// `U = u_n ⋯ u₁` with independent Gaussian steps.
pub(crate) fn walk<R: rand::Rng>(step: &GaussianStep<3>, n_steps: usize, rng: &mut R) -> Matrix2<Complex64> {
    let mut u = Matrix2::identity();
    for _ in 0..n_steps {
        u = exp_map_half(&step.sample(rng)) * u;
    }
    u
}

/// Monte-Carlo estimate of the transfer matrix from a random walk on SU(2)
/// with per-step covariance `A/n` and mean `b/n`.
pub fn random_walk_ptm(
    params: &NormalParams1Q,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(PauliTransferMatrix1Q, MonteCarloEstimate)> {
    check_sizes(n_steps, n_samples)?;
    let n = n_steps as f64;
    let step = GaussianStep::new(&(params.diffusion() / n), &(params.drift() / n))?;
    let parts: Vec<Moments> = chunks(n_samples)
        .into_par_iter()
        .map(|(index, count)| {
            let mut rng = stream(seed, index);
            let mut m = Moments::new(9);
            for _ in 0..count {
                let r = bloch_rotation(&walk(&step, n_steps, &mut rng));
                m.push(r.iter().copied());
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::new(9), |acc, m| acc.merge(m));
    let est = total.estimate(3, 3);
    let r = PauliTransferMatrix1Q(Matrix3::from_fn(|i, j| est.mean[(i, j)]));
    Ok((r, est))
}
