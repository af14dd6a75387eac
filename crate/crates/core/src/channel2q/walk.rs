use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{NormalParams2Q, PauliTransferMatrix2Q};
use crate::channel1q::{bloch_rotation, check_sizes, Moments, MonteCarloEstimate};
use crate::error::Result;
use crate::rng::{chunks, stream};
use crate::su2::{exp_map_half, GaussianStep};

fn full(r: &nalgebra::Matrix3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 1.0;
    m.fixed_view_mut::<3, 3>(1, 1).copy_from(r);
    m
}

/// Monte-Carlo estimate of the two-qubit transfer matrix from a random walk
/// on SU(2)⊗SU(2) with per-step covariance `A/n` and mean `b/n`.
pub fn random_walk_ptm2(
    params: &NormalParams2Q,
    n_steps: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(PauliTransferMatrix2Q, MonteCarloEstimate)> {
    check_sizes(n_steps, n_samples)?;
    let n = n_steps as f64;
    let step = GaussianStep::new(&(params.diffusion() / n), &(params.drift() / n))?;
    let parts: Vec<Moments> = chunks(n_samples)
        .into_par_iter()
        .map(|(index, count)| {
            let mut rng = stream(seed, index);
            let mut m = Moments::new(256);
            for _ in 0..count {
                let (mut u1, mut u2) = (Matrix2::<Complex64>::identity(), Matrix2::<Complex64>::identity());
                for _ in 0..n_steps {
                    let x = step.sample(&mut rng);
                    u1 = exp_map_half(&x.fixed_rows::<3>(0).into_owned()) * u1;
                    u2 = exp_map_half(&x.fixed_rows::<3>(3).into_owned()) * u2;
                }
                let r = full(&bloch_rotation(&u1)).kronecker(&full(&bloch_rotation(&u2)));
                m.push(r.iter().copied());
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::new(256), |acc, m| acc.merge(m));
    let est = total.estimate(16, 16);
    Ok((PauliTransferMatrix2Q::from_lexicographic(est.mean.clone())?, est))
}
