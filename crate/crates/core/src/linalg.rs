//! Small dense matrix kernel.
//!
//! Storage is nalgebra's `DMatrix`; this module adds what nalgebra does not
//! ship in the form needed here: a fixed-order Padé matrix exponential,
//! right eigenvectors of non-Hermitian matrices with a conditioning estimate,
//! and enumeration of the real logarithms of a real 3x3 matrix.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix, Dim, Matrix, Matrix3, RawStorage, Schur, Vector3, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvector-matrix condition number above which a matrix is treated as defective.
pub const EXCEPTIONAL_POINT_CONDITION: f64 = 1e8;

/// Relative tolerance for treating two eigenvalues as a complex-conjugate pair.
pub const PAIR_TOLERANCE: f64 = 1e-8;

/// Largest entry-wise error, relative to `max(1, ‖R‖)`, of `expm(log R)`
/// for an accepted logarithm.
pub const LOG_RECONSTRUCTION_TOL: f64 = 1e-9;

/// Largest branch index enumerated by default.
pub const DEFAULT_K_MAX: u32 = 6;

const EIG_RESIDUAL: f64 = 1e-10;

// Padé [13/13] coefficients and the matching scaling threshold.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn complexify<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(m: &Matrix<f64, R, C, S>) -> CMatrix {
    DMatrix::from_iterator(
        m.nrows(),
        m.ncols(),
        m.iter().map(|&x| Complex64::new(x, 0.0)),
    )
}

/// Real part of `m`, failing if any imaginary part exceeds `tol`.
pub fn real_part(m: &CMatrix, tol: f64) -> Result<DMatrix<f64>> {
    let worst = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::InvalidParams(format!(
            "expected a real matrix, imaginary part {worst:.3e}"
        )));
    }
    Ok(m.map(|z| z.re))
}

pub fn to_matrix3(m: &DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[(i, j)])
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square_finite<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    what: &'static str,
) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.clone().modulus().is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Matrix exponential by scaling and squaring around a [13/13] Padé approximant.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_square_finite(m, "expm")?;
    let n = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.map(|x| x * T::from_real(0.5f64.powi(squarings)));
    let b = |k: usize| T::from_real(PADE13[k]);
    let id = DMatrix::<T>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut x = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::InvalidParams("singular Padé denominator in expm".into()))?;
    for _ in 0..squarings {
        x = &x * &x;
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues sorted by (real part, imaginary part).
    pub values: Vec<Complex64>,
    /// Unit-norm right eigenvectors, one column per eigenvalue.
    pub vectors: CMatrix,
    /// Ratio of extreme singular values of `vectors`.
    pub condition: f64,
}

impl EigenDecomposition {
    /// Largest `‖M v − λ v‖` over all pairs.
    pub fn residual(&self, m: &CMatrix) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &lambda)| {
                let v = self.vectors.column(k);
                (m * v - v * lambda).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigen-decomposition of a general complex square matrix.
///
/// Eigenvalues come from a complex Schur form `M = Q T Q†`; eigenvectors are
/// obtained by back-substitution on `T` and rotated back with `Q`.
pub fn eig(m: &CMatrix) -> Result<EigenDecomposition> {
    check_square_finite(m, "eig")?;
    let n = m.nrows();
    if n > 16 {
        return Err(Error::Dimension(format!("eig supports n <= 16, got {n}")));
    }
    let scale = m.norm();
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::NonConvergence { residual: f64::INFINITY })?;
    let (q, t) = schur.unpack();

    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            y[(j, k)] = -s / denom;
        }
    }
    let mut vectors = &q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_complex(&t[(a, a)], &t[(b, b)]));
    let values: Vec<Complex64> = order.iter().map(|&k| t[(k, k)]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);

    let sv = SVD::new(vectors.clone(), false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smallest = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smallest > 0.0 { smax / smallest } else { f64::INFINITY };

    let decomposition = EigenDecomposition { values, vectors, condition };
    let residual = decomposition.residual(m);
    if residual > EIG_RESIDUAL * scale.max(1e-300) {
        return Err(Error::NonConvergence { residual });
    }
    Ok(decomposition)
}

/// Kronecker product; block `(i, j)` of the result is `a[(i, j)] * b`.
pub fn kron<T: ComplexField>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

/// Cross-product matrix `[v]×`, so that `[v]× w = v × w`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
pub fn unskew(m: &Matrix3<f64>) -> Vector3<f64> {
    let k = (m - m.transpose()) * 0.5;
    Vector3::new(k[(2, 1)], k[(0, 2)], k[(1, 0)])
}

/// All real logarithms of `r` on branches `k ∈ [−k_max, k_max]`, in the
/// order `k = 0, −1, 1, −2, 2, …`.
///
/// Supported spectra are three positive reals (only the principal logarithm
/// is returned) or one positive real plus a complex-conjugate pair (one
/// logarithm per branch, the pair's phases shifted by `±2πk`). Any other
/// spectrum, including a singular `r` or negative real eigenvalues, yields an
/// empty list. Non-primary logarithms of repeated eigenvalues are not
/// enumerated.
pub fn logm_real_branches(r: &Matrix3<f64>, k_max: u32) -> Result<Vec<Matrix3<f64>>> {
    let rc = complexify(r);
    let scale = r.norm();
    let dec = eig(&rc)?;
    if dec.condition > EXCEPTIONAL_POINT_CONDITION {
        return Err(Error::ExceptionalPoint {
            condition: dec.condition,
            threshold: EXCEPTIONAL_POINT_CONDITION,
            context: "real logarithm of a defective matrix".into(),
        });
    }
    let tol = PAIR_TOLERANCE * scale;
    let values = &dec.values;
    if values.iter().any(|z| z.norm() <= tol) {
        return Ok(Vec::new());
    }

    let real: Vec<usize> = (0..3).filter(|&k| values[k].im.abs() <= tol).collect();
    let rebuild = |logs: [Complex64; 3], vecs: &CMatrix| -> Result<Matrix3<f64>> {
        let inv = vecs
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("singular eigenvector matrix".into()))?;
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&logs));
        let l = vecs * d * inv;
        let re = real_part(&l, 1e-8 * l.norm().max(1.0))?;
        Ok(to_matrix3(&re))
    };

    // Near a defective point the eigenvectors are too ill-conditioned for the
    // rebuilt logarithm to be accurate, even below the condition threshold.
    let reproduces = |l: &Matrix3<f64>| -> Result<bool> {
        let e = expm(&DMatrix::from_column_slice(3, 3, l.as_slice()))?;
        Ok((to_matrix3(&e) - r).abs().max() <= LOG_RECONSTRUCTION_TOL * scale.max(1.0))
    };
    let inaccurate = || Error::ExceptionalPoint {
        condition: dec.condition,
        threshold: EXCEPTIONAL_POINT_CONDITION,
        context: "principal logarithm does not reproduce a nearly defective matrix".into(),
    };

    match real.len() {
        3 => {
            if values.iter().any(|z| z.re <= 0.0) {
                return Ok(Vec::new());
            }
            let logs = [0, 1, 2].map(|k| Complex64::new(values[k].re.ln(), 0.0));
            let l = rebuild(logs, &dec.vectors)?;
            if !reproduces(&l)? {
                return Err(inaccurate());
            }
            Ok(vec![l])
        }
        1 => {
            let r3 = real[0];
            let (a, b) = match r3 {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            if (values[a] - values[b].conj()).norm() > tol || values[r3].re <= 0.0 {
                return Ok(Vec::new());
            }
            // Pair member with positive imaginary part; its partner is forced
            // to be the exact conjugate so every branch is real.
            let upper = if values[a].im > 0.0 { a } else { b };
            let d1 = values[upper];
            let v1 = dec.vectors.column(upper).into_owned();
            let v3 = dec.vectors.column(r3).map(|z| Complex64::new(z.re, 0.0));
            let v3 = if v3.norm() > 0.5 {
                v3
            } else {
                // A real eigenvector can come back with an arbitrary phase.
                let c = dec.vectors.column(r3);
                let (_, phase) = c
                    .iter()
                    .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                    .map(|z| z.to_polar())
                    .unwrap_or((1.0, 0.0));
                c.map(|z| z * Complex64::from_polar(1.0, -phase))
            };
            let mut vecs = CMatrix::zeros(3, 3);
            vecs.set_column(0, &v1);
            vecs.set_column(1, &v1.map(|z| z.conj()));
            vecs.set_column(2, &v3);
            let ln1 = d1.ln();
            let ln3 = Complex64::new(values[r3].re.ln(), 0.0);
            let branch = |k: i64| {
                let shift = Complex64::new(0.0, 2.0 * PI * k as f64);
                rebuild([ln1 + shift, (ln1 + shift).conj(), ln3], &vecs)
            };
            if !reproduces(&branch(0)?)? {
                return Err(inaccurate());
            }
            let k_max = k_max as i64;
            let mut out = Vec::with_capacity(2 * k_max as usize + 1);
            let order = std::iter::once(0).chain((1..=k_max).flat_map(|k| [-k, k]));
            for k in order {
                let l = branch(k)?;
                if reproduces(&l)? {
                    out.push(l);
                }
            }
            Ok(out)
        }
        _ => Ok(Vec::new()),
    }
}

pub(crate) fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Plain Taylor series, used only as an oracle.
    fn taylor_expm(m: &CMatrix, terms: usize) -> CMatrix {
        let n = m.nrows();
        let mut sum = CMatrix::identity(n, n);
        let mut term = CMatrix::identity(n, n);
        for k in 1..terms {
            term = &term * m / c(k as f64);
            sum += &term;
        }
        sum
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
        })
    }

    #[test]
    fn expm_identity_and_diagonal() {
        let z = CMatrix::zeros(3, 3);
        assert_relative_eq!((expm(&z).unwrap() - CMatrix::identity(3, 3)).norm(), 0.0);
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(-1.0), c(-2.0), c(-3.0)]));
        let e = expm(&d).unwrap();
        for (k, v) in [-1.0f64, -2.0, -3.0].iter().enumerate() {
            assert_relative_eq!(e[(k, k)].re, v.exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn expm_of_cross_matrix_is_rotation() {
        let theta = 0.7;
        let k = complexify(&skew(&Vector3::new(0.0, 0.0, theta)));
        let oracle = taylor_expm(&k, 30);
        let e = expm(&k).unwrap();
        assert!((&e - &oracle).norm() < 1e-14);
        assert_relative_eq!(e[(0, 0)].re, theta.cos(), epsilon = 1e-15);
        assert_relative_eq!(e[(1, 0)].re, theta.sin(), epsilon = 1e-15);
    }

    #[test]
    fn expm_matches_taylor_oracle_up_to_norm_ten() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2, 3, 4, 9] {
            for target in [0.1, 1.0, 5.0, 10.0] {
                let mut m = random_matrix(&mut rng, n, 1.0);
                m *= c(target / norm1(&m));
                let oracle = taylor_expm(&m, 120);
                let err = max_abs(&(expm(&m).unwrap() - oracle));
                assert!(err < 1e-12 * target.exp(), "n={n} norm={target} err={err:e}");
            }
        }
    }

    #[test]
    fn expm_rejects_bad_input() {
        assert!(matches!(expm(&CMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(f64::NAN);
        assert!(matches!(expm(&m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn commuting_exponentials_multiply() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 4, 0.5);
        let b = &a * &a * c(0.3) - &a * c(0.2);
        let lhs = expm(&(&a + &b)).unwrap();
        let rhs = expm(&a).unwrap() * expm(&b).unwrap();
        assert!(max_abs(&(lhs - rhs)) < 1e-10);
    }

    #[test]
    fn determinant_of_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut m = random_matrix(&mut rng, 3, 1.0);
            m *= c(rng.random_range(0.1..5.0) / norm1(&m));
            let det = expm(&m).unwrap().determinant();
            let expected = m.trace().exp();
            assert!((det - expected).norm() < 1e-10 * expected.norm());
        }
    }

    #[test]
    fn eig_diagonal_and_antisymmetric() {
        let d = complexify(&Matrix3::from_diagonal(&Vector3::new(3.0, 1.0, 2.0)));
        let e = eig(&d).unwrap();
        let re: Vec<f64> = e.values.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 2.0, 3.0]);

        let k = complexify(&skew(&Vector3::new(0.0, 0.0, 1.0)));
        let e = eig(&k).unwrap();
        let mut v = e.values.clone();
        v.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((v[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(v[1].norm() < 1e-12);
        assert!((v[2] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eig_residuals_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [2, 3, 4, 6, 9, 16] {
            for _ in 0..10 {
                let m = random_matrix(&mut rng, n, 2.0);
                let e = eig(&m).unwrap();
                assert!(e.residual(&m) <= 1e-10 * m.norm());
                assert!(e.values.windows(2).all(|w| cmp_complex(&w[0], &w[1]) != Ordering::Greater));
            }
        }
    }

    #[test]
    fn kron_conventions() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));

        let sx = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let sz = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let k = kron(&sx, &sz);
        // Index-formula oracle: (A⊗B)[(2i+k, 2j+l)] = A[i,j] B[k,l].
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        assert_eq!(k[(2 * i + kk, 2 * j + l)], sx[(i, j)] * sz[(kk, l)]);
                    }
                }
            }
        }
        assert_eq!(k[(0, 3)], c(0.0));
        assert_eq!(k[(0, 2)], c(1.0));
        assert_eq!(k[(1, 3)], c(-1.0));
    }

    #[test]
    fn kron_spectrum_is_product_of_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_matrix(&mut rng, 3, 1.0);
        let b = random_matrix(&mut rng, 2, 1.0);
        let ea = eig(&a).unwrap().values;
        let eb = eig(&b).unwrap().values;
        let mut expected: Vec<Complex64> =
            ea.iter().flat_map(|x| eb.iter().map(move |y| x * y)).collect();
        expected.sort_by(cmp_complex);
        let got = eig(&kron(&a, &b)).unwrap().values;
        for z in &expected {
            let best = got.iter().map(|g| (g - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-10, "{z} missing");
        }
    }

    #[test]
    fn logm_of_identity() {
        let logs = logm_real_branches(&Matrix3::identity(), 0).unwrap();
        assert_eq!(logs.len(), 1);
        assert!(logs[0].norm() < 1e-14);
    }

    #[test]
    fn logm_rotation_branches() {
        let theta = PI / 3.0;
        let r = to_matrix3(&real_part(
            &expm(&complexify(&skew(&Vector3::new(0.0, 0.0, theta)))).unwrap(),
            1e-15,
        ).unwrap());
        let logs = logm_real_branches(&r, 2).unwrap();
        assert_eq!(logs.len(), 5);
        let mut angles: Vec<f64> = logs.iter().map(|l| unskew(l).z).collect();
        angles.sort_by(f64::total_cmp);
        for (k, angle) in (-2..=2).zip(angles) {
            assert_relative_eq!(angle, theta + 2.0 * PI * k as f64, epsilon = 1e-10);
        }
        for l in &logs {
            let back = expm(&complexify(l)).unwrap();
            assert!((back - complexify(&r)).norm() < 1e-9 * r.norm());
            // Pure rotations have no symmetric part on any branch.
            assert!((l + l.transpose()).norm() < 1e-9);
        }
    }

    #[test]
    fn logm_distinct_positive_is_unique() {
        let r = Matrix3::from_diagonal(&Vector3::new(0.9, 0.5, 0.2));
        let logs = logm_real_branches(&r, 6).unwrap();
        assert_eq!(logs.len(), 1);
        assert_relative_eq!(logs[0][(1, 1)], 0.5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn logm_negative_spectrum_is_empty() {
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, -0.5, -0.5));
        assert!(logm_real_branches(&r, 3).unwrap().is_empty());
        let r = Matrix3::from_diagonal(&Vector3::new(1.0, 0.5, -0.2));
        assert!(logm_real_branches(&r, 3).unwrap().is_empty());
    }

    #[test]
    fn logm_defective_is_exceptional_point() {
        let r = Matrix3::new(0.5, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.8);
        assert!(matches!(
            logm_real_branches(&r, 1),
            Err(Error::ExceptionalPoint { .. })
        ));
    }
}
