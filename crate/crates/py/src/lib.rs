use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use liegauss::channel1q as c1;
use liegauss::channel2q as c2;
use liegauss::distill::{self, ErrorModel};
use liegauss::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_)
        | Error::Config { .. }
        | Error::Dimension(_)
        | Error::NonFinite(_)
        | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn complex_rows(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix3(rows: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn model(name: &str) -> PyResult<ErrorModel> {
    match name {
        "correlated-pauli" => Ok(ErrorModel::CorrelatedPauli),
        "correlated-normal" => Ok(ErrorModel::CorrelatedNormal),
        other => Err(PyValueError::new_err(format!(
            "unknown model `{other}`, expected `correlated-pauli` or `correlated-normal`"
        ))),
    }
}

/// Single-qubit normal distribution with diffusion matrix `A` and drift `b`.
#[pyclass(name = "NormalParams1Q", frozen, skip_from_py_object)]
struct PyNormalParams1Q(c1::NormalParams1Q);

#[pymethods]
impl PyNormalParams1Q {
    #[new]
    #[pyo3(signature = (diffusion, drift = [0.0, 0.0, 0.0]))]
    fn new(diffusion: [[f64; 3]; 3], drift: [f64; 3]) -> PyResult<Self> {
        c1::NormalParams1Q::new(matrix3(diffusion), Vector3::from(drift)).map(Self).map_err(to_py)
    }

    #[getter]
    fn diffusion(&self) -> Vec<Vec<f64>> {
        let a = self.0.diffusion();
        (0..3).map(|i| (0..3).map(|j| a[(i, j)]).collect()).collect()
    }

    #[getter]
    fn drift(&self) -> Vec<f64> {
        self.0.drift().iter().copied().collect()
    }

    /// 3×3 Bloch block of the transfer matrix.
    fn ptm(&self) -> Vec<Vec<f64>> {
        let r = c1::ptm(&self.0).0;
        (0..3).map(|i| (0..3).map(|j| r[(i, j)]).collect()).collect()
    }

    fn generator(&self) -> Vec<Vec<f64>> {
        let l = c1::generator(&self.0);
        (0..3).map(|i| (0..3).map(|j| l[(i, j)]).collect()).collect()
    }

    /// Choi matrix built from the spin-1 Fourier coefficient.
    fn choi(&self) -> Vec<Vec<Complex64>> {
        complex_rows(c1::choi_from_fourier(&self.0).matrix())
    }

    /// `(members, infinite, truncated)`.
    #[pyo3(signature = (k_max = liegauss::linalg::DEFAULT_K_MAX))]
    fn equivalence_class(&self, k_max: u32) -> PyResult<(Vec<PyNormalParams1Q>, bool, bool)> {
        let class = c1::equivalence_class(&self.0, k_max).map_err(to_py)?;
        Ok((class.members.into_iter().map(PyNormalParams1Q).collect(), class.infinite, class.truncated))
    }

    /// Random-walk estimate of the Bloch block: `(mean, stderr)`.
    fn random_walk_ptm(
        &self,
        py: Python<'_>,
        n_steps: usize,
        n_samples: usize,
        seed: u64,
    ) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let (_, est) = py.detach(|| c1::random_walk_ptm(&self.0, n_steps, n_samples, seed)).map_err(to_py)?;
        Ok((rows(&est.mean), rows(&est.stderr)))
    }

    fn __repr__(&self) -> String {
        format!("NormalParams1Q(diffusion={:?}, drift={:?})", self.diffusion(), self.drift())
    }
}

/// Pauli probabilities `(p1, p2, p3)` of the channel with diagonal diffusion.
#[pyfunction]
fn pauli_probs(a_diag: [f64; 3]) -> PyResult<[f64; 3]> {
    c1::pauli_probs(a_diag).map(|p| p.as_array()).map_err(to_py)
}

/// Diagonal diffusion producing the Pauli channel `(p1, p2, p3)`.
#[pyfunction]
fn diffusion_from_pauli(p: [f64; 3]) -> PyResult<[f64; 3]> {
    let params = c1::PauliChannelParams::new(p[0], p[1], p[2]).map_err(to_py)?;
    c1::diffusion_from_pauli(&params).map_err(to_py)
}

/// `(magnitudes, eigenvalues, pair_formation)` of the generator as the drift
/// grows along `direction`.
#[pyfunction]
fn eigenvalue_trace(
    diffusion: [[f64; 3]; 3],
    direction: [f64; 3],
    magnitudes: Vec<f64>,
) -> PyResult<(Vec<f64>, Vec<[Complex64; 3]>, Option<f64>)> {
    let dir = Vector3::from(direction);
    if dir.norm() == 0.0 {
        return Err(PyValueError::new_err("direction must be non-zero"));
    }
    let trace = c1::eigenvalue_trace(&matrix3(diffusion), &dir.normalize(), &magnitudes).map_err(to_py)?;
    let ms = trace.points.iter().map(|p| p.magnitude).collect();
    let ev = trace.points.iter().map(|p| p.eigenvalues).collect();
    Ok((ms, ev, trace.pair_formation))
}

/// 16×16 lexicographic transfer matrix of the correlated normal channel.
#[pyfunction]
fn correlated_normal_ptm(a1: f64, a2: f64, rho: f64) -> PyResult<Vec<Vec<f64>>> {
    let p = c2::IsotropicNormalParams::new(a1, a2, rho).map_err(to_py)?;
    Ok(rows(c2::correlated_normal_ptm(&p).lexicographic()))
}

/// 16×16 lexicographic transfer matrix of the correlated Pauli channel.
#[pyfunction]
fn correlated_pauli_ptm(p: f64, q: f64, m: f64) -> PyResult<Vec<Vec<f64>>> {
    let params = c2::CorrelatedPauliParams::new(p, q, m).map_err(to_py)?;
    Ok(rows(c2::correlated_pauli_ptm(&params).lexicographic()))
}

/// 16×16 transfer matrix `expm` of a general two-qubit generator.
#[pyfunction]
fn normal_ptm2(diffusion: [[f64; 6]; 6], drift: [f64; 6]) -> PyResult<Vec<Vec<f64>>> {
    let a = c2::Matrix6::from_fn(|i, j| diffusion[i][j]);
    let p = c2::NormalParams2Q::new(a, c2::Vector6::from(drift)).map_err(to_py)?;
    Ok(rows(c2::ptm2(&p).lexicographic()))
}

#[pyfunction]
fn diffusion_for_probability(p: f64) -> PyResult<f64> {
    c2::diffusion_for_probability(p).map_err(to_py)
}

#[pyfunction]
fn undistilled_fidelity(p: f64) -> PyResult<f64> {
    distill::undistilled_fidelity(p).map_err(to_py)
}

/// Two-round protocol with per-qubit error probability `p`; returns a dict
/// with `fidelity`, `success_prob` and the final two-qubit `state`.
#[pyfunction]
fn full_distill<'py>(py: Python<'py>, model_name: &str, p: f64, correlation: f64) -> PyResult<Bound<'py, PyDict>> {
    let ch = model(model_name)?.channel(p, correlation).map_err(to_py)?;
    let out = distill::full_distill(&ch, &ch).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("fidelity", out.fidelity)?;
    d.set_item("success_prob", out.success_prob)?;
    d.set_item("state", complex_rows(out.state.matrix()))?;
    Ok(d)
}

/// Rows `(p, correlation, f_n, f_u, success_prob, degenerate)` in input order.
#[pyfunction]
fn fidelity_sweep(
    py: Python<'_>,
    model_name: &str,
    points: Vec<(f64, f64)>,
) -> PyResult<Vec<(f64, f64, f64, f64, f64, bool)>> {
    let m = model(model_name)?;
    let rows = py.detach(|| distill::fidelity_sweep(m, &points)).map_err(to_py)?;
    Ok(rows.into_iter().map(|r| (r.p, r.correlation, r.f_n, r.f_u, r.success_prob, r.degenerate)).collect())
}

/// Runs a JSON run configuration as the command-line tool would; returns
/// `(output_text, success)`.
#[pyfunction]
fn run_config(py: Python<'_>, config_json: &str) -> PyResult<(String, bool)> {
    let cfg = liegauss::cli::RunConfig::from_json(config_json).map_err(to_py)?;
    let out = py.detach(|| liegauss::cli::execute(&cfg)).map_err(to_py)?;
    Ok((out.text, out.success))
}

#[pymodule]
#[pyo3(name = "liegauss")]
fn liegauss_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyNormalParams1Q>()?;
    m.add_function(wrap_pyfunction!(pauli_probs, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_from_pauli, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalue_trace, m)?)?;
    m.add_function(wrap_pyfunction!(correlated_normal_ptm, m)?)?;
    m.add_function(wrap_pyfunction!(correlated_pauli_ptm, m)?)?;
    m.add_function(wrap_pyfunction!(normal_ptm2, m)?)?;
    m.add_function(wrap_pyfunction!(diffusion_for_probability, m)?)?;
    m.add_function(wrap_pyfunction!(undistilled_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(full_distill, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
