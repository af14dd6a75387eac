use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{
    ChannelSpec, ChoiConfig, DistillConfig, EigTraceConfig, EquivScanConfig, NormalChannel, PtmConfig, RunConfig,
    ValidateConfig,
};
use super::output::{complex_rows, csv_document, fmt_f64, header, json_document, rows};
use crate::channel1q::{equivalence_class, eigenvalue_trace, random_walk_ptm, NormalParams1Q, TracePoint, MAX_CLASS_SIZE};
use crate::channel2q::random_walk_ptm2;
use crate::distill::{fidelity_sweep, SweepRow};
use crate::error::{Error, Result};
use crate::linalg::PAIR_TOLERANCE;

/// Rendered output of a run and whether every requested check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, success: true }
    }
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    match config {
        RunConfig::Ptm(c) => ptm(config, c).map(Outcome::ok),
        RunConfig::Choi(c) => choi(config, c).map(Outcome::ok),
        RunConfig::EquivScan(c) => equiv_scan_csv(config, c).map(Outcome::ok),
        RunConfig::EigTrace(c) => eig_trace_csv(config, c).map(Outcome::ok),
        RunConfig::Distill(c) => distill_csv(config, c).map(Outcome::ok),
        RunConfig::Validate(c) => {
            let report = validate(c)?;
            let mut doc = header(config);
            doc.insert("pass".into(), report.pass.into());
            doc.insert("checks".into(), report.checks.iter().map(CheckResult::to_json).collect());
            Ok(Outcome { text: json_document(&Value::Object(doc)), success: report.pass })
        }
    }
}

fn ptm(config: &RunConfig, c: &PtmConfig) -> Result<String> {
    let mut doc = header(config);
    doc.insert("qubits".into(), c.channel.qubits().into());
    doc.insert("basis".into(), "pauli-lexicographic".into());
    doc.insert("ptm".into(), rows(&c.channel.ptm()?));
    if c.include_choi {
        doc.insert("choi".into(), complex_rows(c.channel.choi()?.matrix()));
    }
    Ok(json_document(&Value::Object(doc)))
}

fn choi(config: &RunConfig, c: &ChoiConfig) -> Result<String> {
    let mut doc = header(config);
    doc.insert("qubits".into(), c.channel.qubits().into());
    doc.insert("choi".into(), complex_rows(c.channel.choi()?.matrix()));
    Ok(json_document(&Value::Object(doc)))
}

/// One point of the diagonal-diffusion simplex scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub diffusion: [f64; 3],
    /// Members found, capped at `MAX_CLASS_SIZE`, or `−1` at an exceptional point.
    pub count: i64,
    pub infinite: bool,
}

/// Barycentric grid `(i, j, n−i−j)/n`, `i` major.
pub fn simplex_grid(n: usize) -> Vec<[f64; 3]> {
    let n_f = n as f64;
    (0..=n)
        .flat_map(|i| (0..=n - i).map(move |j| [i as f64 / n_f, j as f64 / n_f, (n - i - j) as f64 / n_f]))
        .collect()
}

pub fn equiv_scan(c: &EquivScanConfig) -> Result<Vec<ScanRow>> {
    let b = c.drift();
    simplex_grid(c.grid)
        .into_par_iter()
        .map(|d| {
            let params = NormalParams1Q::diagonal(d, b)?;
            match equivalence_class(&params, c.k_max) {
                Ok(class) => Ok(ScanRow {
                    diffusion: d,
                    count: class.len().min(MAX_CLASS_SIZE) as i64,
                    infinite: class.infinite,
                }),
                Err(Error::ExceptionalPoint { .. }) => Ok(ScanRow { diffusion: d, count: -1, infinite: false }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn equiv_scan_csv(config: &RunConfig, c: &EquivScanConfig) -> Result<String> {
    let body = equiv_scan(c)?.into_iter().map(|r| {
        vec![
            fmt_f64(r.diffusion[0]),
            fmt_f64(r.diffusion[1]),
            fmt_f64(r.diffusion[2]),
            r.count.to_string(),
            r.infinite.to_string(),
        ]
    });
    let note = format!("count capped at {MAX_CLASS_SIZE}; -1 marks an exceptional point");
    csv_document(config, &[note], &["a11", "a22", "a33", "count", "infinite"], body)
}

/// Puts a conjugate pair first (positive imaginary part leading) and the real
/// eigenvalue last; an all-real spectrum is sorted in decreasing order.
fn order_eigenvalues(ev: [Complex64; 3], tol: f64) -> [Complex64; 3] {
    let mut v = ev;
    if let Some(k) = v.iter().position(|z| z.im > tol) {
        let lead = v[k];
        let conj = (0..3)
            .filter(|&i| i != k)
            .min_by(|&i, &j| (v[i] - lead.conj()).norm().total_cmp(&(v[j] - lead.conj()).norm()))
            .expect("two candidates");
        let real = 3 - k - conj;
        v = [lead, v[conj], v[real]];
    } else {
        v.sort_by(|a, b| b.re.total_cmp(&a.re));
    }
    v
}

pub fn eig_trace(c: &EigTraceConfig) -> Result<(Vec<TracePoint>, Option<f64>)> {
    let a = Matrix3::from_fn(|i, j| c.diffusion[i][j]);
    let dir = Vector3::from(c.drift_direction).normalize();
    let trace = eigenvalue_trace(&a, &dir, &c.magnitudes())?;
    let tol = PAIR_TOLERANCE * (a.norm() + c.max_magnitude).max(1e-300);
    let points = trace
        .points
        .into_iter()
        .map(|p| TracePoint { magnitude: p.magnitude, eigenvalues: order_eigenvalues(p.eigenvalues, tol) })
        .collect();
    Ok((points, trace.pair_formation))
}

fn eig_trace_csv(config: &RunConfig, c: &EigTraceConfig) -> Result<String> {
    let (points, formation) = eig_trace(c)?;
    let comment = format!("pair_formation {}", formation.map_or("none".to_string(), fmt_f64));
    let a_norm = Matrix3::from_fn(|i, j| c.diffusion[i][j]).norm();
    let body = points.into_iter().map(|p| {
        let tol = PAIR_TOLERANCE * (a_norm + p.magnitude).max(1e-300);
        let mut row = vec![fmt_f64(p.magnitude)];
        for z in p.eigenvalues {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        row.push(p.eigenvalues.iter().any(|z| z.im.abs() > tol).to_string());
        row
    });
    csv_document(
        config,
        &[comment],
        &["magnitude", "re1", "im1", "re2", "im2", "re3", "im3", "pair"],
        body,
    )
}

pub fn distill(c: &DistillConfig) -> Result<Vec<SweepRow>> {
    fidelity_sweep(c.model, &c.points())
}

fn distill_csv(config: &RunConfig, c: &DistillConfig) -> Result<String> {
    let body = distill(c)?.into_iter().map(|r| {
        vec![
            fmt_f64(r.p),
            fmt_f64(r.correlation),
            fmt_f64(r.f_n),
            fmt_f64(r.f_u),
            fmt_f64(r.success_prob),
            r.degenerate.to_string(),
        ]
    });
    csv_document(config, &[], &["p", "correlation", "f_n", "f_u", "success_prob", "degenerate"], body)
}

/// Closed form against random-walk estimate for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub channel: ChannelSpec,
    pub seed: u64,
    pub exact: nalgebra::DMatrix<f64>,
    pub estimate: crate::channel1q::MonteCarloEstimate,
    pub max_z: f64,
    pub max_stderr: f64,
    pub pass: bool,
}

impl CheckResult {
    fn to_json(&self) -> Value {
        json!({
            "channel": self.channel,
            "seed": self.seed,
            "samples": self.estimate.samples,
            "exact": rows(&self.exact),
            "estimate": rows(&self.estimate.mean),
            "stderr": rows(&self.estimate.stderr),
            "max_z": finite_or_null(self.max_z),
            "max_stderr": self.max_stderr,
            "pass": self.pass,
        })
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        x.into()
    } else {
        Value::Null
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Runs each check with seed `seed + index`. The 1-qubit comparison uses the
/// 3×3 Bloch block, the 2-qubit one the full 16×16 matrix.
pub fn validate(c: &ValidateConfig) -> Result<ValidationReport> {
    let mut checks = Vec::with_capacity(c.checks.len());
    for (i, spec) in c.checks.iter().enumerate() {
        let seed = c.seed.wrapping_add(i as u64);
        let full = spec.ptm()?;
        let (exact, estimate) = match spec.normal(&format!("checks[{i}]"))?.expect("validated") {
            NormalChannel::One(p) => {
                let (_, est) = random_walk_ptm(&p, c.steps, c.samples, seed)?;
                (full.view((1, 1), (3, 3)).into_owned(), est)
            }
            NormalChannel::Two(p) => {
                let (_, est) = random_walk_ptm2(&p, c.steps, c.samples, seed)?;
                (full, est)
            }
        };
        let max_z = estimate.max_z_score(&exact);
        let max_stderr = estimate.stderr.max();
        checks.push(CheckResult {
            channel: spec.clone(),
            seed,
            exact,
            max_z,
            max_stderr,
            pass: max_z <= c.sigmas,
            estimate,
        });
    }
    let pass = checks.iter().all(|r| r.pass);
    Ok(ValidationReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_simplex_once() {
        let g = simplex_grid(4);
        assert_eq!(g.len(), 15);
        assert!(g.iter().all(|p| (p.iter().sum::<f64>() - 1.0).abs() < 1e-15 && p.iter().all(|x| *x >= 0.0)));
        assert_eq!(g[0], [0.0, 0.0, 1.0]);
        assert_eq!(*g.last().unwrap(), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn eigenvalue_ordering() {
        let c = |re, im| Complex64::new(re, im);
        let pair = order_eigenvalues([c(-0.2, 0.0), c(-0.5, -0.3), c(-0.5, 0.3)], 1e-9);
        assert_eq!(pair, [c(-0.5, 0.3), c(-0.5, -0.3), c(-0.2, 0.0)]);
        let real = order_eigenvalues([c(-0.5, 0.0), c(-0.1, 0.0), c(-0.3, 0.0)], 1e-9);
        assert_eq!(real, [c(-0.1, 0.0), c(-0.3, 0.0), c(-0.5, 0.0)]);
    }

    #[test]
    fn ptm_of_zero_parameters_is_identity() {
        let cfg = RunConfig::Ptm(PtmConfig::default());
        let out = execute(&cfg).unwrap();
        let v: Value = serde_json::from_str(&out.text).unwrap();
        let m = &v["ptm"];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i][j].as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(v["seed"], Value::Null);
        assert_eq!(RunConfig::from_json(&v["config"].to_string()).unwrap(), cfg);
    }

    #[test]
    fn ptm_of_diagonal_diffusion() {
        let a = [0.3, 0.7, 1.1];
        let cfg = RunConfig::Ptm(PtmConfig {
            channel: ChannelSpec::Normal1Q {
                diffusion: [[a[0], 0.0, 0.0], [0.0, a[1], 0.0], [0.0, 0.0, a[2]]],
                drift: [0.0; 3],
            },
            include_choi: true,
        });
        let v: Value = serde_json::from_str(&execute(&cfg).unwrap().text).unwrap();
        let t: f64 = a.iter().sum();
        for j in 0..3 {
            let r = v["ptm"][j + 1][j + 1].as_f64().unwrap();
            assert!((r - (-(t - a[j]) / 2.0).exp()).abs() < 1e-14);
        }
        assert_eq!(v["choi"]["re"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn small_drift_removes_multiplicities() {
        let cfg = EquivScanConfig { grid: 10, drift_magnitude: 0.05, ..Default::default() };
        for r in equiv_scan(&cfg).unwrap() {
            let [a11, a22, a33] = r.diffusion;
            let interior = a11 > 0.0 && a22 > 0.0 && a33 > 0.0;
            // The pair coalesces where |a11 − a22| = 4|b|.
            let gap = (a11 - a22).abs();
            if interior && gap > 1e-9 && (gap - 4.0 * cfg.drift_magnitude).abs() > 1e-9 {
                assert_eq!(r.count, 1, "{:?}", r);
            }
        }
    }

    #[test]
    fn infinite_flag_on_the_degenerate_line() {
        let cfg = EquivScanConfig { grid: 12, ..Default::default() };
        for r in equiv_scan(&cfg).unwrap() {
            let [a11, a22, _] = r.diffusion;
            assert_eq!(r.infinite, (a11 - a22).abs() < 1e-12, "{:?}", r);
            assert!(r.count != -1);
        }
    }

    #[test]
    fn eig_trace_properties() {
        let cfg = EigTraceConfig::default();
        let (points, formation) = eig_trace(&cfg).unwrap();
        let t: f64 = (0..3).map(|i| cfg.diffusion[i][i]).sum();
        assert!(points[0].eigenvalues.iter().all(|z| z.im == 0.0 || z.im.abs() < 1e-14));
        for p in &points {
            let s: Complex64 = p.eigenvalues.iter().sum();
            assert!((s.re + t).abs() < 1e-12 && s.im.abs() < 1e-12);
        }
        let last = points.last().unwrap().eigenvalues;
        assert!(last[0].im > 0.0 && (last[1] - last[0].conj()).norm() < 1e-12 && last[2].im.abs() < 1e-12);
        // Complex pair appears once |b| exceeds |a11 − a22| / 4.
        let threshold = (cfg.diffusion[0][0] - cfg.diffusion[1][1]).abs() / 4.0;
        let f = formation.unwrap();
        assert!(f > threshold && f - threshold <= cfg.max_magnitude / (cfg.points - 1) as f64 + 1e-12);
    }

    #[test]
    fn csv_reruns_are_identical() {
        let cfg = RunConfig::Distill(DistillConfig { p_values: vec![0.05, 0.25], ..Default::default() });
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 5);
    }

    #[test]
    fn exact_checks_have_zero_spread() {
        let cfg = ValidateConfig {
            samples: 1000,
            steps: 50,
            checks: vec![ChannelSpec::Normal1Q { diffusion: [[0.0; 3]; 3], drift: [0.3, -0.2, 0.5] }],
            ..Default::default()
        };
        let report = validate(&cfg).unwrap();
        assert!(report.pass);
        assert_eq!(report.checks[0].max_stderr, 0.0);
    }
}
