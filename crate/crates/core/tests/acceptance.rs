//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use liegauss::channel1q::{
    self, choi_from_fourier, choi_from_ptm, diffusion_from_pauli, eigenvalue_trace, equivalence_class, generator,
    m1_matrix, pauli_probs, NormalParams1Q, PauliChannelParams, MAX_CLASS_SIZE,
};
use liegauss::channel2q::{
    choi2, correlated_normal_ptm, correlated_pauli_ptm, diffusion_for_probability, general_pauli_ptm, ptm2,
    CorrelatedPauliParams, IsotropicNormalParams, PauliTable,
};
use liegauss::choi::ChoiMatrix;
use liegauss::cli::commands::{equiv_scan, validate};
use liegauss::cli::config::{EquivScanConfig, ValidateConfig};
use liegauss::distill::{fidelity_sweep, full_distill, undistilled_fidelity, ErrorModel};
use liegauss::linalg::{complexify, max_abs, CMatrix, DEFAULT_K_MAX};
use liegauss::rng::stream;
use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_params(rng: &mut impl Rng, a_scale: f64, b_scale: f64) -> NormalParams1Q {
    let g = Matrix3::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let a = g * g.transpose() * (a_scale * rng.random::<f64>());
    let b = Vector3::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0)) * b_scale;
    NormalParams1Q::new(a, b).unwrap()
}

fn pauli_correspondence() -> Check {
    let a = [0.7, 0.2, 1.3];
    let r = channel1q::ptm(&NormalParams1Q::diagonal(a, Vector3::zeros()).unwrap()).0;
    let t: f64 = a.iter().sum();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { (-(t - a[j]) / 2.0).exp() } else { 0.0 };
            ensure((r[(i, j)] - want).abs() < 1e-12, || format!("R[{i}{j}] = {} vs {want}", r[(i, j)]))?;
        }
    }
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.1, 0.24] {
        for probs in [[p, p, p], [p, 0.9 * p, 0.8 * p]] {
            let pc = PauliChannelParams::new(probs[0], probs[1], probs[2]).map_err(|e| e.to_string())?;
            let diag = diffusion_from_pauli(&pc).map_err(|e| e.to_string())?;
            let back = pauli_probs(diag).map_err(|e| e.to_string())?.as_array();
            let channel = channel1q::ptm(&NormalParams1Q::diagonal(diag, Vector3::zeros()).unwrap()).0;
            for k in 0..3 {
                worst = worst.max((back[k] - probs[k]).abs());
                worst = worst.max((channel[(k, k)] - pc.ptm().0[(k, k)]).abs());
            }
        }
    }
    ensure(worst < 1e-12, || format!("round-trip error {worst:.2e}"))?;
    Ok(format!("round-trip error {worst:.1e}"))
}

fn unitary_equivalence() -> Check {
    let s = 1.0 / SQRT_2;
    let u = CMatrix::from_row_slice(
        3,
        3,
        &[c(0.0, -s), c(0.0, 0.0), c(0.0, s), c(s, 0.0), c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
    );
    let mut rng = stream(1001, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_params(&mut rng, 2.0, 3.0);
        let lhs = &u * (-m1_matrix(&p)) * u.adjoint();
        worst = worst.max(max_abs(&(lhs - complexify(&generator(&p)))));
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("max deviation {worst:.1e} over 100 sets"))
}

fn choi_cross_construction() -> Check {
    let mut rng = stream(1002, 0);
    let mut worst: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for _ in 0..100 {
        let p = random_params(&mut rng, 3.0, 4.0);
        let a = choi_from_fourier(&p);
        let b = choi_from_ptm(&channel1q::ptm(&p));
        worst = worst.max(max_abs(&(a.matrix() - b.matrix())));
        for ch in [&a, &b] {
            ensure(ch.hermiticity_error() < 1e-10, || format!("Hermiticity error {:.2e}", ch.hermiticity_error()))?;
            ensure(ch.trace_preservation_error() < 1e-10, || "not trace preserving".into())?;
            ensure(ch.unitality_error() < 1e-10, || "not unital".into())?;
            min_eig = min_eig.min(ch.min_eigenvalue());
        }
    }
    ensure(worst < 1e-10, || format!("constructions differ by {worst:.2e}"))?;
    ensure(min_eig >= -1e-9, || format!("min eigenvalue {min_eig:.2e}"))?;
    Ok(format!("max difference {worst:.1e}, min eigenvalue {min_eig:.1e}"))
}

fn equivalence_classes() -> Check {
    // Distinct diagonal entries without drift.
    for a in [[0.5, 0.3, 0.1], [0.05, 0.6, 0.35], [1.2, 0.4, 2.0]] {
        let class = equivalence_class(&NormalParams1Q::diagonal(a, Vector3::zeros()).unwrap(), DEFAULT_K_MAX)
            .map_err(|e| e.to_string())?;
        ensure(class.len() == 1 && !class.infinite, || format!("{a:?}: class size {}", class.len()))?;
    }
    // Commuting drift: the drift shifts by 2πk along its axis.
    for (a, a3, b3) in [(0.4, 0.2, 0.7), (0.1, 0.5, -1.3), (0.3, 0.3, 2.0)] {
        let p = NormalParams1Q::diagonal([a, a, a3], Vector3::new(0.0, 0.0, b3)).unwrap();
        let class = equivalence_class(&p, DEFAULT_K_MAX).map_err(|e| e.to_string())?;
        ensure(class.infinite, || format!("({a}, {a3}, {b3}): infinite flag not set"))?;
        let k_max = DEFAULT_K_MAX as i64;
        for k in -k_max..=k_max {
            let target = b3 + 2.0 * PI * k as f64;
            let found = class.members.iter().any(|m| {
                (m.diffusion() - p.diffusion()).norm() < 1e-9
                    && (m.drift() - Vector3::new(0.0, 0.0, target)).norm() < 1e-9
            });
            ensure(found, || format!("({a}, {a3}, {b3}): no member with b3 + 2π·{k}"))?;
        }
    }
    // Simplex scans with b ∝ e_z.
    let mut summary = Vec::new();
    for magnitude in [1.0, 0.5] {
        let cfg = EquivScanConfig { grid: 60, drift_magnitude: magnitude, ..Default::default() };
        let rows = equiv_scan(&cfg).map_err(|e| e.to_string())?;
        let mut max_count = 0;
        for r in &rows {
            let [a11, a22, _] = r.diffusion;
            ensure(r.count <= MAX_CLASS_SIZE as i64, || format!("count {} at {:?}", r.count, r.diffusion))?;
            ensure(r.infinite == (a11 == a22), || format!("infinite flag {} at {:?}", r.infinite, r.diffusion))?;
            if !r.infinite {
                max_count = max_count.max(r.count);
            }
        }
        // Along each line of constant a33, counts grow as |a11 − a22| shrinks.
        for k in 0..=cfg.grid {
            for side in [1.0, -1.0] {
                let mut line: Vec<_> = rows
                    .iter()
                    .filter(|r| (r.diffusion[2] * cfg.grid as f64 - k as f64).abs() < 1e-9)
                    .filter(|r| side * (r.diffusion[0] - r.diffusion[1]) > 1e-12 && r.count >= 0)
                    .map(|r| ((r.diffusion[0] - r.diffusion[1]).abs(), r.count))
                    .collect();
                line.sort_by(|x, y| y.0.total_cmp(&x.0));
                ensure(line.windows(2).all(|w| w[0].1 <= w[1].1), || format!("counts not monotone at a33 = {k}/60"))?;
            }
        }
        let near = rows
            .iter()
            .filter(|r| ((r.diffusion[0] - r.diffusion[1]).abs() - 1.0 / 60.0).abs() < 1e-9)
            .map(|r| r.count)
            .max()
            .unwrap_or(0);
        ensure(near > 1, || "no multiplicity next to the degenerate line".into())?;
        let mut worst: f64 = 0.0;
        let b = cfg.drift();
        for r in &rows {
            let p = NormalParams1Q::diagonal(r.diffusion, b).unwrap();
            let Ok(class) = equivalence_class(&p, cfg.k_max) else { continue };
            let target = channel1q::ptm(&p).0;
            for m in &class.members {
                worst = worst.max((channel1q::ptm(m).0 - target).abs().max());
            }
        }
        ensure(worst < 1e-8, || format!("member reproduces R only to {worst:.2e}"))?;
        summary.push(format!("|b|={magnitude}: max finite count {max_count}, member error {worst:.1e}"));
    }
    Ok(summary.join("; "))
}

fn exceptional_points() -> Check {
    let a: [f64; 3] = [0.3, 0.2, 0.1];
    let am = Matrix3::from_diagonal(&Vector3::from(a));
    let threshold = (a[0] - a[1]).abs() / 4.0;
    let magnitudes: Vec<f64> = (0..=400).map(|i| i as f64 * 0.0005).collect();
    let mut worst_sum: f64 = 0.0;
    for dir in [Vector3::new(0.0, 0.0, 1.0), Vector3::new(1.0, 1.0, 1.0).normalize()] {
        let trace = eigenvalue_trace(&am, &dir, &magnitudes).map_err(|e| e.to_string())?;
        let formation = trace.pair_formation.ok_or("no pair forms")?;
        for p in &trace.points {
            let s: Complex64 = p.eigenvalues.iter().sum();
            worst_sum = worst_sum.max((s.re + 0.6).abs()).max(s.im.abs());
            let complex = p.eigenvalues.iter().filter(|z| z.im.abs() > 1e-8).count();
            if p.magnitude < formation {
                ensure(complex == 0, || format!("complex eigenvalue below threshold at |b| = {}", p.magnitude))?;
            } else {
                ensure(complex == 2, || format!("no conjugate pair at |b| = {}", p.magnitude))?;
                let mut v = p.eigenvalues;
                v.sort_by(|x, y| x.im.total_cmp(&y.im));
                ensure((v[0] - v[2].conj()).norm() < 1e-12, || "pair is not conjugate".into())?;
            }
        }
        if dir.z == 1.0 {
            ensure(formation > threshold && formation - threshold <= 0.0005 + 1e-12, || {
                format!("pair forms at {formation}, expected just above {threshold}")
            })?;
        }
    }
    ensure(worst_sum < 1e-12, || format!("eigenvalue sum off by {worst_sum:.2e}"))?;
    Ok(format!("threshold |a11 − a22|/4 = {threshold}, eigenvalue-sum error {worst_sum:.1e}"))
}

fn two_qubit_closed_form() -> Check {
    let mut worst: f64 = 0.0;
    for a1 in [0.1, 0.5, 1.0] {
        for a2 in [0.1, 0.5, 1.0] {
            for rho in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let iso = IsotropicNormalParams::new(a1, a2, rho).map_err(|e| e.to_string())?;
                let d = correlated_normal_ptm(&iso).lexicographic() - ptm2(&iso.to_params()).lexicographic();
                worst = worst.max(d.abs().max());
            }
        }
    }
    ensure(worst < 1e-10, || format!("closed form differs from expm by {worst:.2e}"))?;
    let mut limit: f64 = 0.0;
    for p in [0.0, 0.01, 0.1, 0.2, 0.25] {
        for q in [0.0, 0.05, 0.25] {
            let pauli = correlated_pauli_ptm(&CorrelatedPauliParams::new(p, q, 0.0).unwrap());
            let iso = IsotropicNormalParams::new(
                diffusion_for_probability(p).unwrap(),
                diffusion_for_probability(q).unwrap(),
                0.0,
            )
            .unwrap();
            limit = limit.max((pauli.lexicographic() - correlated_normal_ptm(&iso).lexicographic()).abs().max());
        }
    }
    ensure(limit < 1e-12, || format!("uncorrelated models differ by {limit:.2e}"))?;
    let p = 0.1;
    let pauli = correlated_pauli_ptm(&CorrelatedPauliParams::new(p, p, 1.0).unwrap());
    let normal = correlated_normal_ptm(&IsotropicNormalParams::from_probabilities(p, p, 1.0).unwrap());
    let dw = (pauli.w() - normal.w()).norm();
    ensure(dw > 1e-3, || format!("‖ΔW‖ = {dw:.2e}"))?;
    Ok(format!("expm error {worst:.1e}, uncorrelated gap {limit:.1e}, ‖ΔW‖ = {dw:.3}"))
}

fn monte_carlo_oracle() -> Check {
    let cfg = ValidateConfig::default();
    ensure(cfg.samples == 100_000 && cfg.steps == 100 && cfg.sigmas == 3.0, || "unexpected defaults".into())?;
    let report = validate(&cfg).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (i, r) in report.checks.iter().enumerate() {
        ensure(r.pass, || format!("check {i}: max z = {:.2}", r.max_z))?;
        ensure(r.max_stderr < 0.01, || format!("check {i}: σ = {:.2e}", r.max_stderr))?;
        parts.push(format!("{:.2}", r.max_z));
    }
    let n1 = report.checks.iter().filter(|r| r.exact.nrows() == 3).count();
    ensure(n1 >= 3 && report.checks.len() - n1 >= 1, || "suite must cover both qubit counts".into())?;
    Ok(format!("max z per check [{}]", parts.join(", ")))
}

/// Pure-state simulation of `D_u` with every Pauli error branch enumerated.
mod brute_force {
    use super::*;

    type State = Vec<Complex64>;

    fn bit(n: usize, q: usize) -> usize {
        1 << (n - 1 - q)
    }

    fn pauli(psi: &mut State, n: usize, q: usize, k: usize) {
        let m = bit(n, q);
        for i in 0..psi.len() {
            let one = i & m != 0;
            match k {
                1 if !one => psi.swap(i, i | m),
                2 if !one => {
                    let (a, b) = (psi[i], psi[i | m]);
                    psi[i] = c(0.0, -1.0) * b;
                    psi[i | m] = c(0.0, 1.0) * a;
                }
                3 if one => psi[i] = -psi[i],
                _ => {}
            }
        }
    }

    fn cnot(psi: &mut State, n: usize, ctrl: usize, tgt: usize) {
        let (mc, mt) = (bit(n, ctrl), bit(n, tgt));
        for i in 0..psi.len() {
            if i & mc != 0 && i & mt == 0 {
                psi.swap(i, i | mt);
            }
        }
    }

    fn hadamard(psi: &mut State, n: usize, q: usize) {
        let m = bit(n, q);
        let h = 1.0 / SQRT_2;
        for i in 0..psi.len() {
            if i & m == 0 {
                let (a, b) = (psi[i], psi[i | m]);
                psi[i] = (a + b) * h;
                psi[i | m] = (a - b) * h;
            }
        }
    }

    /// Keeps amplitudes with `qubits` in state `value`, drops those qubits.
    fn project(psi: &State, n: usize, qubits: &[usize], value: usize) -> State {
        let keep: Vec<usize> = (0..n).filter(|q| !qubits.contains(q)).collect();
        let mut out = vec![c(0.0, 0.0); 1 << keep.len()];
        for (i, amp) in psi.iter().enumerate() {
            let v = qubits.iter().fold(0, |acc, &q| (acc << 1) | usize::from(i & bit(n, q) != 0));
            if v == value {
                let j = keep.iter().fold(0, |acc, &q| (acc << 1) | usize::from(i & bit(n, q) != 0));
                out[j] = *amp;
            }
        }
        out
    }

    fn bell_pairs(count: usize) -> State {
        let n = 2 * count;
        let mut psi = vec![c(0.0, 0.0); 1 << n];
        for pattern in 0..(1usize << count) {
            let mut idx = 0;
            for k in 0..count {
                let b = (pattern >> (count - 1 - k)) & 1;
                idx = (idx << 2) | (b << 1) | b;
            }
            psi[idx] = c((1.0 / SQRT_2).powi(count as i32), 0.0);
        }
        psi
    }

    /// Unnormalized two-qubit output of `D_u` for a Pauli table.
    pub fn full(table: &[[f64; 4]; 4]) -> DMatrix<Complex64> {
        let mut rho = DMatrix::zeros(4, 4);
        for e in 0..256 {
            let (i1, j1, i2, j2) = (e >> 6, (e >> 4) & 3, (e >> 2) & 3, e & 3);
            let w = table[i1][j1] * table[i2][j2];
            if w == 0.0 {
                continue;
            }
            // Qubits 0..4 form the first round, 4..8 the second.
            let mut psi = bell_pairs(4);
            for (q, k) in [(1, i1), (3, j1), (5, i2), (7, j2)] {
                pauli(&mut psi, 8, q, k);
            }
            for (ctrl, tgt) in [(0, 2), (1, 3), (4, 6), (5, 7)] {
                cnot(&mut psi, 8, ctrl, tgt);
            }
            for (o1, o2) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
                let first = project(&psi, 8, &[2, 3, 6, 7], (o1 << 2) | o2);
                let mut phi = first;
                for q in 0..4 {
                    hadamard(&mut phi, 4, q);
                }
                cnot(&mut phi, 4, 0, 2);
                cnot(&mut phi, 4, 1, 3);
                for o in [0, 3] {
                    let v = nalgebra::DVector::from_vec(project(&phi, 4, &[2, 3], o));
                    rho += &v * v.adjoint() * c(w, 0.0);
                }
            }
        }
        rho
    }
}

fn distillation_checkpoints() -> Check {
    let mut fn_err: f64 = 0.0;
    for i in 0..=50 {
        let p = 0.25 * i as f64 / 50.0;
        fn_err = fn_err.max((undistilled_fidelity(p).map_err(|e| e.to_string())? - (1.0 - 3.0 * p)).abs());
    }
    ensure(fn_err < 1e-12, || format!("F_n error {fn_err:.2e}"))?;
    let quarter = undistilled_fidelity(0.25).map_err(|e| e.to_string())?;
    ensure((quarter - 0.25).abs() < 1e-12, || format!("F_n(1/4) = {quarter}"))?;

    let ch = choi2(&correlated_pauli_ptm(&CorrelatedPauliParams::new(0.25, 0.25, 1.0).unwrap()));
    let out = full_distill(&ch, &ch).map_err(|e| e.to_string())?;
    let mut target = CMatrix::zeros(4, 4);
    target[(0, 0)] = c(0.5, 0.0);
    target[(3, 3)] = c(0.5, 0.0);
    let d = max_abs(&(out.state.matrix() - target));
    ensure(d < 1e-10, || format!("final state differs from diag(1/2, 0, 0, 1/2) by {d:.2e}"))?;
    ensure((out.fidelity - 0.5).abs() < 1e-10, || format!("F_u = {}", out.fidelity))?;

    let ps = [0.005, 0.01, 0.02];
    let mut res = Vec::new();
    for &p in &ps {
        let ch = choi2(&correlated_normal_ptm(&IsotropicNormalParams::from_probabilities(p, p, 0.0).unwrap()));
        let f = full_distill(&ch, &ch).map_err(|e| e.to_string())?.fidelity;
        res.push(f - (1.0 - 8.0 * p * p));
    }
    for (k, w) in res.windows(2).enumerate() {
        let ratio = w[1] / w[0];
        ensure((7.5..=8.5).contains(&ratio), || format!("residual ratio {ratio:.3} between p = {} and {}", ps[k], ps[k + 1]))?;
    }
    for (p, r) in ps.iter().zip(&res) {
        ensure(r.abs() <= 100.0 * p.powi(3), || format!("residual {r:.2e} at p = {p}"))?;
    }

    let mut rng = stream(1008, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let raw: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let mut t = [[0.0; 4]; 4];
        for (k, x) in raw.iter().enumerate() {
            t[k / 4][k % 4] = x / s;
        }
        let table = PauliTable::new(t).map_err(|e| e.to_string())?;
        let ch: ChoiMatrix = choi2(&general_pauli_ptm(&table));
        let sim = full_distill(&ch, &ch).map_err(|e| e.to_string())?;
        let oracle = brute_force::full(&t);
        let p = oracle.trace().re;
        worst = worst.max((p - sim.success_prob).abs());
        worst = worst.max(max_abs(&(oracle.map(|z| z / p) - sim.state.matrix())));
    }
    ensure(worst < 1e-12, || format!("branch oracle differs by {worst:.2e}"))?;
    Ok(format!(
        "cubic residuals/p³ = [{}], branch oracle error {worst:.1e}",
        ps.iter().zip(&res).map(|(p, r)| format!("{:.1}", r / p.powi(3))).collect::<Vec<_>>().join(", ")
    ))
}

fn fidelity_sweeps() -> Check {
    let f = |p: f64, rho: f64| -> Result<f64, String> {
        let row = fidelity_sweep(ErrorModel::CorrelatedNormal, &[(p, rho)]).map_err(|e| e.to_string())?;
        ensure(!row[0].degenerate, || format!("degenerate at p = {p}, ρ = {rho}"))?;
        Ok(row[0].f_u)
    };
    let base = f(0.1, 0.0)?;
    for rho in [-1.0, -0.5, 0.5, 1.0] {
        let v = f(0.1, rho)?;
        ensure(base >= v, || format!("F_u(0) = {base} < F_u({rho}) = {v} at p = 0.1"))?;
    }
    let mut gaps = Vec::new();
    for rho in [0.5, 1.0] {
        let (plus, minus) = (f(0.15, rho)?, f(0.15, -rho)?);
        ensure(plus != minus, || format!("F_u(±{rho}) coincide at p = 0.15"))?;
        gaps.push(format!("{:.2e}", (plus - minus).abs()));
    }
    let (uncorrelated, correlated) = (f(0.02, 0.0)?, f(0.02, 1.0)?);
    let d = (uncorrelated - correlated).abs();
    ensure(d <= 0.01, || format!("|F_u(1) − F_u(0)| = {d} at p = 0.02"))?;
    Ok(format!("F_u(0) at p=0.1 is {base:.6}; asymmetry at p=0.15 [{}]; gap at p=0.02 {d:.4}", gaps.join(", ")))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Check); 9] = [
        (1, "Pauli correspondence", 1, pauli_correspondence),
        (2, "unitary equivalence of generator forms", 1, unitary_equivalence),
        (3, "Choi cross-construction", 5, choi_cross_construction),
        (4, "equivalence classes", 120, equivalence_classes),
        (5, "exceptional-point behavior", 1, exceptional_points),
        (6, "two-qubit closed form", 10, two_qubit_closed_form),
        (7, "Monte-Carlo oracle", 120, monte_carlo_oracle),
        (8, "distillation checkpoints", 60, distillation_checkpoints),
        (9, "fidelity sweep properties", 120, fidelity_sweeps),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {:.2}s, limit {limit}s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS {n}. {name} [{:.2}s / {limit}s]: {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {n}. {name} [{:.2}s / {limit}s]: {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
