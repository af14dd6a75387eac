use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::de::{self, DeserializeOwned};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::channel1q::{self, NormalParams1Q};
use crate::channel2q::{
    self, correlated_normal_ptm, correlated_pauli_ptm, CorrelatedPauliParams, IsotropicNormalParams, Matrix6,
    NormalParams2Q, Vector6,
};
use crate::choi::ChoiMatrix;
use crate::distill::ErrorModel;
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_K_MAX;

/// Largest isotropic error probability accepted by the sweeps.
pub const MAX_PROBABILITY: f64 = 0.25;

fn field_err(field: impl Into<String>, e: impl std::fmt::Display) -> Error {
    Error::Config { field: field.into(), message: e.to_string() }
}

/// Input of one run. The `command` tag selects the subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Ptm(PtmConfig),
    Choi(ChoiConfig),
    EquivScan(EquivScanConfig),
    EigTrace(EigTraceConfig),
    Distill(DistillConfig),
    Validate(ValidateConfig),
}

// Derived internally tagged enums buffer their content and lose the path of a
// failing field, so the tag is split off by hand and the body deserialized
// with path tracking. Inner paths travel in the message behind `NESTED`.
const NESTED: &str = "\u{1}nested field `";

fn nested<E: de::Error>(e: serde_path_to_error::Error<serde_json::Error>) -> E {
    let path = e.path().to_string();
    let inner = e.into_inner().to_string();
    if path == "." {
        E::custom(inner)
    } else {
        E::custom(format!("{NESTED}{path}`: {inner}"))
    }
}

/// Joins the paths carried by `nested` messages onto `path`.
fn flatten_path(mut path: String, mut message: String) -> (String, String) {
    while let Some(rest) = message.strip_prefix(NESTED) {
        let Some((inner, msg)) = rest.split_once("`: ") else { break };
        path = if path.is_empty() || path == "." { inner.to_string() } else { format!("{path}.{inner}") };
        message = msg.to_string();
    }
    (path, message)
}

fn split_tag<'de, D: Deserializer<'de>>(d: D, tag: &'static str) -> std::result::Result<(String, Value), D::Error> {
    let mut map = serde_json::Map::<String, Value>::deserialize(d)?;
    match map.remove(tag) {
        Some(Value::String(name)) => Ok((name, Value::Object(map))),
        Some(_) => Err(de::Error::custom(format!("{NESTED}{tag}`: expected a string"))),
        None => Err(de::Error::missing_field(tag)),
    }
}

fn body<T: DeserializeOwned, E: de::Error>(v: Value) -> std::result::Result<T, E> {
    serde_path_to_error::deserialize(v).map_err(nested)
}

const COMMANDS: &[&str] = &["ptm", "choi", "equiv-scan", "eig-trace", "distill", "validate"];

impl<'de> Deserialize<'de> for RunConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (name, v) = split_tag(d, "command")?;
        Ok(match name.as_str() {
            "ptm" => Self::Ptm(body(v)?),
            "choi" => Self::Choi(body(v)?),
            "equiv-scan" => Self::EquivScan(body(v)?),
            "eig-trace" => Self::EigTrace(body(v)?),
            "distill" => Self::Distill(body(v)?),
            "validate" => Self::Validate(body(v)?),
            other => {
                return Err(de::Error::custom(format!(
                    "{NESTED}command`: {}",
                    <D::Error as de::Error>::unknown_variant(other, COMMANDS)
                )))
            }
        })
    }
}

impl RunConfig {
    /// Parses JSON, reporting the path of the offending field on failure, and
    /// revalidates all physical constraints.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let (path, message) = flatten_path(e.path().to_string(), e.into_inner().to_string());
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::Config { field, message }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ptm(_) => "ptm",
            Self::Choi(_) => "choi",
            Self::EquivScan(_) => "equiv-scan",
            Self::EigTrace(_) => "eig-trace",
            Self::Distill(_) => "distill",
            Self::Validate(_) => "validate",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ptm(c) => c.channel.validate("channel"),
            Self::Choi(c) => c.channel.validate("channel"),
            Self::EquivScan(c) => c.validate(),
            Self::EigTrace(c) => c.validate(),
            Self::Distill(c) => c.validate(),
            Self::Validate(c) => c.validate(),
        }
    }

    /// Seed recorded in the output, if the command is stochastic.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Validate(c) => Some(c.seed),
            _ => None,
        }
    }
}

/// Channel parameters. Matrices are given row by row.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ChannelSpec {
    #[serde(rename = "normal-1q")]
    Normal1Q { diffusion: [[f64; 3]; 3], drift: [f64; 3] },
    #[serde(rename = "normal-2q")]
    Normal2Q { diffusion: [[f64; 6]; 6], drift: [f64; 6] },
    /// Isotropic blocks `a1·1`, `a2·1` and cross block `ρ√(a1 a2)·1`.
    CorrelatedNormal { a1: f64, a2: f64, rho: f64 },
    CorrelatedPauli { p: f64, q: f64, m: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Normal1QFields {
    diffusion: [[f64; 3]; 3],
    drift: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Normal2QFields {
    diffusion: [[f64; 6]; 6],
    drift: [f64; 6],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelatedNormalFields {
    a1: f64,
    a2: f64,
    rho: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CorrelatedPauliFields {
    p: f64,
    q: f64,
    m: f64,
}

const MODELS: &[&str] = &["normal-1q", "normal-2q", "correlated-normal", "correlated-pauli"];

impl<'de> Deserialize<'de> for ChannelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (name, v) = split_tag(d, "model")?;
        Ok(match name.as_str() {
            "normal-1q" => {
                let f: Normal1QFields = body(v)?;
                Self::Normal1Q { diffusion: f.diffusion, drift: f.drift }
            }
            "normal-2q" => {
                let f: Normal2QFields = body(v)?;
                Self::Normal2Q { diffusion: f.diffusion, drift: f.drift }
            }
            "correlated-normal" => {
                let f: CorrelatedNormalFields = body(v)?;
                Self::CorrelatedNormal { a1: f.a1, a2: f.a2, rho: f.rho }
            }
            "correlated-pauli" => {
                let f: CorrelatedPauliFields = body(v)?;
                Self::CorrelatedPauli { p: f.p, q: f.q, m: f.m }
            }
            other => {
                return Err(de::Error::custom(format!(
                    "{NESTED}model`: {}",
                    <D::Error as de::Error>::unknown_variant(other, MODELS)
                )))
            }
        })
    }
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self::Normal1Q { diffusion: [[0.0; 3]; 3], drift: [0.0; 3] }
    }
}

/// A channel that admits a random-walk realisation.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalChannel {
    One(NormalParams1Q),
    Two(NormalParams2Q),
}

impl ChannelSpec {
    pub fn validate(&self, field: &str) -> Result<()> {
        match self {
            Self::CorrelatedPauli { p, q, m } => {
                CorrelatedPauliParams::new(*p, *q, *m).map_err(|e| field_err(field, e))?;
            }
            _ => {
                self.normal(field)?;
            }
        }
        Ok(())
    }

    /// `None` for the Pauli model, which is not generated by a drift and diffusion.
    pub fn normal(&self, field: &str) -> Result<Option<NormalChannel>> {
        let wrap = |e: Error| field_err(format!("{field}.diffusion"), e);
        Ok(Some(match self {
            Self::Normal1Q { diffusion, drift } => {
                let a = Matrix3::from_fn(|i, j| diffusion[i][j]);
                NormalChannel::One(NormalParams1Q::new(a, Vector3::from(*drift)).map_err(wrap)?)
            }
            Self::Normal2Q { diffusion, drift } => {
                let a = Matrix6::from_fn(|i, j| diffusion[i][j]);
                NormalChannel::Two(NormalParams2Q::new(a, Vector6::from(*drift)).map_err(wrap)?)
            }
            Self::CorrelatedNormal { a1, a2, rho } => NormalChannel::Two(
                IsotropicNormalParams::new(*a1, *a2, *rho).map_err(|e| field_err(field, e))?.to_params(),
            ),
            Self::CorrelatedPauli { .. } => return Ok(None),
        }))
    }

    pub fn qubits(&self) -> usize {
        match self {
            Self::Normal1Q { .. } => 1,
            _ => 2,
        }
    }

    /// Transfer matrix in the lexicographic Pauli basis, including the identity row.
    pub fn ptm(&self) -> Result<DMatrix<f64>> {
        Ok(match self {
            Self::CorrelatedNormal { a1, a2, rho } => {
                correlated_normal_ptm(&IsotropicNormalParams::new(*a1, *a2, *rho)?).lexicographic().clone()
            }
            Self::CorrelatedPauli { p, q, m } => {
                correlated_pauli_ptm(&CorrelatedPauliParams::new(*p, *q, *m)?).lexicographic().clone()
            }
            _ => match self.normal("channel")?.expect("normal model") {
                NormalChannel::One(p) => channel1q::ptm(&p).full(),
                NormalChannel::Two(p) => channel2q::ptm2(&p).lexicographic().clone(),
            },
        })
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        crate::pauli::ptm_to_choi(&self.ptm()?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PtmConfig {
    pub channel: ChannelSpec,
    pub include_choi: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChoiConfig {
    pub channel: ChannelSpec,
}

/// Scan of the plane `tr A = 1` of diagonal diffusion matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivScanConfig {
    /// Number of subdivisions of each simplex edge.
    pub grid: usize,
    pub drift_direction: [f64; 3],
    pub drift_magnitude: f64,
    pub k_max: u32,
}

impl Default for EquivScanConfig {
    fn default() -> Self {
        Self { grid: 40, drift_direction: [0.0, 0.0, 1.0], drift_magnitude: 1.0, k_max: DEFAULT_K_MAX }
    }
}

fn check_direction(field: &str, d: &[f64; 3]) -> Result<()> {
    let n = Vector3::from(*d).norm();
    if !n.is_finite() || n == 0.0 {
        return Err(field_err(field, "must be a finite non-zero vector"));
    }
    Ok(())
}

impl EquivScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(field_err("grid", format!("must be at least 2, got {}", self.grid)));
        }
        check_direction("drift_direction", &self.drift_direction)?;
        if !self.drift_magnitude.is_finite() || self.drift_magnitude < 0.0 {
            return Err(field_err("drift_magnitude", "must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn drift(&self) -> Vector3<f64> {
        let d = Vector3::from(self.drift_direction);
        d / d.norm() * self.drift_magnitude
    }
}

/// Eigenvalues of the generator as the drift grows along a fixed direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigTraceConfig {
    pub diffusion: [[f64; 3]; 3],
    /// Normalised before use.
    pub drift_direction: [f64; 3],
    pub max_magnitude: f64,
    pub points: usize,
}

impl Default for EigTraceConfig {
    fn default() -> Self {
        Self {
            diffusion: [[0.3, 0.0, 0.0], [0.0, 0.2, 0.0], [0.0, 0.0, 0.1]],
            drift_direction: [0.0, 0.0, 1.0],
            max_magnitude: 0.2,
            points: 201,
        }
    }
}

impl EigTraceConfig {
    pub fn validate(&self) -> Result<()> {
        NormalParams1Q::new(Matrix3::from_fn(|i, j| self.diffusion[i][j]), Vector3::zeros())
            .map_err(|e| field_err("diffusion", e))?;
        check_direction("drift_direction", &self.drift_direction)?;
        if !self.max_magnitude.is_finite() || self.max_magnitude < 0.0 {
            return Err(field_err("max_magnitude", "must be finite and non-negative"));
        }
        if self.points < 2 {
            return Err(field_err("points", format!("must be at least 2, got {}", self.points)));
        }
        Ok(())
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        evenly_spaced(0.0, self.max_magnitude, self.points)
    }
}

pub fn evenly_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Fidelity table on the cartesian product `p_values × correlations`, `p` major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistillConfig {
    pub model: ErrorModel,
    pub p_values: Vec<f64>,
    pub correlations: Vec<f64>,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            model: ErrorModel::CorrelatedNormal,
            p_values: evenly_spaced(0.0, MAX_PROBABILITY, 26),
            correlations: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
        }
    }
}

impl DistillConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() {
            return Err(field_err("p_values", "must not be empty"));
        }
        if self.correlations.is_empty() {
            return Err(field_err("correlations", "must not be empty"));
        }
        for (i, p) in self.p_values.iter().enumerate() {
            if !(0.0..=MAX_PROBABILITY).contains(p) {
                return Err(field_err(format!("p_values[{i}]"), format!("must lie in [0, 1/4], got {p}")));
            }
        }
        let range = match self.model {
            ErrorModel::CorrelatedPauli => 0.0..=1.0,
            ErrorModel::CorrelatedNormal => -1.0..=1.0,
        };
        for (i, c) in self.correlations.iter().enumerate() {
            if !range.contains(c) {
                return Err(field_err(
                    format!("correlations[{i}]"),
                    format!("must lie in [{}, {}] for this model, got {c}", range.start(), range.end()),
                ));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.p_values
            .iter()
            .flat_map(|&p| self.correlations.iter().map(move |&c| (p, c)))
            .collect()
    }
}

/// Random-walk checks of the closed forms. Check `i` uses seed `seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub samples: usize,
    pub steps: usize,
    pub seed: u64,
    pub sigmas: f64,
    pub checks: Vec<ChannelSpec>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        let m3 = |d: [f64; 3]| [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]];
        let blocks = {
            let mut a = [[0.0; 6]; 6];
            let a1 = [[0.3, 0.05, 0.0], [0.05, 0.2, 0.0], [0.0, 0.0, 0.1]];
            let a2 = [[0.1, 0.0, 0.0], [0.0, 0.25, -0.05], [0.0, -0.05, 0.15]];
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] = a1[i][j];
                    a[i + 3][j + 3] = a2[i][j];
                }
            }
            a
        };
        Self {
            samples: 100_000,
            steps: 100,
            seed: 1,
            sigmas: 3.0,
            checks: vec![
                ChannelSpec::Normal1Q { diffusion: m3([0.3, 0.2, 0.1]), drift: [0.0; 3] },
                ChannelSpec::Normal1Q { diffusion: m3([0.2, 0.2, 0.2]), drift: [0.0, 0.0, 1.0] },
                ChannelSpec::Normal1Q {
                    diffusion: [[0.4, 0.1, -0.05], [0.1, 0.3, 0.08], [-0.05, 0.08, 0.2]],
                    drift: [0.3, -0.4, 0.5],
                },
                ChannelSpec::Normal1Q { diffusion: [[0.0; 3]; 3], drift: [0.3, -0.2, 0.5] },
                ChannelSpec::CorrelatedNormal { a1: 0.4, a2: 0.4, rho: 1.0 },
                ChannelSpec::CorrelatedNormal { a1: 0.3, a2: 0.5, rho: 0.5 },
                ChannelSpec::Normal2Q { diffusion: blocks, drift: [0.2, 0.0, -0.1, 0.0, 0.3, 0.1] },
            ],
        }
    }
}

impl ValidateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < channel1q::MIN_SAMPLES {
            return Err(field_err("samples", format!("must be at least {}", channel1q::MIN_SAMPLES)));
        }
        if self.steps < channel1q::MIN_STEPS {
            return Err(field_err("steps", format!("must be at least {}", channel1q::MIN_STEPS)));
        }
        if !(self.sigmas.is_finite() && self.sigmas > 0.0) {
            return Err(field_err("sigmas", "must be positive"));
        }
        for (i, c) in self.checks.iter().enumerate() {
            let field = format!("checks[{i}]");
            if c.normal(&field)?.is_none() {
                return Err(field_err(format!("{field}.model"), "has no random-walk realisation"));
            }
        }
        Ok(())
    }
}
