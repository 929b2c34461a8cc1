//! End-to-end certification runs and noise sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{
    self, build_graph_inequality, cluster_inequality, ghz_inequality, optimal_settings,
    ring_inequality, BellError, BellInequality, Bounds, MeasurementAssignment, StateFamily,
    QUANTUM_BOUND_TOL,
};
use crate::fidelity::{self, FidelityDecomposition, FidelityError};
use crate::format::{format_float, to_report_json};
use crate::graph::{Graph, GraphError, StabilizerGenerator};
use crate::sim::{derive_seed, Estimate, QuantumState, StateError};

/// Bisection resolution for threshold crossings.
pub const CROSSING_TOL: f64 = 1e-9;

/// Standard errors of slack granted before a sampled value counts as
/// exceeding the quantum bound.
pub const SAMPLED_SIGMA: f64 = 4.0;

/// Statement attached to a self-tested verdict.
pub const SELF_TEST_STATEMENT: &str = "fidelity with the target state exceeds 0.5";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid noise spec {0:?}")]
    InvalidNoise(String),
    #[error("invalid grid {0:?}")]
    InvalidGrid(String),
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("no {family} target with {n} qubits")]
    UnsupportedFamily { family: &'static str, n: usize },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
}

impl FromStr for StateFamily {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ghz" => Ok(StateFamily::Ghz),
            "cluster" | "linear-cluster" => Ok(StateFamily::LinearCluster),
            "ring" => Ok(StateFamily::Ring),
            "custom-graph" | "graph" => Ok(StateFamily::CustomGraph),
            _ => Err(CertifyError::UnknownFamily(s.into())),
        }
    }
}

/// Noise model without its parameter, used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    White,
    DepolarizeEach,
}

impl NoiseModel {
    pub fn with_parameter(self, p: f64) -> Result<NoiseSpec, CertifyError> {
        let spec = match self {
            NoiseModel::None => NoiseSpec::None,
            NoiseModel::White => NoiseSpec::White(p),
            NoiseModel::DepolarizeEach => NoiseSpec::DepolarizeEach(p),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FromStr for NoiseModel {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(NoiseModel::None),
            "white" => Ok(NoiseModel::White),
            "depol" | "depolarize-each" => Ok(NoiseModel::DepolarizeEach),
            _ => Err(CertifyError::InvalidNoise(s.into())),
        }
    }
}

/// Noise applied to the ideal target before measurement.
///
/// `White(v)` keeps weight `v` on the target and mixes in `(1-v) I/2^N`;
/// `DepolarizeEach(p)` applies a depolarizing channel of strength `p` to
/// every qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    White(f64),
    DepolarizeEach(f64),
}

impl NoiseSpec {
    pub fn model(&self) -> NoiseModel {
        match self {
            NoiseSpec::None => NoiseModel::None,
            NoiseSpec::White(_) => NoiseModel::White,
            NoiseSpec::DepolarizeEach(_) => NoiseModel::DepolarizeEach,
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            NoiseSpec::None => None,
            NoiseSpec::White(p) | NoiseSpec::DepolarizeEach(p) => Some(p),
        }
    }

    pub fn validate(&self) -> Result<(), CertifyError> {
        match self.parameter() {
            Some(p) if !(0.0..=1.0).contains(&p) => {
                Err(CertifyError::InvalidNoise(self.to_string()))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState, CertifyError> {
        self.validate()?;
        Ok(match *self {
            NoiseSpec::None => state.clone(),
            NoiseSpec::White(v) => state.white_noise(v)?,
            NoiseSpec::DepolarizeEach(p) => state.depolarize_all(p)?,
        })
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSpec::None => f.write_str("none"),
            NoiseSpec::White(v) => write!(f, "white:{v}"),
            NoiseSpec::DepolarizeEach(p) => write!(f, "depol:{p}"),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = CertifyError;

    /// `none`, `white:<v>` or `depol:<p>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CertifyError::InvalidNoise(s.into());
        let (model, param) = match s.split_once(':') {
            Some((m, p)) => (m, Some(p)),
            None => (s, None),
        };
        let model: NoiseModel = model.parse().map_err(|_| bad())?;
        let spec = match (model, param) {
            (NoiseModel::None, None) => NoiseSpec::None,
            (NoiseModel::None, Some(_)) | (_, None) => return Err(bad()),
            (m, Some(p)) => {
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                m.with_parameter(p).map_err(|_| bad())?
            }
        };
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct NoiseJson {
    model: NoiseModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parameter: Option<f64>,
}

impl Serialize for NoiseSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NoiseJson {
            model: self.model(),
            parameter: self.parameter(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NoiseSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = NoiseJson::deserialize(deserializer)?;
        match (raw.model, raw.parameter) {
            (NoiseModel::None, None) => Ok(NoiseSpec::None),
            (m, Some(p)) if m != NoiseModel::None => m.with_parameter(p).map_err(D::Error::custom),
            _ => Err(D::Error::custom("noise parameter does not match model")),
        }
    }
}

/// Evenly spaced parameter values `start..=stop` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl ParameterGrid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self, CertifyError> {
        if steps == 0 {
            return Err(CertifyError::EmptyGrid);
        }
        let in_range = |x: f64| (0.0..=1.0).contains(&x);
        if !in_range(start) || !in_range(stop) || (steps == 1 && start != stop) {
            return Err(CertifyError::InvalidGrid(format!("{start}:{stop}:{steps}")));
        }
        Ok(ParameterGrid { start, stop, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.start + span * i as f64 / last)
            .collect()
    }
}

impl FromStr for ParameterGrid {
    type Err = CertifyError;

    /// `start:stop:steps`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CertifyError::InvalidGrid(s.into());
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, steps] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        ParameterGrid::new(start, stop, steps)
    }
}

/// Verdict tiers, from weakest to strongest evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoViolation,
    Nonlocal,
    SelfTested,
    /// Above the quantum bound: a bug or corrupted input.
    SupraQuantum,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::NoViolation => "no-violation",
            Verdict::Nonlocal => "nonlocal",
            Verdict::SelfTested => "self-tested",
            Verdict::SupraQuantum => "supra-quantum",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn self_test_verdict(beta: f64, bounds: &Bounds) -> Result<Verdict, CertifyError> {
    self_test_verdict_with_tolerance(beta, bounds, QUANTUM_BOUND_TOL)
}

/// `tolerance` only widens the supra-quantum check.
pub fn self_test_verdict_with_tolerance(
    beta: f64,
    bounds: &Bounds,
    tolerance: f64,
) -> Result<Verdict, CertifyError> {
    bounds.validate()?;
    Ok(if beta <= bounds.classical {
        Verdict::NoViolation
    } else if beta > bounds.quantum + tolerance {
        Verdict::SupraQuantum
    } else if bounds.nontrivial.is_some_and(|b| beta > b) {
        Verdict::SelfTested
    } else {
        Verdict::Nonlocal
    })
}

/// What to certify: a named family at size `n`, or an arbitrary graph state.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Family(StateFamily, usize),
    Graph(Graph),
}

impl Target {
    pub fn family(&self) -> StateFamily {
        match self {
            Target::Family(f, _) => *f,
            Target::Graph(_) => StateFamily::CustomGraph,
        }
    }

    pub fn qubit_count(&self) -> usize {
        match self {
            Target::Family(_, n) => *n,
            Target::Graph(g) => g.vertex_count(),
        }
    }

    /// Inequality and optimal settings for the target.
    pub fn inequality(&self) -> Result<(BellInequality, MeasurementAssignment), CertifyError> {
        Ok(match self {
            Target::Family(StateFamily::Ghz, n) => {
                (ghz_inequality(*n)?, MeasurementAssignment::standard(*n, 1))
            }
            Target::Family(StateFamily::Ring, n) => {
                (ring_inequality(*n)?, optimal_settings(&Graph::ring(*n)?))
            }
            Target::Family(StateFamily::LinearCluster, n) => {
                if !matches!(n, 3 | 4) {
                    return Err(CertifyError::UnsupportedFamily {
                        family: "linear-cluster",
                        n: *n,
                    });
                }
                cluster_inequality(*n)?
            }
            Target::Family(StateFamily::CustomGraph, n) => {
                return Err(CertifyError::UnsupportedFamily {
                    family: "custom-graph",
                    n: *n,
                })
            }
            Target::Graph(g) => (build_graph_inequality(g)?, optimal_settings(g)),
        })
    }

    /// The ideal pure target state.
    pub fn ideal_state(&self) -> Result<QuantumState, CertifyError> {
        Ok(match self {
            Target::Family(StateFamily::Ghz, n) => QuantumState::ghz(*n)?,
            Target::Family(StateFamily::Ring, n) => QuantumState::graph_state(&Graph::ring(*n)?)?,
            Target::Family(StateFamily::LinearCluster, n) => QuantumState::cluster_linear(*n)?,
            Target::Family(StateFamily::CustomGraph, n) => {
                return Err(CertifyError::UnsupportedFamily {
                    family: "custom-graph",
                    n: *n,
                })
            }
            Target::Graph(g) => QuantumState::graph_state(g)?,
        })
    }

    /// Measurable fidelity decomposition of the target projector.
    pub fn fidelity_decomposition(&self) -> Result<FidelityDecomposition, CertifyError> {
        Ok(match self {
            Target::Family(StateFamily::Ghz, n) => fidelity::ghz_fidelity_decomposition(*n)?,
            Target::Family(StateFamily::LinearCluster, n) => {
                fidelity::stabilizer_fidelity_decomposition(&cluster_generators(*n)?)?
            }
            Target::Family(StateFamily::Ring, n) => {
                fidelity::stabilizer_fidelity_decomposition(&Graph::ring(*n)?.stabilizers())?
            }
            Target::Family(StateFamily::CustomGraph, n) => {
                return Err(CertifyError::UnsupportedFamily {
                    family: "custom-graph",
                    n: *n,
                })
            }
            Target::Graph(g) => fidelity::stabilizer_fidelity_decomposition(&g.stabilizers())?,
        })
    }
}

/// Stabilizer generators of [`QuantumState::cluster_linear`].
pub fn cluster_generators(n: usize) -> Result<Vec<StabilizerGenerator>, CertifyError> {
    let list: &[&str] = match n {
        3 => &["XZI", "ZXZ", "IZX"],
        4 => &["XXZI", "ZZII", "IZXX", "IIZZ"],
        _ => {
            return Err(CertifyError::UnsupportedFamily {
                family: "linear-cluster",
                n,
            })
        }
    };
    Ok(list
        .iter()
        .map(|g| g.parse().expect("valid generator literal"))
        .collect())
}

/// Precomputed pieces shared by every evaluation of one target.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub target: Target,
    pub inequality: BellInequality,
    pub settings: MeasurementAssignment,
    pub ideal: QuantumState,
    pub decomposition: FidelityDecomposition,
}

/// Bell value, fidelity and verdict for one noisy state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub beta: Estimate,
    pub fidelity: Estimate,
    pub verdict: Verdict,
}

impl Pipeline {
    pub fn new(target: Target) -> Result<Self, CertifyError> {
        let (inequality, settings) = target.inequality()?;
        let ideal = target.ideal_state()?;
        let decomposition = target.fidelity_decomposition()?;
        Ok(Pipeline {
            target,
            inequality,
            settings,
            ideal,
            decomposition,
        })
    }

    pub fn bounds(&self) -> Bounds {
        self.inequality.bounds()
    }

    pub fn exact_beta(&self, noise: &NoiseSpec) -> Result<f64, CertifyError> {
        let state = noise.apply(&self.ideal)?;
        Ok(bell::evaluate(&self.inequality, &self.settings, &state)?)
    }

    /// Exact values when `shots` is `None`; otherwise Born-sampled
    /// statistics with `shots` per joint setting.
    pub fn measure(
        &self,
        noise: &NoiseSpec,
        shots: Option<u64>,
        seed: u64,
    ) -> Result<Measurement, CertifyError> {
        let state = noise.apply(&self.ideal)?;
        let (beta, fidelity) = match shots {
            None => (
                Estimate {
                    value: bell::evaluate(&self.inequality, &self.settings, &state)?,
                    stderr: 0.0,
                },
                Estimate {
                    value: fidelity::fidelity_exact(&state, &self.ideal)?,
                    stderr: 0.0,
                },
            ),
            Some(s) => {
                let bt = bell::measure_tallies(
                    &self.inequality,
                    &self.settings,
                    &state,
                    Some(s),
                    derive_seed(seed, 0),
                )?;
                let ft = fidelity::measure_tallies(
                    &self.decomposition,
                    &state,
                    Some(s),
                    derive_seed(seed, 1),
                )?;
                (
                    bell::estimate_from_counts(&self.inequality, &self.settings, &bt)?,
                    fidelity::fidelity_from_counts(&self.decomposition, &ft)?,
                )
            }
        };
        let tolerance = QUANTUM_BOUND_TOL + SAMPLED_SIGMA * beta.stderr;
        let verdict = self_test_verdict_with_tolerance(beta.value, &self.bounds(), tolerance)?;
        Ok(Measurement {
            beta,
            fidelity,
            verdict,
        })
    }
}

/// Shot count in a report: a number or `"exact"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    PerSetting(u64),
}

impl Shots {
    pub fn as_option(self) -> Option<u64> {
        match self {
            Shots::Exact => None,
            Shots::PerSetting(s) => Some(s),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => serializer.serialize_str("exact"),
            Shots::PerSetting(s) => serializer.serialize_u64(*s),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Label(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Count(0) => Err(D::Error::custom("shots must be positive")),
            Raw::Count(s) => Ok(Shots::PerSetting(s)),
            Raw::Label(l) if l == "exact" => Ok(Shots::Exact),
            Raw::Label(l) => Err(D::Error::custom(format!("unknown shots value {l:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl From<Estimate> for ReportEstimate {
    fn from(e: Estimate) -> Self {
        ReportEstimate {
            value: e.value,
            stderr: e.stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub state_family: StateFamily,
    #[serde(rename = "n")]
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    pub noise: NoiseSpec,
    pub shots: Shots,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub beta: ReportEstimate,
    pub fidelity: ReportEstimate,
    pub bounds: Bounds,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
}

impl CertificationReport {
    /// Pretty JSON with floats at 12 significant digits.
    pub fn to_json(&self) -> String {
        to_report_json(self)
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} N={} beta={} ± {} fidelity={} ± {} verdict={}",
            self.state_family.name(),
            self.qubits,
            format_float(self.beta.value),
            format_float(self.beta.stderr),
            format_float(self.fidelity.value),
            format_float(self.fidelity.stderr),
            self.verdict
        );
        if let Some(st) = &self.statement {
            s.push_str(&format!(" ({st})"));
        }
        s
    }
}

/// Prepares the noisy target, measures it and assembles the report. In
/// exact mode the seed is ignored and omitted from the report.
pub fn run_certification(
    target: &Target,
    noise: &NoiseSpec,
    shots: Shots,
    seed: u64,
) -> Result<CertificationReport, CertifyError> {
    let pipeline = Pipeline::new(target.clone())?;
    let m = pipeline.measure(noise, shots.as_option(), seed)?;
    Ok(CertificationReport {
        state_family: target.family(),
        qubits: target.qubit_count(),
        graph: match target {
            Target::Graph(g) => Some(g.to_text()),
            Target::Family(..) => None,
        },
        noise: *noise,
        shots,
        seed: shots.as_option().map(|_| seed),
        beta: m.beta.into(),
        fidelity: m.fidelity.into(),
        bounds: pipeline.bounds(),
        verdict: m.verdict,
        statement: (m.verdict == Verdict::SelfTested).then(|| SELF_TEST_STATEMENT.to_string()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub fidelity: ReportEstimate,
    pub beta: ReportEstimate,
    pub verdict: Verdict,
}

/// Which bound a crossing refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossedBound {
    BetaB,
    BetaC,
}

impl CrossedBound {
    pub fn name(self) -> &'static str {
        match self {
            CrossedBound::BetaB => "beta_b",
            CrossedBound::BetaC => "beta_c",
        }
    }
}

/// Noise parameter at which the exact Bell value equals a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub bound: CrossedBound,
    pub level: f64,
    pub parameter: f64,
    /// Exact fidelity with the target at the crossing.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub state_family: StateFamily,
    #[serde(rename = "n")]
    pub qubits: usize,
    pub model: NoiseModel,
    pub shots: Shots,
    pub bounds: Bounds,
    pub points: Vec<SweepPoint>,
    pub crossings: Vec<Crossing>,
}

impl SweepResult {
    /// CSV series followed by `# crossing` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,fidelity,fidelity_err,beta,beta_err,verdict\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_float(p.parameter),
                format_float(p.fidelity.value),
                format_float(p.fidelity.stderr),
                format_float(p.beta.value),
                format_float(p.beta.stderr),
                p.verdict
            ));
        }
        for c in &self.crossings {
            out.push_str(&format!(
                "# crossing {} level={} parameter={} fidelity={}\n",
                c.bound.name(),
                format_float(c.level),
                format_float(c.parameter),
                format_float(c.fidelity)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        to_report_json(self)
    }
}

fn bisect(
    mut lo: f64,
    mut hi: f64,
    f: impl Fn(f64) -> Result<f64, CertifyError>,
) -> Result<f64, CertifyError> {
    let f_lo = f(lo)?;
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evaluates the target across `grid` under `model` and locates, by
/// bisection on the exact Bell value, every grid interval where it crosses
/// `β^B` or `β^C`. Points run in parallel; point `i` samples with a seed
/// derived from `seed` and `i`.
pub fn noise_sweep(
    target: &Target,
    model: NoiseModel,
    grid: &ParameterGrid,
    shots: Shots,
    seed: u64,
) -> Result<SweepResult, CertifyError> {
    if model == NoiseModel::None {
        return Err(CertifyError::InvalidNoise("none".into()));
    }
    let pipeline = Pipeline::new(target.clone())?;
    let params = grid.points();
    let points = params
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let m = pipeline.measure(
                &model.with_parameter(p)?,
                shots.as_option(),
                derive_seed(seed, i as u64),
            )?;
            Ok(SweepPoint {
                parameter: p,
                fidelity: m.fidelity.into(),
                beta: m.beta.into(),
                verdict: m.verdict,
            })
        })
        .collect::<Result<Vec<_>, CertifyError>>()?;

    let bounds = pipeline.bounds();
    let exact: Vec<f64> = match shots {
        Shots::Exact => points.iter().map(|p| p.beta.value).collect(),
        Shots::PerSetting(_) => params
            .par_iter()
            .map(|&p| pipeline.exact_beta(&model.with_parameter(p)?))
            .collect::<Result<_, CertifyError>>()?,
    };
    let mut crossings = Vec::new();
    let levels = [
        (CrossedBound::BetaB, bounds.nontrivial),
        (CrossedBound::BetaC, Some(bounds.classical)),
    ];
    for (which, level) in levels {
        let Some(level) = level else { continue };
        for w in 0..params.len().saturating_sub(1) {
            let (a, b) = (exact[w] - level, exact[w + 1] - level);
            if a == 0.0 || (a > 0.0) == (b > 0.0) {
                continue;
            }
            let parameter = bisect(params[w], params[w + 1], |p| {
                Ok(pipeline.exact_beta(&model.with_parameter(p)?)? - level)
            })?;
            let state = model.with_parameter(parameter)?.apply(&pipeline.ideal)?;
            let fidelity = fidelity::fidelity_exact(&state, &pipeline.ideal)?;
            crossings.push(Crossing {
                bound: which,
                level,
                parameter,
                fidelity,
            });
        }
        // exact hits on grid points count as crossings too
        for (w, &e) in exact.iter().enumerate() {
            if e == level {
                let state = model.with_parameter(params[w])?.apply(&pipeline.ideal)?;
                let fidelity = fidelity::fidelity_exact(&state, &pipeline.ideal)?;
                crossings.push(Crossing {
                    bound: which,
                    level,
                    parameter: params[w],
                    fidelity,
                });
            }
        }
    }

    Ok(SweepResult {
        state_family: target.family(),
        qubits: target.qubit_count(),
        model,
        shots,
        bounds,
        points,
        crossings,
    })
}

/// Classical bound of the target's inequality by the registry formula and,
/// optionally, by exhaustive enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    pub state_family: StateFamily,
    #[serde(rename = "n")]
    pub qubits: usize,
    pub bounds: Bounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated_classical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

pub fn bound_table(target: &Target, brute_force: bool) -> Result<BoundTable, CertifyError> {
    let (inequality, _) = target.inequality()?;
    let bounds = inequality.bounds();
    let enumerated = if brute_force {
        Some(bell::brute_force_classical_bound(&inequality)?)
    } else {
        None
    };
    Ok(BoundTable {
        state_family: target.family(),
        qubits: target.qubit_count(),
        bounds,
        enumerated_classical: enumerated,
        agree: enumerated.map(|e| (e - bounds.classical).abs() < 1e-9),
    })
}
