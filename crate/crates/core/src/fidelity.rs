//! Fidelity estimation from locally measurable decompositions of a target
//! projector.
//!
//! A decomposition is a weighted sum of terms, each the expectation of
//! something a product measurement can see: a Pauli string, a product of
//! arbitrary local observables, or a sum of computational-basis outcome
//! probabilities. Every decomposition carries the joint settings from which
//! all of its terms can be marginalized.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::StabilizerGenerator;
use crate::pauli::{Pauli, PauliString, PauliTerm};
use crate::sim::{
    born_sample, derive_seed, Estimate, LocalObservable, QuantumState, StateError, Tally,
    MAX_PURE_QUBITS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FidelityError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("{what} requires at least {min} qubits, got {n}")]
    TooFewQubits {
        what: &'static str,
        n: usize,
        min: usize,
    },
    #[error("expected {expected} generators of length {expected}, got {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(String, String),
    #[error("generators are not independent")]
    Dependent,
    #[error("generator {0} has a non-Hermitian phase")]
    BadPhase(String),
    #[error("term or setting length {found} does not match {expected} qubits")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no joint setting covers term {0}")]
    MissingSetting(String),
    #[error("tally for setting {0} has zero shots")]
    ZeroShots(usize),
    #[error("decomposition JSON: {0}")]
    Json(String),
}

/// One measurable term of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DecompositionTerm {
    Pauli(PauliTerm),
    /// `coeff · ⟨A_1 ⊗ … ⊗ A_N⟩`
    Product {
        coeff: f64,
        observables: Vec<LocalObservable>,
    },
    /// `coeff · Σ_b P(b)` over computational-basis outcomes, written as
    /// `0`/`1` strings with qubit 1 first.
    Projector {
        coeff: f64,
        projector: Vec<String>,
    },
}

impl DecompositionTerm {
    pub fn coefficient(&self) -> f64 {
        match self {
            DecompositionTerm::Pauli(t) => t.coefficient,
            DecompositionTerm::Product { coeff, .. }
            | DecompositionTerm::Projector { coeff, .. } => *coeff,
        }
    }

    fn qubits(&self) -> Option<usize> {
        match self {
            DecompositionTerm::Pauli(t) => Some(t.len()),
            DecompositionTerm::Product { observables, .. } => Some(observables.len()),
            DecompositionTerm::Projector { projector, .. } => projector.first().map(String::len),
        }
    }

    fn label(&self) -> String {
        match self {
            DecompositionTerm::Pauli(t) => t.letters.to_string(),
            DecompositionTerm::Product { observables, .. } => {
                serde_json::to_string(observables).expect("observables serialize")
            }
            DecompositionTerm::Projector { projector, .. } => format!("P[{}]", projector.join(",")),
        }
    }

    /// Per-qubit observables the term needs; `None` where any setting will do.
    fn requirements(&self) -> Vec<Option<LocalObservable>> {
        match self {
            DecompositionTerm::Pauli(t) => t
                .letters
                .letters()
                .iter()
                .map(|&p| LocalObservable::from_pauli(p))
                .collect(),
            DecompositionTerm::Product { observables, .. } => {
                observables.iter().copied().map(Some).collect()
            }
            DecompositionTerm::Projector { projector, .. } => {
                vec![Some(LocalObservable::Z); projector.first().map_or(0, String::len)]
            }
        }
    }

    fn covered_by(&self, setting: &[LocalObservable]) -> bool {
        let req = self.requirements();
        req.len() == setting.len()
            && req
                .iter()
                .zip(setting)
                .all(|(r, s)| r.is_none_or(|r| r.approx_eq(s, 1e-12)))
    }

    fn projector_indices(&self) -> Vec<usize> {
        match self {
            DecompositionTerm::Projector { projector, .. } => projector
                .iter()
                .map(|b| usize::from_str_radix(b, 2).expect("validated bit string"))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn party_mask(&self) -> usize {
        let req = self.requirements();
        let n = req.len();
        req.iter()
            .enumerate()
            .filter(|(_, r)| r.is_some())
            .fold(0, |m, (k, _)| m | 1 << (n - 1 - k))
    }

    /// Exact expectation of the (unweighted) term on `state`.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64, FidelityError> {
        Ok(match self {
            DecompositionTerm::Pauli(t) => {
                state.expectation(&PauliTerm::new(t.letters.clone(), 1.0))?
            }
            DecompositionTerm::Product { observables, .. } => {
                let obs: Vec<_> = observables.iter().copied().map(Some).collect();
                state.correlator(&obs)?
            }
            DecompositionTerm::Projector { .. } => {
                let probs =
                    state.outcome_probabilities(&vec![LocalObservable::Z; state.qubit_count()])?;
                self.projector_indices().iter().map(|&i| probs[i]).sum()
            }
        })
    }
}

/// Weighted terms summing to a target projector, plus joint settings that
/// cover every term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityDecomposition {
    #[serde(skip)]
    qubits: usize,
    terms: Vec<DecompositionTerm>,
    #[serde(rename = "settings")]
    joint_settings: Vec<Vec<LocalObservable>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionJson {
    terms: Vec<DecompositionTerm>,
    settings: Vec<Vec<LocalObservable>>,
}

impl<'de> Deserialize<'de> for FidelityDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DecompositionJson::deserialize(deserializer)?;
        FidelityDecomposition::new(raw.terms, raw.settings).map_err(serde::de::Error::custom)
    }
}

impl FidelityDecomposition {
    /// Validates term shapes and that every term is covered by a setting.
    pub fn new(
        terms: Vec<DecompositionTerm>,
        joint_settings: Vec<Vec<LocalObservable>>,
    ) -> Result<Self, FidelityError> {
        let qubits = terms
            .first()
            .and_then(DecompositionTerm::qubits)
            .unwrap_or(0);
        if qubits == 0 {
            return Err(FidelityError::TooFewQubits {
                what: "a decomposition",
                n: 0,
                min: 1,
            });
        }
        if qubits > MAX_PURE_QUBITS {
            return Err(StateError::SizeCap {
                n: qubits,
                cap: MAX_PURE_QUBITS,
            }
            .into());
        }
        for t in &terms {
            if !t.coefficient().is_finite() {
                return Err(FidelityError::Json(format!(
                    "non-finite coefficient in {}",
                    t.label()
                )));
            }
            if let DecompositionTerm::Projector { projector, .. } = t {
                if projector
                    .iter()
                    .any(|b| b.len() != qubits || !b.chars().all(|c| c == '0' || c == '1'))
                {
                    return Err(FidelityError::Json(format!(
                        "bad projector outcome in {}",
                        t.label()
                    )));
                }
            }
            let found = t.qubits().unwrap_or(0);
            if found != qubits {
                return Err(FidelityError::LengthMismatch {
                    expected: qubits,
                    found,
                });
            }
        }
        for s in &joint_settings {
            if s.len() != qubits {
                return Err(FidelityError::LengthMismatch {
                    expected: qubits,
                    found: s.len(),
                });
            }
        }
        for t in &terms {
            if !joint_settings.iter().any(|s| t.covered_by(s)) {
                return Err(FidelityError::MissingSetting(t.label()));
            }
        }
        Ok(FidelityDecomposition {
            qubits,
            terms,
            joint_settings,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[DecompositionTerm] {
        &self.terms
    }

    pub fn joint_settings(&self) -> &[Vec<LocalObservable>] {
        &self.joint_settings
    }

    /// Exact `Σ c ⟨term⟩` on `state`; equals the fidelity with the target.
    pub fn expectation(&self, state: &QuantumState) -> Result<f64, FidelityError> {
        if state.qubit_count() != self.qubits {
            return Err(FidelityError::LengthMismatch {
                expected: self.qubits,
                found: state.qubit_count(),
            });
        }
        self.terms.iter().try_fold(0.0, |acc, t| {
            Ok(acc + t.coefficient() * t.expectation(state)?)
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, FidelityError> {
        serde_json::from_str(text).map_err(|e| FidelityError::Json(e.to_string()))
    }
}

/// `½ P^N + (1/2N) Σ_k (-1)^k M_k` with `P^N = |0…0⟩⟨0…0| + |1…1⟩⟨1…1|` and
/// `M_k = [cos(kπ/N) X + sin(kπ/N) Y]^⊗N`. Settings: computational basis,
/// then one equatorial setting per `M_k`.
pub fn ghz_fidelity_decomposition(n: usize) -> Result<FidelityDecomposition, FidelityError> {
    if n < 2 {
        return Err(FidelityError::TooFewQubits {
            what: "the GHZ decomposition",
            n,
            min: 2,
        });
    }
    let mut terms = vec![DecompositionTerm::Projector {
        coeff: 0.5,
        projector: vec!["0".repeat(n), "1".repeat(n)],
    }];
    let mut settings = vec![vec![LocalObservable::Z; n]];
    for k in 0..n {
        let angle = k as f64 * PI / n as f64;
        let obs = LocalObservable::from_direction(angle.cos(), angle.sin(), 0.0)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(DecompositionTerm::Product {
            coeff: sign / (2 * n) as f64,
            observables: vec![obs; n],
        });
        settings.push(vec![obs; n]);
    }
    FidelityDecomposition::new(terms, settings)
}

fn gf2_rank(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

/// The stabilizer group of `N` commuting, independent generators, each
/// element weighted `sign / 2^N`. Signs come from Pauli multiplication.
pub fn stabilizer_group(
    generators: &[StabilizerGenerator],
) -> Result<Vec<PauliTerm>, FidelityError> {
    let n = generators.len();
    if n == 0 {
        return Err(FidelityError::TooFewQubits {
            what: "a stabilizer group",
            n: 0,
            min: 1,
        });
    }
    if n > MAX_PURE_QUBITS {
        return Err(StateError::SizeCap {
            n,
            cap: MAX_PURE_QUBITS,
        }
        .into());
    }
    for g in generators {
        if g.pauli.len() != n {
            return Err(FidelityError::GeneratorCount {
                expected: n,
                found: g.pauli.len(),
            });
        }
        if g.pauli.real_sign().is_none() || g.pauli.is_identity() || !matches!(g.sign, 1 | -1) {
            return Err(FidelityError::BadPhase(g.to_string()));
        }
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if !a.pauli.commutes_with(&b.pauli) {
                return Err(FidelityError::NonCommuting(a.to_string(), b.to_string()));
            }
        }
    }
    if gf2_rank(generators.iter().map(|g| g.pauli.symplectic()).collect()) < n {
        return Err(FidelityError::Dependent);
    }

    let scale = 1.0 / (1u64 << n) as f64;
    let signed: Vec<PauliString> = generators
        .iter()
        .map(|g| {
            let extra = if g.sign < 0 { 2 } else { 0 };
            g.pauli.clone().with_phase(g.pauli.phase() + extra)
        })
        .collect();
    (0u64..1 << n)
        .map(|subset| {
            let product = signed
                .iter()
                .enumerate()
                .filter(|(k, _)| subset >> k & 1 == 1)
                .fold(PauliString::identity(n), |acc, g| &acc * g.1);
            let sign = product
                .real_sign()
                .expect("commuting Hermitian product is Hermitian");
            Ok(PauliTerm::new(product.with_phase(0), sign as f64 * scale))
        })
        .collect()
}

/// Greedy qubit-wise-compatible grouping: heavier strings first, identities
/// act as wildcards, leftover wildcards are measured in Z.
pub fn group_pauli_settings(terms: &[PauliTerm]) -> Vec<Vec<LocalObservable>> {
    let mut order: Vec<&PauliTerm> = terms.iter().filter(|t| !t.letters.is_identity()).collect();
    order.sort_by_key(|t| std::cmp::Reverse(t.letters.weight()));
    let mut groups: Vec<Vec<Pauli>> = Vec::new();
    for t in order {
        let letters = t.letters.letters();
        let slot = groups.iter_mut().find(|g| {
            g.iter()
                .zip(letters)
                .all(|(a, b)| *a == Pauli::I || *b == Pauli::I || a == b)
        });
        match slot {
            Some(g) => g
                .iter_mut()
                .zip(letters)
                .filter(|(a, _)| **a == Pauli::I)
                .for_each(|(a, b)| *a = *b),
            None => groups.push(letters.to_vec()),
        }
    }
    if groups.is_empty() {
        groups.push(vec![Pauli::Z; terms.first().map_or(0, PauliTerm::len)]);
    }
    groups
        .into_iter()
        .map(|g| {
            g.into_iter()
                .map(|p| LocalObservable::from_pauli(p).unwrap_or(LocalObservable::Z))
                .collect()
        })
        .collect()
}

/// Projector onto the common +1 eigenspace of the generators, as a sum of
/// all stabilizer-group elements.
pub fn stabilizer_fidelity_decomposition(
    generators: &[StabilizerGenerator],
) -> Result<FidelityDecomposition, FidelityError> {
    let group = stabilizer_group(generators)?;
    let settings = group_pauli_settings(&group);
    FidelityDecomposition::new(
        group.into_iter().map(DecompositionTerm::Pauli).collect(),
        settings,
    )
}

/// `⟨target|ρ|target⟩`.
pub fn fidelity_exact(state: &QuantumState, target: &QuantumState) -> Result<f64, FidelityError> {
    Ok(state.fidelity_with_pure(target)?)
}

/// Outcome statistics for one joint setting of a fidelity measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTally {
    pub setting: Vec<LocalObservable>,
    pub tally: Tally,
}

/// One tally per joint setting of `d`, exact when `shots` is `None`.
pub fn measure_tallies(
    d: &FidelityDecomposition,
    state: &QuantumState,
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<FidelityTally>, FidelityError> {
    d.joint_settings
        .iter()
        .enumerate()
        .map(|(idx, setting)| {
            let tally = match shots {
                None => Tally::exact(state.outcome_probabilities(setting)?),
                Some(s) => Tally::from_counts(
                    &born_sample(state, setting, s, derive_seed(seed, idx as u64))?.counts,
                )?,
            };
            Ok(FidelityTally {
                setting: setting.clone(),
                tally,
            })
        })
        .collect()
}

/// Weighted sum of empirical term expectations, each marginalized from the
/// first covering tally; errors propagated as if terms were independent.
pub fn fidelity_from_counts(
    d: &FidelityDecomposition,
    tallies: &[FidelityTally],
) -> Result<Estimate, FidelityError> {
    for (i, t) in tallies.iter().enumerate() {
        if t.setting.len() != d.qubits {
            return Err(FidelityError::LengthMismatch {
                expected: d.qubits,
                found: t.setting.len(),
            });
        }
        if t.tally.shots == Some(0) {
            return Err(FidelityError::ZeroShots(i));
        }
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for term in &d.terms {
        let c = term.coefficient();
        let (mean, var) = if let DecompositionTerm::Pauli(p) = term {
            if p.letters.is_identity() {
                value += c;
                continue;
            }
            find_tally(term, tallies)?.parity_estimate(term.party_mask())
        } else if let DecompositionTerm::Projector { .. } = term {
            find_tally(term, tallies)?.probability_estimate(&term.projector_indices())
        } else {
            find_tally(term, tallies)?.parity_estimate(term.party_mask())
        };
        value += c * mean;
        variance += c * c * var;
    }
    Ok(Estimate {
        value,
        stderr: variance.sqrt(),
    })
}

fn find_tally<'a>(
    term: &DecompositionTerm,
    tallies: &'a [FidelityTally],
) -> Result<&'a Tally, FidelityError> {
    tallies
        .iter()
        .find(|t| term.covered_by(&t.setting))
        .map(|t| &t.tally)
        .ok_or_else(|| FidelityError::MissingSetting(term.label()))
}
