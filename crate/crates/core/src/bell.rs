//! Scalable Bell inequalities for graph states.
//!
//! An inequality is a list of weighted correlators. Each correlator picks,
//! for every party, one of two measurement settings or the identity. The
//! `(A_0 ± A_1)` composite factors of the graph construction are expanded
//! into separate terms when an inequality is built, so evaluation and
//! counting treat every term the same way.
//!
//! The distinguished ("pivot") party of the graph construction is the
//! lowest-indexed vertex of maximum degree. For stars and rings this is
//! vertex 1; the closed-form bounds `n_max + N - 1` and
//! `(2√2 - 1) n_max + N - 1` only hold when the pivot has maximum degree.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::pauli::{Pauli, PauliString, PauliTerm};
use crate::sim::{
    born_sample, check_permutation, derive_seed, gates, Estimate, LocalObservable, Matrix2,
    OutcomeCounts, QuantumState, StateError, Tally,
};

/// Largest party count accepted by [`brute_force_classical_bound`].
pub const MAX_BRUTE_FORCE_PARTIES: usize = 10;

/// Tolerance on an exact Bell value exceeding its quantum bound.
pub const QUANTUM_BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BellError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("{what} requires at least {min} parties, got {n}")]
    TooFewParties {
        what: &'static str,
        n: usize,
        min: usize,
    },
    #[error("{n} parties exceeds the enumeration cap of {cap}")]
    TooManyParties { n: usize, cap: usize },
    #[error("party count mismatch: inequality has {expected}, got {found}")]
    PartyMismatch { expected: usize, found: usize },
    #[error("invalid correlator term: {0}")]
    InvalidTerm(String),
    #[error("inconsistent bounds: {0}")]
    InconsistentBounds(String),
    #[error("no tally covers correlator {0}")]
    MissingSetting(String),
    #[error("tally for setting {0} was measured with different observables")]
    SettingMismatch(String),
    #[error("tally for setting {0} has zero shots")]
    ZeroShots(String),
    #[error("inequality JSON: {0}")]
    Json(String),
}

/// Per-party choice inside a correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    Zero,
    One,
    Identity,
}

impl Setting {
    pub fn to_char(self) -> char {
        match self {
            Setting::Zero => '0',
            Setting::One => '1',
            Setting::Identity => 'I',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(Setting::Zero),
            '1' => Some(Setting::One),
            'I' => Some(Setting::Identity),
            _ => None,
        }
    }

    fn index(self) -> Option<usize> {
        match self {
            Setting::Zero => Some(0),
            Setting::One => Some(1),
            Setting::Identity => None,
        }
    }
}

/// Formats a setting list with the one-character-per-party code, e.g. `"01I"`.
pub fn settings_code(settings: &[Setting]) -> String {
    settings.iter().map(|s| s.to_char()).collect()
}

pub fn parse_settings_code(code: &str) -> Result<Vec<Setting>, BellError> {
    code.chars()
        .map(|c| {
            Setting::from_char(c)
                .ok_or_else(|| BellError::InvalidTerm(format!("bad setting character {c:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTerm {
    pub coefficient: f64,
    pub settings: Vec<Setting>,
}

impl CorrelatorTerm {
    pub fn new(coefficient: f64, settings: Vec<Setting>) -> Self {
        CorrelatorTerm {
            coefficient,
            settings,
        }
    }

    fn party_mask(&self) -> usize {
        let n = self.settings.len();
        self.settings
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != Setting::Identity)
            .fold(0, |m, (k, _)| m | 1 << (n - 1 - k))
    }
}

impl fmt::Display for CorrelatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:+}<{}>",
            self.coefficient,
            settings_code(&self.settings)
        )
    }
}

/// Classical, quantum and (optionally) nontrivial self-testing bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "beta_c")]
    pub classical: f64,
    #[serde(rename = "beta_q")]
    pub quantum: f64,
    #[serde(rename = "beta_b", default, skip_serializing_if = "Option::is_none")]
    pub nontrivial: Option<f64>,
}

impl Bounds {
    /// Requires `β^C < β^Q` and, when present, `β^C < β^B ≤ β^Q`.
    pub fn validate(&self) -> Result<(), BellError> {
        let finite = self.classical.is_finite()
            && self.quantum.is_finite()
            && self.nontrivial.is_none_or(f64::is_finite);
        if !finite {
            return Err(BellError::InconsistentBounds("non-finite bound".into()));
        }
        if self.classical >= self.quantum {
            return Err(BellError::InconsistentBounds(format!(
                "beta_c {} >= beta_q {}",
                self.classical, self.quantum
            )));
        }
        if let Some(b) = self.nontrivial {
            if b <= self.classical || b > self.quantum {
                return Err(BellError::InconsistentBounds(format!(
                    "beta_b {b} outside (beta_c, beta_q]"
                )));
            }
        }
        Ok(())
    }
}

/// State families with tabulated nontrivial self-testing bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateFamily {
    Ghz,
    LinearCluster,
    Ring,
    CustomGraph,
}

impl StateFamily {
    pub fn name(self) -> &'static str {
        match self {
            StateFamily::Ghz => "ghz",
            StateFamily::LinearCluster => "linear-cluster",
            StateFamily::Ring => "ring",
            StateFamily::CustomGraph => "custom-graph",
        }
    }
}

/// Imported nontrivial bounds `β^B`: a violation above them certifies
/// fidelity above 1/2 with the target. Rings share the cluster values
/// because the two are local-unitary equivalent at N = 3, 4.
pub fn nontrivial_bound(family: StateFamily, n: usize) -> Option<f64> {
    match (family, n) {
        (StateFamily::Ghz, 3) => Some(4.828),
        (StateFamily::Ghz, 4) => Some(7.464),
        (StateFamily::LinearCluster | StateFamily::Ring, 3) => Some(4.940),
        (StateFamily::LinearCluster | StateFamily::Ring, 4) => Some(5.828),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellInequality {
    parties: usize,
    terms: Vec<CorrelatorTerm>,
    bounds: Bounds,
}

impl BellInequality {
    pub fn new(
        parties: usize,
        terms: Vec<CorrelatorTerm>,
        bounds: Bounds,
    ) -> Result<Self, BellError> {
        if parties == 0 {
            return Err(BellError::TooFewParties {
                what: "an inequality",
                n: 0,
                min: 1,
            });
        }
        if terms.is_empty() {
            return Err(BellError::InvalidTerm("inequality has no terms".into()));
        }
        for t in &terms {
            if t.settings.len() != parties {
                return Err(BellError::PartyMismatch {
                    expected: parties,
                    found: t.settings.len(),
                });
            }
            if t.settings.iter().all(|s| *s == Setting::Identity) {
                return Err(BellError::InvalidTerm(
                    "correlator with only identities".into(),
                ));
            }
            if !t.coefficient.is_finite() {
                return Err(BellError::InvalidTerm("non-finite coefficient".into()));
            }
        }
        bounds.validate()?;
        Ok(BellInequality {
            parties,
            terms,
            bounds,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn terms(&self) -> &[CorrelatorTerm] {
        &self.terms
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn with_nontrivial_bound(mut self, beta_b: Option<f64>) -> Result<Self, BellError> {
        self.bounds.nontrivial = beta_b;
        self.bounds.validate()?;
        Ok(self)
    }

    /// Expands the operator `Σ c ⊗ A` into merged Pauli terms for assignment `m`.
    pub fn operator_terms(&self, m: &MeasurementAssignment) -> Result<Vec<PauliTerm>, BellError> {
        m.check_parties(self.parties)?;
        let mut acc: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for term in &self.terms {
            let mut partial: Vec<(Vec<Pauli>, f64)> = vec![(Vec::new(), term.coefficient)];
            for (k, s) in term.settings.iter().enumerate() {
                let factors: Vec<(Pauli, f64)> = match s.index() {
                    None => vec![(Pauli::I, 1.0)],
                    Some(idx) => {
                        let [x, y, z] = m.observable(k + 1, idx).bloch();
                        [(Pauli::X, x), (Pauli::Y, y), (Pauli::Z, z)]
                            .into_iter()
                            .filter(|(_, w)| *w != 0.0)
                            .collect()
                    }
                };
                partial = partial
                    .iter()
                    .flat_map(|(letters, w)| {
                        factors.iter().map(move |(p, f)| {
                            let mut l = letters.clone();
                            l.push(*p);
                            (l, w * f)
                        })
                    })
                    .collect();
            }
            for (letters, w) in partial {
                *acc.entry(letters).or_insert(0.0) += w;
            }
        }
        Ok(acc
            .into_iter()
            .filter(|(_, w)| w.abs() > 1e-12)
            .map(|(l, w)| PauliTerm::new(PauliString::new(l), w))
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("inequality serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, BellError> {
        serde_json::from_str(text).map_err(|e| BellError::Json(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    coeff: f64,
    settings: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityJson {
    parties: usize,
    terms: Vec<TermJson>,
    #[serde(flatten)]
    bounds: Bounds,
}

impl Serialize for BellInequality {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        InequalityJson {
            parties: self.parties,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: t.coefficient,
                    settings: settings_code(&t.settings),
                })
                .collect(),
            bounds: self.bounds,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BellInequality {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = InequalityJson::deserialize(deserializer)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|t| {
                Ok(CorrelatorTerm::new(
                    t.coeff,
                    parse_settings_code(&t.settings)?,
                ))
            })
            .collect::<Result<Vec<_>, BellError>>()
            .map_err(D::Error::custom)?;
        BellInequality::new(raw.parties, terms, raw.bounds).map_err(D::Error::custom)
    }
}

/// Two ±1-valued observables `(A_0, A_1)` per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementAssignment {
    parties: Vec<[LocalObservable; 2]>,
}

impl MeasurementAssignment {
    pub fn new(parties: Vec<[LocalObservable; 2]>) -> Self {
        MeasurementAssignment { parties }
    }

    /// `(X+Z)/√2, (X-Z)/√2` on `pivot`, `(X, Z)` on every other party.
    pub fn standard(n: usize, pivot: usize) -> Self {
        let plus = LocalObservable::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).expect("unit vector");
        let minus = LocalObservable::new(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2).expect("unit vector");
        let parties = (1..=n)
            .map(|i| {
                if i == pivot {
                    [plus, minus]
                } else {
                    [LocalObservable::X, LocalObservable::Z]
                }
            })
            .collect();
        MeasurementAssignment { parties }
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    /// Observable `A_setting` of `party` (1-indexed).
    pub fn observable(&self, party: usize, setting: usize) -> LocalObservable {
        self.parties[party - 1][setting]
    }

    pub fn party(&self, party: usize) -> [LocalObservable; 2] {
        self.parties[party - 1]
    }

    fn check_parties(&self, n: usize) -> Result<(), BellError> {
        if self.parties.len() != n {
            return Err(BellError::PartyMismatch {
                expected: n,
                found: self.parties.len(),
            });
        }
        Ok(())
    }

    /// Observables measured for a joint setting; `None` for identities.
    pub fn observables_for(&self, settings: &[Setting]) -> Vec<Option<LocalObservable>> {
        settings
            .iter()
            .enumerate()
            .map(|(k, s)| s.index().map(|idx| self.parties[k][idx]))
            .collect()
    }
}

fn push_term(
    terms: &mut Vec<CorrelatorTerm>,
    n: usize,
    coefficient: f64,
    entries: &[(usize, Setting)],
) {
    let mut settings = vec![Setting::Identity; n];
    for &(party, s) in entries {
        settings[party - 1] = s;
    }
    terms.push(CorrelatorTerm::new(coefficient, settings));
}

/// The graph inequality with the composite factors expanded:
///
/// `n_max ⟨(A0 + A1)_p ∏_{i∈n(p)} A1_i⟩ + Σ_{i∈n(p)} ⟨(A0 - A1)_p A0_i ∏_{j∈n(i)\p} A1_j⟩
///  + Σ_{i∉n(p)∪{p}} ⟨A0_i ∏_{j∈n(i)} A1_j⟩`, where `p` is the pivot.
pub fn build_graph_inequality(graph: &Graph) -> Result<BellInequality, BellError> {
    let n = graph.vertex_count();
    if n < 2 {
        return Err(BellError::TooFewParties {
            what: "a graph inequality",
            n,
            min: 2,
        });
    }
    let pivot = graph.max_degree_vertex();
    let n_max = graph.n_max();
    let pivot_nbrs = graph.neighborhood(pivot)?;
    let mut terms = Vec::new();

    let hub: Vec<(usize, Setting)> = pivot_nbrs.iter().map(|&i| (i, Setting::One)).collect();
    for (s, sign) in [(Setting::Zero, 1.0), (Setting::One, 1.0)] {
        let mut e = vec![(pivot, s)];
        e.extend(&hub);
        push_term(&mut terms, n, sign * n_max as f64, &e);
    }
    for &i in pivot_nbrs {
        let mut rest = vec![(i, Setting::Zero)];
        rest.extend(
            graph
                .neighborhood(i)?
                .iter()
                .filter(|&&j| j != pivot)
                .map(|&j| (j, Setting::One)),
        );
        for (s, sign) in [(Setting::Zero, 1.0), (Setting::One, -1.0)] {
            let mut e = vec![(pivot, s)];
            e.extend(&rest);
            push_term(&mut terms, n, sign, &e);
        }
    }
    for i in (1..=n).filter(|&i| i != pivot && !pivot_nbrs.contains(&i)) {
        let mut e = vec![(i, Setting::Zero)];
        e.extend(graph.neighborhood(i)?.iter().map(|&j| (j, Setting::One)));
        push_term(&mut terms, n, 1.0, &e);
    }

    let bounds = Bounds {
        classical: (n_max + n - 1) as f64,
        quantum: (2.0 * SQRT_2 - 1.0) * n_max as f64 + (n - 1) as f64,
        nontrivial: None,
    };
    BellInequality::new(n, terms, bounds)
}

/// GHZ form: `(N-1)(⟨A0 A0…A0⟩ + ⟨A1 A0…A0⟩) + Σ_{i≥2} (⟨A0_1 A1_i⟩ - ⟨A1_1 A1_i⟩) ≤ 2(N-1)`.
pub fn ghz_inequality(n: usize) -> Result<BellInequality, BellError> {
    if n < 2 {
        return Err(BellError::TooFewParties {
            what: "the GHZ inequality",
            n,
            min: 2,
        });
    }
    let k = (n - 1) as f64;
    let mut terms = Vec::new();
    for s in [Setting::Zero, Setting::One] {
        let mut e = vec![(1, s)];
        e.extend((2..=n).map(|i| (i, Setting::Zero)));
        push_term(&mut terms, n, k, &e);
    }
    for i in 2..=n {
        push_term(&mut terms, n, 1.0, &[(1, Setting::Zero), (i, Setting::One)]);
        push_term(&mut terms, n, -1.0, &[(1, Setting::One), (i, Setting::One)]);
    }
    let bounds = Bounds {
        classical: 2.0 * k,
        quantum: 2.0 * SQRT_2 * k,
        nontrivial: nontrivial_bound(StateFamily::Ghz, n),
    };
    BellInequality::new(n, terms, bounds)
}

/// Ring form, identical to [`build_graph_inequality`] on the N-cycle, with
/// the tabulated nontrivial bound attached where one exists.
pub fn ring_inequality(n: usize) -> Result<BellInequality, BellError> {
    build_graph_inequality(&Graph::ring(n)?)?
        .with_nontrivial_bound(nontrivial_bound(StateFamily::Ring, n))
}

/// Optimal settings for [`build_graph_inequality`]: the pivot measures
/// `(X±Z)/√2`, every other party `X` and `Z`.
pub fn optimal_settings(graph: &Graph) -> MeasurementAssignment {
    MeasurementAssignment::standard(graph.vertex_count(), graph.max_degree_vertex())
}

/// Local unitaries and relabeling taking the ring state onto the linear
/// cluster state of [`QuantumState::cluster_linear`]:
/// `N = 3`: `S ⊗ √X† ⊗ S`; `N = 4`: swap qubits 2 and 3, then `H^⊗4`.
pub fn ring_to_cluster_transform(
    n: usize,
) -> Result<(Vec<Matrix2>, Option<Vec<usize>>), BellError> {
    match n {
        3 => Ok((vec![gates::s(), gates::sqrt_x_dag(), gates::s()], None)),
        4 => Ok((vec![gates::hadamard(); 4], Some(vec![1, 3, 2, 4]))),
        _ => Err(BellError::State(StateError::UnsupportedSize {
            n,
            what: "linear cluster state",
        })),
    }
}

/// The ring inequality rewritten for the linear cluster state: same terms,
/// observables conjugated by [`ring_to_cluster_transform`].
pub fn cluster_inequality(n: usize) -> Result<(BellInequality, MeasurementAssignment), BellError> {
    let (unitaries, perm) = ring_to_cluster_transform(n)?;
    let ring = ring_inequality(n)?
        .with_nontrivial_bound(nontrivial_bound(StateFamily::LinearCluster, n))?;
    let m = MeasurementAssignment::standard(n, 1);
    rotate_inequality(&ring, &m, &unitaries, perm.as_deref())
}

/// Transforms an inequality alongside the state map `s ↦ U · relabel(s, perm)`:
/// party `i` moves to `perm[i-1]` and its observables become `U A U†`, with
/// `unitaries` indexed by the new labels. Evaluating the result on the
/// transformed state reproduces the original value.
pub fn rotate_inequality(
    b: &BellInequality,
    m: &MeasurementAssignment,
    unitaries: &[Matrix2],
    permutation: Option<&[usize]>,
) -> Result<(BellInequality, MeasurementAssignment), BellError> {
    let n = b.parties;
    m.check_parties(n)?;
    if unitaries.len() != n {
        return Err(BellError::PartyMismatch {
            expected: n,
            found: unitaries.len(),
        });
    }
    let identity: Vec<usize> = (1..=n).collect();
    let perm = permutation.unwrap_or(&identity);
    check_permutation(perm, n)?;

    let mut moved = vec![m.parties[0]; n];
    for (i, &target) in perm.iter().enumerate() {
        let u = &unitaries[target - 1];
        let [a0, a1] = m.parties[i];
        moved[target - 1] = [a0.conjugated(u)?, a1.conjugated(u)?];
    }
    let terms = b
        .terms
        .iter()
        .map(|t| {
            let mut settings = vec![Setting::Identity; n];
            for (i, &target) in perm.iter().enumerate() {
                settings[target - 1] = t.settings[i];
            }
            CorrelatorTerm::new(t.coefficient, settings)
        })
        .collect();
    Ok((
        BellInequality {
            parties: n,
            terms,
            bounds: b.bounds,
        },
        MeasurementAssignment::new(moved),
    ))
}

/// Exact Bell value `Σ c ⟨⊗ A⟩` on `state`.
pub fn evaluate(
    b: &BellInequality,
    m: &MeasurementAssignment,
    state: &QuantumState,
) -> Result<f64, BellError> {
    m.check_parties(b.parties)?;
    if state.qubit_count() != b.parties {
        return Err(BellError::PartyMismatch {
            expected: b.parties,
            found: state.qubit_count(),
        });
    }
    b.terms.iter().try_fold(0.0, |acc, t| {
        Ok(acc + t.coefficient * state.correlator(&m.observables_for(&t.settings))?)
    })
}

/// Maximum over all `2^(2N)` deterministic local strategies.
pub fn brute_force_classical_bound(b: &BellInequality) -> Result<f64, BellError> {
    let n = b.parties;
    if n > MAX_BRUTE_FORCE_PARTIES {
        return Err(BellError::TooManyParties {
            n,
            cap: MAX_BRUTE_FORCE_PARTIES,
        });
    }
    // bit 2(i-1)+s of a strategy is the outcome (1 ↦ -1) party i gives for setting s
    let masks: Vec<(u32, f64)> = b
        .terms
        .iter()
        .map(|t| {
            let mask = t
                .settings
                .iter()
                .enumerate()
                .filter_map(|(k, s)| s.index().map(|idx| 1u32 << (2 * k + idx)))
                .fold(0, |a, bit| a | bit);
            (mask, t.coefficient)
        })
        .collect();
    let best = (0u32..1 << (2 * n))
        .into_par_iter()
        .map(|strategy| {
            masks
                .iter()
                .map(|&(mask, c)| {
                    if (strategy & mask).count_ones() % 2 == 0 {
                        c
                    } else {
                        -c
                    }
                })
                .sum::<f64>()
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

fn covers(joint: &[Setting], term: &[Setting]) -> bool {
    joint
        .iter()
        .zip(term)
        .all(|(j, t)| *t == Setting::Identity || j == t)
}

/// Groups the terms into full joint settings such that every term is a
/// marginal of one of them. Greedy: terms are taken by decreasing weight and
/// merged into the first compatible group; leftover identities become `One`.
pub fn required_joint_settings(b: &BellInequality) -> Vec<Vec<Setting>> {
    let mut order: Vec<&CorrelatorTerm> = b.terms.iter().collect();
    order.sort_by_key(|t| {
        std::cmp::Reverse(
            t.settings
                .iter()
                .filter(|s| **s != Setting::Identity)
                .count(),
        )
    });
    let mut groups: Vec<Vec<Setting>> = Vec::new();
    for t in order {
        let slot = groups.iter_mut().find(|g| {
            g.iter()
                .zip(&t.settings)
                .all(|(a, b)| *a == Setting::Identity || *b == Setting::Identity || a == b)
        });
        match slot {
            Some(g) => {
                for (a, b) in g.iter_mut().zip(&t.settings) {
                    if *a == Setting::Identity {
                        *a = *b;
                    }
                }
            }
            None => groups.push(t.settings.clone()),
        }
    }
    for g in &mut groups {
        for s in g.iter_mut() {
            if *s == Setting::Identity {
                *s = Setting::One;
            }
        }
    }
    groups
}

/// Outcome statistics for one joint setting of a Bell experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BellTally {
    pub choices: Vec<Setting>,
    pub observables: Vec<LocalObservable>,
    pub tally: Tally,
}

/// Born samples for every required joint setting; setting `k` draws from
/// a seed derived from `seed` and `k`.
pub fn sample_counts(
    b: &BellInequality,
    m: &MeasurementAssignment,
    state: &QuantumState,
    shots: u64,
    seed: u64,
) -> Result<Vec<(Vec<Setting>, OutcomeCounts)>, BellError> {
    m.check_parties(b.parties)?;
    required_joint_settings(b)
        .into_iter()
        .enumerate()
        .map(|(idx, choices)| {
            let observables = full_observables(m, &choices);
            let counts = born_sample(state, &observables, shots, derive_seed(seed, idx as u64))?;
            Ok((choices, counts))
        })
        .collect()
}

fn full_observables(m: &MeasurementAssignment, choices: &[Setting]) -> Vec<LocalObservable> {
    m.observables_for(choices)
        .into_iter()
        .map(|o| o.expect("full setting"))
        .collect()
}

/// Collects one tally per required joint setting: exact probabilities when
/// `shots` is `None`, otherwise the samples of [`sample_counts`].
pub fn measure_tallies(
    b: &BellInequality,
    m: &MeasurementAssignment,
    state: &QuantumState,
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<BellTally>, BellError> {
    m.check_parties(b.parties)?;
    match shots {
        None => required_joint_settings(b)
            .into_iter()
            .map(|choices| {
                let observables = full_observables(m, &choices);
                let tally = Tally::exact(state.outcome_probabilities(&observables)?);
                Ok(BellTally {
                    choices,
                    observables,
                    tally,
                })
            })
            .collect(),
        Some(s) => sample_counts(b, m, state, s, seed)?
            .into_iter()
            .map(|(choices, counts)| {
                Ok(BellTally {
                    choices,
                    tally: Tally::from_counts(&counts.counts)?,
                    observables: counts.setting,
                })
            })
            .collect(),
    }
}

/// Estimates the Bell value from per-setting tallies. Each correlator is the
/// empirical mean of its outcome product, marginalized from the first tally
/// whose setting covers it. The standard error propagates each term
/// independently, ignoring covariance between marginals of one setting.
pub fn estimate_from_counts(
    b: &BellInequality,
    m: &MeasurementAssignment,
    tallies: &[BellTally],
) -> Result<Estimate, BellError> {
    m.check_parties(b.parties)?;
    for t in tallies {
        let code = settings_code(&t.choices);
        if t.choices.len() != b.parties || t.observables.len() != b.parties {
            return Err(BellError::PartyMismatch {
                expected: b.parties,
                found: t.choices.len(),
            });
        }
        if t.tally.shots == Some(0) {
            return Err(BellError::ZeroShots(code));
        }
        let expected = m.observables_for(&t.choices);
        let consistent = expected.iter().zip(&t.observables).all(|(e, o)| match e {
            Some(e) => e.approx_eq(o, 1e-12),
            None => true,
        });
        if !consistent {
            return Err(BellError::SettingMismatch(code));
        }
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    for term in &b.terms {
        let source = tallies
            .iter()
            .find(|t| covers(&t.choices, &term.settings))
            .ok_or_else(|| BellError::MissingSetting(settings_code(&term.settings)))?;
        let (mean, var) = source.tally.parity_estimate(term.party_mask());
        value += term.coefficient * mean;
        variance += term.coefficient * term.coefficient * var;
    }
    Ok(Estimate {
        value,
        stderr: variance.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codes(b: &BellInequality) -> Vec<(f64, String)> {
        b.terms()
            .iter()
            .map(|t| (t.coefficient, settings_code(&t.settings)))
            .collect()
    }

    fn swap_01_except_first(b: &BellInequality) -> Vec<(f64, String)> {
        b.terms()
            .iter()
            .map(|t| {
                let s: String = t
                    .settings
                    .iter()
                    .enumerate()
                    .map(|(k, s)| match (k, s) {
                        (0, s) => s.to_char(),
                        (_, Setting::Zero) => '1',
                        (_, Setting::One) => '0',
                        (_, Setting::Identity) => 'I',
                    })
                    .collect();
                (t.coefficient, s)
            })
            .collect()
    }

    #[test]
    fn ghz3_terms_match_expanded_form() {
        let b = ghz_inequality(3).unwrap();
        let expected = vec![
            (2.0, "000".to_string()),
            (2.0, "100".into()),
            (1.0, "01I".into()),
            (-1.0, "11I".into()),
            (1.0, "0I1".into()),
            (-1.0, "1I1".into()),
        ];
        assert_eq!(codes(&b), expected);
        assert_eq!(b.bounds().classical, 4.0);
        assert!((b.bounds().quantum - 4.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(b.bounds().nontrivial, Some(4.828));
    }

    #[test]
    fn star_inequality_is_ghz_form_with_hadamard_relabeling() {
        for n in 2..=6 {
            let star = build_graph_inequality(&Graph::star(n).unwrap()).unwrap();
            let ghz = ghz_inequality(n).unwrap();
            let mut a = swap_01_except_first(&star);
            let mut b = codes(&ghz);
            a.sort_by(|x, y| x.1.cmp(&y.1));
            b.sort_by(|x, y| x.1.cmp(&y.1));
            assert_eq!(a, b, "n={n}");
            assert_eq!(star.bounds().classical, ghz.bounds().classical);
        }
    }

    #[test]
    fn ring4_terms() {
        let b = ring_inequality(4).unwrap();
        let expected = vec![
            (2.0, "01I1".to_string()),
            (2.0, "11I1".into()),
            (1.0, "001I".into()),
            (-1.0, "101I".into()),
            (1.0, "0I10".into()),
            (-1.0, "1I10".into()),
            (1.0, "I101".into()),
        ];
        assert_eq!(codes(&b), expected);
        assert_eq!(b.bounds().classical, 5.0);
        assert!((b.bounds().quantum - (1.0 + 4.0 * SQRT_2)).abs() < 1e-12);
        assert_eq!(b.bounds().nontrivial, Some(5.828));
    }

    #[test]
    fn ring3_terms() {
        let b = ring_inequality(3).unwrap();
        let expected = vec![
            (2.0, "011".to_string()),
            (2.0, "111".into()),
            (1.0, "001".into()),
            (-1.0, "101".into()),
            (1.0, "010".into()),
            (-1.0, "110".into()),
        ];
        assert_eq!(codes(&b), expected);
        assert_eq!(b.bounds().nontrivial, Some(4.940));
    }

    #[test]
    fn term_count_is_linear() {
        for n in 3..=9 {
            for g in [Graph::star(n), Graph::ring(n), Graph::line(n)] {
                let b = build_graph_inequality(&g.unwrap()).unwrap();
                assert!(b.terms().len() <= 2 * n, "n={n}");
            }
        }
    }

    #[test]
    fn line_graph_pivots_on_max_degree_vertex() {
        let g = Graph::line(3).unwrap();
        let b = build_graph_inequality(&g).unwrap();
        assert_eq!(b.bounds().classical, 4.0);
        let m = optimal_settings(&g);
        assert_eq!(m.party(1), [LocalObservable::X, LocalObservable::Z]);
        assert!(m.party(2)[0].approx_eq(
            &LocalObservable::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2).unwrap(),
            0.0
        ));
        assert_eq!(brute_force_classical_bound(&b).unwrap(), 4.0);
    }

    #[test]
    fn ghz_values() {
        for n in 2..=6 {
            let b = ghz_inequality(n).unwrap();
            let m = MeasurementAssignment::standard(n, 1);
            let v = evaluate(&b, &m, &QuantumState::ghz(n).unwrap()).unwrap();
            assert!((v - 2.0 * SQRT_2 * (n - 1) as f64).abs() < 1e-10, "n={n}");
        }
        let b = ghz_inequality(3).unwrap();
        let m = MeasurementAssignment::standard(3, 1);
        let mm = QuantumState::maximally_mixed(3).unwrap();
        assert!(evaluate(&b, &m, &mm).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cluster_form_reaches_quantum_bound() {
        for n in [3, 4] {
            let (unitaries, perm) = ring_to_cluster_transform(n).unwrap();
            let ring_state = QuantumState::graph_state(&Graph::ring(n).unwrap()).unwrap();
            let moved = match &perm {
                Some(p) => ring_state.relabel_qubits(p).unwrap(),
                None => ring_state.clone(),
            };
            let moved = moved.apply_local_unitaries(&unitaries).unwrap();
            let cluster = QuantumState::cluster_linear(n).unwrap();
            assert!(
                (moved.overlap_magnitude(&cluster).unwrap() - 1.0).abs() < 1e-12,
                "n={n}"
            );

            let (b, m) = cluster_inequality(n).unwrap();
            let v = evaluate(&b, &m, &cluster).unwrap();
            assert!((v - b.bounds().quantum).abs() < 1e-10, "n={n} v={v}");
            assert_eq!(
                brute_force_classical_bound(&b).unwrap(),
                b.bounds().classical
            );
        }
        assert!(cluster_inequality(5).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        assert_eq!(
            brute_force_classical_bound(&ghz_inequality(2).unwrap()).unwrap(),
            2.0
        );
        assert_eq!(
            brute_force_classical_bound(&ghz_inequality(3).unwrap()).unwrap(),
            4.0
        );
        assert_eq!(
            brute_force_classical_bound(&ring_inequality(4).unwrap()).unwrap(),
            5.0
        );
        let big = build_graph_inequality(&Graph::star(11).unwrap()).unwrap();
        assert!(matches!(
            brute_force_classical_bound(&big),
            Err(BellError::TooManyParties { .. })
        ));
    }

    #[test]
    fn joint_settings() {
        for n in 3..=6 {
            let settings = required_joint_settings(&ghz_inequality(n).unwrap());
            assert_eq!(settings.len(), 4, "n={n}");
            assert!(settings.iter().all(|s| !s.contains(&Setting::Identity)));
        }
        let single = BellInequality::new(
            2,
            vec![CorrelatorTerm::new(1.0, vec![Setting::Zero, Setting::One])],
            Bounds {
                classical: 1.0,
                quantum: 2.0,
                nontrivial: None,
            },
        )
        .unwrap();
        assert_eq!(
            required_joint_settings(&single),
            vec![vec![Setting::Zero, Setting::One]]
        );
        let ring4 = ring_inequality(4).unwrap();
        let groups = required_joint_settings(&ring4);
        assert_eq!(groups.len(), 4);
        for t in ring4.terms() {
            assert!(groups.iter().any(|g| covers(g, &t.settings)));
        }
    }

    #[test]
    fn exact_tallies_reproduce_evaluate() {
        let b = ring_inequality(4).unwrap();
        let m = MeasurementAssignment::standard(4, 1);
        let s = QuantumState::graph_state(&Graph::ring(4).unwrap())
            .unwrap()
            .white_noise(0.9)
            .unwrap();
        let tallies = measure_tallies(&b, &m, &s, None, 0).unwrap();
        let est = estimate_from_counts(&b, &m, &tallies).unwrap();
        assert!((est.value - evaluate(&b, &m, &s).unwrap()).abs() < 1e-12);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn estimate_errors() {
        let b = ghz_inequality(3).unwrap();
        let m = MeasurementAssignment::standard(3, 1);
        let s = QuantumState::ghz(3).unwrap();
        let mut tallies = measure_tallies(&b, &m, &s, Some(100), 1).unwrap();
        tallies.pop();
        assert!(matches!(
            estimate_from_counts(&b, &m, &tallies),
            Err(BellError::MissingSetting(_))
        ));
        tallies[0].tally.shots = Some(0);
        assert!(matches!(
            estimate_from_counts(&b, &m, &tallies),
            Err(BellError::ZeroShots(_))
        ));
        let mut wrong = measure_tallies(&b, &m, &s, None, 1).unwrap();
        wrong[0].observables[1] = LocalObservable::Y;
        assert!(matches!(
            estimate_from_counts(&b, &m, &wrong),
            Err(BellError::SettingMismatch(_))
        ));
    }

    #[test]
    fn bounds_validation() {
        assert!(Bounds {
            classical: 4.0,
            quantum: 5.0,
            nontrivial: Some(4.5)
        }
        .validate()
        .is_ok());
        assert!(Bounds {
            classical: 4.0,
            quantum: 5.0,
            nontrivial: Some(4.0)
        }
        .validate()
        .is_err());
        assert!(Bounds {
            classical: 4.0,
            quantum: 5.0,
            nontrivial: Some(5.1)
        }
        .validate()
        .is_err());
        assert!(Bounds {
            classical: 5.0,
            quantum: 5.0,
            nontrivial: None
        }
        .validate()
        .is_err());
    }

    #[test]
    fn json_round_trip_and_rejects_bad_input() {
        let b = ring_inequality(4).unwrap();
        let text = b.to_json();
        assert!(text.contains(r#""settings":"01I1""#));
        assert_eq!(BellInequality::from_json(&text).unwrap(), b);
        let bad = [
            r#"{"parties":2,"terms":[{"coeff":1,"settings":"0"}],"beta_c":1,"beta_q":2}"#,
            r#"{"parties":2,"terms":[{"coeff":1,"settings":"II"}],"beta_c":1,"beta_q":2}"#,
            r#"{"parties":2,"terms":[{"coeff":1,"settings":"0x"}],"beta_c":1,"beta_q":2}"#,
            r#"{"parties":2,"terms":[{"coeff":1,"settings":"01"}],"beta_c":3,"beta_q":2}"#,
            r#"{"parties":2,"terms":[],"beta_c":1,"beta_q":2}"#,
        ];
        for text in bad {
            assert!(BellInequality::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn operator_terms_of_ghz3() {
        // 2√2 XXX + √2 (ZZI + ZIZ)
        let b = ghz_inequality(3).unwrap();
        let ops = b
            .operator_terms(&MeasurementAssignment::standard(3, 1))
            .unwrap();
        let got: Vec<(String, f64)> = ops
            .iter()
            .map(|t| (t.letters.to_string(), t.coefficient))
            .collect();
        assert_eq!(got.len(), 3);
        for (label, c) in [("XXX", 2.0 * SQRT_2), ("ZIZ", SQRT_2), ("ZZI", SQRT_2)] {
            let (_, v) = got.iter().find(|(l, _)| l == label).unwrap();
            assert!((v - c).abs() < 1e-12, "{label}");
        }
    }
}
