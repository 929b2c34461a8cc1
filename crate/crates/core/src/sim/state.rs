use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::observable::{gates, LocalObservable, Matrix2};
use super::StateError;
use crate::graph::Graph;
use crate::pauli::PauliTerm;

/// Largest qubit count for a state vector.
pub const MAX_PURE_QUBITS: usize = 16;
/// Largest qubit count for a density matrix.
pub const MAX_MIXED_QUBITS: usize = 10;

const BUILD_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(Vec<Complex64>),
    /// Row-major `dim × dim`.
    Mixed(Vec<Complex64>),
}

/// An N-qubit pure state vector or density matrix.
///
/// Qubit 1 is the most significant bit of the amplitude index, and
/// `|0⟩`/`|1⟩` are the +1/-1 eigenstates of Z.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    repr: Repr,
}

fn check_cap(n: usize, mixed: bool) -> Result<(), StateError> {
    let cap = if mixed {
        MAX_MIXED_QUBITS
    } else {
        MAX_PURE_QUBITS
    };
    if n > cap {
        return Err(StateError::SizeCap { n, cap });
    }
    Ok(())
}

fn bit_of(n: usize, qubit: usize) -> usize {
    1usize << (n - qubit)
}

fn kron(vectors: &[[Complex64; 2]]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for v in vectors {
        out = out.iter().flat_map(|&a| [a * v[0], a * v[1]]).collect();
    }
    out
}

/// Applies `u` to the amplitude pairs that differ in `bit`, reading entries at
/// `base + k * stride` for `k` in `0..dim`.
fn apply_pairs(
    data: &mut [Complex64],
    dim: usize,
    bit: usize,
    u: &Matrix2,
    base: usize,
    stride: usize,
) {
    for k in 0..dim {
        if k & bit != 0 {
            continue;
        }
        let i0 = base + k * stride;
        let i1 = base + (k | bit) * stride;
        let (a, b) = (data[i0], data[i1]);
        data[i0] = u[0][0] * a + u[0][1] * b;
        data[i1] = u[1][0] * a + u[1][1] * b;
    }
}

impl QuantumState {
    /// Pure state from amplitudes; length must be `2^n` and norm 1 within 1e-12.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        check_cap(n, false)?;
        if amplitudes.len() != 1 << n {
            return Err(StateError::LengthMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(Complex64::norm_sqr).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > BUILD_TOL {
            return Err(StateError::InvalidState(format!("norm² = {norm}")));
        }
        Ok(QuantumState {
            n,
            repr: Repr::Pure(amplitudes),
        })
    }

    /// Density matrix from row-major entries; validates Hermiticity, unit
    /// trace and positive semidefiniteness.
    pub fn from_density(n: usize, entries: Vec<Complex64>) -> Result<Self, StateError> {
        check_cap(n, true)?;
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return Err(StateError::LengthMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let state = QuantumState {
            n,
            repr: Repr::Mixed(entries),
        };
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn mixed_unchecked(n: usize, entries: Vec<Complex64>) -> Self {
        QuantumState {
            n,
            repr: Repr::Mixed(entries),
        }
    }

    /// Computational basis state; bit `k` of `index` (MSB first) is qubit `k + 1`.
    pub fn basis(n: usize, index: usize) -> Result<Self, StateError> {
        check_cap(n, false)?;
        if index >= 1 << n {
            return Err(StateError::InvalidState(format!(
                "basis index {index} out of range"
            )));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            n,
            repr: Repr::Pure(amps),
        })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n: usize) -> Result<Self, StateError> {
        if n < 2 {
            return Err(StateError::UnsupportedSize {
                n,
                what: "GHZ state",
            });
        }
        check_cap(n, false)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[(1 << n) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Ok(QuantumState {
            n,
            repr: Repr::Pure(amps),
        })
    }

    /// `|+⟩^⊗N` followed by a controlled-Z on every edge.
    pub fn graph_state(graph: &Graph) -> Result<Self, StateError> {
        let n = graph.vertex_count();
        check_cap(n, false)?;
        let masks: Vec<usize> = graph
            .edges()
            .iter()
            .map(|&(i, j)| bit_of(n, i) | bit_of(n, j))
            .collect();
        let amp = (1.0 / (1u64 << n) as f64).sqrt();
        let amps = (0..1usize << n)
            .map(|x| {
                let parity = masks.iter().filter(|&&m| x & m == m).count() % 2;
                Complex64::new(if parity == 0 { amp } else { -amp }, 0.0)
            })
            .collect();
        Ok(QuantumState {
            n,
            repr: Repr::Pure(amps),
        })
    }

    /// Linear cluster states in the experimental basis:
    /// `N = 3`: `(|+0+⟩ + |-1-⟩)/√2`, `N = 4`: `½(|0000⟩ + |0011⟩ + |1100⟩ - |1111⟩)`.
    pub fn cluster_linear(n: usize) -> Result<Self, StateError> {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let zero = [Complex64::new(1.0, 0.0), ZERO];
        let one = [ZERO, Complex64::new(1.0, 0.0)];
        let plus = [r, r];
        let minus = [r, -r];
        let amps = match n {
            3 => kron(&[plus, zero, plus])
                .iter()
                .zip(kron(&[minus, one, minus]))
                .map(|(a, b)| (a + b) * r)
                .collect(),
            4 => {
                let mut v = vec![ZERO; 16];
                v[0b0000] = Complex64::new(0.5, 0.0);
                v[0b0011] = Complex64::new(0.5, 0.0);
                v[0b1100] = Complex64::new(0.5, 0.0);
                v[0b1111] = Complex64::new(-0.5, 0.0);
                v
            }
            _ => {
                return Err(StateError::UnsupportedSize {
                    n,
                    what: "linear cluster state",
                })
            }
        };
        Ok(QuantumState {
            n,
            repr: Repr::Pure(amps),
        })
    }

    /// `I / 2^N`.
    pub fn maximally_mixed(n: usize) -> Result<Self, StateError> {
        check_cap(n, true)?;
        let dim = 1usize << n;
        let mut rho = vec![ZERO; dim * dim];
        for i in 0..dim {
            rho[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(QuantumState {
            n,
            repr: Repr::Mixed(rho),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Repr::Pure(a) => Some(a),
            Repr::Mixed(_) => None,
        }
    }

    /// Row-major density matrix (materialized for pure states).
    pub fn density_matrix(&self) -> Result<Vec<Complex64>, StateError> {
        match &self.repr {
            Repr::Mixed(rho) => Ok(rho.clone()),
            Repr::Pure(psi) => {
                check_cap(self.n, true)?;
                Ok(psi
                    .iter()
                    .flat_map(|a| psi.iter().map(move |b| a * b.conj()))
                    .collect())
            }
        }
    }

    pub fn to_mixed(&self) -> Result<Self, StateError> {
        Ok(QuantumState {
            n: self.n,
            repr: Repr::Mixed(self.density_matrix()?),
        })
    }

    /// Checks the representation invariants: unit norm for vectors; Hermitian,
    /// unit trace and PSD for density matrices.
    pub fn validate(&self) -> Result<(), StateError> {
        match &self.repr {
            Repr::Pure(psi) => {
                let norm: f64 = psi.iter().map(Complex64::norm_sqr).sum();
                if !norm.is_finite() || (norm - 1.0).abs() > BUILD_TOL {
                    return Err(StateError::InvalidState(format!("norm² = {norm}")));
                }
            }
            Repr::Mixed(rho) => {
                let dim = self.dim();
                if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(StateError::InvalidState("non-finite entry".into()));
                }
                for i in 0..dim {
                    for j in i..dim {
                        if (rho[i * dim + j] - rho[j * dim + i].conj()).norm() > BUILD_TOL {
                            return Err(StateError::InvalidState("not Hermitian".into()));
                        }
                    }
                }
                let trace: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
                if (trace - 1.0).abs() > BUILD_TOL {
                    return Err(StateError::InvalidState(format!("trace = {trace}")));
                }
                let m = DMatrix::from_row_slice(dim, dim, rho);
                let eig = SymmetricEigen::new(m);
                let min = eig
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                if min < -PSD_TOL {
                    return Err(StateError::InvalidState(format!("eigenvalue {min} < 0")));
                }
            }
        }
        Ok(())
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), StateError> {
        if qubit == 0 || qubit > self.n {
            return Err(StateError::QubitOutOfRange { qubit, n: self.n });
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, qubit: usize, u: &Matrix2) {
        let dim = self.dim();
        let bit = bit_of(self.n, qubit);
        match &mut self.repr {
            Repr::Pure(psi) => apply_pairs(psi, dim, bit, u, 0, 1),
            Repr::Mixed(rho) => {
                // U ρ: act on the row index of every column
                for col in 0..dim {
                    apply_pairs(rho, dim, bit, u, col, dim);
                }
                // (U ρ) U†: act with conj(U) on the column index of every row
                let uc = [
                    [u[0][0].conj(), u[0][1].conj()],
                    [u[1][0].conj(), u[1][1].conj()],
                ];
                for row in 0..dim {
                    apply_pairs(rho, dim, bit, &uc, row * dim, 1);
                }
            }
        }
    }

    /// Applies a single-qubit unitary to `qubit` (1-indexed).
    pub fn apply_local_unitary(&self, qubit: usize, u: &Matrix2) -> Result<Self, StateError> {
        self.check_qubit(qubit)?;
        if !gates::is_unitary(u, UNITARY_TOL) {
            return Err(StateError::NonUnitary);
        }
        let mut out = self.clone();
        out.apply_unchecked(qubit, u);
        Ok(out)
    }

    /// Applies `unitaries[k]` to qubit `k + 1`.
    pub fn apply_local_unitaries(&self, unitaries: &[Matrix2]) -> Result<Self, StateError> {
        if unitaries.len() != self.n {
            return Err(StateError::LengthMismatch {
                expected: self.n,
                found: unitaries.len(),
            });
        }
        if unitaries.iter().any(|u| !gates::is_unitary(u, UNITARY_TOL)) {
            return Err(StateError::NonUnitary);
        }
        let mut out = self.clone();
        for (k, u) in unitaries.iter().enumerate() {
            out.apply_unchecked(k + 1, u);
        }
        Ok(out)
    }

    /// Moves qubit `q` to position `permutation[q - 1]` (both 1-indexed).
    pub fn relabel_qubits(&self, permutation: &[usize]) -> Result<Self, StateError> {
        check_permutation(permutation, self.n)?;
        let n = self.n;
        let map = |x: usize| -> usize {
            permutation.iter().enumerate().fold(0, |acc, (k, &target)| {
                if x & bit_of(n, k + 1) != 0 {
                    acc | bit_of(n, target)
                } else {
                    acc
                }
            })
        };
        let dim = self.dim();
        let index: Vec<usize> = (0..dim).map(map).collect();
        let repr = match &self.repr {
            Repr::Pure(psi) => {
                let mut out = vec![ZERO; dim];
                for (x, &a) in psi.iter().enumerate() {
                    out[index[x]] = a;
                }
                Repr::Pure(out)
            }
            Repr::Mixed(rho) => {
                let mut out = vec![ZERO; dim * dim];
                for r in 0..dim {
                    for c in 0..dim {
                        out[index[r] * dim + index[c]] = rho[r * dim + c];
                    }
                }
                Repr::Mixed(out)
            }
        };
        Ok(QuantumState { n, repr })
    }

    /// `coefficient · Tr(ρ P)`, computed from bit masks without materializing `P`.
    pub fn expectation(&self, term: &PauliTerm) -> Result<f64, StateError> {
        if term.len() != self.n {
            return Err(StateError::LengthMismatch {
                expected: self.n,
                found: term.len(),
            });
        }
        let (flip, zmask) = term.letters.masks();
        let y_phase = Complex64::i().powu(term.letters.y_count() as u32);
        let sign = |x: usize| {
            if (x & zmask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        };
        let total: Complex64 = match &self.repr {
            Repr::Pure(psi) => psi
                .iter()
                .enumerate()
                .map(|(x, a)| psi[x ^ flip].conj() * a * sign(x))
                .sum(),
            Repr::Mixed(rho) => {
                let dim = self.dim();
                (0..dim).map(|x| rho[x * dim + (x ^ flip)] * sign(x)).sum()
            }
        };
        let value = total * y_phase;
        debug_assert!(value.im.abs() < 1e-10, "imaginary residue {}", value.im);
        Ok(term.coefficient * value.re)
    }

    /// Outcome distribution when every qubit is measured; index bit `n - q`
    /// set means qubit `q` returned -1.
    pub fn outcome_probabilities(
        &self,
        setting: &[LocalObservable],
    ) -> Result<Vec<f64>, StateError> {
        if setting.len() != self.n {
            return Err(StateError::LengthMismatch {
                expected: self.n,
                found: setting.len(),
            });
        }
        let opts: Vec<_> = setting.iter().copied().map(Some).collect();
        Ok(self.rotated_probabilities(&opts))
    }

    fn rotated_probabilities(&self, setting: &[Option<LocalObservable>]) -> Vec<f64> {
        let mut rotated = self.clone();
        for (k, obs) in setting.iter().enumerate() {
            if let Some(obs) = obs {
                let r = obs.measurement_rotation();
                // skip the identity rotation for Z
                if obs.as_signed_pauli() != Some((crate::pauli::Pauli::Z, 1)) {
                    rotated.apply_unchecked(k + 1, &r);
                }
            }
        }
        let dim = self.dim();
        match &rotated.repr {
            Repr::Pure(psi) => psi.iter().map(Complex64::norm_sqr).collect(),
            Repr::Mixed(rho) => (0..dim).map(|i| rho[i * dim + i].re.max(0.0)).collect(),
        }
    }

    /// `⟨⊗_k A_k⟩` where `None` entries are identities.
    pub fn correlator(&self, observables: &[Option<LocalObservable>]) -> Result<f64, StateError> {
        if observables.len() != self.n {
            return Err(StateError::LengthMismatch {
                expected: self.n,
                found: observables.len(),
            });
        }
        let mask = observables
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_some())
            .fold(0usize, |m, (k, _)| m | bit_of(self.n, k + 1));
        if mask == 0 {
            return Ok(1.0);
        }
        let probs = self.rotated_probabilities(observables);
        Ok(parity_mean(&probs, mask))
    }

    /// `v |ψ⟩⟨ψ| + (1 - v) I / 2^N`. Mixed inputs are mixed the same way.
    pub fn white_noise(&self, visibility: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(StateError::ParameterOutOfRange {
                name: "visibility",
                value: visibility,
            });
        }
        let dim = self.dim();
        let mut rho = self.density_matrix()?;
        for z in rho.iter_mut() {
            *z *= visibility;
        }
        let floor = (1.0 - visibility) / dim as f64;
        for i in 0..dim {
            rho[i * dim + i] += floor;
        }
        Ok(QuantumState::mixed_unchecked(self.n, rho))
    }

    /// `ρ ↦ (1 - p) ρ + (p/3)(XρX + YρY + ZρZ)` on one qubit.
    pub fn depolarize_qubit(&self, qubit: usize, p: f64) -> Result<Self, StateError> {
        self.check_qubit(qubit)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(StateError::ParameterOutOfRange {
                name: "depolarizing probability",
                value: p,
            });
        }
        let base = self.to_mixed()?;
        let mut acc = match &base.repr {
            Repr::Mixed(rho) => rho.iter().map(|z| z * (1.0 - p)).collect::<Vec<_>>(),
            Repr::Pure(_) => unreachable!(),
        };
        for u in [gates::pauli_x(), gates::pauli_y(), gates::pauli_z()] {
            let mut conj = base.clone();
            conj.apply_unchecked(qubit, &u);
            if let Repr::Mixed(rho) = &conj.repr {
                for (a, b) in acc.iter_mut().zip(rho) {
                    *a += b * (p / 3.0);
                }
            }
        }
        Ok(QuantumState::mixed_unchecked(self.n, acc))
    }

    /// Depolarizes every qubit with the same probability.
    pub fn depolarize_all(&self, p: f64) -> Result<Self, StateError> {
        (1..=self.n).try_fold(self.clone(), |s, q| s.depolarize_qubit(q, p))
    }

    /// Reduced 2×2 density matrix of one qubit.
    pub fn reduced_qubit(&self, qubit: usize) -> Result<Matrix2, StateError> {
        self.check_qubit(qubit)?;
        let bit = bit_of(self.n, qubit);
        let dim = self.dim();
        let mut out = [[ZERO; 2]; 2];
        for x in 0..dim {
            if x & bit != 0 {
                continue;
            }
            let pairs = [x, x | bit];
            for (a, &xa) in pairs.iter().enumerate() {
                for (b, &xb) in pairs.iter().enumerate() {
                    out[a][b] += match &self.repr {
                        Repr::Pure(psi) => psi[xa] * psi[xb].conj(),
                        Repr::Mixed(rho) => rho[xa * dim + xb],
                    };
                }
            }
        }
        Ok(out)
    }

    /// `|⟨self|other⟩|` for two pure states; 1 means equal up to global phase.
    pub fn overlap_magnitude(&self, other: &QuantumState) -> Result<f64, StateError> {
        match (&self.repr, &other.repr) {
            (Repr::Pure(a), Repr::Pure(b)) if a.len() == b.len() => Ok(a
                .iter()
                .zip(b)
                .map(|(x, y)| x.conj() * y)
                .sum::<Complex64>()
                .norm()),
            (Repr::Pure(_), Repr::Pure(_)) => Err(StateError::LengthMismatch {
                expected: self.n,
                found: other.n,
            }),
            _ => Err(StateError::InvalidState(
                "overlap requires pure states".into(),
            )),
        }
    }

    /// `⟨t|ρ|t⟩` for a pure target `t`.
    pub fn fidelity_with_pure(&self, target: &QuantumState) -> Result<f64, StateError> {
        let t = target
            .amplitudes()
            .ok_or_else(|| StateError::InvalidState("target must be pure".into()))?;
        if target.n != self.n {
            return Err(StateError::LengthMismatch {
                expected: self.n,
                found: target.n,
            });
        }
        let value = match &self.repr {
            Repr::Pure(psi) => t
                .iter()
                .zip(psi)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm_sqr(),
            Repr::Mixed(rho) => {
                let dim = self.dim();
                let mut acc = ZERO;
                for i in 0..dim {
                    if t[i] == ZERO {
                        continue;
                    }
                    let row: Complex64 = (0..dim).map(|j| rho[i * dim + j] * t[j]).sum();
                    acc += t[i].conj() * row;
                }
                acc.re
            }
        };
        Ok(value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, StateError> {
        serde_json::from_str(text).map_err(|e| StateError::Json(e.to_string()))
    }
}

/// `Σ_x p(x) (-1)^{popcount(x & mask)}`.
pub(crate) fn parity_mean(probs: &[f64], mask: usize) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(x, p)| {
            if (x & mask).count_ones().is_multiple_of(2) {
                *p
            } else {
                -*p
            }
        })
        .sum()
}

pub(crate) fn check_permutation(permutation: &[usize], n: usize) -> Result<(), StateError> {
    if permutation.len() != n {
        return Err(StateError::InvalidPermutation(format!(
            "expected {n} entries, found {}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
            return Err(StateError::InvalidPermutation(format!("{permutation:?}")));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Pure,
    Mixed,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    n: usize,
    kind: Kind,
    data: Vec<[f64; 2]>,
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (kind, data) = match &self.repr {
            Repr::Pure(v) => (Kind::Pure, v),
            Repr::Mixed(m) => (Kind::Mixed, m),
        };
        StateJson {
            n: self.n,
            kind,
            data: data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = StateJson::deserialize(deserializer)?;
        let data: Vec<Complex64> = raw
            .data
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        match raw.kind {
            Kind::Pure => QuantumState::from_amplitudes(raw.n, data),
            Kind::Mixed => QuantumState::from_density(raw.n, data),
        }
        .map_err(D::Error::custom)
    }
}
