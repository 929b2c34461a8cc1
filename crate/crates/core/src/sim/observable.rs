//! Single-qubit ±1-valued observables and 2×2 gates.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StateError;
use crate::pauli::Pauli;

/// Row-major 2×2 complex matrix.
pub type Matrix2 = [[Complex64; 2]; 2];

const UNIT_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub mod gates {
    //! Named single-qubit unitaries.
    //!
    //! `S = diag(1, i)`. The ring-to-cluster conversion for three qubits is
    //! `S ⊗ sqrt_x_dag() ⊗ S`, i.e. the adjoint of `S† ⊗ √X ⊗ S†`.

    use super::{c, Matrix2};
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn identity() -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
    }

    pub fn hadamard() -> Matrix2 {
        let h = c(FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }

    pub fn pauli_x() -> Matrix2 {
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]
    }

    pub fn pauli_y() -> Matrix2 {
        [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
    }

    pub fn pauli_z() -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
    }

    pub fn s() -> Matrix2 {
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]
    }

    pub fn s_dag() -> Matrix2 {
        dagger(&s())
    }

    /// Principal square root of X: `((1+i)I + (1-i)X) / 2`.
    pub fn sqrt_x() -> Matrix2 {
        [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]]
    }

    pub fn sqrt_x_dag() -> Matrix2 {
        dagger(&sqrt_x())
    }

    pub fn dagger(m: &Matrix2) -> Matrix2 {
        [
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ]
    }

    pub fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    /// `U U† = I` within `tol` on every entry.
    pub fn is_unitary(u: &Matrix2, tol: f64) -> bool {
        let p = mul(u, &dagger(u));
        let id = identity();
        p.iter()
            .flatten()
            .zip(id.iter().flatten())
            .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// Observable `x·X + y·Y + z·Z` for a unit Bloch vector, with outcomes ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalObservable {
    bloch: [f64; 3],
}

impl LocalObservable {
    pub const X: LocalObservable = LocalObservable {
        bloch: [1.0, 0.0, 0.0],
    };
    pub const Y: LocalObservable = LocalObservable {
        bloch: [0.0, 1.0, 0.0],
    };
    pub const Z: LocalObservable = LocalObservable {
        bloch: [0.0, 0.0, 1.0],
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, StateError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(StateError::NotUnitVector([x, y, z]));
        }
        Ok(LocalObservable { bloch: [x, y, z] })
    }

    /// Normalizes an arbitrary non-zero direction.
    pub fn from_direction(x: f64, y: f64, z: f64) -> Result<Self, StateError> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(StateError::NotUnitVector([x, y, z]));
        }
        LocalObservable::new(x / norm, y / norm, z / norm)
    }

    pub fn from_pauli(p: Pauli) -> Option<Self> {
        match p {
            Pauli::X => Some(Self::X),
            Pauli::Y => Some(Self::Y),
            Pauli::Z => Some(Self::Z),
            Pauli::I => None,
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn negated(&self) -> Self {
        let [x, y, z] = self.bloch;
        LocalObservable {
            bloch: [-x, -y, -z],
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.bloch
            .iter()
            .zip(other.bloch)
            .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// The axis-aligned Pauli this observable equals, if any (sign included).
    pub fn as_signed_pauli(&self) -> Option<(Pauli, i8)> {
        const TOL: f64 = 1e-12;
        [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .zip(self.bloch)
            .find_map(|(p, comp)| {
                let rest: f64 = self.bloch.iter().map(|v| v * v).sum::<f64>() - comp * comp;
                if rest.abs() > TOL {
                    None
                } else if (comp - 1.0).abs() <= TOL {
                    Some((p, 1))
                } else if (comp + 1.0).abs() <= TOL {
                    Some((p, -1))
                } else {
                    None
                }
            })
    }

    pub fn matrix(&self) -> Matrix2 {
        let [x, y, z] = self.bloch;
        [[c(z, 0.0), c(x, -y)], [c(x, y), c(-z, 0.0)]]
    }

    /// `U A U†`, which is the observable seen after the state is rotated by `U`.
    pub fn conjugated(&self, u: &Matrix2) -> Result<Self, StateError> {
        if !gates::is_unitary(u, UNIT_TOL) {
            return Err(StateError::NonUnitary);
        }
        let m = gates::mul(&gates::mul(u, &self.matrix()), &gates::dagger(u));
        let x = m[0][1].re;
        let y = -m[0][1].im;
        let z = m[0][0].re;
        let norm = (x * x + y * y + z * z).sqrt();
        LocalObservable::new(x / norm, y / norm, z / norm)
    }

    /// `V†` where the columns of `V` are the +1 and -1 eigenvectors. Applying
    /// it to a qubit maps the eigenbasis onto |0⟩ (outcome +1) and |1⟩ (-1).
    pub(crate) fn measurement_rotation(&self) -> Matrix2 {
        let [x, y, z] = self.bloch;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = Complex64::from_polar(1.0, -phi);
        [[c(ch, 0.0), e * sh], [c(sh, 0.0), -e * ch]]
    }
}

impl fmt::Display for LocalObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_signed_pauli() {
            Some((p, 1)) => write!(f, "{}", p.to_char()),
            Some((p, _)) => write!(f, "-{}", p.to_char()),
            None => {
                let [x, y, z] = self.bloch;
                write!(f, "({x:.6},{y:.6},{z:.6})")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ObservableRepr {
    Axis(String),
    Vector([f64; 3]),
}

impl Serialize for LocalObservable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.as_signed_pauli() {
            Some(_) => ObservableRepr::Axis(self.to_string()),
            None => ObservableRepr::Vector(self.bloch),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LocalObservable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match ObservableRepr::deserialize(deserializer)? {
            ObservableRepr::Axis(s) => {
                let (neg, letter) = match s.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, s.strip_prefix('+').unwrap_or(&s)),
                };
                let mut chars = letter.chars();
                let obs = match (chars.next(), chars.next()) {
                    (Some(ch), None) => Pauli::from_char(ch)
                        .ok()
                        .and_then(LocalObservable::from_pauli)
                        .ok_or_else(|| D::Error::custom(format!("bad axis {s:?}")))?,
                    _ => return Err(D::Error::custom(format!("bad axis {s:?}"))),
                };
                Ok(if neg { obs.negated() } else { obs })
            }
            ObservableRepr::Vector([x, y, z]) => {
                LocalObservable::new(x, y, z).map_err(D::Error::custom)
            }
        }
    }
}
