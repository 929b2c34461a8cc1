//! Pauli strings with exact phase tracking.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid Pauli letter {0:?}")]
pub struct PauliParseError(pub char);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, PauliParseError> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(PauliParseError(other)),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// (x, z) symplectic bits.
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Single-site product `self * rhs` as (power of i, result).
    fn product(self, rhs: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// A tensor product of single-qubit Paulis times a phase `i^phase`.
///
/// Letter `k` of the string acts on qubit `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { letters, phase: 0 }
    }

    pub fn identity(n: usize) -> Self {
        PauliString::new(vec![Pauli::I; n])
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Phase as a power of `i` (0..4).
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// `+1` or `-1` when the phase is real, `None` for `±i`.
    pub fn real_sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Bit masks over amplitude indices: bit `n - q` belongs to qubit `q`.
    /// Returns `(flip, phase)` where `flip` marks X/Y sites and `phase` marks Y/Z sites.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.letters.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        for (k, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            let (x, z) = p.bits();
            if x {
                flip |= bit;
            }
            if z {
                phase |= bit;
            }
        }
        (flip, phase)
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Symplectic vector (x bits then z bits) used for rank computations.
    pub fn symplectic(&self) -> Vec<bool> {
        let (xs, zs): (Vec<bool>, Vec<bool>) = self.letters.iter().map(|p| p.bits()).unzip();
        xs.into_iter().chain(zs).collect()
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        assert_eq!(self.len(), rhs.len(), "Pauli string length mismatch");
        let mut phase = self.phase + rhs.phase;
        let letters = self
            .letters
            .iter()
            .zip(&rhs.letters)
            .map(|(&a, &b)| {
                let (p, c) = a.product(b);
                phase += p;
                c
            })
            .collect();
        PauliString {
            letters,
            phase: phase % 4,
        }
    }
}

impl FromStr for PauliString {
    type Err = PauliParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>, _>>()
            .map(PauliString::new)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            1 => f.write_str("i")?,
            2 => f.write_str("-")?,
            3 => f.write_str("-i")?,
            _ => {}
        }
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// A real-weighted Pauli string, the unit of observables and fidelity sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    #[serde(rename = "pauli", with = "letters_serde")]
    pub letters: PauliString,
    #[serde(rename = "coeff")]
    pub coefficient: f64,
}

impl PauliTerm {
    pub fn new(letters: PauliString, coefficient: f64) -> Self {
        PauliTerm {
            letters,
            coefficient,
        }
    }

    /// Parses letters such as `"XZI"` with the given coefficient.
    pub fn parse(letters: &str, coefficient: f64) -> Result<Self, PauliParseError> {
        Ok(PauliTerm {
            letters: letters.parse()?,
            coefficient,
        })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

mod letters_serde {
    use super::PauliString;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &PauliString, s: S) -> Result<S::Ok, S::Error> {
        let letters: String = p.letters().iter().map(|l| l.to_char()).collect();
        s.serialize_str(&letters)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PauliString, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
