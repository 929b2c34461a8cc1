//! Independent dense-matrix oracle for small systems.
//!
//! Everything here is built from explicit Kronecker products so it shares no
//! code path with the bit-mask simulator under test.

#![allow(dead_code)]

use graphcert::{LocalObservable, Pauli, QuantumState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(d: usize) -> Dense {
    vec![vec![c(0.0, 0.0); d]; d]
}

pub fn eye(d: usize) -> Dense {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn pauli_matrix(p: Pauli) -> Dense {
    match p {
        Pauli::I => eye(2),
        Pauli::X => vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ],
        Pauli::Y => vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ],
        Pauli::Z => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
    }
}

pub fn observable_matrix(o: &LocalObservable) -> Dense {
    let [x, y, z] = o.bloch();
    let mut m = zeros(2);
    for (p, w) in [(Pauli::X, x), (Pauli::Y, y), (Pauli::Z, z)] {
        m = add(&m, &scale(&pauli_matrix(p), w));
    }
    m
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = zeros(ra * rb);
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn kron_all(factors: &[Dense]) -> Dense {
    factors.iter().fold(eye(1), |acc, f| kron(&acc, f))
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn scale(a: &Dense, w: f64) -> Dense {
    a.iter()
        .map(|r| r.iter().map(|x| x * w).collect())
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut out = zeros(d);
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn trace(a: &Dense) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// `Tr(ρ O)` without forming the product.
pub fn trace_product(rho: &Dense, op: &Dense) -> Complex64 {
    let d = rho.len();
    let mut t = c(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            t += rho[i][k] * op[k][i];
        }
    }
    t
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

pub fn pauli_string_matrix(letters: &str) -> Dense {
    let factors: Vec<Dense> = letters
        .chars()
        .map(|ch| pauli_matrix(Pauli::from_char(ch).unwrap()))
        .collect();
    kron_all(&factors)
}

pub fn density(state: &QuantumState) -> Dense {
    let d = state.dim();
    let flat = state.density_matrix().unwrap();
    (0..d).map(|i| flat[i * d..(i + 1) * d].to_vec()).collect()
}

pub fn outer(psi: &[Complex64]) -> Dense {
    psi.iter()
        .map(|a| psi.iter().map(|b| a * b.conj()).collect())
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng) -> Complex64 {
    c(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Haar-ish random pure state from normalized complex Gaussians.
pub fn random_pure(n: usize, r: &mut ChaCha8Rng) -> QuantumState {
    let mut v: Vec<Complex64> = (0..1usize << n).map(|_| gaussian(r)).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
    QuantumState::from_amplitudes(n, v).unwrap()
}

/// Random full-rank density matrix `G G† / Tr(G G†)` with Ginibre `G`.
pub fn random_density(n: usize, r: &mut ChaCha8Rng) -> QuantumState {
    let d = 1usize << n;
    let g: Dense = (0..d)
        .map(|_| (0..d).map(|_| gaussian(r)).collect())
        .collect();
    let mut rho = zeros(d);
    for i in 0..d {
        for j in 0..d {
            rho[i][j] = (0..d).map(|k| g[i][k] * g[j][k].conj()).sum();
        }
    }
    let tr = trace(&rho).re;
    let flat: Vec<Complex64> = rho.into_iter().flatten().map(|x| x / tr).collect();
    QuantumState::from_density(n, flat).unwrap()
}

/// Random single-qubit unitary from a normalized Gaussian quaternion.
pub fn random_unitary(r: &mut ChaCha8Rng) -> [[Complex64; 2]; 2] {
    let q: Vec<f64> = (0..4).map(|_| r.sample(StandardNormal)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (c(q[0] / n, q[1] / n), c(q[2] / n, q[3] / n));
    let phase = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
    [
        [a * phase, -b.conj() * phase],
        [b * phase, a.conj() * phase],
    ]
}

pub fn to_dense2(u: &[[Complex64; 2]; 2]) -> Dense {
    vec![u[0].to_vec(), u[1].to_vec()]
}
