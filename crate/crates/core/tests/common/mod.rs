#![allow(dead_code)]

use faer::Mat;
use num_complex::Complex64 as c64;
use qheat_core::{CorrelationMatrix, NambuMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(m: usize, rng: &mut ChaCha8Rng, real: bool) -> Mat<c64> {
    let mut h = Mat::<c64>::zeros(m, m);
    for j in 0..m {
        h[(j, j)] = c64::new(rng.random_range(-1.0..1.0), 0.0);
        for i in 0..j {
            let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
            let z = c64::new(rng.random_range(-1.0..1.0), im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn random_antisymmetric(m: usize, rng: &mut ChaCha8Rng, real: bool) -> Mat<c64> {
    let mut d = Mat::<c64>::zeros(m, m);
    for j in 0..m {
        for i in 0..j {
            let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
            let z = c64::new(rng.random_range(-1.0..1.0), im);
            d[(i, j)] = z;
            d[(j, i)] = -z;
        }
    }
    d
}

/// Random quadratic Hamiltonian, optionally with pairing terms.
pub fn random_nambu(m: usize, pairing: bool, real: bool, seed: u64) -> NambuMatrix {
    let mut r = rng(seed);
    let h = random_hermitian(m, &mut r, real);
    let d = if pairing {
        random_antisymmetric(m, &mut r, real)
    } else {
        Mat::zeros(m, m)
    };
    NambuMatrix::build(h.as_ref(), d.as_ref()).unwrap()
}

/// `sum_k w_k n_k` over the listed modes.
pub fn number_weighted(m: usize, modes: &[(usize, f64)]) -> NambuMatrix {
    let mut h = Mat::<c64>::zeros(m, m);
    for &(k, w) in modes {
        h[(k, k)] = c64::new(w, 0.0);
    }
    NambuMatrix::build(h.as_ref(), Mat::<c64>::zeros(m, m).as_ref()).unwrap()
}

pub fn fermi(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// Gibbs state of `h` at temperature `t`, built from its Nambu eigenbasis.
pub fn thermal_correlation(h: &NambuMatrix, t: f64) -> CorrelationMatrix {
    let qp = h.diagonalize().unwrap();
    let u = qp.transform().to_complex();
    let n = u.nrows();
    let occ: Vec<f64> = qp.eigenvalues().iter().map(|&e| 1.0 - fermi(e / t)).collect();
    let chi = Mat::from_fn(n, n, |i, j| (0..n).map(|k| u[(i, k)] * occ[k] * u[(j, k)].conj()).sum());
    CorrelationMatrix::new(chi).unwrap()
}

pub fn norm1(a: &Mat<c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let mut s = 0;
    while norm1(a) / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scaled = Mat::from_fn(n, n, |i, j| a[(i, j)] / 2f64.powi(s));
    let mut term = Mat::<c64>::identity(n, n);
    let mut sum = Mat::<c64>::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut d: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}
