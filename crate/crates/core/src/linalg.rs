//! Dense Hermitian helpers shared by the Nambu and Fock layers.
//!
//! Every Hamiltonian built by the valve model is real symmetric unless
//! complex internal bath couplings are applied, so eigenvectors are kept
//! real whenever the input allows it. That halves memory and cuts the
//! cost of the big products by roughly four.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

pub(crate) const ZERO: c64 = c64::new(0.0, 0.0);
pub(crate) const ONE: c64 = c64::new(1.0, 0.0);

pub(crate) fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// Largest entry of `A - A^H`.
pub(crate) fn hermitian_residual(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn is_real(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

pub(crate) fn real_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

pub(crate) fn imag_part(m: MatRef<'_, c64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im)
}

pub(crate) fn complexify(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

pub(crate) fn combine(re: &Mat<f64>, im: &Mat<f64>) -> Mat<c64> {
    Mat::from_fn(re.nrows(), re.ncols(), |i, j| c64::new(re[(i, j)], im[(i, j)]))
}

pub(crate) fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let ab = a * b;
    let ba = b * a;
    ab - ba
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

/// Unitary (or real orthogonal) eigenvector matrix.
#[derive(Clone, Debug)]
pub enum Unitary {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl Unitary {
    pub fn dim(&self) -> usize {
        match self {
            Unitary::Real(u) => u.nrows(),
            Unitary::Complex(u) => u.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Unitary::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            Unitary::Real(u) => c64::new(u[(i, j)], 0.0),
            Unitary::Complex(u) => u[(i, j)],
        }
    }

    pub fn to_complex(&self) -> Mat<c64> {
        match self {
            Unitary::Real(u) => complexify(u.as_ref()),
            Unitary::Complex(u) => u.clone(),
        }
    }

    /// `U^H A U`.
    pub fn to_eigenbasis(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Unitary::Real(u) => {
                let re = real_part(a);
                let im = imag_part(a);
                let re = u.transpose() * (&re * u);
                let im = u.transpose() * (&im * u);
                combine(&re, &im)
            }
            Unitary::Complex(u) => u.adjoint() * (a * u),
        }
    }

    /// `U A U^H`.
    pub fn from_eigenbasis(&self, a: MatRef<'_, c64>) -> Mat<c64> {
        match self {
            Unitary::Real(u) => {
                let re = real_part(a);
                let im = imag_part(a);
                let re = u * (&re * u.transpose());
                let im = u * (&im * u.transpose());
                combine(&re, &im)
            }
            Unitary::Complex(u) => u * (a * u.adjoint()),
        }
    }

    /// `U^H v`.
    pub fn adjoint_apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        let mut out = vec![ZERO; n];
        match self {
            Unitary::Real(u) => {
                for (j, o) in out.iter_mut().enumerate() {
                    let col = u.col_as_slice(j);
                    *o = col.iter().zip(v).map(|(&x, &y)| y * x).sum();
                }
            }
            Unitary::Complex(u) => {
                for (j, o) in out.iter_mut().enumerate() {
                    let col = u.col_as_slice(j);
                    *o = col.iter().zip(v).map(|(x, &y)| x.conj() * y).sum();
                }
            }
        }
        out
    }

    /// Max entry of `U^H U - I`.
    pub fn orthonormality_residual(&self) -> f64 {
        let u = self.to_complex();
        let g = u.adjoint() * &u;
        let n = g.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub values: Vec<f64>,
    pub vectors: Unitary,
}

impl Spectral {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `U diag(values) U^H`.
    pub fn reconstruct(&self) -> Mat<c64> {
        let n = self.dim();
        let d = Mat::from_fn(n, n, |i, j| {
            if i == j {
                c64::new(self.values[i], 0.0)
            } else {
                ZERO
            }
        });
        self.vectors.from_eigenbasis(d.as_ref())
    }
}

pub(crate) fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<Spectral> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Spectral {
            values: Vec::new(),
            vectors: Unitary::Real(Mat::zeros(0, 0)),
        });
    }
    let no_conv = || Error::EigenNoConvergence {
        dim: n,
        scale: max_abs(m),
    };
    if is_real(m) {
        let re = real_part(m);
        let evd = re.self_adjoint_eigen(Side::Lower).map_err(|_| no_conv())?;
        let values = (0..n).map(|i| evd.S()[i]).collect();
        Ok(Spectral {
            values,
            vectors: Unitary::Real(evd.U().to_owned()),
        })
    } else {
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| no_conv())?;
        let values = (0..n).map(|i| evd.S()[i].re).collect();
        Ok(Spectral {
            values,
            vectors: Unitary::Complex(evd.U().to_owned()),
        })
    }
}
