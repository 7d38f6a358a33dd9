//! Quadratic fermionic operators in particle-hole symmetrized (Nambu) form.
//!
//! With the mode vector `A = (a_1..a_M, a_1^+..a_M^+)` every quadratic
//! operator is `1/2 A^+ O A + c` for a Hermitian `2M x 2M` matrix
//!
//! ```text
//!     O = [  h    D  ]
//!         [ -D*  -h^T ]
//! ```
//!
//! where `h` is Hermitian and `D` antisymmetric. The single-particle
//! correlation matrix `chi_ij = <A_i A_j^+>` then gives expectation values
//! as `-1/2 tr(O chi) + c` and rates of change as `-1/(2i) tr(chi [O, H])`.

use faer::{Mat, MatRef};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{self, Spectral, Unitary, ZERO};

/// Tolerance for structural checks at construction time, relative to the
/// largest entry.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Tolerance for quantities carrying accumulated rounding error.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Index of the partner of `i` under the particle/hole swap.
#[inline]
pub fn partner(i: usize, modes: usize) -> usize {
    if i < modes {
        i + modes
    } else {
        i - modes
    }
}

#[derive(Clone, Debug)]
pub struct NambuMatrix {
    modes: usize,
    data: Mat<c64>,
    const_offset: f64,
}

impl NambuMatrix {
    /// Assembles the Nambu matrix of `sum_ij h_ij a_i^+ a_j + 1/2 sum_ij (D_ij a_i^+ a_j^+ + h.c.)`.
    ///
    /// Only the antisymmetric part of `anomalous` acts as an operator, so the
    /// symmetric part is dropped. `const_offset` is set to `tr(h)/2`, which
    /// makes `1/2 A^+ O A + const_offset` equal to the normal-ordered operator.
    pub fn build(particle: MatRef<'_, c64>, anomalous: MatRef<'_, c64>) -> Result<Self> {
        let m = particle.nrows();
        for (what, found) in [
            ("particle block columns", particle.ncols()),
            ("anomalous block rows", anomalous.nrows()),
            ("anomalous block columns", anomalous.ncols()),
        ] {
            if found != m {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: m,
                    found,
                });
            }
        }
        let residual = linalg::hermitian_residual(particle);
        if residual > STRUCTURE_TOL * linalg::max_abs(particle).max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitian {
                what: "particle block",
                residual,
            });
        }

        let mut data = Mat::<c64>::zeros(2 * m, 2 * m);
        let mut trace = 0.0;
        for j in 0..m {
            for i in 0..m {
                // symmetrize so the stored block is exactly Hermitian
                let h = 0.5 * (particle[(i, j)] + particle[(j, i)].conj());
                let d = 0.5 * (anomalous[(i, j)] - anomalous[(j, i)]);
                data[(i, j)] = h;
                data[(i + m, j + m)] = -h.conj();
                data[(i, j + m)] = d;
                data[(i + m, j)] = -d.conj();
            }
            trace += particle[(j, j)].re;
        }
        Ok(Self {
            modes: m,
            data,
            const_offset: 0.5 * trace,
        })
    }

    pub fn zeros(modes: usize) -> Self {
        Self {
            modes,
            data: Mat::zeros(2 * modes, 2 * modes),
            const_offset: 0.0,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn data(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn const_offset(&self) -> f64 {
        self.const_offset
    }

    pub fn particle_block(&self) -> MatRef<'_, c64> {
        self.data.as_ref().submatrix(0, 0, self.modes, self.modes)
    }

    pub fn anomalous_block(&self) -> MatRef<'_, c64> {
        self.data
            .as_ref()
            .submatrix(0, self.modes, self.modes, self.modes)
    }

    pub fn is_real(&self) -> bool {
        linalg::is_real(self.data.as_ref())
    }

    /// True when the anomalous block is exactly zero.
    pub fn is_particle_conserving(&self) -> bool {
        let d = self.anomalous_block();
        (0..self.modes).all(|j| (0..self.modes).all(|i| d[(i, j)] == ZERO))
    }

    /// The particle-conserving part (anomalous block cleared).
    pub fn normal_part(&self) -> Self {
        let mut out = self.clone();
        let m = self.modes;
        for j in 0..m {
            for i in 0..m {
                out.data[(i, j + m)] = ZERO;
                out.data[(i + m, j)] = ZERO;
            }
        }
        out
    }

    /// The pairing part (particle block cleared, no constant).
    pub fn anomalous_part(&self) -> Self {
        let mut out = self.clone();
        let m = self.modes;
        for j in 0..m {
            for i in 0..m {
                out.data[(i, j)] = ZERO;
                out.data[(i + m, j + m)] = ZERO;
            }
        }
        out.const_offset = 0.0;
        out
    }

    /// `a * self + b * other`, constant offsets included.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_modes(other.modes, "linear combination")?;
        let n = self.dim();
        let data = Mat::from_fn(n, n, |i, j| a * self.data[(i, j)] + b * other.data[(i, j)]);
        Ok(Self {
            modes: self.modes,
            data,
            const_offset: a * self.const_offset + b * other.const_offset,
        })
    }

    /// Max entry of `O + X O^T X`, zero for a valid Nambu matrix.
    pub fn particle_hole_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let mirror = self.data[(partner(j, self.modes), partner(i, self.modes))];
                worst = worst.max((self.data[(i, j)] + mirror).norm());
            }
        }
        worst
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(self.data.as_ref())
    }

    pub fn diagonalize(&self) -> Result<QuasiparticleBasis> {
        let spectral = linalg::hermitian_eigen(self.data.as_ref())?;
        Ok(QuasiparticleBasis {
            modes: self.modes,
            spectral,
        })
    }

    /// `<O> = -1/2 tr(O chi) + const_offset`.
    pub fn expectation(&self, chi: &CorrelationMatrix) -> Result<f64> {
        Ok(self.expectation_with_residual(chi)?.0)
    }

    /// Expectation value together with the imaginary part of the trace,
    /// which only reflects rounding for Hermitian inputs.
    pub fn expectation_with_residual(&self, chi: &CorrelationMatrix) -> Result<(f64, f64)> {
        self.check_modes(chi.modes(), "expectation")?;
        let tr = linalg::trace_of_product(self.data.as_ref(), chi.data());
        let imag = 0.5 * tr.im;
        self.check_real(imag)?;
        Ok((-0.5 * tr.re + self.const_offset, imag))
    }

    /// `d<O>/dt = -1/(2i) tr(chi [O, H])` under evolution by `hamiltonian`.
    pub fn observable_rate(&self, hamiltonian: &Self, chi: &CorrelationMatrix) -> Result<f64> {
        self.check_modes(hamiltonian.modes, "observable rate")?;
        self.check_modes(chi.modes(), "observable rate")?;
        let c = linalg::commutator(self.data.as_ref(), hamiltonian.data.as_ref());
        let tr = linalg::trace_of_product(chi.data(), c.as_ref());
        // -(x + iy)/(2i) = -y/2 + i x/2
        self.check_real(0.5 * tr.re)?;
        Ok(-0.5 * tr.im)
    }

    fn check_real(&self, imag: f64) -> Result<()> {
        let scale = (linalg::max_abs(self.data.as_ref()) * self.dim() as f64).max(1.0);
        if imag.abs() > SPECTRAL_TOL * scale {
            return Err(Error::NonReal { imag });
        }
        Ok(())
    }

    fn check_modes(&self, other: usize, context: &'static str) -> Result<()> {
        if other != self.modes {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.modes,
                found: other,
            });
        }
        Ok(())
    }
}

/// Single-particle correlation matrix `chi_ij = <A_i A_j^+>`.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    modes: usize,
    data: Mat<c64>,
}

impl CorrelationMatrix {
    /// Validates Hermiticity, trace and the particle-hole constraint.
    /// The eigenvalue bound is checked separately by [`Self::check_spectrum`]
    /// because it costs a full diagonalization.
    pub fn new(data: Mat<c64>) -> Result<Self> {
        let n = data.nrows();
        if n % 2 != 0 || data.ncols() != n {
            return Err(Error::InvalidCorrelation(format!(
                "shape {}x{} is not 2M x 2M",
                data.nrows(),
                data.ncols()
            )));
        }
        let chi = Self {
            modes: n / 2,
            data,
        };
        let herm = chi.hermitian_residual();
        if herm > STRUCTURE_TOL {
            return Err(Error::InvalidCorrelation(format!(
                "not Hermitian (residual {herm:e})"
            )));
        }
        let ph = chi.particle_hole_residual();
        if ph > SPECTRAL_TOL {
            return Err(Error::InvalidCorrelation(format!(
                "particle-hole constraint violated (residual {ph:e})"
            )));
        }
        Ok(chi)
    }

    /// Uncorrelated state with `<a_k^+ a_k> = occupations[k]`.
    pub fn from_occupations(occupations: &[f64]) -> Result<Self> {
        let m = occupations.len();
        let mut data = Mat::<c64>::zeros(2 * m, 2 * m);
        for (k, &n) in occupations.iter().enumerate() {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::InvalidCorrelation(format!(
                    "occupation {n} of mode {k} outside [0, 1]"
                )));
            }
            data[(k, k)] = c64::new(1.0 - n, 0.0);
            data[(k + m, k + m)] = c64::new(n, 0.0);
        }
        Ok(Self { modes: m, data })
    }

    pub(crate) fn from_raw(data: Mat<c64>) -> Self {
        Self {
            modes: data.nrows() / 2,
            data,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn data(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn into_data(self) -> Mat<c64> {
        self.data
    }

    /// `<a_k^+ a_k>`.
    pub fn occupation(&self, k: usize) -> f64 {
        self.data[(k + self.modes, k + self.modes)].re
    }

    pub fn total_occupation(&self) -> f64 {
        (0..self.modes).map(|k| self.occupation(k)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = 2 * self.modes;
        (0..n).all(|j| (0..n).all(|i| i == j || self.data[(i, j)] == ZERO))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..2 * self.modes).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(self.data.as_ref())
    }

    /// Max entry of `chi + X chi^T X - 1`.
    pub fn particle_hole_residual(&self) -> f64 {
        let n = 2 * self.modes;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let mirror = self.data[(partner(j, self.modes), partner(i, self.modes))];
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.data[(i, j)] + mirror - target).norm());
            }
        }
        worst
    }

    /// `|tr(chi) - M|`.
    pub fn trace_residual(&self) -> f64 {
        let tr: c64 = (0..2 * self.modes).map(|i| self.data[(i, i)]).sum();
        (tr - c64::new(self.modes as f64, 0.0)).norm()
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(self.data.as_ref())?.values)
    }

    /// Eigenvalues must lie in `[-eps, 1 + eps]`.
    pub fn check_spectrum(&self, eps: f64) -> Result<()> {
        let spec = self.spectrum()?;
        if let Some(bad) = spec.iter().find(|&&x| x < -eps || x > 1.0 + eps) {
            return Err(Error::InvalidCorrelation(format!(
                "eigenvalue {bad} outside [0, 1]"
            )));
        }
        Ok(())
    }
}

/// Quasiparticle modes `B = U^+ A` diagonalizing a Nambu Hamiltonian.
#[derive(Clone, Debug)]
pub struct QuasiparticleBasis {
    modes: usize,
    spectral: Spectral,
}

impl QuasiparticleBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Ascending quasiparticle energies, `2M` of them.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.values
    }

    pub fn transform(&self) -> &Unitary {
        &self.spectral.vectors
    }

    pub(crate) fn into_spectral(self) -> Spectral {
        self.spectral
    }

    /// `U D U^+`.
    pub fn reconstruct(&self) -> Mat<c64> {
        self.spectral.reconstruct()
    }

    /// Worst mismatch between `lambda` and the nearest `-lambda'`.
    ///
    /// With ascending order the pairing is `values[i] = -values[n-1-i]`.
    pub fn pairing_residual(&self) -> f64 {
        let v = &self.spectral.values;
        let n = v.len();
        (0..n).map(|i| (v[i] + v[n - 1 - i]).abs()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry of `U^+ H U`.
    pub fn off_diagonal_residual(&self, h: &NambuMatrix) -> f64 {
        let d = self.spectral.vectors.to_eigenbasis(h.data());
        let n = d.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    worst = worst.max(d[(i, j)].norm());
                }
            }
        }
        worst
    }
}
