//! Brute-force many-body reference for small systems.
//!
//! Operators are dense matrices on the `2^M` Fock space with basis state
//! `s` holding `n_k = (s >> k) & 1`. Ladder operators carry the
//! Jordan-Wigner sign `(-1)^(n_0 + ... + n_{k-1})`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{self, Spectral, ONE, ZERO};
use crate::model::{self, Bath, BathRealization, InternalCouplingSpec, Layout, ValveConfig};
use crate::nambu::{NambuMatrix, STRUCTURE_TOL};

pub const MAX_MODES: usize = 12;

fn check_modes(modes: usize) -> Result<()> {
    if modes > MAX_MODES {
        return Err(Error::TooManyModes { modes, cap: MAX_MODES });
    }
    Ok(())
}

/// A single ladder operator `a_k` or `a_k^+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Image of basis state `s`, with sign, or `None` if it vanishes.
    pub fn apply(self, s: usize) -> Option<(usize, f64)> {
        let bit = 1usize << self.mode;
        let occupied = s & bit != 0;
        if occupied == self.dagger {
            return None;
        }
        let parity = (s & (bit - 1)).count_ones();
        let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
        Some((s ^ bit, sign))
    }
}

/// Dense operator on the Fock space of `modes` fermionic modes.
#[derive(Clone, Debug)]
pub struct FockOperator {
    modes: usize,
    matrix: Mat<c64>,
}

/// Density matrices share the operator representation.
pub type FockDensityMatrix = FockOperator;

impl FockOperator {
    pub fn zeros(modes: usize) -> Result<Self> {
        check_modes(modes)?;
        let d = 1 << modes;
        Ok(Self {
            modes,
            matrix: Mat::zeros(d, d),
        })
    }

    pub fn from_matrix(modes: usize, matrix: Mat<c64>) -> Result<Self> {
        check_modes(modes)?;
        let d = 1 << modes;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "fock operator",
                expected: d,
                found: matrix.nrows(),
            });
        }
        Ok(Self { modes, matrix })
    }

    /// Matrix of one ladder operator.
    pub fn ladder(modes: usize, op: Ladder) -> Result<Self> {
        let mut out = Self::zeros(modes)?;
        if op.mode >= modes {
            return Err(Error::DimensionMismatch {
                context: "ladder mode index",
                expected: modes,
                found: op.mode,
            });
        }
        for s in 0..out.dim() {
            if let Some((t, sign)) = op.apply(s) {
                out.matrix[(t, s)] = c64::new(sign, 0.0);
            }
        }
        Ok(out)
    }

    /// Adds `coef * left * right` for a pair of ladder operators.
    pub fn add_pair(&mut self, coef: c64, left: Ladder, right: Ladder) {
        if coef == ZERO {
            return;
        }
        for s in 0..self.dim() {
            let Some((mid, s1)) = right.apply(s) else { continue };
            let Some((t, s2)) = left.apply(mid) else { continue };
            self.matrix[(t, s)] += coef * (s1 * s2);
        }
    }

    pub fn add_identity(&mut self, coef: f64) {
        for s in 0..self.dim() {
            self.matrix[(s, s)] += c64::new(coef, 0.0);
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_residual(self.matrix.as_ref())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            modes: self.modes,
            matrix: self.matrix.adjoint().to_owned(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            modes: self.modes,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, a: c64) -> Self {
        Self {
            modes: self.modes,
            matrix: Mat::from_fn(self.dim(), self.dim(), |i, j| a * self.matrix[(i, j)]),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Mat::<c64>::zeros(self.dim(), self.dim());
        matmul(out.as_mut(), Accum::Replace, self.matrix.as_ref(), other.matrix.as_ref(), ONE, Par::Seq);
        Self {
            modes: self.modes,
            matrix: out,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            modes: self.modes,
            matrix: linalg::commutator(self.matrix.as_ref(), other.matrix.as_ref()),
        }
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, rho: &FockDensityMatrix) -> c64 {
        linalg::trace_of_product(rho.matrix.as_ref(), self.matrix.as_ref())
    }

    /// Ascending eigenvalues of a Hermitian operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(self.matrix.as_ref())?.values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs((&self.matrix - &other.matrix).as_ref())
    }
}

/// Nambu component `A_i` as a ladder operator.
fn nambu_component(i: usize, modes: usize) -> Ladder {
    if i < modes {
        Ladder::annihilate(i)
    } else {
        Ladder::create(i - modes)
    }
}

/// Many-body form `1/2 sum_ij O_ij A_i^+ A_j + const` of a quadratic operator.
pub fn lift(o: &NambuMatrix) -> Result<FockOperator> {
    let m = o.modes();
    let mut out = FockOperator::zeros(m)?;
    let data = o.data();
    for j in 0..2 * m {
        for i in 0..2 * m {
            let coef = data[(i, j)] * 0.5;
            out.add_pair(coef, nambu_component(i, m).adjoint(), nambu_component(j, m));
        }
    }
    out.add_identity(o.const_offset());
    Ok(out)
}

/// Uncorrelated state with `<n_k> = occupations[k]`.
pub fn product_state(occupations: &[f64]) -> Result<FockDensityMatrix> {
    let m = occupations.len();
    let mut out = FockOperator::zeros(m)?;
    for s in 0..out.dim() {
        let p: f64 = occupations
            .iter()
            .enumerate()
            .map(|(k, &n)| if s >> k & 1 == 1 { n } else { 1.0 - n })
            .product();
        out.matrix[(s, s)] = c64::new(p, 0.0);
    }
    Ok(out)
}

/// Baths thermal in their sampled modes, centre empty.
pub fn thermal_state(config: &ValveConfig, bath: &BathRealization) -> Result<FockDensityMatrix> {
    check_modes(config.modes())?;
    product_state(&model::initial_occupations(config, bath)?)
}

/// Valve Hamiltonian assembled term by term from ladder operators, with
/// optional couplings `sum_kl V_kl a_k^+ a_l` inside each bath.
pub fn valve_hamiltonian(
    config: &ValveConfig,
    bath: &BathRealization,
    internal: Option<&InternalCouplingSpec>,
) -> Result<FockOperator> {
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let mut h = FockOperator::zeros(layout.modes())?;
    let d = layout.center();
    h.add_pair(c64::new(config.omega0, 0.0), Ladder::create(d), Ladder::annihilate(d));
    for which in [Bath::One, Bath::Two] {
        add_bath_terms(&mut h, config, bath, internal, which);
        for (k, &g) in bath.couplings(which).iter().enumerate() {
            let a = layout.bath_mode(which, k);
            h.add_pair(g, Ladder::create(a), Ladder::annihilate(d));
            h.add_pair(g.conj(), Ladder::create(d), Ladder::annihilate(a));
            if !config.rwa {
                h.add_pair(g, Ladder::create(a), Ladder::create(d));
                h.add_pair(g.conj(), Ladder::annihilate(d), Ladder::annihilate(a));
            }
        }
    }
    Ok(h)
}

fn add_bath_terms(
    h: &mut FockOperator,
    config: &ValveConfig,
    bath: &BathRealization,
    internal: Option<&InternalCouplingSpec>,
    which: Bath,
) {
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let mode = |k| layout.bath_mode(which, k);
    for (k, &w) in bath.frequencies(which).iter().enumerate() {
        h.add_pair(c64::new(w, 0.0), Ladder::create(mode(k)), Ladder::annihilate(mode(k)));
    }
    if let Some(spec) = internal {
        let v = match which {
            Bath::One => &spec.bath1,
            Bath::Two => &spec.bath2,
        };
        for l in 0..config.bath_size {
            for k in 0..config.bath_size {
                h.add_pair(v[(k, l)], Ladder::create(mode(k)), Ladder::annihilate(mode(l)));
            }
        }
    }
}

/// Energy of one bath, including its internal couplings.
pub fn bath_operator(
    config: &ValveConfig,
    bath: &BathRealization,
    internal: Option<&InternalCouplingSpec>,
    which: Bath,
) -> Result<FockOperator> {
    let mut h = FockOperator::zeros(config.modes())?;
    add_bath_terms(&mut h, config, bath, internal, which);
    Ok(h)
}

/// Normalized `exp(-H/T)`; at `T = 0` the projector onto the lowest
/// eigenspace (within `1e-9`) divided by its dimension.
pub fn gibbs_state(h: &FockOperator, temperature: f64) -> Result<FockDensityMatrix> {
    let spec = linalg::hermitian_eigen(h.matrix.as_ref())?;
    let e0 = spec.values.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = spec
        .values
        .iter()
        .map(|&e| {
            if temperature == 0.0 {
                if e - e0 < 1e-9 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-(e - e0) / temperature).exp()
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let u = spec.vectors.to_complex();
    let d = h.dim();
    let scaled = Mat::from_fn(d, d, |i, k| u[(i, k)] * (weights[k] / z));
    let mut rho = Mat::<c64>::zeros(d, d);
    matmul(rho.as_mut(), Accum::Replace, scaled.as_ref(), u.adjoint(), ONE, Par::Seq);
    FockOperator::from_matrix(h.modes, rho)
}

/// Exact unitary dynamics generated by a Fock-space Hamiltonian.
pub struct FockEvolution {
    modes: usize,
    spectral: Spectral,
    rho0: Mat<c64>,
}

impl FockEvolution {
    pub fn new(h: &FockOperator, rho0: &FockDensityMatrix) -> Result<Self> {
        if h.modes != rho0.modes {
            return Err(Error::DimensionMismatch {
                context: "fock evolution",
                expected: h.modes,
                found: rho0.modes,
            });
        }
        let residual = h.hermitian_residual();
        if residual > STRUCTURE_TOL * linalg::max_abs(h.matrix.as_ref()).max(1.0) {
            return Err(Error::NonHermitian {
                what: "fock Hamiltonian",
                residual,
            });
        }
        let spectral = linalg::hermitian_eigen(h.matrix.as_ref())?;
        let rho0 = spectral.vectors.to_eigenbasis(rho0.matrix.as_ref());
        Ok(Self {
            modes: h.modes,
            spectral,
            rho0,
        })
    }

    /// `rho(t) = e^{-iHt} rho(0) e^{iHt}`.
    pub fn state(&self, t: f64) -> FockDensityMatrix {
        let e = &self.spectral.values;
        let d = e.len();
        let phased = Mat::from_fn(d, d, |m, n| self.rho0[(m, n)] * c64::from_polar(1.0, -(e[m] - e[n]) * t));
        FockOperator {
            modes: self.modes,
            matrix: self.spectral.vectors.from_eigenbasis(phased.as_ref()),
        }
    }

    /// `d<O>/dt = -i tr(rho(t) [O, H])` at each time.
    pub fn rate(&self, observable: &FockOperator, h: &FockOperator, times: &[f64]) -> Vec<f64> {
        let k = observable.commutator(h);
        let kt = self.spectral.vectors.to_eigenbasis(k.matrix.as_ref());
        let e = &self.spectral.values;
        let d = e.len();
        // weights W_mn = rho_mn K_nm, then tr = sum_mn W_mn e^{-i(E_m - E_n) t}
        let w = Mat::from_fn(d, d, |m, n| self.rho0[(m, n)] * kt[(n, m)]);
        times
            .iter()
            .map(|&t| {
                let phase: Vec<c64> = e.iter().map(|&x| c64::from_polar(1.0, -x * t)).collect();
                let mut tr = ZERO;
                for n in 0..d {
                    let back = phase[n].conj();
                    for m in 0..d {
                        tr += w[(m, n)] * phase[m] * back;
                    }
                }
                (c64::new(0.0, -1.0) * tr).re
            })
            .collect()
    }
}

/// Heat current into bath 2 from the many-body dynamics of the valve.
pub fn exact_current(config: &ValveConfig, bath: &BathRealization, times: &[f64]) -> Result<Vec<f64>> {
    check_modes(config.modes())?;
    let h = valve_hamiltonian(config, bath, None)?;
    let rho0 = thermal_state(config, bath)?;
    let target = bath_operator(config, bath, None, Bath::Two)?;
    Ok(FockEvolution::new(&h, &rho0)?.rate(&target, &h, times))
}
