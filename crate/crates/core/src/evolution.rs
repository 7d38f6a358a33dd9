//! Exact time evolution of the correlation matrix and heat currents.
//!
//! `chi(t) = e^{-iHt} chi(0) e^{iHt}` is evaluated by phase rotation in the
//! eigenbasis of `H`, so any time costs the same after one diagonalization.
//!
//! Currents `d<O>/dt = -1/(2i) tr(chi(t) [O, H])` avoid forming `chi(t)`.
//! For a bath Hamiltonian `O` the commutator `C = [O, H]` lives on the few
//! rows and columns of the sites that connect the bath to the rest (the
//! "hubs"). With an uncorrelated initial state the trace then reduces to
//! inner products of `W^+ v` for a handful of vectors `v`, with
//! `W = e^{-iHt}`, and those are batched through one matrix product per
//! block of times.
//!
//! Particle-conserving problems are handled in the `M x M` particle sector
//! instead of the `2M x 2M` Nambu space unless disabled.

use std::sync::OnceLock;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, Spectral, Unitary, ONE, ZERO};
use crate::nambu::{CorrelationMatrix, NambuMatrix};

/// Times per batched product.
const TIME_BLOCK: usize = 32;

#[derive(Clone, Copy, Debug)]
pub struct PropagatorOptions {
    /// Work in the particle sector when both `H` and `chi(0)` conserve
    /// particle number.
    pub reduce_particle_conserving: bool,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            reduce_particle_conserving: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CurrentMethod {
    /// Hub contraction when possible, eigenbasis trace otherwise.
    #[default]
    Auto,
    /// Forms `chi(t)` and `[O, H]` densely at every time. Reference only.
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sector {
    Nambu,
    Particle,
}

fn working_dim(sector: Sector, modes: usize) -> usize {
    match sector {
        Sector::Nambu => 2 * modes,
        Sector::Particle => modes,
    }
}

#[derive(Clone, Debug)]
enum Initial {
    Diagonal(Vec<f64>),
    Dense(Mat<c64>),
}

/// Precomputed eigenbasis of `H` together with the initial state.
#[derive(Debug)]
pub struct Propagator {
    modes: usize,
    sector: Sector,
    spectral: Spectral,
    initial: Initial,
    rotated: OnceLock<Mat<c64>>,
}

impl Propagator {
    pub fn new(h: &NambuMatrix, chi0: &CorrelationMatrix) -> Result<Self> {
        Self::with_options(h, chi0, PropagatorOptions::default())
    }

    pub fn with_options(h: &NambuMatrix, chi0: &CorrelationMatrix, opts: PropagatorOptions) -> Result<Self> {
        if chi0.modes() != h.modes() {
            return Err(Error::DimensionMismatch {
                context: "propagator",
                expected: h.modes(),
                found: chi0.modes(),
            });
        }
        let m = h.modes();
        let data = chi0.data();
        let reduce = opts.reduce_particle_conserving
            && h.is_particle_conserving()
            && (0..m).all(|j| (0..m).all(|i| data[(i, j + m)] == ZERO));
        let sector = if reduce { Sector::Particle } else { Sector::Nambu };
        let dim = working_dim(sector, m);
        let initial = if chi0.is_diagonal() {
            Initial::Diagonal(chi0.diagonal()[..dim].to_vec())
        } else {
            Initial::Dense(data.submatrix(0, 0, dim, dim).to_owned())
        };
        Self::assemble(h, sector, initial)
    }

    /// Propagator for the uncorrelated state with `<a_k^+ a_k> = occupations[k]`,
    /// without materializing the `2M x 2M` correlation matrix.
    pub fn from_occupations(h: &NambuMatrix, occupations: &[f64], opts: PropagatorOptions) -> Result<Self> {
        let m = h.modes();
        if occupations.len() != m {
            return Err(Error::DimensionMismatch {
                context: "propagator occupations",
                expected: m,
                found: occupations.len(),
            });
        }
        if let Some(bad) = occupations.iter().find(|n| !(0.0..=1.0).contains(*n)) {
            return Err(Error::InvalidCorrelation(format!("occupation {bad} outside [0, 1]")));
        }
        let reduce = opts.reduce_particle_conserving && h.is_particle_conserving();
        let mut diag: Vec<f64> = occupations.iter().map(|n| 1.0 - n).collect();
        let sector = if reduce {
            Sector::Particle
        } else {
            diag.extend_from_slice(occupations);
            Sector::Nambu
        };
        Self::assemble(h, sector, Initial::Diagonal(diag))
    }

    fn assemble(h: &NambuMatrix, sector: Sector, initial: Initial) -> Result<Self> {
        let spectral = match sector {
            Sector::Nambu => h.diagonalize()?.into_spectral(),
            Sector::Particle => linalg::hermitian_eigen(h.particle_block())?,
        };
        Ok(Self {
            modes: h.modes(),
            sector,
            spectral,
            initial,
            rotated: OnceLock::new(),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// True when evolution runs in the `M x M` particle sector.
    pub fn is_reduced(&self) -> bool {
        self.sector == Sector::Particle
    }

    /// Eigenvalues of the working Hamiltonian (`2M` Nambu energies, or the
    /// `M` single-particle energies when reduced).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.values
    }

    pub fn transform(&self) -> &Unitary {
        &self.spectral.vectors
    }

    fn dim(&self) -> usize {
        self.spectral.dim()
    }

    /// `U^+ chi(0) U` in the working sector, computed on first use.
    pub fn rotated_initial(&self) -> &Mat<c64> {
        self.rotated.get_or_init(|| {
            let n = self.dim();
            let chi0 = match &self.initial {
                Initial::Diagonal(d) => Mat::from_fn(n, n, |i, j| if i == j { c64::new(d[i], 0.0) } else { ZERO }),
                Initial::Dense(m) => m.clone(),
            };
            self.spectral.vectors.to_eigenbasis(chi0.as_ref())
        })
    }

    /// Working-sector `chi(t)`.
    fn evolve_working(&self, t: f64) -> Mat<c64> {
        let rot = self.rotated_initial();
        let lam = &self.spectral.values;
        let n = self.dim();
        let phased = Mat::from_fn(n, n, |i, j| rot[(i, j)] * c64::from_polar(1.0, (lam[j] - lam[i]) * t));
        self.spectral.vectors.from_eigenbasis(phased.as_ref())
    }

    /// `chi(t)`. Negative `t` runs the evolution backwards.
    pub fn evolve(&self, t: f64) -> CorrelationMatrix {
        let g = self.evolve_working(t);
        match self.sector {
            Sector::Nambu => CorrelationMatrix::from_raw(g),
            Sector::Particle => {
                let m = self.modes;
                let mut chi = Mat::<c64>::zeros(2 * m, 2 * m);
                for j in 0..m {
                    for i in 0..m {
                        chi[(i, j)] = g[(i, j)];
                        let delta = if i == j { ONE } else { ZERO };
                        chi[(i + m, j + m)] = delta - g[(j, i)];
                    }
                }
                CorrelationMatrix::from_raw(chi)
            }
        }
    }

    /// Heat current into the subsystem with Hamiltonian `bath` (which must
    /// conserve particle number), split into the parts generated by the
    /// particle-conserving and the pairing terms of `h`.
    pub fn heat_current(&self, h: &NambuMatrix, bath: &NambuMatrix, times: &[f64]) -> Result<CurrentTrace> {
        self.heat_current_with(h, bath, times, CurrentMethod::Auto, Execution::default())
    }

    pub fn heat_current_with(
        &self,
        h: &NambuMatrix,
        bath: &NambuMatrix,
        times: &[f64],
        method: CurrentMethod,
        exec: Execution,
    ) -> Result<CurrentTrace> {
        for (found, context) in [(h.modes(), "heat current Hamiltonian"), (bath.modes(), "heat current observable")] {
            if found != self.modes {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: self.modes,
                    found,
                });
            }
        }
        if !bath.is_particle_conserving() {
            return Err(Error::NotBathSupported("observable contains pairing terms".into()));
        }
        if self.sector == Sector::Particle && !h.is_particle_conserving() {
            return Err(Error::NotBathSupported(
                "Hamiltonian has pairing terms but the propagator was reduced".into(),
            ));
        }

        let comm = Commutator::new(self, h, bath);
        let factor = match self.sector {
            Sector::Nambu => 1.0,
            Sector::Particle => 2.0,
        };
        let traces = match (method, &self.initial) {
            (CurrentMethod::Dense, _) => self.traces_dense(&comm, times, exec),
            (CurrentMethod::Auto, Initial::Diagonal(occ)) => match comm.hubs() {
                Some(hubs) if 3 * hubs.len() < self.dim() => self.traces_hub(&comm, &hubs, occ, times, exec),
                _ => self.traces_spectral(&comm, times, exec),
            },
            (CurrentMethod::Auto, Initial::Dense(_)) => self.traces_spectral(&comm, times, exec),
        };

        let mut trace = CurrentTrace {
            times: times.to_vec(),
            total: Vec::with_capacity(times.len()),
            normal: Vec::with_capacity(times.len()),
            anomalous: Vec::with_capacity(times.len()),
        };
        for [tn, ta] in traces {
            // -1/(2i) tr = -Im(tr)/2 for an imaginary trace
            let normal = -0.5 * factor * tn.im;
            let anomalous = -0.5 * factor * ta.im;
            trace.normal.push(normal);
            trace.anomalous.push(anomalous);
            trace.total.push(normal + anomalous);
        }
        Ok(trace)
    }

    fn traces_dense(&self, comm: &Commutator<'_>, times: &[f64], exec: Execution) -> Vec<[c64; 2]> {
        let (cn, ca) = comm.dense();
        exec.map(times, |&t| {
            let chi = self.evolve_working(t);
            [
                linalg::trace_of_product(chi.as_ref(), cn.as_ref()),
                linalg::trace_of_product(chi.as_ref(), ca.as_ref()),
            ]
        })
    }

    fn traces_spectral(&self, comm: &Commutator<'_>, times: &[f64], exec: Execution) -> Vec<[c64; 2]> {
        let (cn, ca) = comm.dense();
        let rot = self.rotated_initial();
        let u = &self.spectral.vectors;
        let n = self.dim();
        // P_mn = X_mn C_nm, then tr = sum_m conj(phi_m) (P phi)_m
        let weights = |c: &Mat<c64>| {
            let ct = u.to_eigenbasis(c.as_ref());
            Mat::from_fn(n, n, |i, j| rot[(i, j)] * ct[(j, i)])
        };
        let pn = weights(&cn);
        let pa = weights(&ca);
        let lam = &self.spectral.values;
        let blocks: Vec<&[f64]> = times.chunks(TIME_BLOCK).collect();
        exec.map(&blocks, |block| {
            let phi = Mat::from_fn(n, block.len(), |i, j| c64::from_polar(1.0, lam[i] * block[j]));
            let mut out = Vec::with_capacity(block.len());
            let yn = &pn * &phi;
            let ya = &pa * &phi;
            for j in 0..block.len() {
                let mut acc = [ZERO; 2];
                for i in 0..n {
                    let w = phi[(i, j)].conj();
                    acc[0] += w * yn[(i, j)];
                    acc[1] += w * ya[(i, j)];
                }
                out.push(acc);
            }
            out
        })
        .into_iter()
        .flatten()
        .collect()
    }

    fn traces_hub(
        &self,
        comm: &Commutator<'_>,
        hubs: &[usize],
        occ: &[f64],
        times: &[f64],
        exec: Execution,
    ) -> Vec<[c64; 2]> {
        let n = self.dim();
        let nh = hubs.len();
        let u = &self.spectral.vectors;
        let is_hub = {
            let mut v = vec![false; n];
            for &k in hubs {
                v[k] = true;
            }
            v
        };
        // seeds: e_k for every hub, then hub columns of C_n and C_a with
        // hub rows removed
        let mut seeds: Vec<Vec<c64>> = Vec::with_capacity(3 * nh);
        for &k in hubs {
            let mut e = vec![ZERO; n];
            e[k] = ONE;
            seeds.push(u.adjoint_apply(&e));
        }
        for part in [Part::Normal, Part::Anomalous] {
            for &k in hubs {
                let col: Vec<c64> = (0..n)
                    .map(|x| if is_hub[x] { ZERO } else { comm.entry(x, k, part) })
                    .collect();
                seeds.push(u.adjoint_apply(&col));
            }
        }
        let hub_block: Vec<[c64; 2]> = hubs
            .iter()
            .flat_map(|&kp| {
                hubs.iter()
                    .map(move |&k| [comm.entry(kp, k, Part::Normal), comm.entry(kp, k, Part::Anomalous)])
            })
            .collect();

        let lam = &self.spectral.values;
        let blocks: Vec<&[f64]> = times.chunks(TIME_BLOCK).collect();
        exec.map(&blocks, |block| {
            let images = apply_phased(u, &seeds, lam, block);
            block
                .iter()
                .enumerate()
                .map(|(ti, _)| {
                    let v = |s: usize| &images[ti * seeds.len() + s];
                    let inner = |a: &[c64], b: &[c64]| -> c64 {
                        a.iter().zip(b).zip(occ).map(|((x, y), &c)| x.conj() * y * c).sum()
                    };
                    let mut tr = [ZERO; 2];
                    for (p, slot) in tr.iter_mut().enumerate() {
                        let mut z_im = 0.0;
                        for h in 0..nh {
                            z_im += inner(v(h), v(nh * (1 + p) + h)).im;
                        }
                        // tr = sum_k (z_k - conj z_k) + sum_{k,k'} chi_kk' C_k'k
                        let mut y = ZERO;
                        for a in 0..nh {
                            for b in 0..nh {
                                let c = hub_block[b * nh + a][p];
                                if c != ZERO {
                                    y += inner(v(a), v(b)) * c;
                                }
                            }
                        }
                        *slot = c64::new(0.0, 2.0 * z_im) + y;
                    }
                    tr
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

/// `W(t)^+ v = U e^{i D t} U^+ v` for every seed (given as `U^+ v`) and
/// every time; result index is `time * seeds + seed`.
fn apply_phased(u: &Unitary, seeds: &[Vec<c64>], lam: &[f64], times: &[f64]) -> Vec<Vec<c64>> {
    let n = lam.len();
    let ns = seeds.len();
    let cols = ns * times.len();
    match u {
        Unitary::Real(ur) => {
            // real and imaginary parts as separate columns
            let phi = Mat::from_fn(n, 2 * cols, |i, j| {
                let (col, imag) = (j / 2, j % 2 == 1);
                let (ti, s) = (col / ns, col % ns);
                let z = c64::from_polar(1.0, lam[i] * times[ti]) * seeds[s][i];
                if imag {
                    z.im
                } else {
                    z.re
                }
            });
            let mut out = Mat::<f64>::zeros(n, 2 * cols);
            matmul(out.as_mut(), Accum::Replace, ur.as_ref(), phi.as_ref(), 1.0, Par::Seq);
            (0..cols)
                .map(|c| {
                    let re = out.col_as_slice(2 * c);
                    let im = out.col_as_slice(2 * c + 1);
                    re.iter().zip(im).map(|(&a, &b)| c64::new(a, b)).collect()
                })
                .collect()
        }
        Unitary::Complex(uc) => {
            let phi = Mat::from_fn(n, cols, |i, j| {
                let (ti, s) = (j / ns, j % ns);
                c64::from_polar(1.0, lam[i] * times[ti]) * seeds[s][i]
            });
            let mut out = Mat::<c64>::zeros(n, cols);
            matmul(out.as_mut(), Accum::Replace, uc.as_ref(), phi.as_ref(), ONE, Par::Seq);
            (0..cols).map(|c| out.col_as_slice(c).to_vec()).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Normal,
    Anomalous,
}

/// `[O, H]` in the working sector, split by whether an entry couples the
/// particle and hole halves (pairing) or not.
struct Commutator<'a> {
    sector_dim: usize,
    modes: usize,
    h: MatRef<'a, c64>,
    kind: CommKind,
}

enum CommKind {
    /// `O` diagonal: entries are `(o_x - o_y) H_xy`.
    Diagonal(Vec<f64>),
    Dense(Mat<c64>),
}

impl<'a> Commutator<'a> {
    fn new(prop: &Propagator, h: &'a NambuMatrix, o: &NambuMatrix) -> Self {
        let dim = prop.dim();
        let hw = h.data().submatrix(0, 0, dim, dim);
        let ow = o.data().submatrix(0, 0, dim, dim);
        let diagonal = (0..dim).all(|j| (0..dim).all(|i| i == j || ow[(i, j)] == ZERO));
        let kind = if diagonal {
            CommKind::Diagonal((0..dim).map(|i| ow[(i, i)].re).collect())
        } else {
            CommKind::Dense(linalg::commutator(ow, hw))
        };
        Self {
            sector_dim: dim,
            modes: prop.modes,
            h: hw,
            kind,
        }
    }

    fn crosses(&self, x: usize, y: usize) -> bool {
        self.sector_dim == 2 * self.modes && ((x < self.modes) != (y < self.modes))
    }

    fn full_entry(&self, x: usize, y: usize) -> c64 {
        match &self.kind {
            CommKind::Diagonal(o) => self.h[(x, y)] * (o[x] - o[y]),
            CommKind::Dense(c) => c[(x, y)],
        }
    }

    fn entry(&self, x: usize, y: usize, part: Part) -> c64 {
        let pairing = self.crosses(x, y);
        match (part, pairing) {
            (Part::Normal, false) | (Part::Anomalous, true) => self.full_entry(x, y),
            _ => ZERO,
        }
    }

    fn dense(&self) -> (Mat<c64>, Mat<c64>) {
        let n = self.sector_dim;
        (
            Mat::from_fn(n, n, |i, j| self.entry(i, j, Part::Normal)),
            Mat::from_fn(n, n, |i, j| self.entry(i, j, Part::Anomalous)),
        )
    }

    /// Smallest simple vertex cover of the nonzero pattern: either the
    /// touched sites outside the support of `O`, or those inside it.
    fn hubs(&self) -> Option<Vec<usize>> {
        let CommKind::Diagonal(o) = &self.kind else {
            return None;
        };
        let n = self.sector_dim;
        let mut outside = vec![false; n];
        let mut inside = vec![false; n];
        let mut outside_covers = true;
        for y in 0..n {
            for x in 0..n {
                if o[x] == o[y] || self.h[(x, y)] == ZERO {
                    continue;
                }
                for z in [x, y] {
                    if o[z] == 0.0 {
                        outside[z] = true;
                    } else {
                        inside[z] = true;
                    }
                }
                if o[x] != 0.0 && o[y] != 0.0 {
                    outside_covers = false;
                }
            }
        }
        let pick = |v: Vec<bool>| -> Vec<usize> { v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect() };
        let inside = pick(inside);
        if outside_covers {
            let outside = pick(outside);
            if outside.len() <= inside.len() {
                return Some(outside);
            }
        }
        Some(inside)
    }
}

/// Heat current time series; `total = normal + anomalous` pointwise.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentTrace {
    pub times: Vec<f64>,
    pub total: Vec<f64>,
    pub normal: Vec<f64>,
    pub anomalous: Vec<f64>,
}

/// Mean and sample standard deviation of a series.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Minimum number of samples for a steady-state estimate.
pub const MIN_WINDOW_SAMPLES: usize = 10;

/// Default averaging window in units of `1/omega0`.
pub const DEFAULT_WINDOW: (f64, f64) = (20.0, 50.0);

/// Mean and sample standard deviation of the total current over the
/// samples with `lo <= t <= hi`.
pub fn steady_state_estimate(trace: &CurrentTrace, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let inside: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.total)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(_, &v)| v)
        .collect();
    if inside.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientSamples {
            lo,
            hi,
            found: inside.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    Ok(mean_std(&inside))
}

/// `n` equally spaced samples on `[start, stop]`.
pub fn time_grid(start: f64, stop: f64, dt: f64) -> Vec<f64> {
    let steps = ((stop - start) / dt + 1e-9).floor() as usize;
    (0..=steps).map(|i| start + i as f64 * dt).collect()
}
