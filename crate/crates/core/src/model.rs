//! The single-mode heat valve: two fermionic baths of `N` modes each,
//! bridged by one level of frequency `omega0`.
//!
//! Mode order is fixed as `(bath 1: 0..N, centre: N, bath 2: N+1..2N+1)`.

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::nambu::{CorrelationMatrix, NambuMatrix, STRUCTURE_TOL};
use crate::oracles::thermal_occupation;

/// Upper edge of the bath band in units of `omega0`.
pub const BAND_TOP: f64 = 2.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingDistribution {
    /// i.i.d. uniform on `[-gamma/sqrt(N), gamma/sqrt(N)]`.
    #[default]
    UniformSymmetric,
    /// i.i.d. normal with mean zero and variance `gamma^2 / (3N)`.
    GaussianZeroMean,
    /// Every coupling equal to `gamma / sqrt(3N)`.
    EqualDeterministic,
}

impl CouplingDistribution {
    pub const ALL: [CouplingDistribution; 3] = [
        CouplingDistribution::UniformSymmetric,
        CouplingDistribution::GaussianZeroMean,
        CouplingDistribution::EqualDeterministic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CouplingDistribution::UniformSymmetric => "uniform_symmetric",
            CouplingDistribution::GaussianZeroMean => "gaussian_zero_mean",
            CouplingDistribution::EqualDeterministic => "equal_deterministic",
        }
    }
}

/// Internal bath couplings as they appear in a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InternalCoupling {
    /// Gaussian random Hermitian matrix per bath; entries have variance
    /// `scale^2 / N`, so the added spectrum has a width of about `4 scale`.
    RandomHermitian { scale: f64 },
    /// Real symmetric matrices given row by row.
    Explicit {
        bath1: Vec<Vec<f64>>,
        bath2: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValveConfig {
    pub bath_size: usize,
    pub gamma: f64,
    #[serde(default = "unit")]
    pub omega0: f64,
    pub bath1_temperature: f64,
    pub bath2_temperature: f64,
    #[serde(default)]
    pub coupling_dist: CouplingDistribution,
    #[serde(default)]
    pub rwa: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub internal_coupling: Option<InternalCoupling>,
}

fn unit() -> f64 {
    1.0
}

impl ValveConfig {
    pub fn new(bath_size: usize, gamma: f64, bath1_temperature: f64, bath2_temperature: f64) -> Self {
        Self {
            bath_size,
            gamma,
            omega0: 1.0,
            bath1_temperature,
            bath2_temperature,
            coupling_dist: CouplingDistribution::default(),
            rwa: false,
            seed: 0,
            internal_coupling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bath_size == 0 {
            return Err(Error::config("bath_size", "must be at least 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if self.omega0 != 1.0 {
            return Err(Error::config(
                "omega0",
                "all quantities are in units of omega0, so it must be 1",
            ));
        }
        for (key, t) in [
            ("bath1_temperature", self.bath1_temperature),
            ("bath2_temperature", self.bath2_temperature),
        ] {
            if !(t >= 0.0) {
                return Err(Error::config(key, format!("must be >= 0, got {t}")));
            }
        }
        match &self.internal_coupling {
            Some(InternalCoupling::RandomHermitian { scale }) if !(*scale >= 0.0 && scale.is_finite()) => {
                Err(Error::config("internal_coupling.scale", "must be finite and >= 0"))
            }
            Some(InternalCoupling::Explicit { bath1, bath2 }) => {
                for (key, m) in [("internal_coupling.bath1", bath1), ("internal_coupling.bath2", bath2)] {
                    if m.len() != self.bath_size || m.iter().any(|r| r.len() != self.bath_size) {
                        return Err(Error::config(key, format!("must be {0}x{0}", self.bath_size)));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Total number of fermionic modes, `2N + 1`.
    pub fn modes(&self) -> usize {
        2 * self.bath_size + 1
    }

    /// Ensemble second moment of the couplings, `gamma^2 / (3N)`.
    pub fn mean_coupling_sq(&self) -> f64 {
        self.gamma * self.gamma / (3.0 * self.bath_size as f64)
    }

    pub fn temperature(&self, bath: Bath) -> f64 {
        match bath {
            Bath::One => self.bath1_temperature,
            Bath::Two => self.bath2_temperature,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bath {
    One,
    Two,
}

impl Bath {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Bath::One),
            2 => Ok(Bath::Two),
            other => Err(Error::InvalidBathIndex(other)),
        }
    }

    fn slot(self) -> usize {
        match self {
            Bath::One => 0,
            Bath::Two => 1,
        }
    }
}

/// Index bookkeeping for the `(bath 1, centre, bath 2)` ordering.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub bath_size: usize,
}

impl Layout {
    pub fn modes(self) -> usize {
        2 * self.bath_size + 1
    }

    pub fn center(self) -> usize {
        self.bath_size
    }

    pub fn bath_mode(self, bath: Bath, k: usize) -> usize {
        match bath {
            Bath::One => k,
            Bath::Two => self.bath_size + 1 + k,
        }
    }
}

/// Sampled bath frequencies and couplings to the central level.
///
/// Couplings are complex because a unitary change of bath basis (internal
/// couplings) rotates them into the complex plane.
#[derive(Clone, Debug, PartialEq)]
pub struct BathRealization {
    pub frequencies: [Vec<f64>; 2],
    pub couplings: [Vec<c64>; 2],
}

impl BathRealization {
    pub fn bath_size(&self) -> usize {
        self.frequencies[0].len()
    }

    pub fn frequencies(&self, bath: Bath) -> &[f64] {
        &self.frequencies[bath.slot()]
    }

    pub fn couplings(&self, bath: Bath) -> &[c64] {
        &self.couplings[bath.slot()]
    }

    /// `sum_k |g_k|^2` for one bath.
    pub fn coupling_weight(&self, bath: Bath) -> f64 {
        self.couplings(bath).iter().map(|g| g.norm_sqr()).sum()
    }

    /// Realization average of `|g_k|^2` for one bath.
    pub fn empirical_mean_coupling_sq(&self, bath: Bath) -> f64 {
        self.coupling_weight(bath) / self.bath_size() as f64
    }

    fn check(&self, config: &ValveConfig) -> Result<()> {
        for slot in 0..2 {
            for found in [self.frequencies[slot].len(), self.couplings[slot].len()] {
                if found != config.bath_size {
                    return Err(Error::DimensionMismatch {
                        context: "bath realization vs bath_size",
                        expected: config.bath_size,
                        found,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Draws a bath realization from `rng`. Order of draws: bath 1 frequencies,
/// bath 1 couplings, bath 2 frequencies, bath 2 couplings.
pub fn sample_bath_with<R: Rng>(config: &ValveConfig, rng: &mut R) -> Result<BathRealization> {
    config.validate()?;
    let n = config.bath_size;
    let top = BAND_TOP * config.omega0;
    let bound = config.gamma / (n as f64).sqrt();
    let sigma = config.mean_coupling_sq().sqrt();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::config("gamma", e.to_string()))?;

    let draw = |rng: &mut R| -> (Vec<f64>, Vec<c64>) {
        let freqs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=top)).collect();
        let couplings = (0..n)
            .map(|_| {
                let g = match config.coupling_dist {
                    CouplingDistribution::UniformSymmetric if bound > 0.0 => {
                        rng.random_range(-bound..=bound)
                    }
                    CouplingDistribution::UniformSymmetric => 0.0,
                    CouplingDistribution::GaussianZeroMean => normal.sample(rng),
                    CouplingDistribution::EqualDeterministic => sigma,
                };
                c64::new(g, 0.0)
            })
            .collect();
        (freqs, couplings)
    };
    let (f1, g1) = draw(rng);
    let (f2, g2) = draw(rng);
    Ok(BathRealization {
        frequencies: [f1, f2],
        couplings: [g1, g2],
    })
}

/// Bath realization determined by `config.seed`.
pub fn sample_bath(config: &ValveConfig) -> Result<BathRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    sample_bath_with(config, &mut rng)
}

/// Total valve Hamiltonian; the pairing terms `g (a^+ d^+ + d a)` are
/// dropped when `config.rwa` is set.
pub fn build_hamiltonian(config: &ValveConfig, bath: &BathRealization) -> Result<NambuMatrix> {
    config.validate()?;
    bath.check(config)?;
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let m = layout.modes();
    let c = layout.center();
    let mut h = Mat::<c64>::zeros(m, m);
    let mut d = Mat::<c64>::zeros(m, m);
    h[(c, c)] = c64::new(config.omega0, 0.0);
    for b in [Bath::One, Bath::Two] {
        for (k, (&w, &g)) in bath.frequencies(b).iter().zip(bath.couplings(b)).enumerate() {
            let i = layout.bath_mode(b, k);
            h[(i, i)] = c64::new(w, 0.0);
            h[(i, c)] = g;
            h[(c, i)] = g.conj();
            if !config.rwa {
                // g a_i^+ d^+ = 1/2 (D_ic a_i^+ d^+ + D_ci d^+ a_i^+) with D antisymmetric
                d[(i, c)] = g;
                d[(c, i)] = -g;
            }
        }
    }
    NambuMatrix::build(h.as_ref(), d.as_ref())
}

/// `sum_k omega_k a_k^+ a_k` over the modes of one bath.
pub fn bath_hamiltonian(config: &ValveConfig, bath: &BathRealization, which: Bath) -> Result<NambuMatrix> {
    config.validate()?;
    bath.check(config)?;
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let m = layout.modes();
    let mut h = Mat::<c64>::zeros(m, m);
    for (k, &w) in bath.frequencies(which).iter().enumerate() {
        let i = layout.bath_mode(which, k);
        h[(i, i)] = c64::new(w, 0.0);
    }
    NambuMatrix::build(h.as_ref(), Mat::<c64>::zeros(m, m).as_ref())
}

/// Central level term `omega0 d^+ d`.
pub fn center_hamiltonian(config: &ValveConfig) -> Result<NambuMatrix> {
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let m = layout.modes();
    let mut h = Mat::<c64>::zeros(m, m);
    h[(layout.center(), layout.center())] = c64::new(config.omega0, 0.0);
    NambuMatrix::build(h.as_ref(), Mat::<c64>::zeros(m, m).as_ref())
}

/// Baths thermal at their own temperatures, centre empty, no correlations.
pub fn initial_occupations(config: &ValveConfig, bath: &BathRealization) -> Result<Vec<f64>> {
    config.validate()?;
    bath.check(config)?;
    let layout = Layout {
        bath_size: config.bath_size,
    };
    let mut occ = vec![0.0; layout.modes()];
    for b in [Bath::One, Bath::Two] {
        let t = config.temperature(b);
        for (k, &w) in bath.frequencies(b).iter().enumerate() {
            occ[layout.bath_mode(b, k)] = thermal_occupation(w, t);
        }
    }
    Ok(occ)
}

pub fn initial_correlation(config: &ValveConfig, bath: &BathRealization) -> Result<CorrelationMatrix> {
    CorrelationMatrix::from_occupations(&initial_occupations(config, bath)?)
}

/// Per-bath particle-conserving coupling matrices among bath modes.
#[derive(Clone, Debug)]
pub struct InternalCouplingSpec {
    pub bath1: Mat<c64>,
    pub bath2: Mat<c64>,
}

impl InternalCouplingSpec {
    pub fn zero(n: usize) -> Self {
        Self {
            bath1: Mat::zeros(n, n),
            bath2: Mat::zeros(n, n),
        }
    }

    /// Independent Gaussian Hermitian matrices for both baths.
    pub fn random_hermitian<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Self {
        let mut one = || random_hermitian(n, scale, rng);
        let bath1 = one();
        let bath2 = one();
        Self { bath1, bath2 }
    }

    /// Resolves a configuration entry, drawing from `rng` if random.
    pub fn from_config<R: Rng>(spec: &InternalCoupling, n: usize, rng: &mut R) -> Self {
        match spec {
            InternalCoupling::RandomHermitian { scale } => Self::random_hermitian(n, *scale, rng),
            InternalCoupling::Explicit { bath1, bath2 } => {
                let to_mat = |rows: &Vec<Vec<f64>>| Mat::from_fn(n, n, |i, j| c64::new(rows[i][j], 0.0));
                Self {
                    bath1: to_mat(bath1),
                    bath2: to_mat(bath2),
                }
            }
        }
    }

    fn get(&self, bath: Bath) -> &Mat<c64> {
        match bath {
            Bath::One => &self.bath1,
            Bath::Two => &self.bath2,
        }
    }
}

fn random_hermitian<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Mat<c64> {
    let sd = if n == 0 { 0.0 } else { scale / (n as f64).sqrt() };
    let diag = Normal::new(0.0, sd).expect("finite scale");
    let off = Normal::new(0.0, sd / 2f64.sqrt()).expect("finite scale");
    let mut m = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        m[(j, j)] = c64::new(diag.sample(rng), 0.0);
        for i in 0..j {
            let z = c64::new(off.sample(rng), off.sample(rng));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Folds internal couplings into a new realization: each bath's
/// `diag(omega) + V = U D U^+` yields frequencies `D` and couplings
/// `g_j -> sum_k conj(U_kj) g_k`. The new frequencies may leave the band.
pub fn apply_internal_couplings(
    config: &ValveConfig,
    bath: &BathRealization,
    spec: &InternalCouplingSpec,
) -> Result<BathRealization> {
    bath.check(config)?;
    let n = config.bath_size;
    let mut out = bath.clone();
    for b in [Bath::One, Bath::Two] {
        let v = spec.get(b);
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "internal coupling matrix",
                expected: n,
                found: v.nrows(),
            });
        }
        let residual = linalg::hermitian_residual(v.as_ref());
        if residual > STRUCTURE_TOL * linalg::max_abs(v.as_ref()).max(f64::MIN_POSITIVE) {
            return Err(Error::NonHermitian {
                what: "internal coupling matrix",
                residual,
            });
        }
        let freqs = bath.frequencies(b);
        let h = Mat::from_fn(n, n, |i, j| {
            let diag = if i == j { c64::new(freqs[i], 0.0) } else { ZERO };
            diag + v[(i, j)]
        });
        let eig = linalg::hermitian_eigen(h.as_ref())?;
        let g = bath.couplings(b);
        let rotated: Vec<c64> = (0..n)
            .map(|j| (0..n).map(|k| eig.vectors.get(k, j).conj() * g[k]).sum())
            .collect();
        out.frequencies[b.slot()] = eig.values;
        out.couplings[b.slot()] = rotated;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, gamma: f64) -> ValveConfig {
        let mut c = ValveConfig::new(n, gamma, 1.0, 0.0);
        c.seed = 7;
        c
    }

    #[test]
    fn zero_gamma_gives_zero_couplings() {
        for dist in CouplingDistribution::ALL {
            let mut c = cfg(50, 0.0);
            c.coupling_dist = dist;
            let b = sample_bath(&c).unwrap();
            assert!(b.couplings.iter().flatten().all(|g| *g == ZERO));
        }
    }

    #[test]
    fn frequencies_stay_in_band() {
        let b = sample_bath(&cfg(1000, 0.3)).unwrap();
        assert!(b.frequencies.iter().flatten().all(|&w| (0.0..=2.0).contains(&w)));
        let bound = 0.3 / 1000f64.sqrt();
        assert!(b.couplings.iter().flatten().all(|g| g.re.abs() <= bound));
    }

    #[test]
    fn same_seed_same_bath() {
        let c = cfg(64, 0.2);
        assert_eq!(sample_bath(&c).unwrap(), sample_bath(&c).unwrap());
        let mut d = c.clone();
        d.seed += 1;
        assert_ne!(sample_bath(&c).unwrap(), sample_bath(&d).unwrap());
    }

    #[test]
    fn rwa_has_no_pairing_and_differs_only_there() {
        let mut c = cfg(5, 0.4);
        let b = sample_bath(&c).unwrap();
        let exact = build_hamiltonian(&c, &b).unwrap();
        c.rwa = true;
        let rwa = build_hamiltonian(&c, &b).unwrap();
        assert!(rwa.is_particle_conserving());
        assert!(!exact.is_particle_conserving());
        let diff = exact.linear_combination(1.0, &rwa, -1.0).unwrap();
        assert_eq!(crate::linalg::max_abs(diff.particle_block()), 0.0);
    }

    #[test]
    fn bath_two_hamiltonian_support() {
        let c = cfg(4, 0.4);
        let b = sample_bath(&c).unwrap();
        let h2 = bath_hamiltonian(&c, &b, Bath::Two).unwrap();
        let m = c.modes();
        for i in 0..=c.bath_size {
            for j in 0..2 * m {
                assert_eq!(h2.data()[(i, j)], ZERO);
                assert_eq!(h2.data()[(j, i)], ZERO);
                assert_eq!(h2.data()[(i + m, j)], ZERO);
            }
        }
        assert!(Bath::from_index(3).is_err());
    }

    #[test]
    fn bath_energy_matches_direct_sum() {
        let mut c = cfg(30, 0.2);
        c.bath2_temperature = 0.7;
        let b = sample_bath(&c).unwrap();
        let chi = initial_correlation(&c, &b).unwrap();
        let h2 = bath_hamiltonian(&c, &b, Bath::Two).unwrap();
        let direct: f64 = b
            .frequencies(Bath::Two)
            .iter()
            .map(|&w| w / ((w / 0.7).exp() + 1.0))
            .sum();
        assert!((h2.expectation(&chi).unwrap() - direct).abs() < 1e-12);

        c.bath2_temperature = 0.0;
        let chi = initial_correlation(&c, &b).unwrap();
        assert!(h2.expectation(&chi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn total_energy_at_start_is_bath_sum() {
        let c = cfg(20, 0.5);
        let b = sample_bath(&c).unwrap();
        let chi = initial_correlation(&c, &b).unwrap();
        let h = build_hamiltonian(&c, &b).unwrap();
        let direct: f64 = b.frequencies(Bath::One).iter().map(|&w| w / (w.exp() + 1.0)).sum();
        assert!((h.expectation(&chi).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn initial_state_limits() {
        let mut c = cfg(10, 0.2);
        c.bath1_temperature = 0.0;
        let b = sample_bath(&c).unwrap();
        let chi = initial_correlation(&c, &b).unwrap();
        for k in 0..c.modes() {
            assert_eq!(chi.data()[(k, k)].re, 1.0);
        }
        c.bath1_temperature = f64::INFINITY;
        c.bath2_temperature = f64::INFINITY;
        let occ = initial_occupations(&c, &b).unwrap();
        for (i, o) in occ.iter().enumerate() {
            let expect = if i == c.bath_size { 0.0 } else { 0.5 };
            assert_eq!(*o, expect);
        }
    }

    #[test]
    fn fermi_occupation_at_unit_energy() {
        let mut c = cfg(1, 0.0);
        let mut b = sample_bath(&c).unwrap();
        b.frequencies[0][0] = 1.0;
        c.bath1_temperature = 1.0;
        let occ = initial_occupations(&c, &b).unwrap();
        assert!((occ[0] - 0.268_941_421_369_995_1).abs() < 1e-15);
    }

    #[test]
    fn zero_internal_coupling_is_a_permutation() {
        let c = cfg(8, 0.3);
        let b = sample_bath(&c).unwrap();
        let t = apply_internal_couplings(&c, &b, &InternalCouplingSpec::zero(8)).unwrap();
        for bath in [Bath::One, Bath::Two] {
            let mut pairs: Vec<(f64, f64)> = b
                .frequencies(bath)
                .iter()
                .zip(b.couplings(bath))
                .map(|(&w, g)| (w, g.norm()))
                .collect();
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            for ((w, g), (w2, g2)) in pairs.iter().zip(t.frequencies(bath).iter().zip(t.couplings(bath))) {
                assert!((w - w2).abs() < 1e-14);
                assert!((g - g2.norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_hermitian_internal_coupling_rejected() {
        let c = cfg(2, 0.3);
        let b = sample_bath(&c).unwrap();
        let mut spec = InternalCouplingSpec::zero(2);
        spec.bath1[(0, 1)] = c64::new(0.1, 0.0);
        assert!(matches!(
            apply_internal_couplings(&c, &b, &spec),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn config_validation_names_the_key() {
        let mut c = cfg(0, 0.1);
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { ref key, .. }) if key == "bath_size"));
        c.bath_size = 3;
        c.gamma = -1.0;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { ref key, .. }) if key == "gamma"));
        c.gamma = 0.1;
        c.bath2_temperature = -0.5;
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { ref key, .. }) if key == "bath2_temperature"));
    }
}
