//! Multi-realization experiments on the heat valve.
//!
//! Every realization draws its own baths from a seed derived from the
//! master seed and its position in the experiment, so results do not
//! depend on execution order or on which other grid points are run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{self, CurrentMethod, CurrentTrace, Propagator, PropagatorOptions, DEFAULT_WINDOW};
use crate::exec::Execution;
use crate::model::{self, Bath, BathRealization, CouplingDistribution, InternalCouplingSpec, ValveConfig};
use crate::oracles::{self, UniformBathSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Exact,
    Rwa,
}

impl Kind {
    pub const BOTH: [Kind; 2] = [Kind::Exact, Kind::Rwa];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Exact => "exact",
            Kind::Rwa => "rwa",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Kind::Exact => 1,
            Kind::Rwa => 2,
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Kind::Exact),
            "rwa" => Ok(Kind::Rwa),
            other => Err(format!("unknown kind `{other}` (expected exact or rwa)")),
        }
    }
}

/// Which second moment of the couplings feeds the perturbative overlay.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMoment {
    /// `gamma^2 / (3N)`.
    #[default]
    Ensemble,
    /// Average of `|g_k|^2` over the sampled bath.
    Sampled,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one realization.
pub fn realization_seed(
    master: u64,
    grid_index: usize,
    realization: usize,
    kind: Kind,
    dist: CouplingDistribution,
) -> u64 {
    let dist_tag = CouplingDistribution::ALL.iter().position(|d| *d == dist).unwrap_or(0) as u64;
    [grid_index as u64, realization as u64, kind.tag(), dist_tag]
        .into_iter()
        .fold(splitmix64(master), |acc, x| splitmix64(acc ^ splitmix64(x)))
}

/// Bath draw for `config.seed`, with internal couplings folded in when
/// configured. Internal couplings are drawn after the baths from the same
/// stream.
pub fn sample_realization(config: &ValveConfig) -> Result<BathRealization> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bath = model::sample_bath_with(config, &mut rng)?;
    match &config.internal_coupling {
        None => Ok(bath),
        Some(spec) => {
            let couplings = InternalCouplingSpec::from_config(spec, config.bath_size, &mut rng);
            model::apply_internal_couplings(config, &bath, &couplings)
        }
    }
}

/// One valve simulation: builds the Hamiltonian for `kind` and returns the
/// heat current into `target` at `times`.
pub fn simulate(
    config: &ValveConfig,
    bath: &BathRealization,
    kind: Kind,
    target: Bath,
    times: &[f64],
    exec: Execution,
) -> Result<CurrentTrace> {
    let mut config = config.clone();
    config.rwa = kind == Kind::Rwa;
    let h = model::build_hamiltonian(&config, bath)?;
    let observable = model::bath_hamiltonian(&config, bath, target)?;
    let occupations = model::initial_occupations(&config, bath)?;
    let prop = Propagator::from_occupations(&h, &occupations, PropagatorOptions::default())?;
    prop.heat_current_with(&h, &observable, times, CurrentMethod::Auto, exec)
}

#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub realizations: usize,
    pub kinds: Vec<Kind>,
    pub window: (f64, f64),
    pub dt: f64,
    /// Bath whose energy change defines the current.
    pub target: Bath,
    pub exec: Execution,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            realizations: 5,
            kinds: Kind::BOTH.to_vec(),
            window: DEFAULT_WINDOW,
            dt: 0.1,
            target: Bath::Two,
            exec: Execution::default(),
        }
    }
}

impl SweepSettings {
    fn check(&self, grid: &[f64]) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if grid.is_empty() {
            return Err(Error::config("gamma_grid", "must not be empty"));
        }
        if self.kinds.is_empty() {
            return Err(Error::config("kind", "no Hamiltonian kind selected"));
        }
        let (lo, hi) = self.window;
        if !(lo >= 0.0 && hi > lo) {
            return Err(Error::config("window", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", "must be positive"));
        }
        let samples = self.window_times().len();
        if samples < evolution::MIN_WINDOW_SAMPLES {
            return Err(Error::config(
                "window",
                format!(
                    "[{lo}, {hi}] at dt = {} gives {samples} samples, need {}",
                    self.dt,
                    evolution::MIN_WINDOW_SAMPLES
                ),
            ));
        }
        Ok(())
    }

    /// Sample times: only the averaging window is evaluated.
    pub fn window_times(&self) -> Vec<f64> {
        let (lo, hi) = self.window;
        evolution::time_grid(lo, hi, self.dt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma_over_omega0: f64,
    pub kind: Kind,
    pub mean_current: f64,
    pub std_current: f64,
    pub landauer: f64,
    pub weak_coupling: f64,
    pub realizations: usize,
    /// Window average of every realization, in realization order.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Uniform-band predictions for a template at coupling `gamma`.
pub fn oracle_columns(config: &ValveConfig, gamma: f64) -> Result<(f64, f64)> {
    let spec = UniformBathSpec::from_gamma(config.bath_size, gamma)?;
    let (t1, t2) = (config.bath1_temperature, config.bath2_temperature);
    let landauer = oracles::landauer_current(&spec, &spec, t1, t2)?;
    let rate = oracles::spectral_density(&spec);
    Ok((landauer, oracles::weak_coupling_current(rate, rate, t1, t2)))
}

/// Steady-state current versus coupling strength, averaged over
/// realizations for each kind. Records are ordered by grid point, then by
/// the order of `settings.kinds`.
pub fn run_sweep(template: &ValveConfig, gamma_grid: &[f64], settings: &SweepSettings) -> Result<Vec<SweepRecord>> {
    template.validate()?;
    settings.check(gamma_grid)?;
    let times = settings.window_times();
    let (lo, hi) = settings.window;

    let jobs: Vec<(usize, Kind, usize)> = (0..gamma_grid.len())
        .flat_map(|g| {
            settings
                .kinds
                .iter()
                .flat_map(move |&k| (0..settings.realizations).map(move |r| (g, k, r)))
        })
        .collect();
    let results = settings.exec.map(&jobs, |&(g, kind, r)| {
        let gamma = gamma_grid[g];
        let mut config = template.clone();
        config.gamma = gamma;
        config.seed = realization_seed(template.seed, g, r, kind, template.coupling_dist);
        let run = || -> Result<f64> {
            let bath = sample_realization(&config)?;
            let trace = simulate(&config, &bath, kind, settings.target, &times, Execution::Sequential)?;
            Ok(evolution::steady_state_estimate(&trace, lo, hi)?.0)
        };
        run().map_err(|e| Error::Realization {
            gamma,
            kind: kind.name(),
            realization: r,
            source: Box::new(e),
        })
    });

    let mut records = Vec::new();
    let mut results = results.into_iter();
    for &gamma in gamma_grid {
        let (landauer, weak) = oracle_columns(template, gamma)?;
        for &kind in &settings.kinds {
            let samples = results
                .by_ref()
                .take(settings.realizations)
                .collect::<Result<Vec<f64>>>()?;
            let (mean, std) = evolution::mean_std(&samples);
            records.push(SweepRecord {
                gamma_over_omega0: gamma,
                kind,
                mean_current: mean,
                std_current: std,
                landauer,
                weak_coupling: weak,
                realizations: settings.realizations,
                samples,
            });
        }
    }
    Ok(records)
}

/// Sweeps repeated for every coupling distribution with the same second
/// moment.
pub fn run_distribution_comparison(
    template: &ValveConfig,
    gamma_grid: &[f64],
    settings: &SweepSettings,
) -> Result<Vec<(CouplingDistribution, Vec<SweepRecord>)>> {
    CouplingDistribution::ALL
        .iter()
        .map(|&dist| {
            let mut config = template.clone();
            config.coupling_dist = dist;
            Ok((dist, run_sweep(&config, gamma_grid, settings)?))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: Kind,
    pub bath_size: usize,
    pub total: f64,
    pub normal: f64,
    pub anomalous: f64,
    pub pert_anomalous: f64,
}

#[derive(Clone, Debug)]
pub struct TraceSettings {
    pub kinds: Vec<Kind>,
    pub target: Bath,
    pub moment: CouplingMoment,
    pub exec: Execution,
}

impl Default for TraceSettings {
    fn default() -> Self {
        Self {
            kinds: Kind::BOTH.to_vec(),
            target: Bath::Two,
            moment: CouplingMoment::default(),
            exec: Execution::default(),
        }
    }
}

/// Current traces of one bath draw (seed `config.seed`) for each kind,
/// with the first-order anomalous current of the target bath alongside.
/// Both kinds share the draw so the traces are directly comparable.
pub fn run_trace(config: &ValveConfig, times: &[f64], settings: &TraceSettings) -> Result<Vec<TraceRecord>> {
    config.validate()?;
    if settings.kinds.is_empty() {
        return Err(Error::config("kind", "no Hamiltonian kind selected"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config("times", "must be strictly increasing"));
    }
    let bath = sample_realization(config)?;
    let target = settings.target;
    let moment = match settings.moment {
        CouplingMoment::Ensemble => config.mean_coupling_sq(),
        CouplingMoment::Sampled => bath.empirical_mean_coupling_sq(target),
    };
    let freqs = bath.frequencies(target);
    let temperature = config.temperature(target);
    let pert: Vec<f64> = times
        .iter()
        .map(|&t| oracles::anomalous_current_discrete(freqs, temperature, moment, t))
        .collect();

    let mut records = Vec::with_capacity(times.len() * settings.kinds.len());
    for &kind in &settings.kinds {
        let trace = simulate(config, &bath, kind, target, times, settings.exec)?;
        for (i, &time) in times.iter().enumerate() {
            records.push(TraceRecord {
                time,
                kind,
                bath_size: config.bath_size,
                total: trace.total[i],
                normal: trace.normal[i],
                anomalous: trace.anomalous[i],
                pert_anomalous: pert[i],
            });
        }
    }
    Ok(records)
}
