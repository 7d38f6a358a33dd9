//! Closed-form and quadrature predictions for the heat valve.
//!
//! All energies are in units of `omega0 = 1`; the baths occupy the band
//! `(0, 2)`. Steady state: a Landauer integral over the transmission
//! `|tau(w)|^2` with the uniform-band self-energy, and its weak-coupling
//! limit. Transient: the first-order anomalous current, both as a sum over
//! sampled bath frequencies and in the continuum limit.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::model::BAND_TOP;
use crate::quad;

/// Absolute tolerance of the Landauer quadrature.
pub const LANDAUER_TOL: f64 = 1e-10;
/// Closest approach to a band edge accepted by [`self_energy`].
pub const EDGE_GUARD: f64 = 1e-12;

/// `1 / (e^x + 1)`, evaluated without overflow; `x = +-inf` give the
/// zero-temperature limits.
pub fn fermi(x: f64) -> f64 {
    if x.is_nan() {
        return 0.5;
    }
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Fermi-Dirac occupation of a mode at `omega` in a bath at `temperature`.
/// At zero temperature this is the step function with value 1/2 at `omega = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        if omega > 0.0 {
            0.0
        } else if omega < 0.0 {
            1.0
        } else {
            0.5
        }
    } else {
        fermi(omega / temperature)
    }
}

/// Continuum description of one bath with a flat density of states on
/// the band `[0, 2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformBathSpec {
    /// Modes per unit energy, `N / 2`.
    pub level_density: f64,
    /// Mean square coupling to the central level.
    pub mean_coupling_sq: f64,
}

impl UniformBathSpec {
    pub fn new(level_density: f64, mean_coupling_sq: f64) -> Result<Self> {
        if !(level_density > 0.0) {
            return Err(Error::Domain {
                what: "level density",
                value: level_density,
                domain: "(0, inf)",
            });
        }
        if !(mean_coupling_sq >= 0.0) {
            return Err(Error::Domain {
                what: "mean square coupling",
                value: mean_coupling_sq,
                domain: "[0, inf)",
            });
        }
        Ok(Self {
            level_density,
            mean_coupling_sq,
        })
    }

    /// `N` modes with couplings of second moment `gamma^2 / (3N)`.
    pub fn from_gamma(bath_size: usize, gamma: f64) -> Result<Self> {
        let n = bath_size as f64;
        Self::new(n / BAND_TOP, gamma * gamma / (3.0 * n))
    }
}

/// `Gamma = 2 pi nu0 <g^2>`, flat inside the band.
pub fn spectral_density(spec: &UniformBathSpec) -> f64 {
    2.0 * PI * spec.level_density * spec.mean_coupling_sq
}

/// Principal-value level shift of one uniform bath,
/// `-Gamma / (2 pi) ln(2/w - 1)`.
pub fn self_energy(spec: &UniformBathSpec, omega: f64) -> Result<f64> {
    if !(omega > EDGE_GUARD && omega < BAND_TOP - EDGE_GUARD) {
        return Err(Error::Domain {
            what: "frequency",
            value: omega,
            domain: "open band (0, 2)",
        });
    }
    Ok(-spectral_density(spec) / (2.0 * PI) * (BAND_TOP / omega - 1.0).ln())
}

/// Transmission `|tau(w)|^2` through the central level.
pub fn transmission(spec1: &UniformBathSpec, spec2: &UniformBathSpec, omega: f64) -> Result<f64> {
    let g1 = spectral_density(spec1);
    let g2 = spectral_density(spec2);
    let shift = self_energy(spec1, omega)? + self_energy(spec2, omega)?;
    Ok(transmission_from(g1, g2, shift, omega))
}

fn transmission_from(g1: f64, g2: f64, shift: f64, omega: f64) -> f64 {
    let detuning = omega - 1.0 - shift;
    let width = 0.5 * (g1 + g2);
    let denom = detuning * detuning + width * width;
    if denom == 0.0 {
        0.0
    } else {
        g1 * g2 / denom
    }
}

/// Steady-state heat current from bath 1 into bath 2,
/// `1/(2 pi) int |tau|^2 w [f(w/T1) - f(w/T2)] dw` over the band.
pub fn landauer_current(
    spec1: &UniformBathSpec,
    spec2: &UniformBathSpec,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    for t in [t1, t2] {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "temperature",
                value: t,
                domain: "[0, inf)",
            });
        }
    }
    let g1 = spectral_density(spec1);
    let g2 = spectral_density(spec2);
    if g1 * g2 == 0.0 || t1 == t2 {
        return Ok(0.0);
    }
    let shift_scale = (g1 + g2) / (2.0 * PI);
    let integrand = |w: f64| {
        let shift = -shift_scale * (BAND_TOP / w - 1.0).ln();
        let tau = transmission_from(g1, g2, shift, w);
        tau * w * (thermal_occupation(w, t1) - thermal_occupation(w, t2)) / (2.0 * PI)
    };
    // resonance sits at w = 1 where the shift vanishes; bracket it on
    // geometric scales of the linewidth so the peak is never missed
    let width = 0.5 * (g1 + g2);
    let mut breaks = vec![1.0];
    let mut d = width;
    while d < 1.0 {
        breaks.push(1.0 - d);
        breaks.push(1.0 + d);
        d *= 10.0;
    }
    Ok(quad::integrate(integrand, 0.0, BAND_TOP, &breaks, LANDAUER_TOL, 0.0)?.value)
}

/// Weak-coupling (master equation) limit
/// `Gamma1 Gamma2 / (Gamma1 + Gamma2) [f(1/T1) - f(1/T2)]`.
pub fn weak_coupling_current(gamma1: f64, gamma2: f64, t1: f64, t2: f64) -> f64 {
    let sum = gamma1 + gamma2;
    if sum == 0.0 {
        return 0.0;
    }
    gamma1 * gamma2 / sum * (thermal_occupation(1.0, t1) - thermal_occupation(1.0, t2))
}

/// Coupling-weighted density of states of a sampled bath at `omega`,
/// `2 pi sum_k |g_k|^2 delta(omega - omega_k)` with the delta replaced by
/// a box of half-width `half_width`.
pub fn empirical_spectral_density(frequencies: &[f64], couplings: &[c64], omega: f64, half_width: f64) -> f64 {
    let weight: f64 = frequencies
        .iter()
        .zip(couplings)
        .filter(|(&w, _)| (w - omega).abs() <= half_width)
        .map(|(_, g)| g.norm_sqr())
        .sum();
    2.0 * PI * weight / (2.0 * half_width)
}

/// First-order anomalous current into a bath with sampled `frequencies`:
/// `2 <g^2> sum_k w_k [1 - f(w_k/T)] / (1 + w_k) sin((1 + w_k) t)`.
pub fn anomalous_current_discrete(frequencies: &[f64], temperature: f64, mean_coupling_sq: f64, t: f64) -> f64 {
    let sum: f64 = frequencies
        .iter()
        .map(|&w| w * (1.0 - thermal_occupation(w, temperature)) / (1.0 + w) * ((1.0 + w) * t).sin())
        .sum();
    2.0 * mean_coupling_sq * sum
}

/// Continuum limit of [`anomalous_current_discrete`] for a flat band.
pub fn anomalous_current_continuum(
    spec: &UniformBathSpec,
    temperature: f64,
    mean_coupling_sq: f64,
    t: f64,
) -> Result<f64> {
    let integrand = |w: f64| w * (1.0 - thermal_occupation(w, temperature)) / (1.0 + w) * ((1.0 + w) * t).sin();
    // one break per half period keeps the oscillation resolved
    let periods = (t * BAND_TOP / PI).ceil() as usize;
    let breaks: Vec<f64> = (1..periods).map(|i| i as f64 * BAND_TOP / periods as f64).collect();
    let r = quad::integrate(integrand, 0.0, BAND_TOP, &breaks, 1e-12, 1e-10)?;
    Ok(2.0 * mean_coupling_sq * spec.level_density * r.value)
}
