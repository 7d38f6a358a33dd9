use clap::{Args, Subcommand};

use qheat_core::model::{self, Bath, ValveConfig};
use qheat_core::oracles::{self, UniformBathSpec};
use qheat_core::output::format_float;

use crate::Failure;

#[derive(Args, Debug, Clone, Copy)]
pub struct Band {
    /// Coupling strength gamma / omega0.
    #[arg(long)]
    gamma: f64,
    /// Modes per bath; the uniform-band predictions do not depend on it.
    #[arg(long, default_value_t = 1200)]
    bath_size: usize,
}

impl Band {
    fn spec(self) -> Result<UniformBathSpec, Failure> {
        if self.bath_size == 0 {
            return Err(Failure::Usage("invalid `--bath-size`: must be at least 1".into()));
        }
        Ok(UniformBathSpec::from_gamma(self.bath_size, self.gamma)?)
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Temperatures {
    #[arg(long)]
    t1: f64,
    #[arg(long)]
    t2: f64,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Fermi function 1 / (e^x + 1).
    Fermi {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
    },
    /// Uniform-band spectral density Gamma.
    Spectral {
        #[command(flatten)]
        band: Band,
    },
    /// Real part of the bath self-energy at frequency omega.
    SelfEnergy {
        #[command(flatten)]
        band: Band,
        #[arg(long)]
        omega: f64,
    },
    /// Transmission |tau(omega)|^2 through the central level.
    Transmission {
        #[command(flatten)]
        band: Band,
        #[arg(long)]
        omega: f64,
    },
    /// Steady-state Landauer current from bath 1 into bath 2.
    Landauer {
        #[command(flatten)]
        band: Band,
        #[command(flatten)]
        temps: Temperatures,
    },
    /// Weak-coupling steady-state current.
    Weak {
        #[command(flatten)]
        band: Band,
        #[command(flatten)]
        temps: Temperatures,
    },
    /// First-order anomalous current into a bath at temperature T.
    Anomalous {
        #[command(flatten)]
        band: Band,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        temperature: f64,
        /// Sum over sampled bath frequencies instead of the band integral.
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn check_temperature(name: &str, t: f64) -> Result<(), Failure> {
    if !(t >= 0.0) {
        return Err(Failure::Usage(format!("invalid `--{name}`: must be >= 0, got {t}")));
    }
    Ok(())
}

pub fn evaluate(cmd: &OracleCommand) -> Result<f64, Failure> {
    let value = match *cmd {
        OracleCommand::Fermi { x } => oracles::fermi(x),
        OracleCommand::Spectral { band } => oracles::spectral_density(&band.spec()?),
        OracleCommand::SelfEnergy { band, omega } => oracles::self_energy(&band.spec()?, omega)?,
        OracleCommand::Transmission { band, omega } => {
            let spec = band.spec()?;
            oracles::transmission(&spec, &spec, omega)?
        }
        OracleCommand::Landauer { band, temps } => {
            check_temperature("t1", temps.t1)?;
            check_temperature("t2", temps.t2)?;
            let spec = band.spec()?;
            oracles::landauer_current(&spec, &spec, temps.t1, temps.t2)?
        }
        OracleCommand::Weak { band, temps } => {
            check_temperature("t1", temps.t1)?;
            check_temperature("t2", temps.t2)?;
            let rate = oracles::spectral_density(&band.spec()?);
            oracles::weak_coupling_current(rate, rate, temps.t1, temps.t2)
        }
        OracleCommand::Anomalous {
            band,
            t,
            temperature,
            sampled,
            seed,
        } => {
            check_temperature("temperature", temperature)?;
            let spec = band.spec()?;
            let moment = spec.mean_coupling_sq;
            if sampled {
                let mut config = ValveConfig::new(band.bath_size, band.gamma, temperature, temperature);
                config.seed = seed;
                let bath = model::sample_bath(&config)?;
                oracles::anomalous_current_discrete(bath.frequencies(Bath::Two), temperature, moment, t)
            } else {
                oracles::anomalous_current_continuum(&spec, temperature, moment, t)?
            }
        }
    };
    Ok(value)
}

pub fn run(cmd: OracleCommand) -> Result<(), Failure> {
    println!("{}", format_float(evaluate(&cmd)?));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn band(gamma: f64) -> Band {
        Band { gamma, bath_size: 1200 }
    }

    #[test]
    fn landauer_approaches_weak_limit() {
        let temps = Temperatures { t1: 1.0, t2: 0.0 };
        let l = evaluate(&OracleCommand::Landauer { band: band(0.01), temps }).unwrap();
        let w = evaluate(&OracleCommand::Weak { band: band(0.01), temps }).unwrap();
        assert!((l / w - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        let temps = Temperatures { t1: -1.0, t2: 0.0 };
        assert!(matches!(
            evaluate(&OracleCommand::Weak { band: band(0.1), temps }),
            Err(Failure::Usage(_))
        ));
        let zero = Band { gamma: 0.1, bath_size: 0 };
        assert!(matches!(evaluate(&OracleCommand::Spectral { band: zero }), Err(Failure::Usage(_))));
    }
}
