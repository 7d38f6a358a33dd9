use std::fs;

use qheat_core::evolution::time_grid;
use qheat_core::exec;
use qheat_core::fock;
use qheat_core::harness::{self, Kind, SweepSettings, TraceSettings};
use qheat_core::model::{self, Bath, ValveConfig};
use qheat_core::output;
use qheat_core::Execution;

use crate::config::RunConfig;
use crate::manifest::{now_unix, write_atomic, RunManifest};
use crate::{Failure, RunArgs};

struct Prepared {
    config: RunConfig,
    started: f64,
}

fn prepare(args: &RunArgs) -> Result<Prepared, Failure> {
    let started = now_unix();
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.valve.seed = seed;
    }
    if args.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Usage(format!("cannot create output directory {}: {e}", args.out.display())))?;
    Ok(Prepared { config, started })
}

fn finish(command: &str, args: &RunArgs, prepared: &Prepared, kinds: &[Kind], outputs: Vec<String>) -> Result<(), Failure> {
    let manifest = RunManifest {
        command: command.into(),
        config_sha256: prepared.config.digest(),
        master_seed: prepared.config.valve.seed,
        tool_version: env!("CARGO_PKG_VERSION"),
        started_unix: prepared.started,
        finished_unix: now_unix(),
        full: args.full,
        kinds: kinds.iter().map(|k| k.name()).collect(),
        outputs,
    };
    let path = manifest.write(&args.out)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn sweep(args: &RunArgs, compare_distributions: bool) -> Result<(), Failure> {
    let prepared = prepare(args)?;
    let cfg = &prepared.config;
    let mut template: ValveConfig = cfg.valve.clone();
    let (mut realizations, s) = (cfg.sweep.realizations, &cfg.sweep);
    if args.full {
        template.bath_size = if compare_distributions {
            s.full_compare_bath_size
        } else {
            s.full_bath_size
        };
        realizations = s.full_realizations;
    }
    let kinds = args.kind.kinds();
    let settings = SweepSettings {
        realizations,
        kinds: kinds.clone(),
        window: (s.window[0], s.window[1]),
        dt: s.dt,
        target: Bath::Two,
        exec: Execution::Parallel,
    };

    let mut outputs = Vec::new();
    if compare_distributions {
        let sets = exec::with_jobs(args.jobs, || {
            harness::run_distribution_comparison(&template, &s.gamma_grid, &settings)
        })?;
        for (dist, records) in sets {
            let name = format!("sweep_{}.csv", dist.name());
            write_records(args, &name, |buf| output::write_sweep(buf, &records))?;
            outputs.push(name);
        }
    } else {
        let records = exec::with_jobs(args.jobs, || harness::run_sweep(&template, &s.gamma_grid, &settings))?;
        write_records(args, "sweep.csv", |buf| output::write_sweep(buf, &records))?;
        outputs.push("sweep.csv".into());
    }
    finish("sweep", args, &prepared, &kinds, outputs)
}

pub fn trace(args: &RunArgs) -> Result<(), Failure> {
    let prepared = prepare(args)?;
    let cfg = &prepared.config;
    let t = &cfg.trace;
    let sizes = if args.full {
        t.full_bath_sizes.clone()
    } else if t.bath_sizes.is_empty() {
        vec![cfg.valve.bath_size]
    } else {
        t.bath_sizes.clone()
    };
    let kinds = args.kind.kinds();
    let settings = TraceSettings {
        kinds: kinds.clone(),
        target: Bath::Two,
        moment: t.pert_moment,
        exec: Execution::Parallel,
    };
    let times = time_grid(0.0, t.t_max, t.dt);
    let mut records = Vec::new();
    for n in sizes {
        let mut config = cfg.valve.clone();
        config.bath_size = n;
        records.extend(exec::with_jobs(args.jobs, || harness::run_trace(&config, &times, &settings))?);
    }
    write_records(args, "trace.csv", |buf| output::write_trace(buf, &records))?;
    finish("trace", args, &prepared, &kinds, vec!["trace.csv".into()])
}

fn write_records(
    args: &RunArgs,
    name: &str,
    write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| Failure::Usage(format!("cannot format {name}: {e}")))?;
    let path = write_atomic(&args.out, name, &buf)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Prints the largest deviation between the correlation-matrix current and
/// the many-body current on `t in [0, 20]`.
pub fn fock_check(bath_size: usize, gamma: f64, t1: f64, t2: f64, rwa: bool, seed: u64) -> Result<(), Failure> {
    let mut config = ValveConfig::new(bath_size, gamma, t1, t2);
    config.rwa = rwa;
    config.seed = seed;
    let bath = model::sample_bath(&config)?;
    let times = time_grid(0.0, 20.0, 0.1);
    let reference = fock::exact_current(&config, &bath, &times)?;
    let kind = if rwa { Kind::Rwa } else { Kind::Exact };
    let trace = harness::simulate(&config, &bath, kind, Bath::Two, &times, Execution::Sequential)?;
    let worst = reference
        .iter()
        .zip(&trace.total)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("modes {} samples {} max_abs_deviation {worst:e}", config.modes(), times.len());
    Ok(())
}
