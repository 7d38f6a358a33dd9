//! CSV writers for experiment results.
//!
//! Line one is a `#` comment stating units; line two the column header.
//! Floats use the shortest representation that parses back to the same
//! value, and negative zero is written as `0.0`.

use std::io::{self, Write};

use crate::harness::{SweepRecord, TraceRecord};

pub const SWEEP_HEADER: &str = "gamma_over_omega0,kind,mean_current,std_current,landauer,weak_coupling,realizations";
pub const TRACE_HEADER: &str = "time,kind,N,total,normal,anomalous,pert_anomalous";

const SWEEP_UNITS: &str =
    "# units: hbar = k_B = omega0 = 1; gamma in omega0, currents in hbar*omega0^2, std across realizations";
const TRACE_UNITS: &str = "# units: hbar = k_B = omega0 = 1; time in 1/omega0, currents in hbar*omega0^2";

/// Round-trip decimal form of `x`.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:?}")
}

pub fn write_sweep<W: Write>(mut w: W, records: &[SweepRecord]) -> io::Result<()> {
    writeln!(w, "{SWEEP_UNITS}")?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_float(r.gamma_over_omega0),
            r.kind.name(),
            format_float(r.mean_current),
            format_float(r.std_current),
            format_float(r.landauer),
            format_float(r.weak_coupling),
            r.realizations
        )?;
    }
    Ok(())
}

pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_UNITS}")?;
    writeln!(w, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            format_float(r.time),
            r.kind.name(),
            r.bath_size,
            format_float(r.total),
            format_float(r.normal),
            format_float(r.anomalous),
            format_float(r.pert_anomalous)
        )?;
    }
    Ok(())
}
