use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sarm::{RegressionFit, SolveTrace};

pub const TRACE_HEADER: [&str; 6] = ["k", "H", "H_decrement", "w_step", "z_step", "grad_norm"];

/// One row per iteration, `k` counting from 1.
pub fn write_trace<W: Write>(trace: &SolveTrace, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for (k, d) in trace.decrements().iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            trace.objective_values[k].to_string(),
            d.to_string(),
            trace.w_step_norms[k].to_string(),
            trace.z_step_norms[k].to_string(),
            trace.grad_norms[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the fit's trace CSV; returns the number of rows.
pub fn export_trace(fit: &RegressionFit, path: impl AsRef<Path>) -> Result<usize> {
    let trace = fit.trace.as_ref().ok_or(Error::NoTrace)?;
    write_trace(trace, std::fs::File::create(path)?)?;
    Ok(trace.len())
}
