//! Reference solvers for the two heat-based systems.

mod burgers;
mod ns2d;

pub use burgers::{
    solve_burgers, solve_burgers_cole_hopf, solve_burgers_fd, Burgers1dConfig, BurgersScheme,
    ColeHopf,
};
pub use ns2d::{biot_savart, biot_savart_periodic, solve_ns2d, spectral_divergence, Ns2dConfig, Ns2dSolver};

use crate::error::{ensure, Result};

/// Output times `0, dt_out, 2 dt_out, ..., t_end` and the number of equal
/// substeps of size `<= dt` that fit in one output interval.
pub(crate) fn output_schedule(dt: f64, dt_out: f64, t_end: f64) -> Result<(Vec<f64>, usize)> {
    ensure!(dt.is_finite() && dt > 0.0, "time step must be > 0, got {dt}");
    ensure!(dt_out.is_finite() && dt_out > 0.0, "output cadence must be > 0, got {dt_out}");
    ensure!(t_end.is_finite() && t_end > 0.0, "horizon must be > 0, got {t_end}");
    let intervals = (t_end / dt_out).round();
    ensure!(
        (intervals * dt_out - t_end).abs() <= 1e-9 * t_end,
        "horizon {t_end} is not a multiple of the output cadence {dt_out}"
    );
    let substeps = (dt_out / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let inv = 1.0 / dt_out;
    let times = (0..=intervals as usize)
        .map(|k| {
            // exact decimal times when the cadence is 1/integer
            if (inv - inv.round()).abs() < 1e-9 {
                k as f64 / inv.round()
            } else {
                k as f64 * dt_out
            }
        })
        .collect();
    Ok((times, substeps))
}
