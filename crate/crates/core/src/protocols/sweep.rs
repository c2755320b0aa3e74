//! Heating as a function of swap duration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CurvatureTriple, TrapParams};
use crate::protocols::schedule::{Direction, ProfileKind, TurnProfile};
use crate::protocols::swap::{max_swap_step, run_swap_with, SwapMode, SwapOptions, SwapResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepParams {
    pub n_ions: usize,
    pub kappa: CurvatureTriple,
    pub trap: TrapParams,
    pub direction: Direction,
    /// Integration step; the largest admissible step per mode when `None`.
    pub dt: Option<f64>,
    pub options: SwapOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t_swap: f64,
    pub profile: ProfileKind,
    pub mode: SwapMode,
    pub result: SwapResult,
}

/// One swap per `(t_swap, profile, mode)` cell, ordered with `t_swap`
/// outermost. `jobs = 0` uses all available cores.
pub fn heating_sweep(
    t_swaps: &[f64],
    profiles: &[ProfileKind],
    modes: &[SwapMode],
    params: &SweepParams,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    if t_swaps.is_empty() || profiles.is_empty() || modes.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one swap time, profile and mode".into(),
        ));
    }
    let mut steps = Vec::with_capacity(modes.len());
    for &mode in modes {
        let dt = match params.dt {
            Some(dt) => dt,
            None => max_swap_step(params.n_ions, &params.kappa, &params.trap, mode)?,
        };
        steps.push((mode, dt));
    }
    let mut cells: Vec<(f64, ProfileKind, SwapMode, f64)> = Vec::new();
    for &t in t_swaps {
        for &p in profiles {
            for &(m, dt) in &steps {
                cells.push((t, p, m, dt));
            }
        }
    }
    let run = |&(t_swap, profile, mode, dt): &(f64, ProfileKind, SwapMode, f64)| -> Result<SweepRow> {
        let turn = TurnProfile::new(profile, t_swap, params.direction)?;
        let result = run_swap_with(
            params.n_ions,
            &params.kappa,
            &params.trap,
            turn,
            mode,
            dt,
            &params.options,
        )?;
        Ok(SweepRow {
            t_swap,
            profile,
            mode,
            result,
        })
    };
    if jobs == 1 {
        return cells.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| cells.par_iter().map(run).collect())
}

/// `n` points spaced evenly in log between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Five log-spaced swap times centred on `t_swap` and spanning one period of
/// the longitudinal motion.
pub fn envelope_points(t_swap: f64, omega_l: f64) -> [f64; 5] {
    let h = 2.0 * PI / omega_l / (4.0 * t_swap);
    [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| t_swap * (k * h).exp())
}

/// Maximum of `f` over the five envelope points around `t_swap`.
pub fn envelope<F>(t_swap: f64, omega_l: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut m = f64::NEG_INFINITY;
    for t in envelope_points(t_swap, omega_l) {
        m = m.max(f(t)?);
    }
    Ok(m)
}

/// Indices of strict interior local minima.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
        .collect()
}
