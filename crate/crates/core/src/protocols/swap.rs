//! Reordering of an ion string by a one-point turn, with heating accounting.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::dynamics::energy::window_energy;
use crate::dynamics::equilibrium::{equilibrium_with, EquilibriumOptions};
use crate::dynamics::fields::PotentialField;
use crate::dynamics::integrate::{check_step, propagate, Trajectory};
use crate::dynamics::modes::zigzag_critical_ratio;
use crate::dynamics::{energy::total_energy, IonSystemState};
use crate::error::{Error, Result};
use crate::model::{CurvatureTriple, TrapParams};
use crate::protocols::onepoint::{full_rf_turn_field, in_plane_anisotropy, in_plane_block, one_point_turn_field};
use crate::protocols::schedule::TurnProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwapMode {
    Pseudopotential,
    FullRf,
}

impl SwapMode {
    pub fn label(&self) -> &'static str {
        match self {
            SwapMode::Pseudopotential => "pseudopotential",
            SwapMode::FullRf => "full-rf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapResult {
    /// Final x-ordering is the reverse of the initial one.
    pub success: bool,
    /// Energy above ions resting at the final equilibrium, J.
    pub acquired_energy: f64,
    /// `acquired_energy / (hbar * omega_L)`.
    pub acquired_quanta: f64,
    /// Smallest ratio of the second-lowest to the lowest in-plane secular
    /// frequency during the turn.
    pub min_anisotropy: f64,
    /// Largest distance of any ion from the x-axis during the turn and
    /// settling, m.
    pub max_off_null: f64,
    /// Largest nearest-neighbour distance in the initial string, m.
    pub initial_separation: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapOptions {
    /// Settling time after the turn, in periods of the lowest secular mode.
    pub settle_periods: f64,
    /// Averaging window, in periods of the lowest secular mode.
    pub window_periods: f64,
    /// Points on the schedule at which the anisotropy is evaluated.
    pub anisotropy_samples: usize,
}

impl Default for SwapOptions {
    fn default() -> Self {
        Self {
            settle_periods: 5.0,
            window_periods: 2.0,
            anisotropy_samples: 65,
        }
    }
}

/// Step used by a swap with requested step `dt`: unchanged for the
/// pseudopotential, shortened to divide the RF period for the explicit drive.
pub fn effective_step(dt: f64, rf_period: Option<f64>) -> f64 {
    match rf_period {
        Some(t_rf) => t_rf / (t_rf / dt * (1.0 - 1e-12)).ceil().max(1.0),
        None => dt,
    }
}

/// Largest admissible step for a swap in the given mode.
pub fn max_swap_step(n_ions: usize, kappa: &CurvatureTriple, trap: &TrapParams, mode: SwapMode) -> Result<f64> {
    let probe = TurnProfile::new(
        crate::protocols::ProfileKind::SineVelocity,
        1.0,
        crate::protocols::Direction::Clockwise,
    )?;
    let field = build_field(kappa, probe, trap, mode)?;
    let state = initial_state(field.as_ref(), n_ions, trap)?;
    crate::dynamics::step_limit(field.as_ref(), &state)
}

fn build_field(
    kappa: &CurvatureTriple,
    profile: TurnProfile,
    trap: &TrapParams,
    mode: SwapMode,
) -> Result<Box<dyn PotentialField>> {
    Ok(match mode {
        SwapMode::Pseudopotential => Box::new(one_point_turn_field(kappa, profile)?),
        SwapMode::FullRf => Box::new(full_rf_turn_field(kappa, profile, trap)?.0),
    })
}

fn initial_state(field: &dyn PotentialField, n_ions: usize, trap: &TrapParams) -> Result<IonSystemState> {
    let opts = EquilibriumOptions {
        axis: Some(Vector3::x()),
        ..Default::default()
    };
    let positions = equilibrium_with(field, 0.0, n_ions, trap.ion_charge, &opts)?;
    Ok(IonSystemState::at_rest(positions, trap.ion_mass, trap.ion_charge, 0.0))
}

fn record(field: &dyn PotentialField, state: &mut IonSystemState, t_end: f64, h: f64) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
    };
    propagate(field, state, t_end, h, 1, |s| {
        traj.times.push(s.time);
        traj.energies.push(total_energy(s, field, s.time));
        traj.states.push(s.clone());
    })?;
    Ok(traj)
}

pub fn run_swap(
    n_ions: usize,
    kappa: &CurvatureTriple,
    trap: &TrapParams,
    profile: TurnProfile,
    mode: SwapMode,
    dt: f64,
) -> Result<SwapResult> {
    run_swap_with(n_ions, kappa, trap, profile, mode, dt, &SwapOptions::default())
}

pub fn run_swap_with(
    n_ions: usize,
    kappa: &CurvatureTriple,
    trap: &TrapParams,
    profile: TurnProfile,
    mode: SwapMode,
    dt: f64,
    opts: &SwapOptions,
) -> Result<SwapResult> {
    run(n_ions, kappa, trap, profile, mode, dt, opts, None)
}

/// As [`run_swap_with`], also returning every `every`-th state of the swap
/// and the measurement window.
#[allow(clippy::too_many_arguments)]
pub fn run_swap_traced(
    n_ions: usize,
    kappa: &CurvatureTriple,
    trap: &TrapParams,
    profile: TurnProfile,
    mode: SwapMode,
    dt: f64,
    opts: &SwapOptions,
    every: usize,
) -> Result<(SwapResult, Trajectory)> {
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
    };
    let r = run(
        n_ions,
        kappa,
        trap,
        profile,
        mode,
        dt,
        opts,
        Some((&mut traj, every.max(1))),
    )?;
    Ok((r, traj))
}

#[allow(clippy::too_many_arguments)]
fn run(
    n_ions: usize,
    kappa: &CurvatureTriple,
    trap: &TrapParams,
    profile: TurnProfile,
    mode: SwapMode,
    dt: f64,
    opts: &SwapOptions,
    mut trace: Option<(&mut Trajectory, usize)>,
) -> Result<SwapResult> {
    trap.validate()?;
    if n_ions < 2 {
        return Err(Error::InvalidInput("a swap needs at least two ions".into()));
    }
    let critical = zigzag_critical_ratio(n_ions)?;
    let ratio = (kappa.kappa_y / kappa.kappa_x).sqrt();
    if !(ratio >= critical) {
        return Err(Error::ZigZag {
            ratio,
            critical,
            n_ions,
        });
    }
    let field = build_field(kappa, profile, trap, mode)?;
    let field = field.as_ref();
    let mut state = initial_state(field, n_ions, trap)?;
    let h = effective_step(dt, field.rf_period());
    check_step(field, &state, h)?;

    let initial_order = state.x_order();
    let initial_separation = {
        let xs: Vec<f64> = initial_order.iter().map(|&i| state.positions[i].x).collect();
        xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    };

    let t_slow = 2.0 * PI / (kappa.kappa_x / trap.ion_mass).sqrt();
    let align = |t: f64| match field.rf_period() {
        Some(t_rf) => (t / t_rf * (1.0 - 1e-12)).ceil() * t_rf,
        None => t,
    };
    let t_measure = align(profile.t_swap + opts.settle_periods * t_slow);
    let window = align(opts.window_periods * t_slow);

    let mut max_off_null: f64 = 0.0;
    let mut steps = 0usize;
    propagate(field, &mut state, t_measure, h, 1, |s| {
        if let Some((out, every)) = trace.as_mut() {
            if steps.is_multiple_of(*every) {
                out.times.push(s.time);
                out.energies.push(total_energy(s, field, s.time));
                out.states.push(s.clone());
            }
        }
        steps += 1;
        for p in &s.positions {
            max_off_null = max_off_null.max(p.y.hypot(p.z));
        }
    })?;
    let traj = record(field, &mut state, t_measure + window, h)?;
    if let Some((out, every)) = trace {
        let done = (steps - 1) % every;
        let start = if done == 0 { every } else { every - done };
        for k in (start..traj.len()).step_by(every) {
            out.times.push(traj.times[k]);
            out.energies.push(traj.energies[k]);
            out.states.push(traj.states[k].clone());
        }
    }
    steps += traj.len();

    let final_order = state.x_order();
    let success = final_order.iter().eq(initial_order.iter().rev());

    // Reference: ions resting at the final equilibrium, same window and RF phase.
    let opts_eq = EquilibriumOptions {
        axis: Some(Vector3::x()),
        ..Default::default()
    };
    let rest = equilibrium_with(field, t_measure, n_ions, trap.ion_charge, &opts_eq)?;
    let mut reference = IonSystemState::at_rest(rest, trap.ion_mass, trap.ion_charge, t_measure);
    let ref_traj = record(field, &mut reference, t_measure + window, h)?;

    let acquired_energy = window_energy(&traj, field, t_measure, t_measure + window)?
        - window_energy(&ref_traj, field, t_measure, t_measure + window)?;
    let acquired_quanta = acquired_energy / (HBAR * trap.reference_axial_frequency);

    let samples = opts.anisotropy_samples.max(2);
    let min_anisotropy = (0..samples)
        .map(|k| {
            let t = profile.t_swap * k as f64 / (samples - 1) as f64;
            in_plane_anisotropy(&in_plane_block(&field.secular_hessian(&Vector3::zeros(), t)))
        })
        .fold(f64::INFINITY, f64::min);

    Ok(SwapResult {
        success,
        acquired_energy,
        acquired_quanta,
        min_anisotropy,
        max_off_null,
        initial_separation,
        steps,
    })
}
