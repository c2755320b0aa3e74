//! Fixed-step position Verlet (drift, kick at the half-step position, drift).

use std::io::Write;

use nalgebra::Vector3;

use super::coulomb::add_coulomb_forces;
use super::energy::total_energy;
use super::fields::PotentialField;
use super::modes::normal_modes;
use super::state::{IonSystemState, COLLISION_DISTANCE};
use crate::error::{Error, Result};

/// Required samples per period of the fastest secular mode.
pub const STEPS_PER_SECULAR_PERIOD: f64 = 200.0;
/// Required samples per RF period when the drive is explicit.
pub const STEPS_PER_RF_PERIOD: f64 = 40.0;

#[derive(Debug, Clone, serde::Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<IonSystemState>,
    /// Total energy at each sample, J.
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &IonSystemState {
        self.states.last().expect("trajectory has at least two samples")
    }

    /// One row per ion and sample: `t,ion,x,y,z,vx,vy,vz,E_total`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "ion", "x", "y", "z", "vx", "vy", "vz", "E_total"])?;
        for ((t, s), e) in self.times.iter().zip(&self.states).zip(&self.energies) {
            for (i, (p, v)) in s.positions.iter().zip(&s.velocities).enumerate() {
                w.write_record(&[
                    t.to_string(),
                    i.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    p.z.to_string(),
                    v.x.to_string(),
                    v.y.to_string(),
                    v.z.to_string(),
                    e.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest step allowed for `state` in `field`: a fraction of the fastest
/// secular period at the current positions and, for explicit drives, of
/// the RF period.
pub fn step_limit(field: &dyn PotentialField, state: &IonSystemState) -> Result<f64> {
    let modes = normal_modes(field, state.time, &state.positions, state.mass, state.charge)?;
    let w = modes.highest_frequency();
    let mut limit = if w > 0.0 {
        2.0 * std::f64::consts::PI / w / STEPS_PER_SECULAR_PERIOD
    } else {
        f64::INFINITY
    };
    if let Some(t_rf) = field.rf_period() {
        limit = limit.min(t_rf / STEPS_PER_RF_PERIOD);
    }
    Ok(limit)
}

pub fn check_step(field: &dyn PotentialField, state: &IonSystemState, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let limit = step_limit(field, state)?;
    if dt > limit * (1.0 + 1e-9) {
        let reason = match field.rf_period() {
            Some(t_rf) if limit >= t_rf / STEPS_PER_RF_PERIOD * (1.0 - 1e-12) => "dt exceeds T_RF/40",
            _ => "dt exceeds T_secular/200",
        };
        return Err(Error::StepSize { dt, limit, reason });
    }
    Ok(())
}

/// Number of steps and actual step used to cover `duration` with steps no
/// longer than `dt`.
pub fn step_count(duration: f64, dt: f64) -> (usize, f64) {
    let n = ((duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (n, duration / n as f64)
}

/// Advances `state` to `t_end` in place without a step-size check. The
/// observer sees the initial state and every `every`-th step, including the
/// final state.
pub fn propagate<F>(
    field: &dyn PotentialField,
    state: &mut IonSystemState,
    t_end: f64,
    dt: f64,
    every: usize,
    mut observer: F,
) -> Result<()>
where
    F: FnMut(&IonSystemState),
{
    state.validate()?;
    let t0 = state.time;
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!(
            "t_end {t_end:e} must exceed start time {t0:e}"
        )));
    }
    let every = every.max(1);
    let (n_steps, h) = step_count(t_end - t0, dt);
    let n = state.n_ions();
    let inv_m = 1.0 / state.mass;
    let mut forces = vec![Vector3::zeros(); n];
    observer(state);
    for k in 0..n_steps {
        let t = t0 + k as f64 * h;
        let t_half = t + 0.5 * h;
        for (p, v) in state.positions.iter_mut().zip(&state.velocities) {
            *p += v * (0.5 * h);
        }
        for (f, p) in forces.iter_mut().zip(&state.positions) {
            *f = field.force(p, t_half);
        }
        add_coulomb_forces(&state.positions, state.charge, &mut forces);
        for ((p, v), f) in state.positions.iter_mut().zip(state.velocities.iter_mut()).zip(&forces) {
            *v += f * (inv_m * h);
            *p += *v * (0.5 * h);
        }
        state.time = if k + 1 == n_steps {
            t_end
        } else {
            t0 + (k + 1) as f64 * h
        };
        if let Some((i, j, d)) = state.closest_pair() {
            if d < COLLISION_DISTANCE || !d.is_finite() {
                return Err(Error::Collision {
                    i,
                    j,
                    time: state.time,
                    distance: d,
                });
            }
        }
        if (k + 1) % every == 0 || k + 1 == n_steps {
            observer(state);
        }
    }
    Ok(())
}

/// Integrates from `initial` to `t_end`, recording every step.
pub fn integrate(field: &dyn PotentialField, initial: &IonSystemState, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_sampled(field, initial, t_end, dt, 1)
}

/// Integrates from `initial` to `t_end`, recording every `every`-th step.
pub fn integrate_sampled(
    field: &dyn PotentialField,
    initial: &IonSystemState,
    t_end: f64,
    dt: f64,
    every: usize,
) -> Result<Trajectory> {
    initial.validate()?;
    check_step(field, initial, dt)?;
    let mut state = initial.clone();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
    };
    propagate(field, &mut state, t_end, dt, every, |s| {
        traj.times.push(s.time);
        traj.energies.push(total_energy(s, field, s.time));
        traj.states.push(s.clone());
    })?;
    Ok(traj)
}
