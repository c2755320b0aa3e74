//! Energy bookkeeping for trajectories.

use super::coulomb::coulomb_energy;
use super::fields::PotentialField;
use super::integrate::Trajectory;
use super::state::IonSystemState;
use crate::error::{Error, Result};

/// Kinetic plus external potential plus mutual Coulomb energy, J.
pub fn total_energy(state: &IonSystemState, field: &dyn PotentialField, t: f64) -> f64 {
    state.kinetic_energy()
        + state.positions.iter().map(|p| field.potential(p, t)).sum::<f64>()
        + coulomb_energy(&state.positions, state.charge)
}

/// Energy of the state with the secular potential in place of the field
/// potential, J.
pub fn secular_state_energy(state: &IonSystemState, field: &dyn PotentialField, t: f64) -> f64 {
    state.kinetic_energy()
        + state
            .positions
            .iter()
            .map(|p| field.secular_potential(p, t))
            .sum::<f64>()
        + coulomb_energy(&state.positions, state.charge)
}

/// Time-averaged energy of the samples in `[t0, t1]`, J.
///
/// Without an explicit drive this is the mean total energy. With an
/// explicit drive, positions and velocities are first averaged over
/// consecutive RF periods (the sampling must be commensurate with the RF
/// period) and the energy of each averaged state is evaluated in the
/// secular potential; the micromotion kinetic energy and the oscillating
/// RF potential are thereby removed together.
pub fn window_energy(traj: &Trajectory, field: &dyn PotentialField, t0: f64, t1: f64) -> Result<f64> {
    let idx: Vec<usize> = (0..traj.len())
        .filter(|&k| traj.times[k] >= t0 && traj.times[k] <= t1)
        .collect();
    if idx.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "energy window [{t0:e}, {t1:e}] s contains fewer than two samples"
        )));
    }
    let Some(t_rf) = field.rf_period() else {
        return Ok(idx.iter().map(|&k| traj.energies[k]).sum::<f64>() / idx.len() as f64);
    };
    let span = traj.times[*idx.last().unwrap()] - traj.times[idx[0]];
    let h = traj.times[idx[1]] - traj.times[idx[0]];
    let per = (t_rf / h).round() as usize;
    if span + h < t_rf * (1.0 - 1e-9) || per == 0 {
        return Err(Error::WindowTooShort {
            window: span + h,
            period: t_rf,
        });
    }
    if ((per as f64) * h - t_rf).abs() > 1e-6 * t_rf {
        return Err(Error::InvalidInput(format!(
            "sample spacing {h:e} s does not divide the RF period {t_rf:e} s"
        )));
    }
    let blocks = idx.len() / per;
    if blocks == 0 {
        return Err(Error::WindowTooShort {
            window: span + h,
            period: t_rf,
        });
    }
    let mut total = 0.0;
    for b in 0..blocks {
        let chunk = &idx[b * per..(b + 1) * per];
        let first = &traj.states[chunk[0]];
        let mut mean = first.clone();
        for (p, v) in mean.positions.iter_mut().zip(mean.velocities.iter_mut()) {
            *p = nalgebra::Vector3::zeros();
            *v = nalgebra::Vector3::zeros();
        }
        for &k in chunk {
            let s = &traj.states[k];
            for i in 0..s.n_ions() {
                mean.positions[i] += s.positions[i];
                mean.velocities[i] += s.velocities[i];
            }
        }
        let inv = 1.0 / per as f64;
        for i in 0..mean.n_ions() {
            mean.positions[i] *= inv;
            mean.velocities[i] *= inv;
        }
        let t_mid = 0.5 * (traj.times[chunk[0]] + traj.times[*chunk.last().unwrap()]);
        total += secular_state_energy(&mean, field, t_mid);
    }
    Ok(total / blocks as f64)
}

/// Window energy of `traj` minus that of a reference run of ions resting
/// at the final equilibrium, J.
pub fn secular_energy(
    traj: &Trajectory,
    reference: &Trajectory,
    field: &dyn PotentialField,
    window: (f64, f64),
    reference_window: (f64, f64),
) -> Result<f64> {
    Ok(window_energy(traj, field, window.0, window.1)?
        - window_energy(reference, field, reference_window.0, reference_window.1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ca40_mass, khz, ELEMENTARY_CHARGE, HBAR};
    use crate::dynamics::equilibrium::equilibrium_positions;
    use crate::dynamics::fields::{DcQuadratic, FullRfField, PointChargeField, QuadraticField};
    use crate::dynamics::integrate::integrate;
    use crate::model::rf_drive_from_pseudocurvature;
    use nalgebra::{Matrix3, Vector3};
    use std::f64::consts::PI;

    #[test]
    fn kinetic_only_in_free_space() {
        let field = PointChargeField::uniform(Vector3::zeros(), ELEMENTARY_CHARGE);
        let mut s = IonSystemState::at_rest(vec![Vector3::zeros()], 3.0, ELEMENTARY_CHARGE, 0.0);
        s.velocities[0] = Vector3::new(1.0, 2.0, 2.0);
        assert_eq!(total_energy(&s, &field, 0.0), 0.5 * 3.0 * 9.0);
    }

    fn rf_trap() -> (FullRfField, f64) {
        let m = ca40_mass();
        let q = ELEMENTARY_CHARGE;
        let (wx, wy) = (khz(120.0), khz(230.0));
        let kappa_rf = m * khz(588.0).powi(2);
        let omega = 2.0 * PI * 10.1e6;
        let drive = rf_drive_from_pseudocurvature(kappa_rf, omega, m, q).unwrap();
        let kx = m * wx * wx;
        let ky = m * wy * wy - kappa_rf;
        let dc = Matrix3::from_diagonal(&Vector3::new(kx, ky, -(kx + ky)));
        (
            FullRfField::new(DcQuadratic::Static(dc), q * drive.curvature, omega, m),
            wx,
        )
    }

    #[test]
    fn resting_ions_have_no_acquired_energy() {
        let m = ca40_mass();
        let q = ELEMENTARY_CHARGE;
        let (field, wx) = rf_trap();
        let p = equilibrium_positions(&field, 0.0, 2, q).unwrap();
        let s = IonSystemState::at_rest(p, m, q, 0.0);
        let t_rf = field.rf_period().unwrap();
        let dt = t_rf / 50.0;
        let t_end = 40.0 * t_rf;
        let traj = integrate(&field, &s, t_end, dt).unwrap();
        let reference_energy = window_energy(&traj, &field, 0.0, t_end).unwrap();
        let e0 = crate::dynamics::equilibrium::configuration_energy(&field, 0.0, &s.positions, q);
        assert!((reference_energy - e0).abs() / (HBAR * wx) < 1e-3);
        let acquired = secular_energy(&traj, &traj, &field, (0.0, t_end), (0.0, t_end)).unwrap();
        assert!(acquired.abs() / (HBAR * wx) < 0.05);
    }

    #[test]
    fn short_window_rejected() {
        let m = ca40_mass();
        let q = ELEMENTARY_CHARGE;
        let (field, _) = rf_trap();
        let p = equilibrium_positions(&field, 0.0, 2, q).unwrap();
        let s = IonSystemState::at_rest(p, m, q, 0.0);
        let t_rf = field.rf_period().unwrap();
        let traj = integrate(&field, &s, 3.0 * t_rf, t_rf / 50.0).unwrap();
        let r = window_energy(&traj, &field, t_rf, 1.5 * t_rf);
        assert!(matches!(r, Err(Error::WindowTooShort { .. })), "{r:?}");
    }

    #[test]
    fn excited_rf_energy_matches_secular_estimate() {
        // A small secular excitation along x (no RF force on the null line)
        // gives the same energy in both pictures.
        let m = ca40_mass();
        let q = ELEMENTARY_CHARGE;
        let (field, wx) = rf_trap();
        let s = IonSystemState::at_rest(vec![Vector3::new(1e-7, 0.0, 0.0)], m, q, 0.0);
        let t_rf = field.rf_period().unwrap();
        let traj = integrate(&field, &s, 200.0 * t_rf, t_rf / 50.0).unwrap();
        let e = window_energy(&traj, &field, 0.0, 200.0 * t_rf).unwrap();
        let expected = 0.5 * m * wx * wx * 1e-14;
        assert!((e / expected - 1.0).abs() < 0.02, "{}", e / expected);

        let pseudo = QuadraticField::harmonic(m * wx * wx, 4.0 * m * wx * wx, 9.0 * m * wx * wx);
        let traj2 = integrate(&pseudo, &s, 200.0 * t_rf, t_rf / 50.0).unwrap();
        let e2 = window_energy(&traj2, &pseudo, 0.0, 200.0 * t_rf).unwrap();
        assert!((e2 / expected - 1.0).abs() < 1e-6);
    }
}
