//! Three-point turn: the string is steered by uniform fields through a
//! static background whose local anisotropy varies in space.
//!
//! The surrogate background is a ring of four equal point charges on the
//! x-axis at `x = ring_distance`, an RF pseudopotential about the x-axis and
//! a static quadrupole `diag(0, -delta, +delta)` that keeps z the stiffest
//! direction. The ring weight is chosen so that the in-plane curvatures are
//! equal on the axis at `x = isotropy_point`: the string lies along x for
//! smaller x and along y beyond.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::HBAR;
use crate::dynamics::energy::window_energy;
use crate::dynamics::equilibrium::{configuration_energy, equilibrium_with, EquilibriumOptions};
use crate::dynamics::fields::{PointChargeField, PotentialField, SteeringSchedule};
use crate::dynamics::integrate::{check_step, propagate, Trajectory};
use crate::dynamics::{energy::total_energy, IonSystemState};
use crate::error::{Error, Result};
use crate::model::TrapParams;
use crate::pointcharge::PointCharge;
use crate::protocols::onepoint::{in_plane_anisotropy, in_plane_block};
use crate::protocols::swap::SwapResult;

/// Anisotropy below which the local weak axis is treated as undefined.
pub const DEGENERACY_THRESHOLD: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurrogateParams {
    /// Secular frequency of the RF pseudopotential alone, rad/s.
    pub rf_secular_frequency: f64,
    /// `delta / kappa_rf` of the static quadrupole.
    pub quadrupole_fraction: f64,
    /// x-position of the charge ring, m.
    pub ring_distance: f64,
    /// Radius of the charge ring, m.
    pub ring_radius: f64,
    /// On-axis point of equal in-plane curvature, m.
    pub isotropy_point: f64,
    /// Transverse offset of the off-axis waypoints, m.
    pub waypoint_offset: f64,
    /// x-position of the far waypoint, m.
    pub far_point: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            rf_secular_frequency: crate::constants::khz(500.0),
            quadrupole_fraction: 0.3,
            ring_distance: 300e-6,
            ring_radius: 40e-6,
            isotropy_point: 50e-6,
            waypoint_offset: 25e-6,
            far_point: 100e-6,
        }
    }
}

fn ring(params: &SurrogateParams, weight: f64) -> Vec<PointCharge> {
    let (x, h) = (params.ring_distance, params.ring_radius);
    [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)]
        .iter()
        .map(|&(y, z)| PointCharge::new(Vector3::new(x, y, z), weight))
        .collect()
}

pub fn surrogate_background(params: &SurrogateParams, trap: &TrapParams) -> Result<PointChargeField> {
    let p = params;
    if !(p.ring_radius > 0.0
        && p.ring_distance > p.far_point
        && p.far_point > p.isotropy_point
        && p.isotropy_point > 0.0)
    {
        return Err(Error::InvalidInput(
            "surrogate needs 0 < isotropy_point < far_point < ring_distance and a positive ring radius".into(),
        ));
    }
    let kappa_rf = trap.ion_mass * p.rf_secular_frequency * p.rf_secular_frequency;
    let delta = p.quadrupole_fraction * kappa_rf;
    let unit = PointChargeField {
        charges: ring(p, 1.0),
        ion_charge: trap.ion_charge,
        kappa_rf: 0.0,
        quadrupole: Matrix3::zeros(),
        steering: SteeringSchedule::constant(Vector3::zeros()),
    };
    let h = unit.secular_hessian(&Vector3::new(p.isotropy_point, 0.0, 0.0), 0.0);
    // Curvatures are linear in the ring weight: w h_xx = kappa_rf - delta + w h_yy.
    let weight = (kappa_rf - delta) / (h[(0, 0)] - h[(1, 1)]);
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::Unphysical(format!(
            "no repulsive ring weight gives isotropy (w = {weight:e})"
        )));
    }
    Ok(PointChargeField {
        charges: ring(p, weight),
        ion_charge: trap.ion_charge,
        kappa_rf,
        quadrupole: Matrix3::from_diagonal(&Vector3::new(0.0, -delta, delta)),
        steering: SteeringSchedule::constant(Vector3::zeros()),
    })
}

/// Uniform field, V/m, that places the single-ion minimum of `background`
/// (with its own steering ignored) at `position`.
pub fn steering_for_position(background: &PointChargeField, position: &Vector3<f64>) -> Vector3<f64> {
    let bare = background.with_steering(SteeringSchedule::constant(Vector3::zeros()));
    -bare.force(position, 0.0) / background.ion_charge
}

/// Positions of the five-point path `a, b, c, d, e`.
pub fn default_path(params: &SurrogateParams) -> Vec<Vector3<f64>> {
    let (xi, yb, xc) = (params.isotropy_point, params.waypoint_offset, params.far_point);
    vec![
        Vector3::zeros(),
        Vector3::new(xi, yb, 0.0),
        Vector3::new(xc, 0.0, 0.0),
        Vector3::new(xi, -yb, 0.0),
        Vector3::zeros(),
    ]
}

/// The same route with the off-axis points moved onto the axis.
pub fn direct_path(params: &SurrogateParams) -> Vec<Vector3<f64>> {
    let (xi, xc) = (params.isotropy_point, params.far_point);
    vec![
        Vector3::zeros(),
        Vector3::new(xi, 0.0, 0.0),
        Vector3::new(xc, 0.0, 0.0),
        Vector3::new(xi, 0.0, 0.0),
        Vector3::zeros(),
    ]
}

pub fn waypoint_fields(background: &PointChargeField, path: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    path.iter().map(|p| steering_for_position(background, p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreePointOptions {
    /// Duration of each leg between waypoints, s.
    pub segment_time: f64,
    /// Settling time after the last waypoint, in periods of the lowest
    /// secular mode there.
    pub settle_periods: f64,
    pub window_periods: f64,
    /// Points per leg at which the local anisotropy is evaluated.
    pub samples_per_segment: usize,
    /// Ions farther than this from the origin have left the region where
    /// the surrogate is meaningful, m.
    pub escape_radius: f64,
}

impl Default for ThreePointOptions {
    fn default() -> Self {
        Self {
            segment_time: 200e-6,
            settle_periods: 5.0,
            window_periods: 2.0,
            samples_per_segment: 40,
            escape_radius: 200e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaypointReport {
    /// Uniform field, V/m.
    pub field: Vector3<f64>,
    /// Single-ion minimum, m.
    pub minimum: Vector3<f64>,
    pub anisotropy: f64,
    /// Orientation of the in-plane weak axis, rad in `[0, pi)`.
    pub weak_axis_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreePointResult {
    pub swap: SwapResult,
    pub waypoints: Vec<WaypointReport>,
    /// Time at which the anisotropy along the path is smallest, s.
    pub min_anisotropy_time: f64,
    /// Index of the waypoint nearest in time to the anisotropy minimum.
    pub min_anisotropy_waypoint: usize,
}

fn single_minimum(field: &dyn PotentialField, t: f64, guess: Vector3<f64>, charge: f64) -> Result<Vector3<f64>> {
    let opts = EquilibriumOptions {
        centre_guess: guess,
        ..Default::default()
    };
    equilibrium_with(field, t, 1, charge, &opts)
        .map(|p| p[0])
        .map_err(|e| Error::MinimumLost {
            time: t,
            detail: format!("no confining minimum: {e}"),
        })
}

fn local_report(field: &dyn PotentialField, t: f64, minimum: Vector3<f64>) -> (f64, f64) {
    let form = in_plane_block(&field.secular_hessian(&minimum, t));
    (in_plane_anisotropy(&form), form.weak_axis_angle())
}

pub fn three_point_turn(
    background: &PointChargeField,
    waypoints: &[Vector3<f64>],
    n_ions: usize,
    trap: &TrapParams,
    dt: f64,
) -> Result<ThreePointResult> {
    three_point_turn_with(background, waypoints, n_ions, trap, dt, &ThreePointOptions::default())
}

pub fn three_point_turn_with(
    background: &PointChargeField,
    waypoints: &[Vector3<f64>],
    n_ions: usize,
    trap: &TrapParams,
    dt: f64,
    opts: &ThreePointOptions,
) -> Result<ThreePointResult> {
    if waypoints.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "need at least five waypoints, got {}",
            waypoints.len()
        )));
    }
    if n_ions < 2 {
        return Err(Error::InvalidInput("a swap needs at least two ions".into()));
    }
    if !(opts.segment_time > 0.0) {
        return Err(Error::InvalidInput("segment time must be positive".into()));
    }
    let times: Vec<f64> = (0..waypoints.len()).map(|k| k as f64 * opts.segment_time).collect();
    let t_path = *times.last().unwrap();
    let field = background.with_steering(SteeringSchedule {
        times: times.clone(),
        fields: waypoints.to_vec(),
    });
    let q = trap.ion_charge;

    // Track the single-ion minimum along the path.
    let samples = opts.samples_per_segment.max(1) * (waypoints.len() - 1);
    let mut guess = single_minimum(&field, 0.0, Vector3::zeros(), q)?;
    let mut min_anisotropy = f64::INFINITY;
    let mut min_time = 0.0;
    let mut reports = Vec::with_capacity(waypoints.len());
    let per = opts.samples_per_segment.max(1);
    for s in 0..=samples {
        let t = t_path * s as f64 / samples as f64;
        guess = single_minimum(&field, t, guess, q)?;
        let (aniso, angle) = local_report(&field, t, guess);
        if aniso < min_anisotropy {
            min_anisotropy = aniso;
            min_time = t;
        }
        if s % per == 0 {
            reports.push(WaypointReport {
                field: waypoints[s / per],
                minimum: guess,
                anisotropy: aniso,
                weak_axis_angle: angle,
            });
        }
    }
    let final_minimum = guess;
    let min_anisotropy_waypoint = (min_time / opts.segment_time).round() as usize;

    let start = reports[0].minimum;
    let eq_opts = EquilibriumOptions {
        centre_guess: start,
        ..Default::default()
    };
    let positions = equilibrium_with(&field, 0.0, n_ions, q, &eq_opts)?;
    let mut state = IonSystemState::at_rest(positions, trap.ion_mass, q, 0.0);
    check_step(&field, &state, dt)?;
    let initial_order = state.x_order();
    let initial_separation = {
        let xs: Vec<f64> = initial_order.iter().map(|&i| state.positions[i].x).collect();
        xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    };

    let final_h = field.secular_hessian(&final_minimum, t_path);
    let w_low = final_h.symmetric_eigenvalues().min().max(f64::MIN_POSITIVE) / trap.ion_mass;
    let t_slow = 2.0 * std::f64::consts::PI / w_low.sqrt();
    let t_measure = t_path + opts.settle_periods * t_slow;
    let window = opts.window_periods * t_slow;

    let mut lost: Option<(f64, f64)> = None;
    let mut max_off_null: f64 = 0.0;
    let mut steps = 0usize;
    let escape = opts.escape_radius;
    let mut watch = |s: &IonSystemState| {
        steps += 1;
        for p in &s.positions {
            max_off_null = max_off_null.max(p.y.hypot(p.z));
            if lost.is_none() && p.norm() > escape {
                lost = Some((s.time, p.norm()));
            }
        }
    };
    propagate(&field, &mut state, t_measure, dt, 1, &mut watch)?;
    if let Some((time, r)) = lost {
        return Err(Error::MinimumLost {
            time,
            detail: format!("ion at {r:e} m from the origin"),
        });
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energies: Vec::new(),
    };
    propagate(&field, &mut state, t_measure + window, dt, 1, |s| {
        traj.times.push(s.time);
        traj.energies.push(total_energy(s, &field, s.time));
        traj.states.push(s.clone());
    })?;
    steps += traj.len();

    let rest_opts = EquilibriumOptions {
        centre_guess: final_minimum,
        ..Default::default()
    };
    let rest = equilibrium_with(&field, t_measure, n_ions, q, &rest_opts)?;
    let baseline = configuration_energy(&field, t_measure, &rest, q);
    let acquired_energy = window_energy(&traj, &field, t_measure, t_measure + window)? - baseline;
    let success = state.x_order().iter().eq(initial_order.iter().rev());

    Ok(ThreePointResult {
        swap: SwapResult {
            success,
            acquired_energy,
            acquired_quanta: acquired_energy / (HBAR * trap.reference_axial_frequency),
            min_anisotropy,
            max_off_null,
            initial_separation,
            steps,
        },
        waypoints: reports,
        min_anisotropy_time: min_time,
        min_anisotropy_waypoint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismReport {
    pub runs: usize,
    pub successes: usize,
    /// Smallest local anisotropy met by any rerun.
    pub min_anisotropy: f64,
    /// The path passes through (or next to) a point of equal in-plane
    /// curvature, so the turning sense is not fixed by the potential.
    pub degenerate: bool,
    /// All reruns agree and the path is not degenerate.
    pub deterministic: bool,
    pub results: Vec<ThreePointResult>,
}

/// Reruns the turn with each waypoint field displaced by a uniform random
/// amount of up to `jitter` times the largest field change along the path,
/// independently in x and y.
#[allow(clippy::too_many_arguments)]
pub fn assess_determinism(
    background: &PointChargeField,
    waypoints: &[Vector3<f64>],
    n_ions: usize,
    trap: &TrapParams,
    dt: f64,
    reruns: usize,
    jitter: f64,
    seed: u64,
    opts: &ThreePointOptions,
) -> Result<DeterminismReport> {
    if reruns == 0 {
        return Err(Error::InvalidInput("need at least one rerun".into()));
    }
    let scale = waypoints.iter().map(|w| (w - waypoints[0]).norm()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(reruns);
    for _ in 0..reruns {
        let jittered: Vec<Vector3<f64>> = waypoints
            .iter()
            .map(|w| {
                let dx: f64 = rng.random_range(-1.0..=1.0);
                let dy: f64 = rng.random_range(-1.0..=1.0);
                w + Vector3::new(dx, dy, 0.0) * (jitter * scale)
            })
            .collect();
        results.push(three_point_turn_with(background, &jittered, n_ions, trap, dt, opts)?);
    }
    let successes = results.iter().filter(|r| r.swap.success).count();
    let min_anisotropy = results
        .iter()
        .map(|r| r.swap.min_anisotropy)
        .fold(f64::INFINITY, f64::min);
    let degenerate = min_anisotropy < DEGENERACY_THRESHOLD;
    let unanimous = successes == 0 || successes == reruns;
    Ok(DeterminismReport {
        runs: reruns,
        successes,
        min_anisotropy,
        degenerate,
        deterministic: unanimous && !degenerate,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PointChargeField, SurrogateParams, TrapParams) {
        let trap = TrapParams::ca40_reference();
        let p = SurrogateParams::default();
        (surrogate_background(&p, &trap).unwrap(), p, trap)
    }

    #[test]
    fn isotropic_on_axis_at_design_point() {
        let (bg, p, _) = setup();
        let h = bg.secular_hessian(&Vector3::new(p.isotropy_point, 0.0, 0.0), 0.0);
        assert!((h[(0, 0)] / h[(1, 1)] - 1.0).abs() < 1e-10);
        assert!(h[(2, 2)] > h[(0, 0)]);
        let h0 = bg.secular_hessian(&Vector3::zeros(), 0.0);
        assert!(h0[(0, 0)] < h0[(1, 1)]);
        let hc = bg.secular_hessian(&Vector3::new(p.far_point, 0.0, 0.0), 0.0);
        assert!(hc[(1, 1)] < hc[(0, 0)]);
    }

    #[test]
    fn steering_places_minimum() {
        let (bg, p, trap) = setup();
        for target in default_path(&p) {
            let e = steering_for_position(&bg, &target);
            let field = bg.with_steering(SteeringSchedule::constant(e));
            let m = single_minimum(&field, 0.0, target + Vector3::new(3e-6, -2e-6, 1e-6), trap.ion_charge).unwrap();
            assert!((m - target).norm() < 1e-12, "{m:?} vs {target:?}");
        }
    }

    #[test]
    fn off_axis_waypoint_tilts_weak_axis() {
        let (bg, p, _) = setup();
        let b = Vector3::new(p.isotropy_point, p.waypoint_offset, 0.0);
        let (aniso, angle) = local_report(&bg, 0.0, b);
        assert!(aniso > 1.1 && aniso < 1.3, "{aniso}");
        let deg = angle.to_degrees();
        assert!((deg - 45.0).abs() < 10.0 || (deg - 135.0).abs() < 10.0, "{deg}");
    }

    #[test]
    fn too_few_waypoints_rejected() {
        let (bg, p, trap) = setup();
        let w = waypoint_fields(&bg, &default_path(&p)[..3]);
        assert!(three_point_turn(&bg, &w, 2, &trap, 1e-9).is_err());
    }
}
