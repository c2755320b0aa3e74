//! Subcommand implementations. Each returns named tables; writing them is
//! left to the caller.

use std::f64::consts::PI;

use ionturn::analysis::{loss_energy_bound, sweep_table, trajectory_table, Table, TrialUnit};
use ionturn::constants::joules_to_mev;
use ionturn::dynamics::zigzag_critical_ratio;
use ionturn::model::{rf_barrier, rf_curvature_from_secular, CurvatureTriple, TrapParams};
use ionturn::pointcharge::design_table;
use ionturn::protocols::{
    assess_determinism, default_path, direct_path, heating_sweep, log_grid, max_swap_step, run_swap_traced,
    surrogate_background, three_point_turn_with, waypoint_fields, Direction, SwapOptions, SweepParams, TurnProfile,
};
use ionturn::{Error, Result};

use crate::config::{FrequencyTriple, RunConfig};

pub type Outputs = Vec<(&'static str, Table)>;

fn section<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("configuration has no `{name}` section")))
}

fn curvatures(f: &FrequencyTriple, trap: &TrapParams) -> Result<CurvatureTriple> {
    rf_curvature_from_secular(f.omega[0], f.omega[1], f.omega[2], trap.ion_mass)
}

fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Clockwise => "clockwise",
        Direction::Anticlockwise => "anticlockwise",
    }
}

pub fn swap(cfg: &RunConfig) -> Result<Outputs> {
    let trap = section(&cfg.trap, "trap")?;
    let kappa = curvatures(section(&cfg.frequencies, "frequencies")?, trap)?;
    let s = section(&cfg.swap, "swap")?;
    let dt = match s.dt {
        Some(dt) => dt,
        None => max_swap_step(s.n_ions, &kappa, trap, s.mode)?,
    };
    let profile = TurnProfile::new(s.profile, s.t_swap, s.direction)?;
    let opts = SwapOptions {
        settle_periods: s.settle_periods,
        window_periods: s.window_periods,
        ..SwapOptions::default()
    };
    let (r, traj) = run_swap_traced(s.n_ions, &kappa, trap, profile, s.mode, dt, &opts, s.trajectory_every)?;
    let mut t = Table::new([
        "n_ions",
        "profile",
        "mode",
        "direction",
        "t_swap_s",
        "dt_s",
        "success",
        "acquired_energy_j",
        "acquired_quanta",
        "min_anisotropy",
        "max_off_null_m",
        "initial_separation_m",
        "steps",
    ]);
    t.push(vec![
        (s.n_ions as i64).into(),
        s.profile.label().into(),
        s.mode.label().into(),
        direction_label(s.direction).into(),
        s.t_swap.into(),
        dt.into(),
        r.success.into(),
        r.acquired_energy.into(),
        r.acquired_quanta.into(),
        r.min_anisotropy.into(),
        r.max_off_null.into(),
        r.initial_separation.into(),
        (r.steps as i64).into(),
    ])?;
    Ok(vec![("swap", t), ("trajectory", trajectory_table(&traj)?)])
}

pub fn sweep(cfg: &RunConfig, jobs: usize) -> Result<Outputs> {
    let trap = section(&cfg.trap, "trap")?;
    let kappa = curvatures(section(&cfg.frequencies, "frequencies")?, trap)?;
    let s = section(&cfg.sweep, "sweep")?;
    let params = SweepParams {
        n_ions: s.n_ions,
        kappa,
        trap: *trap,
        direction: s.direction,
        dt: s.dt,
        options: SwapOptions::default(),
    };
    let times = log_grid(s.t_min, s.t_max, s.points);
    let rows = heating_sweep(&times, &s.profiles, &s.modes, &params, jobs)?;
    Ok(vec![("sweep", sweep_table(&rows)?)])
}

pub fn design(cfg: &RunConfig) -> Result<Outputs> {
    let d = section(&cfg.design, "design")?;
    let mut t = Table::new([
        "aspect",
        "charge_ratio",
        "transverse_strength_norm",
        "diagonal_strength_norm",
    ]);
    for p in design_table(d.aspect_min, d.aspect_max, d.points)? {
        t.push(vec![
            p.aspect.into(),
            p.charge_ratio.into(),
            p.transverse_strength_norm.into(),
            p.diagonal_strength_norm.into(),
        ])?;
    }
    Ok(vec![("design", t)])
}

pub fn zigzag(cfg: &RunConfig) -> Result<Outputs> {
    let z = section(&cfg.zigzag, "zigzag")?;
    let mut t = Table::new(["n_ions", "critical_ratio"]);
    for n in z.n_min..=z.n_max {
        t.push(vec![(n as i64).into(), zigzag_critical_ratio(n)?.into()])?;
    }
    Ok(vec![("zigzag", t)])
}

pub fn barrier(cfg: &RunConfig) -> Result<Outputs> {
    let trap = section(&cfg.trap, "trap")?;
    let kappa = curvatures(section(&cfg.frequencies, "frequencies")?, trap)?;
    let b = section(&cfg.barrier, "barrier")?;
    let energy = rf_barrier(kappa.kappa_rf, b.offset)?;
    let mut t = Table::new([
        "offset_m",
        "kappa_rf_j_per_m2",
        "rf_secular_khz",
        "barrier_j",
        "barrier_mev",
    ]);
    t.push(vec![
        b.offset.into(),
        kappa.kappa_rf.into(),
        (kappa.rf_frequency(trap.ion_mass) / (2.0 * PI) / 1e3).into(),
        energy.into(),
        joules_to_mev(energy).into(),
    ])?;
    Ok(vec![("barrier", t)])
}

pub fn lossbound(cfg: &RunConfig) -> Result<Outputs> {
    let l = section(&cfg.lossbound, "lossbound")?;
    let b = loss_energy_bound(&l.experiment)?;
    let unit = match l.experiment.trial_unit {
        TrialUnit::PerExchange => "per-exchange",
        TrialUnit::PerSequence => "per-sequence",
    };
    let mut t = Table::new([
        "trial_unit",
        "trials",
        "max_escape_probability",
        "mean_energy_bound_mev",
        "per_exchange_mev",
    ]);
    t.push(vec![
        unit.into(),
        l.experiment.trials().into(),
        b.max_escape_probability.into(),
        b.mean_energy_mev().into(),
        b.per_exchange_mev().into(),
    ])?;
    Ok(vec![("lossbound", t)])
}

pub fn threepoint(cfg: &RunConfig) -> Result<Outputs> {
    let trap = section(&cfg.trap, "trap")?;
    let c = section(&cfg.threepoint, "threepoint")?;
    let bg = surrogate_background(&c.surrogate, trap)?;
    let path = match &c.waypoints {
        Some(w) => w.clone(),
        None if c.direct => direct_path(&c.surrogate),
        None => default_path(&c.surrogate),
    };
    let fields = waypoint_fields(&bg, &path);
    let nominal = three_point_turn_with(&bg, &fields, c.n_ions, trap, c.dt, &c.options)?;
    let rep = assess_determinism(
        &bg, &fields, c.n_ions, trap, c.dt, c.reruns, c.jitter, c.seed, &c.options,
    )?;
    let mut summary = Table::new([
        "success",
        "acquired_quanta",
        "min_anisotropy",
        "min_anisotropy_time_s",
        "min_anisotropy_waypoint",
        "reruns",
        "rerun_successes",
        "degenerate",
        "deterministic",
    ]);
    summary.push(vec![
        nominal.swap.success.into(),
        nominal.swap.acquired_quanta.into(),
        nominal.swap.min_anisotropy.into(),
        nominal.min_anisotropy_time.into(),
        (nominal.min_anisotropy_waypoint as i64).into(),
        (rep.runs as i64).into(),
        (rep.successes as i64).into(),
        rep.degenerate.into(),
        rep.deterministic.into(),
    ])?;
    let mut wp = Table::new([
        "waypoint",
        "field_x_v_per_m",
        "field_y_v_per_m",
        "minimum_x_m",
        "minimum_y_m",
        "anisotropy",
        "weak_axis_angle_deg",
    ]);
    for (i, w) in nominal.waypoints.iter().enumerate() {
        wp.push(vec![
            (i as i64).into(),
            w.field.x.into(),
            w.field.y.into(),
            w.minimum.x.into(),
            w.minimum.y.into(),
            w.anisotropy.into(),
            w.weak_axis_angle.to_degrees().into(),
        ])?;
    }
    Ok(vec![("threepoint", summary), ("waypoints", wp)])
}
