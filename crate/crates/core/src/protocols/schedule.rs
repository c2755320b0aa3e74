//! Rotation-angle schedules for a one-point turn.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `theta = pi t / T`.
    ConstantVelocity,
    /// Angular velocity follows the first half of a sine, so it vanishes at
    /// both ends.
    SineVelocity,
}

impl ProfileKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileKind::ConstantVelocity => "constant",
            ProfileKind::SineVelocity => "sine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Clockwise,
    Anticlockwise,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Clockwise => -1.0,
            Direction::Anticlockwise => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnProfile {
    pub kind: ProfileKind,
    /// Duration of the half-turn, s.
    pub t_swap: f64,
    pub direction: Direction,
}

impl TurnProfile {
    pub fn new(kind: ProfileKind, t_swap: f64, direction: Direction) -> Result<Self> {
        if !(t_swap > 0.0 && t_swap.is_finite()) {
            return Err(Error::InvalidInput(format!("t_swap must be positive, got {t_swap}")));
        }
        Ok(Self {
            kind,
            t_swap,
            direction,
        })
    }

    /// Angle at `t`, with `t` clamped to `[0, t_swap]`.
    pub fn theta_clamped(&self, t: f64) -> f64 {
        let s = (t / self.t_swap).clamp(0.0, 1.0);
        let magnitude = match self.kind {
            ProfileKind::ConstantVelocity => PI * s,
            ProfileKind::SineVelocity => 0.5 * PI * (1.0 - (PI * s).cos()),
        };
        self.direction.sign() * magnitude
    }

    /// Angular velocity at `t` (zero outside the turn), rad/s.
    pub fn angular_velocity(&self, t: f64) -> f64 {
        if !(0.0..=self.t_swap).contains(&t) {
            return 0.0;
        }
        let w = match self.kind {
            ProfileKind::ConstantVelocity => PI / self.t_swap,
            ProfileKind::SineVelocity => 0.5 * PI * PI / self.t_swap * (PI * t / self.t_swap).sin(),
        };
        self.direction.sign() * w
    }
}

/// Rotation angle of the trap axes at time `t` of the turn.
pub fn theta_schedule(profile: &TurnProfile, t: f64) -> Result<f64> {
    if !(0.0..=profile.t_swap).contains(&t) {
        return Err(Error::InvalidInput(format!(
            "t = {t:e} s outside the turn [0, {:e}] s",
            profile.t_swap
        )));
    }
    Ok(profile.theta_clamped(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(kind: ProfileKind, dir: Direction) -> TurnProfile {
        TurnProfile::new(kind, 2e-4, dir).unwrap()
    }

    #[test]
    fn endpoints_and_midpoint() {
        for kind in [ProfileKind::ConstantVelocity, ProfileKind::SineVelocity] {
            let p = profile(kind, Direction::Anticlockwise);
            assert_eq!(theta_schedule(&p, 0.0).unwrap(), 0.0);
            assert!((theta_schedule(&p, p.t_swap).unwrap() - PI).abs() < 1e-15);
            assert!((theta_schedule(&p, p.t_swap / 2.0).unwrap() - PI / 2.0).abs() < 1e-15);
            let q = profile(kind, Direction::Clockwise);
            assert!((theta_schedule(&q, q.t_swap).unwrap() + PI).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let p = profile(ProfileKind::SineVelocity, Direction::Clockwise);
        assert!(theta_schedule(&p, -1e-9).is_err());
        assert!(theta_schedule(&p, 3e-4).is_err());
        assert!(TurnProfile::new(ProfileKind::SineVelocity, 0.0, Direction::Clockwise).is_err());
    }

    #[test]
    fn angular_velocity_matches_finite_difference() {
        for kind in [ProfileKind::ConstantVelocity, ProfileKind::SineVelocity] {
            let p = profile(kind, Direction::Anticlockwise);
            let h = p.t_swap * 1e-6;
            for k in 1..20 {
                let t = p.t_swap * k as f64 / 20.0;
                let fd = (p.theta_clamped(t + h) - p.theta_clamped(t - h)) / (2.0 * h);
                assert!((fd - p.angular_velocity(t)).abs() < 1e-6 * PI / p.t_swap);
            }
        }
        let sine = profile(ProfileKind::SineVelocity, Direction::Anticlockwise);
        let h = sine.t_swap * 1e-7;
        assert!(((sine.theta_clamped(h) - sine.theta_clamped(0.0)) / h).abs() < 1e-5 * PI / sine.t_swap);
        let end = sine.t_swap;
        assert!(((sine.theta_clamped(end) - sine.theta_clamped(end - h)) / h).abs() < 1e-5 * PI / sine.t_swap);
        let constant = profile(ProfileKind::ConstantVelocity, Direction::Anticlockwise);
        assert!((constant.angular_velocity(0.0) - PI / constant.t_swap).abs() < 1e-9);
    }
}
