use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};

/// Closest approach between two ions before the point-charge model is
/// considered broken.
pub const COLLISION_DISTANCE: f64 = 1e-9;

/// Positions and velocities of a string of identical ions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonSystemState {
    pub positions: Vec<Vector3<f64>>,
    pub velocities: Vec<Vector3<f64>>,
    pub mass: f64,
    pub charge: f64,
    pub time: f64,
}

impl IonSystemState {
    /// Ions at rest at `positions`.
    pub fn at_rest(positions: Vec<Vector3<f64>>, mass: f64, charge: f64, time: f64) -> Self {
        let n = positions.len();
        Self {
            positions,
            velocities: vec![Vector3::zeros(); n],
            mass,
            charge,
            time,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocities.iter().map(|v| v.norm_squared()).sum::<f64>()
    }

    pub fn total_momentum(&self) -> Vector3<f64> {
        self.velocities.iter().sum::<Vector3<f64>>() * self.mass
    }

    pub fn centre(&self) -> Vector3<f64> {
        self.positions.iter().sum::<Vector3<f64>>() / self.n_ions() as f64
    }

    /// Closest pair `(i, j, distance)`, if there are at least two ions.
    pub fn closest_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.n_ions() {
            for j in i + 1..self.n_ions() {
                let d = (self.positions[i] - self.positions[j]).norm();
                if best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() || self.positions.len() != self.velocities.len() {
            return Err(Error::InvalidInput(
                "state needs matching, non-empty position and velocity lists".into(),
            ));
        }
        if !(self.mass > 0.0 && self.charge > 0.0) {
            return Err(Error::InvalidInput("ion mass and charge must be positive".into()));
        }
        let finite = self
            .positions
            .iter()
            .chain(self.velocities.iter())
            .all(|v| v.iter().all(|c| c.is_finite()));
        if !finite || !self.time.is_finite() {
            return Err(Error::InvalidInput("state contains non-finite entries".into()));
        }
        if let Some((i, j, d)) = self.closest_pair() {
            if d < COLLISION_DISTANCE {
                return Err(Error::Collision {
                    i,
                    j,
                    time: self.time,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// Ion indices sorted by ascending x-coordinate.
    pub fn x_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n_ions()).collect();
        idx.sort_by(|&a, &b| self.positions[a].x.total_cmp(&self.positions[b].x));
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinetic_only_state() {
        let mut s = IonSystemState::at_rest(vec![Vector3::zeros(), Vector3::new(1e-5, 0.0, 0.0)], 2.0, 1.0, 0.0);
        s.velocities[0] = Vector3::new(1.0, 2.0, 0.0);
        s.velocities[1] = Vector3::new(0.0, 0.0, 3.0);
        assert_eq!(s.kinetic_energy(), 0.5 * 2.0 * (5.0 + 9.0));
    }

    #[test]
    fn collision_detected() {
        let s = IonSystemState::at_rest(vec![Vector3::zeros(), Vector3::new(1e-10, 0.0, 0.0)], 1.0, 1.0, 0.0);
        assert!(matches!(s.validate(), Err(Error::Collision { .. })));
    }

    #[test]
    fn x_order_sorts() {
        let s = IonSystemState::at_rest(
            vec![
                Vector3::new(2.0, 0.0, 0.0),
                Vector3::new(-1.0, 0.0, 0.0),
                Vector3::new(0.5, 0.0, 0.0),
            ],
            1.0,
            1.0,
            0.0,
        );
        assert_eq!(s.x_order(), vec![1, 2, 0]);
    }
}
