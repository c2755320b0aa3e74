//! The four steering electrodes and their collective modes.
//!
//! Electrodes are ordered `(TL, TR, BL, BR)`: top/bottom along +y/-y and
//! left/right along -x/+x. The patterns are
//!
//! ```text
//! offset     (+1, +1, +1, +1)
//! x-balance  (-1, +1, -1, +1)
//! y-balance  (+1, +1, -1, -1)
//! diagonal   (+1, -1, -1, +1)
//! ```
//!
//! They are mutually orthogonal with squared norm 4, so the inverse map is a
//! quarter of the transpose.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SteeringBasis {
    pub offset: f64,
    pub x_balance: f64,
    pub y_balance: f64,
    pub diagonal: f64,
}

pub const PATTERNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [-1.0, 1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

impl SteeringBasis {
    fn coefficients(&self) -> [f64; 4] {
        [self.offset, self.x_balance, self.y_balance, self.diagonal]
    }
}

/// Electrode voltages `(TL, TR, BL, BR)`.
pub fn steering_to_electrodes(basis: &SteeringBasis) -> [f64; 4] {
    let c = basis.coefficients();
    let mut v = [0.0; 4];
    for (k, pattern) in PATTERNS.iter().enumerate() {
        for e in 0..4 {
            v[e] += c[k] * pattern[e];
        }
    }
    v
}

pub fn electrodes_to_steering(voltages: &[f64; 4]) -> SteeringBasis {
    let mut c = [0.0; 4];
    for (k, pattern) in PATTERNS.iter().enumerate() {
        c[k] = 0.25 * pattern.iter().zip(voltages).map(|(p, v)| p * v).sum::<f64>();
    }
    SteeringBasis {
        offset: c[0],
        x_balance: c[1],
        y_balance: c[2],
        diagonal: c[3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_patterns() {
        let off = SteeringBasis {
            offset: 1.0,
            ..Default::default()
        };
        assert_eq!(steering_to_electrodes(&off), [1.0, 1.0, 1.0, 1.0]);
        let diag = SteeringBasis {
            diagonal: 1.0,
            ..Default::default()
        };
        assert_eq!(steering_to_electrodes(&diag), [1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn patterns_orthogonal() {
        for (a, pa) in PATTERNS.iter().enumerate() {
            for (b, pb) in PATTERNS.iter().enumerate() {
                let dot: f64 = pa.iter().zip(pb).map(|(x, y)| x * y).sum();
                assert_eq!(dot, if a == b { 4.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn round_trip() {
        let b = SteeringBasis {
            offset: 0.31,
            x_balance: -1.7,
            y_balance: 2.25,
            diagonal: -0.013,
        };
        let back = electrodes_to_steering(&steering_to_electrodes(&b));
        assert!((back.offset - b.offset).abs() < 1e-14);
        assert!((back.x_balance - b.x_balance).abs() < 1e-14);
        assert!((back.y_balance - b.y_balance).abs() < 1e-14);
        assert!((back.diagonal - b.diagonal).abs() < 1e-14);
    }
}
