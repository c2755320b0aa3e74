//! Mutual Coulomb interaction of identical ions.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::constants::COULOMB_K;

pub fn coulomb_energy(positions: &[Vector3<f64>], charge: f64) -> f64 {
    let kq2 = COULOMB_K * charge * charge;
    let mut e = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            e += kq2 / (positions[i] - positions[j]).norm();
        }
    }
    e
}

/// Adds the Coulomb force on each ion to `out`.
pub fn add_coulomb_forces(positions: &[Vector3<f64>], charge: f64, out: &mut [Vector3<f64>]) {
    let kq2 = COULOMB_K * charge * charge;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = positions[i] - positions[j];
            let r2 = d.norm_squared();
            let f = d * (kq2 / (r2 * r2.sqrt()));
            out[i] += f;
            out[j] -= f;
        }
    }
}

pub fn coulomb_forces(positions: &[Vector3<f64>], charge: f64) -> Vec<Vector3<f64>> {
    let mut out = vec![Vector3::zeros(); positions.len()];
    add_coulomb_forces(positions, charge, &mut out);
    out
}

/// Adds the 3N x 3N Hessian of the Coulomb energy to `h`.
pub fn add_coulomb_hessian(positions: &[Vector3<f64>], charge: f64, h: &mut DMatrix<f64>) {
    let kq2 = COULOMB_K * charge * charge;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = positions[i] - positions[j];
            let r2 = d.norm_squared();
            let block: Matrix3<f64> =
                (d * d.transpose() * 3.0 - Matrix3::identity() * r2) * (kq2 / (r2 * r2 * r2.sqrt()));
            for a in 0..3 {
                for b in 0..3 {
                    let v = block[(a, b)];
                    h[(3 * i + a, 3 * i + b)] += v;
                    h[(3 * j + a, 3 * j + b)] += v;
                    h[(3 * i + a, 3 * j + b)] -= v;
                    h[(3 * j + a, 3 * i + b)] -= v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELEMENTARY_CHARGE;

    fn sample() -> Vec<Vector3<f64>> {
        vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(20e-6, 3e-6, -1e-6),
            Vector3::new(-15e-6, 8e-6, 4e-6),
        ]
    }

    #[test]
    fn forces_sum_to_zero_and_match_gradient() {
        let q = ELEMENTARY_CHARGE;
        let p = sample();
        let f = coulomb_forces(&p, q);
        let total: Vector3<f64> = f.iter().sum();
        assert!(total.norm() < 1e-14 * f[0].norm());
        let h = 1e-11;
        for i in 0..3 {
            for k in 0..3 {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[i][k] += h;
                pm[i][k] -= h;
                let g = (coulomb_energy(&pp, q) - coulomb_energy(&pm, q)) / (2.0 * h);
                assert!((f[i][k] + g).abs() < 1e-6 * f[i].norm());
            }
        }
    }

    #[test]
    fn hessian_matches_force_derivative() {
        let q = ELEMENTARY_CHARGE;
        let p = sample();
        let mut hess = DMatrix::zeros(9, 9);
        add_coulomb_hessian(&p, q, &mut hess);
        let h = 1e-11;
        for col in 0..9 {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[col / 3][col % 3] += h;
            pm[col / 3][col % 3] -= h;
            let fp = coulomb_forces(&pp, q);
            let fm = coulomb_forces(&pm, q);
            for row in 0..9 {
                let fd = -(fp[row / 3][row % 3] - fm[row / 3][row % 3]) / (2.0 * h);
                let scale = hess.abs().max();
                assert!((fd - hess[(row, col)]).abs() < 1e-6 * scale);
            }
        }
    }
}
