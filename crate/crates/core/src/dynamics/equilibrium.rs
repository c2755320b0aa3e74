//! Static configurations of an ion string in the secular potential.

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};

use super::coulomb::{add_coulomb_forces, add_coulomb_hessian, coulomb_energy};
use super::fields::PotentialField;
use crate::constants::COULOMB_K;
use crate::error::{Error, Result};

/// Cap on the residual force per ion, N.
pub const MAX_RESIDUAL_FORCE: f64 = 1e-18;

#[derive(Debug, Clone)]
pub struct EquilibriumOptions {
    /// Direction of the initial 1D guess; the weak axis of the field at
    /// `centre_guess` when `None`.
    pub axis: Option<Vector3<f64>>,
    pub centre_guess: Vector3<f64>,
    /// Reject stationary points whose Hessian is not positive definite.
    pub require_minimum: bool,
    pub max_iterations: usize,
    /// Residual force per ion relative to the Coulomb force scale.
    pub relative_tolerance: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            axis: None,
            centre_guess: Vector3::zeros(),
            require_minimum: true,
            max_iterations: 200,
            relative_tolerance: 1e-12,
        }
    }
}

/// Secular energy of the string: external field plus mutual Coulomb, J.
pub fn configuration_energy(field: &dyn PotentialField, t: f64, positions: &[Vector3<f64>], charge: f64) -> f64 {
    positions.iter().map(|p| field.secular_potential(p, t)).sum::<f64>() + coulomb_energy(positions, charge)
}

/// Total secular force on each ion, N.
pub fn configuration_forces(
    field: &dyn PotentialField,
    t: f64,
    positions: &[Vector3<f64>],
    charge: f64,
) -> Vec<Vector3<f64>> {
    let mut f: Vec<Vector3<f64>> = positions.iter().map(|p| field.secular_force(p, t)).collect();
    add_coulomb_forces(positions, charge, &mut f);
    f
}

/// 3N x 3N Hessian of the secular energy, J/m^2.
pub fn configuration_hessian(
    field: &dyn PotentialField,
    t: f64,
    positions: &[Vector3<f64>],
    charge: f64,
) -> DMatrix<f64> {
    let n = positions.len();
    let mut h = DMatrix::zeros(3 * n, 3 * n);
    for (i, p) in positions.iter().enumerate() {
        let b = field.secular_hessian(p, t);
        h.view_mut((3 * i, 3 * i), (3, 3)).copy_from(&b);
    }
    add_coulomb_hessian(positions, charge, &mut h);
    h
}

/// Equilibrium of `n_ions` in `field` at time `t`, checked to be a minimum.
pub fn equilibrium_positions(
    field: &dyn PotentialField,
    t: f64,
    n_ions: usize,
    charge: f64,
) -> Result<Vec<Vector3<f64>>> {
    equilibrium_with(field, t, n_ions, charge, &EquilibriumOptions::default())
}

pub fn equilibrium_with(
    field: &dyn PotentialField,
    t: f64,
    n_ions: usize,
    charge: f64,
    opts: &EquilibriumOptions,
) -> Result<Vec<Vector3<f64>>> {
    if n_ions == 0 {
        return Err(Error::InvalidInput("need at least one ion".into()));
    }
    if !(charge > 0.0) {
        return Err(Error::InvalidInput("ion charge must be positive".into()));
    }
    let centre = single_ion_minimum(field, t, opts)?;
    let guess = if n_ions == 1 {
        vec![centre]
    } else {
        initial_guess(field, t, n_ions, charge, centre, opts.axis)?
    };
    let positions = newton(field, t, guess, charge, opts)?;
    if opts.require_minimum {
        let h = configuration_hessian(field, t, &positions, charge);
        let ev = SymmetricEigen::new(h).eigenvalues;
        let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = ev.min();
        if !(min > 1e-9 * max) {
            return Err(Error::Saddle { lowest_eigenvalue: min });
        }
    }
    Ok(positions)
}

fn single_ion_minimum(field: &dyn PotentialField, t: f64, opts: &EquilibriumOptions) -> Result<Vector3<f64>> {
    let p = newton(field, t, vec![opts.centre_guess], 0.0, opts)?;
    Ok(p[0])
}

fn initial_guess(
    field: &dyn PotentialField,
    t: f64,
    n: usize,
    charge: f64,
    centre: Vector3<f64>,
    axis: Option<Vector3<f64>>,
) -> Result<Vec<Vector3<f64>>> {
    let h = field.secular_hessian(&centre, t);
    let axis = match axis {
        Some(a) if a.norm() > 0.0 => a.normalize(),
        Some(_) => return Err(Error::InvalidInput("axis must be non-zero".into())),
        None => {
            let eig = h.symmetric_eigen();
            let k = eig.eigenvalues.imin();
            eig.eigenvectors.column(k).into_owned()
        }
    };
    let kappa = axis.dot(&(h * axis));
    if !(kappa > 0.0) {
        return Err(Error::Saddle {
            lowest_eigenvalue: kappa,
        });
    }
    let length = (COULOMB_K * charge * charge / kappa).cbrt();
    // Approximate minimum spacing of a harmonic string.
    let spacing = if n == 2 {
        2f64.cbrt() * length
    } else {
        2.018 * (n as f64).powf(-0.559) * length
    };
    let mid = (n as f64 - 1.0) / 2.0;
    Ok((0..n).map(|i| centre + axis * ((i as f64 - mid) * spacing)).collect())
}

fn force_scale(field: &dyn PotentialField, t: f64, positions: &[Vector3<f64>], charge: f64) -> f64 {
    let mut min_d = f64::INFINITY;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            min_d = min_d.min((positions[i] - positions[j]).norm());
        }
    }
    if min_d.is_finite() {
        COULOMB_K * charge * charge / (min_d * min_d)
    } else {
        let h = field.secular_hessian(&positions[0], t);
        h.norm() * 1e-6
    }
}

fn flatten(v: &[Vector3<f64>]) -> DVector<f64> {
    DVector::from_iterator(3 * v.len(), v.iter().flat_map(|p| p.iter().copied()))
}

fn max_norm(f: &[Vector3<f64>]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

/// Damped Newton iteration on the secular force; falls back to scaled
/// gradient steps when the Newton direction does not reduce the residual.
fn newton(
    field: &dyn PotentialField,
    t: f64,
    mut x: Vec<Vector3<f64>>,
    charge: f64,
    opts: &EquilibriumOptions,
) -> Result<Vec<Vector3<f64>>> {
    let tol = (opts.relative_tolerance * force_scale(field, t, &x, charge)).min(MAX_RESIDUAL_FORCE);
    let n = x.len();
    let mut f = configuration_forces(field, t, &x, charge);
    let mut residual = max_norm(&f);
    for _ in 0..opts.max_iterations {
        if residual <= tol {
            return Ok(x);
        }
        let h = configuration_hessian(field, t, &x, charge);
        let rhs = flatten(&f);
        let newton_step = h.clone().lu().solve(&rhs).filter(|s| s.iter().all(|c| c.is_finite()));
        let gradient_step = {
            let lmax = h.abs().max().max(f64::MIN_POSITIVE);
            rhs.clone() / lmax
        };
        let mut accepted = false;
        for step in newton_step.iter().chain(std::iter::once(&gradient_step)) {
            let mut scale = 1.0;
            for _ in 0..40 {
                let trial: Vec<Vector3<f64>> = (0..n)
                    .map(|i| x[i] + Vector3::new(step[3 * i], step[3 * i + 1], step[3 * i + 2]) * scale)
                    .collect();
                if has_overlap(&trial) {
                    scale *= 0.5;
                    continue;
                }
                let ft = configuration_forces(field, t, &trial, charge);
                let rt = max_norm(&ft);
                if rt < residual || rt <= tol {
                    x = trial;
                    f = ft;
                    residual = rt;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    if residual <= tol {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            iterations: opts.max_iterations,
            residual,
        })
    }
}

fn has_overlap(x: &[Vector3<f64>]) -> bool {
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if (x[i] - x[j]).norm() < super::state::COLLISION_DISTANCE {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ca40_mass, khz, ELEMENTARY_CHARGE};
    use crate::dynamics::fields::QuadraticField;

    fn axial_trap(f_l: f64, ratio_y: f64, ratio_z: f64) -> QuadraticField {
        let m = ca40_mass();
        let w = khz(f_l);
        let k = m * w * w;
        QuadraticField::harmonic(k, k * ratio_y * ratio_y, k * ratio_z * ratio_z)
    }

    #[test]
    fn single_ion_sits_at_centre() {
        let field = axial_trap(100.0, 2.0, 3.0);
        let p = equilibrium_positions(&field, 0.0, 1, ELEMENTARY_CHARGE).unwrap();
        assert!(p[0].norm() < 1e-15);
    }

    #[test]
    fn two_ion_separation_matches_cube_root() {
        let field = axial_trap(100.0, 2.0, 3.0);
        let q = ELEMENTARY_CHARGE;
        let p = equilibrium_positions(&field, 0.0, 2, q).unwrap();
        let d = (p[0] - p[1]).norm();
        let w = khz(100.0);
        let expected = (2.0 * COULOMB_K * q * q / (ca40_mass() * w * w)).cbrt();
        assert!((d - expected).abs() < 1e-12 * expected);
        assert!((d - 26.0e-6).abs() < 0.1e-6);
        let f = configuration_forces(&field, 0.0, &p, q);
        assert!(max_norm(&f) <= MAX_RESIDUAL_FORCE);
    }

    #[test]
    fn three_ion_outer_spacing() {
        // Dimensionless force balance for ions at -u, 0, u with unit length
        // scale: u = 1/u^2 + 1/(2u)^2, so u^3 = 5/4.
        let field = axial_trap(100.0, 2.0, 3.0);
        let q = ELEMENTARY_CHARGE;
        let p = equilibrium_positions(&field, 0.0, 3, q).unwrap();
        let mut xs: Vec<f64> = p.iter().map(|v| v.x).collect();
        xs.sort_by(f64::total_cmp);
        let w = khz(100.0);
        let l = (COULOMB_K * q * q / (ca40_mass() * w * w)).cbrt();
        assert!(((xs[2] - xs[1]) / l - 1.25f64.cbrt()).abs() < 1e-9);
        assert!((xs[0] + xs[2]).abs() < 1e-12 * l);
        assert!(xs[1].abs() < 1e-12 * l);
    }

    #[test]
    fn saddle_rejected_below_zigzag_threshold() {
        let field = axial_trap(100.0, 1.4, 3.0);
        let opts = EquilibriumOptions {
            axis: Some(Vector3::x()),
            ..Default::default()
        };
        let r = equilibrium_with(&field, 0.0, 3, ELEMENTARY_CHARGE, &opts);
        assert!(matches!(r, Err(Error::Saddle { .. })), "{r:?}");
    }

    #[test]
    fn string_follows_weak_axis() {
        let field = axial_trap(100.0, 0.5, 3.0);
        let p = equilibrium_positions(&field, 0.0, 2, ELEMENTARY_CHARGE).unwrap();
        let d = p[0] - p[1];
        assert!(d.x.abs() < 1e-12 * d.norm());
    }
}
