//! One-point turn: the trap axes rotate about z at fixed secular frequencies.

use nalgebra::Matrix2;

use crate::dynamics::fields::{DcQuadratic, FullRfField, QuadraticField};
use crate::error::{Error, Result};
use crate::model::{delta_q, rf_drive_from_pseudocurvature, CurvatureTriple, QuadForm2D, RfDrive, TrapParams};
use crate::protocols::schedule::{theta_schedule, TurnProfile};

fn check_ordering(kappa: &CurvatureTriple) -> Result<()> {
    if !(0.0 < kappa.kappa_x && kappa.kappa_x < kappa.kappa_y && kappa.kappa_y < kappa.kappa_z) {
        return Err(Error::InvalidInput(format!(
            "one-point turn needs 0 < kappa_x < kappa_y < kappa_z, got ({:e}, {:e}, {:e}) J/m^2",
            kappa.kappa_x, kappa.kappa_y, kappa.kappa_z
        )));
    }
    Ok(())
}

/// Cycle-averaged potential of the turn: `diag(kx, ky, kz)` with the
/// in-plane part rotated by `theta(t)`.
pub fn one_point_turn_field(kappa: &CurvatureTriple, profile: TurnProfile) -> Result<QuadraticField> {
    check_ordering(kappa)?;
    Ok(QuadraticField::new(DcQuadratic::Rotating {
        kappa_x: kappa.kappa_x,
        kappa_y: kappa.kappa_y,
        kappa_z: kappa.kappa_z,
        delta_kappa: kappa.delta_kappa(),
        profile,
    }))
}

/// The same turn with the pseudopotential replaced by the explicit RF
/// drive of `trap`. The DC part is the Laplacian remainder of the triple
/// plus the rotating quadrupole.
pub fn full_rf_turn_field(
    kappa: &CurvatureTriple,
    profile: TurnProfile,
    trap: &TrapParams,
) -> Result<(FullRfField, RfDrive)> {
    check_ordering(kappa)?;
    let drive = rf_drive_from_pseudocurvature(kappa.kappa_rf, trap.rf_frequency, trap.ion_mass, trap.ion_charge)?;
    let dc = DcQuadratic::Rotating {
        kappa_x: kappa.kappa_dc_x,
        kappa_y: kappa.kappa_dc_y,
        kappa_z: kappa.kappa_dc_z(),
        delta_kappa: kappa.delta_kappa(),
        profile,
    };
    let field = FullRfField::new(dc, trap.ion_charge * drive.curvature, drive.omega, trap.ion_mass);
    Ok((field, drive))
}

/// In-plane quadratic form of the turn at time `t`.
pub fn in_plane_form(kappa: &CurvatureTriple, profile: &TurnProfile, t: f64) -> Result<QuadForm2D> {
    check_ordering(kappa)?;
    let theta = theta_schedule(profile, t)?;
    Ok(QuadForm2D::diagonal(kappa.kappa_x, kappa.kappa_y).add(&delta_q(theta, kappa.kappa_x, kappa.kappa_y)))
}

/// Ratio of the higher to the lower in-plane secular frequency of a form.
pub fn in_plane_anisotropy(form: &QuadForm2D) -> f64 {
    let [lo, hi] = form.eigenvalues();
    (hi / lo).sqrt()
}

/// In-plane block of a 3x3 Hessian.
pub fn in_plane_block(h: &nalgebra::Matrix3<f64>) -> QuadForm2D {
    QuadForm2D::from_matrix(&Matrix2::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ca40_mass, khz};
    use crate::dynamics::PotentialField;
    use crate::model::rf_curvature_from_secular;
    use crate::protocols::schedule::{Direction, ProfileKind};
    use nalgebra::Vector3;
    use std::f64::consts::FRAC_PI_2;

    fn triple() -> CurvatureTriple {
        rf_curvature_from_secular(khz(120.0), khz(230.0), khz(790.0), ca40_mass()).unwrap()
    }

    #[test]
    fn starts_and_ends_at_the_static_trap() {
        let k = triple();
        for kind in [ProfileKind::ConstantVelocity, ProfileKind::SineVelocity] {
            let p = TurnProfile::new(kind, 1e-4, Direction::Clockwise).unwrap();
            let f0 = in_plane_form(&k, &p, 0.0).unwrap();
            assert_eq!(f0, QuadForm2D::diagonal(k.kappa_x, k.kappa_y));
            let f1 = in_plane_form(&k, &p, p.t_swap).unwrap();
            let d = f1.sub(&QuadForm2D::diagonal(k.kappa_x, k.kappa_y));
            assert!(d.max_abs_entry() < 1e-12 * k.kappa_y);
        }
    }

    #[test]
    fn weak_axis_perpendicular_at_midpoint() {
        let k = triple();
        let p = TurnProfile::new(ProfileKind::SineVelocity, 1e-4, Direction::Anticlockwise).unwrap();
        let f = in_plane_form(&k, &p, 0.5e-4).unwrap();
        assert!((f.weak_axis_angle() - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn eigenvalues_constant_through_turn() {
        let k = triple();
        let p = TurnProfile::new(ProfileKind::ConstantVelocity, 1e-4, Direction::Clockwise).unwrap();
        for i in 0..=50 {
            let f = in_plane_form(&k, &p, 1e-4 * i as f64 / 50.0).unwrap();
            let [a, b] = f.eigenvalues();
            assert!((a / k.kappa_x - 1.0).abs() < 1e-10 && (b / k.kappa_y - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_rf_secular_part_equals_pseudopotential_turn() {
        let k = triple();
        let trap = TrapParams::ca40_reference();
        let p = TurnProfile::new(ProfileKind::SineVelocity, 1e-4, Direction::Clockwise).unwrap();
        let pseudo = one_point_turn_field(&k, p).unwrap();
        let (full, drive) = full_rf_turn_field(&k, p, &trap).unwrap();
        assert!((drive.mathieu_q - 0.164).abs() < 0.002);
        for t in [0.0, 2e-5, 5e-5, 1e-4] {
            let a = pseudo.secular_hessian(&Vector3::zeros(), t);
            let b = full.secular_hessian(&Vector3::zeros(), t);
            assert!((a - b).abs().max() < 1e-9 * k.kappa_z);
        }
    }

    #[test]
    fn rejects_misordered_curvatures() {
        let mut k = triple();
        k.kappa_y = 0.5 * k.kappa_x;
        let p = TurnProfile::new(ProfileKind::SineVelocity, 1e-4, Direction::Clockwise).unwrap();
        assert!(one_point_turn_field(&k, p).is_err());
    }
}
