//! Point-charge surrogate for segmented DC electrodes.
//!
//! Each electrode is replaced by a point charge whose weight is proportional
//! to the applied voltage (unit proportionality). Potentials are in volts,
//! fields in V/m and Hessians in V/m^2; multiply by the ion charge to obtain
//! energies.
//!
//! Two six-electrode configurations generate the quadrupoles needed for a
//! rotation:
//!
//! * transverse: four corner charges at `(+-a/2, +-b/2, 0)` and two middle
//!   charges at `(0, +-b/2, 0)`, with the middle/corner ratio chosen so that
//!   the z-curvature at the origin vanishes;
//! * diagonal: the four corner charges with alternating signs.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::constants::COULOMB_K;
use crate::error::{Error, Result};
use crate::model::QuadForm2D;
use crate::numeric::golden_section_max;

/// Distance below which a field point is considered to sit on a charge.
pub const SINGULAR_DISTANCE: f64 = 1e-12;

/// Aspect ratio at which the middle and corner weights of the transverse
/// configuration have equal magnitude: `2 (1 + r^2)^(-3/2) = 1`.
pub fn equal_weight_aspect() -> f64 {
    (2f64.powf(2.0 / 3.0) - 1.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointCharge {
    pub position: Vector3<f64>,
    /// Charge weight, C (proportional to the electrode voltage).
    pub weight: f64,
}

impl PointCharge {
    pub fn new(position: Vector3<f64>, weight: f64) -> Self {
        Self { position, weight }
    }
}

fn separation(charge: &PointCharge, point: &Vector3<f64>) -> Result<(Vector3<f64>, f64)> {
    let d = point - charge.position;
    let r = d.norm();
    if !(r >= SINGULAR_DISTANCE) {
        return Err(Error::SingularPoint {
            point: [point.x, point.y, point.z],
            distance: r,
        });
    }
    Ok((d, r))
}

/// `sum K q_i / |r - r_i|`, volts.
pub fn potential_at(charges: &[PointCharge], point: &Vector3<f64>) -> Result<f64> {
    let mut phi = 0.0;
    for c in charges {
        let (_, r) = separation(c, point)?;
        phi += COULOMB_K * c.weight / r;
    }
    Ok(phi)
}

/// Electric field `-grad phi`, V/m.
pub fn field_at(charges: &[PointCharge], point: &Vector3<f64>) -> Result<Vector3<f64>> {
    let mut e = Vector3::zeros();
    for c in charges {
        let (d, r) = separation(c, point)?;
        e += d * (COULOMB_K * c.weight / (r * r * r));
    }
    Ok(e)
}

/// Hessian of the potential, V/m^2:
/// `K q (3 d d^T - |d|^2 I) / |d|^5` summed over charges.
pub fn hessian_at(charges: &[PointCharge], point: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let mut h = Matrix3::zeros();
    for c in charges {
        let (d, r) = separation(c, point)?;
        let r2 = r * r;
        let s = COULOMB_K * c.weight / (r2 * r2 * r);
        h += (d * d.transpose() * 3.0 - Matrix3::identity() * r2) * s;
    }
    Ok(h)
}

/// z-curvature at the origin of the potential of a charge at `(x, y, 0)`.
pub fn z_curvature_single(charge: f64, x: f64, y: f64) -> Result<f64> {
    let r2 = x * x + y * y;
    if r2.sqrt() < SINGULAR_DISTANCE {
        return Err(Error::SingularPoint {
            point: [x, y, 0.0],
            distance: r2.sqrt(),
        });
    }
    Ok(-charge * COULOMB_K / (r2 * r2.sqrt()))
}

/// Middle-to-corner weight ratio that cancels the z-curvature of the
/// transverse configuration at the origin, `-2 (1 + aspect^2)^(-3/2)`.
pub fn charge_ratio(aspect: f64) -> Result<f64> {
    if !(aspect > 0.0 && aspect.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "aspect ratio must be positive, got {aspect}"
        )));
    }
    Ok(-2.0 * (1.0 + aspect * aspect).powf(-1.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Configuration {
    Transverse,
    Diagonal,
}

/// Six-electrode point-charge layout centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElectrodeLayout {
    /// Corner spacing along the RF axis x, m.
    pub spacing_a: f64,
    /// Corner spacing along y, m.
    pub spacing_b: f64,
    pub corner_weight: f64,
    pub middle_weight: f64,
    pub configuration: Configuration,
}

impl ElectrodeLayout {
    pub fn transverse(spacing_a: f64, spacing_b: f64, corner_weight: f64, middle_weight: f64) -> Result<Self> {
        Self::checked(Self {
            spacing_a,
            spacing_b,
            corner_weight,
            middle_weight,
            configuration: Configuration::Transverse,
        })
    }

    /// Transverse layout with the middle weight set by [`charge_ratio`].
    pub fn transverse_balanced(spacing_a: f64, spacing_b: f64, corner_weight: f64) -> Result<Self> {
        let ratio = charge_ratio(spacing_a / spacing_b)?;
        Self::transverse(spacing_a, spacing_b, corner_weight, ratio * corner_weight)
    }

    pub fn diagonal(spacing_a: f64, spacing_b: f64, corner_weight: f64) -> Result<Self> {
        Self::checked(Self {
            spacing_a,
            spacing_b,
            corner_weight,
            middle_weight: 0.0,
            configuration: Configuration::Diagonal,
        })
    }

    fn checked(layout: Self) -> Result<Self> {
        if !(layout.spacing_a > 0.0 && layout.spacing_b > 0.0) {
            return Err(Error::InvalidInput(
                "electrode spacings a and b must be positive".into(),
            ));
        }
        if !(layout.corner_weight.is_finite() && layout.middle_weight.is_finite()) {
            return Err(Error::InvalidInput("electrode weights must be finite".into()));
        }
        Ok(layout)
    }

    pub fn aspect(&self) -> f64 {
        self.spacing_a / self.spacing_b
    }

    pub fn charges(&self) -> Vec<PointCharge> {
        let (ha, hb) = (0.5 * self.spacing_a, 0.5 * self.spacing_b);
        let q = self.corner_weight;
        match self.configuration {
            Configuration::Transverse => vec![
                PointCharge::new(Vector3::new(ha, hb, 0.0), q),
                PointCharge::new(Vector3::new(-ha, hb, 0.0), q),
                PointCharge::new(Vector3::new(-ha, -hb, 0.0), q),
                PointCharge::new(Vector3::new(ha, -hb, 0.0), q),
                PointCharge::new(Vector3::new(0.0, hb, 0.0), self.middle_weight),
                PointCharge::new(Vector3::new(0.0, -hb, 0.0), self.middle_weight),
            ],
            Configuration::Diagonal => vec![
                PointCharge::new(Vector3::new(ha, hb, 0.0), q),
                PointCharge::new(Vector3::new(-ha, hb, 0.0), -q),
                PointCharge::new(Vector3::new(-ha, -hb, 0.0), q),
                PointCharge::new(Vector3::new(ha, -hb, 0.0), -q),
            ],
        }
    }

    pub fn potential_at(&self, point: &Vector3<f64>) -> Result<f64> {
        potential_at(&self.charges(), point)
    }

    pub fn field_at(&self, point: &Vector3<f64>) -> Result<Vector3<f64>> {
        field_at(&self.charges(), point)
    }

    pub fn hessian_at(&self, point: &Vector3<f64>) -> Result<Matrix3<f64>> {
        hessian_at(&self.charges(), point)
    }
}

/// Relative zz-entry above which a layout is not treated as an in-plane
/// quadrupole.
pub const PLANAR_TOLERANCE: f64 = 1e-8;

/// In-plane energy curvature of the layout at the origin for an ion of
/// charge `ion_charge`.
pub fn quadform_from_layout(layout: &ElectrodeLayout, ion_charge: f64) -> Result<QuadForm2D> {
    let h = layout.hessian_at(&Vector3::zeros())?;
    let dominant = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if h[(2, 2)].abs() > PLANAR_TOLERANCE * dominant {
        return Err(Error::Unphysical(format!(
            "layout has zz curvature {:e} V/m^2 (dominant {:e}); not a 2D quadrupole",
            h[(2, 2)],
            dominant
        )));
    }
    Ok(QuadForm2D::new(h[(0, 0)], 0.5 * (h[(0, 1)] + h[(1, 0)]), h[(1, 1)]).scale(ion_charge))
}

/// Transverse-quadrupole strength `|H_xx - H_yy| / 2` at the origin, per
/// unit Coulomb constant, for gap `b = 1 m` and the larger electrode
/// magnitude equal to `v_max`.
///
/// Above [`equal_weight_aspect`] the corner electrodes carry the larger
/// magnitude and are set to `v_max`; below it the middle electrodes are.
pub fn transverse_strength(aspect: f64, v_max: f64) -> Result<f64> {
    check_strength_args(aspect, v_max)?;
    let ratio = charge_ratio(aspect)?;
    let corner = if ratio.abs() <= 1.0 { v_max } else { v_max / ratio.abs() };
    let layout = ElectrodeLayout::transverse(aspect, 1.0, corner, ratio * corner)?;
    let h = layout.hessian_at(&Vector3::zeros())?;
    Ok(0.5 * (h[(0, 0)] - h[(1, 1)]).abs() / COULOMB_K)
}

/// Diagonal-quadrupole strength `|H_xy|` at the origin, per unit Coulomb
/// constant, for gap `b = 1 m` and corner magnitudes `v_max`.
pub fn diagonal_strength(aspect: f64, v_max: f64) -> Result<f64> {
    check_strength_args(aspect, v_max)?;
    let layout = ElectrodeLayout::diagonal(aspect, 1.0, v_max)?;
    let h = layout.hessian_at(&Vector3::zeros())?;
    Ok(h[(0, 1)].abs() / COULOMB_K)
}

fn check_strength_args(aspect: f64, v_max: f64) -> Result<()> {
    if !(aspect > 0.0 && aspect.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "aspect ratio must be positive, got {aspect}"
        )));
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(Error::InvalidInput(format!("v_max must be positive, got {v_max}")));
    }
    Ok(())
}

/// One row of the strength-versus-aspect design table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignPoint {
    pub aspect: f64,
    pub charge_ratio: f64,
    pub transverse_strength_norm: f64,
    pub diagonal_strength_norm: f64,
}

/// Strengths normalized to the transverse strength at unit aspect ratio.
pub fn design_point(aspect: f64) -> Result<DesignPoint> {
    let norm = transverse_strength(1.0, 1.0)?;
    Ok(DesignPoint {
        aspect,
        charge_ratio: charge_ratio(aspect)?,
        transverse_strength_norm: transverse_strength(aspect, 1.0)? / norm,
        diagonal_strength_norm: diagonal_strength(aspect, 1.0)? / norm,
    })
}

/// `points` aspect ratios spaced linearly on `[min, max]`.
pub fn design_table(min: f64, max: f64, points: usize) -> Result<Vec<DesignPoint>> {
    if points < 2 || !(min > 0.0 && max > min) {
        return Err(Error::InvalidInput(
            "design grid needs 0 < min < max and >= 2 points".into(),
        ));
    }
    (0..points)
        .map(|i| design_point(min + (max - min) * i as f64 / (points - 1) as f64))
        .collect()
}

/// Aspect ratio maximizing the transverse strength at fixed `v_max`, by
/// golden-section search on `[0.2, 5]` to `1e-4`. Returns
/// `(aspect, normalized strength)`.
pub fn optimal_transverse_aspect() -> Result<(f64, f64)> {
    let norm = transverse_strength(1.0, 1.0)?;
    let (x, s) = golden_section_max(
        |a| transverse_strength(a, 1.0).unwrap_or(f64::NEG_INFINITY),
        0.2,
        5.0,
        1e-4,
    );
    Ok((x, s / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn coulomb_potential_on_axis() {
        let c = [PointCharge::new(Vector3::zeros(), 1e-15)];
        let d = 3e-6;
        let phi = potential_at(&c, &Vector3::new(0.0, 0.0, d)).unwrap();
        assert_relative_eq!(phi, COULOMB_K * 1e-15 / d, max_relative = 1e-15);
    }

    #[test]
    fn singular_point_rejected() {
        let c = [PointCharge::new(Vector3::new(1.0, 0.0, 0.0), 1.0)];
        let p = Vector3::new(1.0 + 1e-13, 0.0, 0.0);
        assert!(matches!(potential_at(&c, &p), Err(Error::SingularPoint { .. })));
        assert!(field_at(&c, &p).is_err());
        assert!(hessian_at(&c, &p).is_err());
    }

    #[test]
    fn z_curvature_examples() {
        assert_relative_eq!(z_curvature_single(1.0, 1.0, 0.0).unwrap(), -COULOMB_K);
        assert!(z_curvature_single(1.0, 0.0, 0.0).is_err());

        let (a, b, qc, qm) = (0.7, 1.3, 2.0, -0.4);
        let corners: f64 = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .iter()
            .map(|(sx, sy)| z_curvature_single(qc, sx * a / 2.0, sy * b / 2.0).unwrap())
            .sum();
        let closed = -4.0 * 8.0 * qc * COULOMB_K / (a * a + b * b).powf(1.5);
        assert_relative_eq!(corners, closed, max_relative = 1e-13);

        let middle: f64 = [1.0, -1.0]
            .iter()
            .map(|s| z_curvature_single(qm, 0.0, s * b / 2.0).unwrap())
            .sum();
        assert_relative_eq!(middle, -2.0 * 8.0 * qm * COULOMB_K / b.powi(3), max_relative = 1e-13);
    }

    #[test]
    fn charge_ratio_examples() {
        assert_relative_eq!(charge_ratio(1.0).unwrap(), -FRAC_1_SQRT_2, max_relative = 1e-15);
        assert!((charge_ratio(equal_weight_aspect()).unwrap() + 1.0).abs() < 1e-14);
        assert!((equal_weight_aspect() - 0.766).abs() < 1e-3);
        assert!((charge_ratio(1e-9).unwrap() + 2.0).abs() < 1e-12);
        assert!(charge_ratio(0.0).is_err());
    }

    #[test]
    fn balanced_transverse_has_no_zz_curvature() {
        for aspect in [0.3, 0.766, 1.0, 2.5] {
            let layout = ElectrodeLayout::transverse_balanced(aspect * 1e-3, 1e-3, 1e-12).unwrap();
            let h = layout.hessian_at(&Vector3::zeros()).unwrap();
            assert!(h[(2, 2)].abs() <= 1e-10 * h[(0, 0)].abs(), "aspect {aspect}: {h}");
        }
    }

    #[test]
    fn strengths_equal_at_unit_aspect() {
        let t = transverse_strength(1.0, 1.0).unwrap();
        let d = diagonal_strength(1.0, 1.0).unwrap();
        assert_relative_eq!(t, d, max_relative = 1e-9);
        // Hand evaluation: 96 / 2^(5/2) = 24 / sqrt(2).
        assert_relative_eq!(t, 24.0 * FRAC_1_SQRT_2, max_relative = 1e-12);
    }

    #[test]
    fn transverse_strength_closed_form() {
        // Corners at v_max above the equal-weight aspect: 96 a^2 / (1 + a^2)^(5/2);
        // middles at v_max below it: 48 a^2 / (1 + a^2).
        for a in [0.3, 0.6, 0.9, 1.4, 3.0] {
            let s = transverse_strength(a, 1.0).unwrap();
            let expected = if a >= equal_weight_aspect() {
                96.0 * a * a / (1.0 + a * a).powf(2.5)
            } else {
                48.0 * a * a / (1.0 + a * a)
            };
            assert_relative_eq!(s, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn optimal_aspect_location() {
        let (a, s) = optimal_transverse_aspect().unwrap();
        // d/da [a^2 (1 + a^2)^(-5/2)] = 0  =>  a^2 = 2/3.
        assert!((a - (2f64 / 3.0).sqrt()).abs() < 2e-4, "optimum at {a}");
        // The unit-aspect value sits within ~5% of the maximum.
        assert!(s > 1.0 && s < 1.06, "normalized maximum {s}");
    }

    #[test]
    fn quadform_extraction() {
        let e = crate::constants::ELEMENTARY_CHARGE;
        let t = ElectrodeLayout::transverse_balanced(1e-3, 1e-3, 1e-13).unwrap();
        let q = quadform_from_layout(&t, e).unwrap();
        assert!(q.qxy.abs() <= 1e-12 * q.qxx.abs());
        assert!(q.qxx > 0.0 && q.qyy < 0.0);

        let d = ElectrodeLayout::diagonal(1e-3, 1e-3, 1e-13).unwrap();
        let q = quadform_from_layout(&d, e).unwrap();
        assert!(q.qxx.abs() <= 1e-10 * q.qxy.abs() && q.qyy.abs() <= 1e-10 * q.qxy.abs());

        let unbalanced = ElectrodeLayout::transverse(1e-3, 1e-3, 1e-13, 0.0).unwrap();
        assert!(quadform_from_layout(&unbalanced, e).is_err());
    }

    #[test]
    fn design_grid() {
        let rows = design_table(0.2, 5.0, 25).unwrap();
        assert_eq!(rows.len(), 25);
        assert!(rows
            .iter()
            .all(|r| r.transverse_strength_norm > 0.0 && r.diagonal_strength_norm > 0.0));
        let at_one = design_point(1.0).unwrap();
        assert_relative_eq!(at_one.transverse_strength_norm, 1.0, max_relative = 1e-12);
        assert_relative_eq!(at_one.diagonal_strength_norm, 1.0, max_relative = 1e-9);
        assert!(design_table(1.0, 0.5, 3).is_err());
    }
}
