//! External potentials acting on each ion.
//!
//! A field returns the potential energy (J) and force (N) on one ion at a
//! point and time. Fields with an explicit RF drive also expose the
//! cycle-averaged (secular) potential used for equilibria, normal modes and
//! energy bookkeeping; for all other fields the secular potential is the
//! potential itself.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::constants::COULOMB_K;
use crate::model::delta_q;
use crate::pointcharge::PointCharge;
use crate::protocols::schedule::TurnProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    StaticQuadratic,
    RotatingQuadratic,
    FullRf,
    PointchargePlusUniform,
}

pub trait PotentialField: Send + Sync {
    fn kind(&self) -> FieldKind;

    /// Potential energy of one ion, J.
    fn potential(&self, p: &Vector3<f64>, t: f64) -> f64;

    /// Force on one ion, N.
    fn force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64>;

    /// Cycle-averaged potential energy, J.
    fn secular_potential(&self, p: &Vector3<f64>, t: f64) -> f64 {
        self.potential(p, t)
    }

    fn secular_force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        self.force(p, t)
    }

    /// Hessian of the secular potential, J/m^2.
    fn secular_hessian(&self, p: &Vector3<f64>, t: f64) -> Matrix3<f64>;

    /// Period of the explicit RF drive, if any.
    fn rf_period(&self) -> Option<f64> {
        None
    }
}

/// Time dependence of a quadratic DC potential centred on the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum DcQuadratic {
    Static(Matrix3<f64>),
    /// `diag(kx, ky, kz)` plus the in-plane form that rotates a trap with
    /// `ky - kx = delta_kappa` by the angle of `profile`; the angle is held
    /// at its end value after the turn. With `delta_kappa = kappa_y -
    /// kappa_x` this is the trap itself rotated about z.
    Rotating {
        kappa_x: f64,
        kappa_y: f64,
        kappa_z: f64,
        delta_kappa: f64,
        profile: TurnProfile,
    },
}

impl DcQuadratic {
    pub fn hessian(&self, t: f64) -> Matrix3<f64> {
        match self {
            DcQuadratic::Static(h) => *h,
            DcQuadratic::Rotating {
                kappa_x,
                kappa_y,
                kappa_z,
                delta_kappa,
                profile,
            } => {
                let theta = profile.theta_clamped(t);
                let dq = delta_q(theta, 0.0, *delta_kappa);
                Matrix3::new(
                    kappa_x + dq.qxx,
                    dq.qxy,
                    0.0,
                    dq.qxy,
                    kappa_y + dq.qyy,
                    0.0,
                    0.0,
                    0.0,
                    *kappa_z,
                )
            }
        }
    }

    fn is_static(&self) -> bool {
        matches!(self, DcQuadratic::Static(_))
    }
}

/// `U = 1/2 r^T H(t) r`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticField {
    pub dc: DcQuadratic,
}

impl QuadraticField {
    pub fn new(dc: DcQuadratic) -> Self {
        Self { dc }
    }

    /// Static harmonic trap with principal axes along x, y, z.
    pub fn harmonic(kappa_x: f64, kappa_y: f64, kappa_z: f64) -> Self {
        Self::new(DcQuadratic::Static(Matrix3::from_diagonal(&Vector3::new(
            kappa_x, kappa_y, kappa_z,
        ))))
    }
}

impl PotentialField for QuadraticField {
    fn kind(&self) -> FieldKind {
        if self.dc.is_static() {
            FieldKind::StaticQuadratic
        } else {
            FieldKind::RotatingQuadratic
        }
    }

    fn potential(&self, p: &Vector3<f64>, t: f64) -> f64 {
        0.5 * p.dot(&(self.dc.hessian(t) * p))
    }

    fn force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        -(self.dc.hessian(t) * p)
    }

    fn secular_hessian(&self, _p: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        self.dc.hessian(t)
    }
}

/// Quadratic DC potential plus the explicit RF quadrupole
/// `U_rf = (qc / 2) (y^2 - z^2) cos(Omega t)` with its null line along x.
#[derive(Debug, Clone, PartialEq)]
pub struct FullRfField {
    pub dc: DcQuadratic,
    /// Ion charge times drive curvature, J/m^2.
    pub rf_energy_curvature: f64,
    /// Drive angular frequency, rad/s.
    pub omega: f64,
    /// Pseudopotential curvature `(qc)^2 / (2 m Omega^2)`, J/m^2.
    pub kappa_rf: f64,
}

impl FullRfField {
    pub fn new(dc: DcQuadratic, rf_energy_curvature: f64, omega: f64, mass: f64) -> Self {
        let kappa_rf = rf_energy_curvature * rf_energy_curvature / (2.0 * mass * omega * omega);
        Self {
            dc,
            rf_energy_curvature,
            omega,
            kappa_rf,
        }
    }
}

impl PotentialField for FullRfField {
    fn kind(&self) -> FieldKind {
        FieldKind::FullRf
    }

    fn potential(&self, p: &Vector3<f64>, t: f64) -> f64 {
        let rf = 0.5 * self.rf_energy_curvature * (p.y * p.y - p.z * p.z) * (self.omega * t).cos();
        0.5 * p.dot(&(self.dc.hessian(t) * p)) + rf
    }

    fn force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        let a = self.rf_energy_curvature * (self.omega * t).cos();
        -(self.dc.hessian(t) * p) - Vector3::new(0.0, a * p.y, -a * p.z)
    }

    fn secular_potential(&self, p: &Vector3<f64>, t: f64) -> f64 {
        0.5 * p.dot(&(self.dc.hessian(t) * p)) + 0.5 * self.kappa_rf * (p.y * p.y + p.z * p.z)
    }

    fn secular_force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        -(self.secular_hessian(p, t) * p)
    }

    fn secular_hessian(&self, _p: &Vector3<f64>, t: f64) -> Matrix3<f64> {
        self.dc.hessian(t) + Matrix3::from_diagonal(&Vector3::new(0.0, self.kappa_rf, self.kappa_rf))
    }

    fn rf_period(&self) -> Option<f64> {
        Some(2.0 * PI / self.omega)
    }
}

/// Piecewise-linear uniform electric field, V/m. Held constant outside the
/// knot range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringSchedule {
    pub times: Vec<f64>,
    pub fields: Vec<Vector3<f64>>,
}

impl SteeringSchedule {
    pub fn constant(field: Vector3<f64>) -> Self {
        Self {
            times: vec![0.0],
            fields: vec![field],
        }
    }

    pub fn at(&self, t: f64) -> Vector3<f64> {
        let n = self.times.len();
        if n == 0 {
            return Vector3::zeros();
        }
        if t <= self.times[0] {
            return self.fields[0];
        }
        if t >= self.times[n - 1] {
            return self.fields[n - 1];
        }
        let k = self.times.partition_point(|&tk| tk <= t) - 1;
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.fields[k] * (1.0 - s) + self.fields[k + 1] * s
    }
}

/// Electrode point charges, an RF pseudopotential about the x-axis, an
/// optional traceless static quadrupole and a uniform steering field.
#[derive(Debug, Clone, PartialEq)]
pub struct PointChargeField {
    pub charges: Vec<PointCharge>,
    pub ion_charge: f64,
    /// Pseudopotential curvature along y and z, J/m^2.
    pub kappa_rf: f64,
    /// Traceless quadratic DC term, J/m^2.
    pub quadrupole: Matrix3<f64>,
    pub steering: SteeringSchedule,
}

impl PointChargeField {
    pub fn uniform(field: Vector3<f64>, ion_charge: f64) -> Self {
        Self {
            charges: Vec::new(),
            ion_charge,
            kappa_rf: 0.0,
            quadrupole: Matrix3::zeros(),
            steering: SteeringSchedule::constant(field),
        }
    }

    pub fn with_steering(&self, steering: SteeringSchedule) -> Self {
        Self {
            steering,
            ..self.clone()
        }
    }

    fn electrode_potential(&self, p: &Vector3<f64>) -> f64 {
        self.charges
            .iter()
            .map(|c| COULOMB_K * c.weight / (p - c.position).norm())
            .sum::<f64>()
            * self.ion_charge
    }

    fn electrode_force(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let mut f = Vector3::zeros();
        for c in &self.charges {
            let d = p - c.position;
            let r = d.norm();
            f += d * (COULOMB_K * c.weight / (r * r * r));
        }
        f * self.ion_charge
    }

    fn static_hessian(&self, p: &Vector3<f64>) -> Matrix3<f64> {
        let mut h = Matrix3::zeros();
        for c in &self.charges {
            let d = p - c.position;
            let r2 = d.norm_squared();
            let s = COULOMB_K * c.weight / (r2 * r2 * r2.sqrt());
            h += (d * d.transpose() * 3.0 - Matrix3::identity() * r2) * s;
        }
        h * self.ion_charge + self.quadrupole + Matrix3::from_diagonal(&Vector3::new(0.0, self.kappa_rf, self.kappa_rf))
    }
}

impl PotentialField for PointChargeField {
    fn kind(&self) -> FieldKind {
        FieldKind::PointchargePlusUniform
    }

    fn potential(&self, p: &Vector3<f64>, t: f64) -> f64 {
        self.electrode_potential(p)
            + 0.5 * p.dot(&(self.quadrupole * p))
            + 0.5 * self.kappa_rf * (p.y * p.y + p.z * p.z)
            - self.ion_charge * self.steering.at(t).dot(p)
    }

    fn force(&self, p: &Vector3<f64>, t: f64) -> Vector3<f64> {
        self.electrode_force(p) - self.quadrupole * p - Vector3::new(0.0, self.kappa_rf * p.y, self.kappa_rf * p.z)
            + self.steering.at(t) * self.ion_charge
    }

    fn secular_hessian(&self, p: &Vector3<f64>, _t: f64) -> Matrix3<f64> {
        self.static_hessian(p)
    }
}
