//! Quadratic trap potentials, the rotating-quadrupole waveform and the
//! pseudopotential/RF-drive relations.
//!
//! All curvatures are *energy* curvatures in J/m^2 (charge times potential
//! curvature), so a curvature `k` along a principal axis corresponds to the
//! secular frequency `sqrt(k / m)`.
//!
//! The in-plane rotation of a trap `diag(kx, ky)` by an angle `theta` about
//! the z-axis is produced by adding the traceless form
//!
//! ```text
//! dQ(theta) = R(theta) diag(kx, ky) R(-theta) - diag(kx, ky)
//!           = Q_trans * (1 - cos 2theta)/2 - Q_diag * (sin 2theta)/2
//! ```
//!
//! with `Q_trans = dk diag(1, -1)`, `Q_diag = dk [[0, 1], [1, 0]]` and
//! `dk = ky - kx`. Both constructions are exposed so they can be checked
//! against each other.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::constants::{ca40_mass, khz, mhz, ELEMENTARY_CHARGE, HBAR};
use crate::error::{Error, Result};

/// Largest Mathieu q accepted for an explicit RF drive.
pub const MATHIEU_Q_LIMIT: f64 = 0.9;

/// RF drive and species parameters of a trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapParams {
    /// RF amplitude (0-peak), volts. Carried for provenance only.
    pub rf_amplitude: f64,
    /// RF drive angular frequency, rad/s.
    pub rf_frequency: f64,
    pub ion_mass: f64,
    pub ion_charge: f64,
    /// Longitudinal frequency defining the motional quantum, rad/s.
    pub reference_axial_frequency: f64,
}

impl TrapParams {
    pub fn new(
        rf_amplitude: f64,
        rf_frequency: f64,
        ion_mass: f64,
        ion_charge: f64,
        reference_axial_frequency: f64,
    ) -> Result<Self> {
        let p = Self {
            rf_amplitude,
            rf_frequency,
            ion_mass,
            ion_charge,
            reference_axial_frequency,
        };
        p.validate()?;
        Ok(p)
    }

    /// 40Ca+ in a 300 V, 2pi x 10.125 MHz drive with a 120 kHz longitudinal
    /// reference frequency.
    pub fn ca40_reference() -> Self {
        Self {
            rf_amplitude: 300.0,
            rf_frequency: mhz(10.125),
            ion_mass: ca40_mass(),
            ion_charge: ELEMENTARY_CHARGE,
            reference_axial_frequency: khz(120.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.rf_amplitude,
            self.rf_frequency,
            self.ion_mass,
            self.ion_charge,
            self.reference_axial_frequency,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("trap parameters must be finite".into()));
        }
        if self.ion_mass <= 0.0 || self.ion_charge <= 0.0 {
            return Err(Error::InvalidInput("ion mass and charge must be positive".into()));
        }
        if self.reference_axial_frequency <= 0.0 {
            return Err(Error::InvalidInput("reference axial frequency must be positive".into()));
        }
        if self.rf_frequency <= 10.0 * self.reference_axial_frequency {
            return Err(Error::InvalidInput(format!(
                "RF frequency {:.4e} rad/s must exceed ten times the axial frequency {:.4e} rad/s",
                self.rf_frequency, self.reference_axial_frequency
            )));
        }
        Ok(())
    }

    pub fn rf_period(&self) -> f64 {
        2.0 * PI / self.rf_frequency
    }
}

/// Principal curvatures of the effective potential, split into the static
/// (DC) part and the RF pseudopotential part.
///
/// The RF pseudopotential confines equally along y and z and not at all along
/// x; the DC part is Laplacian (`dc_x + dc_y + dc_z = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureTriple {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_z: f64,
    pub kappa_dc_x: f64,
    pub kappa_dc_y: f64,
    pub kappa_rf: f64,
}

impl CurvatureTriple {
    /// Builds the triple from its DC and RF parts.
    pub fn from_parts(kappa_dc_x: f64, kappa_dc_y: f64, kappa_rf: f64) -> Self {
        Self {
            kappa_x: kappa_dc_x,
            kappa_y: kappa_rf + kappa_dc_y,
            kappa_z: kappa_rf - (kappa_dc_x + kappa_dc_y),
            kappa_dc_x,
            kappa_dc_y,
            kappa_rf,
        }
    }

    pub fn kappa_dc_z(&self) -> f64 {
        -(self.kappa_dc_x + self.kappa_dc_y)
    }

    /// Secular frequencies (wx, wy, wz) in rad/s for an ion of mass `mass`.
    pub fn secular_frequencies(&self, mass: f64) -> [f64; 3] {
        [
            (self.kappa_x / mass).sqrt(),
            (self.kappa_y / mass).sqrt(),
            (self.kappa_z / mass).sqrt(),
        ]
    }

    /// Frequency of the RF pseudopotential alone, rad/s.
    pub fn rf_frequency(&self, mass: f64) -> f64 {
        (self.kappa_rf / mass).sqrt()
    }

    /// `ky - kx`, the strength of the quadrupole needed to swap x and y.
    pub fn delta_kappa(&self) -> f64 {
        self.kappa_y - self.kappa_x
    }
}

/// Solves the DC/RF decomposition from three secular frequencies.
///
/// `dc_x = m wx^2`, `rf + dc_y = m wy^2`, `rf - dc_x - dc_y = m wz^2`.
pub fn rf_curvature_from_secular(omega_x: f64, omega_y: f64, omega_z: f64, mass: f64) -> Result<CurvatureTriple> {
    for (name, w) in [("omega_x", omega_x), ("omega_y", omega_y), ("omega_z", omega_z)] {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {w}")));
        }
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    let kx = mass * omega_x * omega_x;
    let ky = mass * omega_y * omega_y;
    let kz = mass * omega_z * omega_z;
    let kappa_rf = 0.5 * (kx + ky + kz);
    if kappa_rf <= 0.0 {
        return Err(Error::Unphysical(format!(
            "RF pseudopotential curvature {kappa_rf:e} J/m^2 is not positive"
        )));
    }
    let dc_x = kx;
    let dc_y = ky - kappa_rf;
    Ok(CurvatureTriple {
        kappa_x: kx,
        kappa_y: ky,
        kappa_z: kz,
        kappa_dc_x: dc_x,
        kappa_dc_y: dc_y,
        kappa_rf,
    })
}

/// Symmetric 2x2 quadratic form `U = 1/2 (x, y) Q (x, y)^T`, J/m^2.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuadForm2D {
    pub qxx: f64,
    pub qxy: f64,
    pub qyy: f64,
}

impl QuadForm2D {
    pub const ZERO: Self = Self {
        qxx: 0.0,
        qxy: 0.0,
        qyy: 0.0,
    };

    pub fn new(qxx: f64, qxy: f64, qyy: f64) -> Self {
        Self { qxx, qxy, qyy }
    }

    pub fn diagonal(kx: f64, ky: f64) -> Self {
        Self::new(kx, 0.0, ky)
    }

    /// Symmetrizes `m` and stores its entries.
    pub fn from_matrix(m: &Matrix2<f64>) -> Self {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.qxx, self.qxy, self.qxy, self.qyy)
    }

    pub fn trace(&self) -> f64 {
        self.qxx + self.qyy
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.qxx * s, self.qxy * s, self.qyy * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.qxx + other.qxx, self.qxy + other.qxy, self.qyy + other.qyy)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `R(theta) Q R(-theta)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = rotation_matrix(theta);
        Self::from_matrix(&(r * self.matrix() * r.transpose()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.qxx + self.qyy);
        let half_diff = 0.5 * (self.qxx - self.qyy);
        let radius = half_diff.hypot(self.qxy);
        [mean - radius, mean + radius]
    }

    /// Angle in `[0, pi)` of the eigenvector belonging to the smaller
    /// eigenvalue (the weak axis, along which an ion string aligns).
    pub fn weak_axis_angle(&self) -> f64 {
        let strong = 0.5 * (2.0 * self.qxy).atan2(self.qxx - self.qyy);
        (strong + FRAC_PI_2).rem_euclid(PI)
    }

    pub fn weak_axis(&self) -> Vector2<f64> {
        let a = self.weak_axis_angle();
        Vector2::new(a.cos(), a.sin())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.qxx.abs().max(self.qxy.abs()).max(self.qyy.abs())
    }
}

/// Relative amplitudes of the transverse and diagonal quadrupoles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitudes {
    pub a_trans: f64,
    pub a_diag: f64,
}

/// `dk * diag(1, -1)`.
pub fn q_trans(delta_kappa: f64) -> QuadForm2D {
    QuadForm2D::new(delta_kappa, 0.0, -delta_kappa)
}

/// `dk * [[0, 1], [1, 0]]`, the transverse quadrupole rotated by pi/4.
pub fn q_diag(delta_kappa: f64) -> QuadForm2D {
    QuadForm2D::new(0.0, delta_kappa, 0.0)
}

/// Anticlockwise rotation by `theta`.
pub fn rotation_matrix(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn turn_amplitudes(theta: f64) -> Amplitudes {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Amplitudes {
        a_trans: 0.5 * (1.0 - c2),
        a_diag: 0.5 * s2,
    }
}

/// The additive form that rotates `diag(kx, ky)` by `theta`, built from the
/// waveform amplitudes.
pub fn delta_q(theta: f64, kappa_x: f64, kappa_y: f64) -> QuadForm2D {
    let dk = kappa_y - kappa_x;
    let a = turn_amplitudes(theta);
    q_trans(dk).scale(a.a_trans).sub(&q_diag(dk).scale(a.a_diag))
}

/// The same form computed directly as `R diag R^T - diag`.
pub fn delta_q_direct(theta: f64, kappa_x: f64, kappa_y: f64) -> QuadForm2D {
    let base = QuadForm2D::diagonal(kappa_x, kappa_y);
    base.rotated(theta).sub(&base)
}

/// Potential energy barrier `1/2 k_rf r^2` seen by an ion displaced by
/// `offset` from the RF null, J.
pub fn rf_barrier(kappa_rf: f64, offset: f64) -> Result<f64> {
    if !(offset >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "offset must be non-negative, got {offset}"
        )));
    }
    Ok(0.5 * kappa_rf * offset * offset)
}

/// Explicit RF drive reproducing a given pseudopotential curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RfDrive {
    /// Curvature `c` of `U_rf = c/2 (y^2 - z^2) cos(Omega t)`, V/m^2.
    pub curvature: f64,
    pub mathieu_q: f64,
    /// Drive angular frequency, rad/s.
    pub omega: f64,
}

/// Drive curvature whose cycle-averaged pseudopotential has curvature
/// `kappa_rf` along y and z.
pub fn rf_drive_from_pseudocurvature(kappa_rf: f64, omega: f64, mass: f64, charge: f64) -> Result<RfDrive> {
    if !(kappa_rf >= 0.0) || !(omega > 0.0) || !(mass > 0.0) || !(charge > 0.0) {
        return Err(Error::InvalidInput(
            "rf drive needs kappa_rf >= 0 and positive omega, mass, charge".into(),
        ));
    }
    let curvature = (2.0 * mass * omega * omega * kappa_rf).sqrt() / charge;
    let mathieu_q = 2.0 * charge * curvature / (mass * omega * omega);
    if mathieu_q > MATHIEU_Q_LIMIT {
        return Err(Error::MathieuUnstable {
            q: mathieu_q,
            limit: MATHIEU_Q_LIMIT,
        });
    }
    Ok(RfDrive {
        curvature,
        mathieu_q,
        omega,
    })
}

/// Energy in units of the motional quantum `hbar * omega_l`.
pub fn energy_in_quanta(energy: f64, omega_l: f64) -> Result<f64> {
    if !(omega_l > 0.0) {
        return Err(Error::InvalidInput(format!("omega_L must be positive, got {omega_l}")));
    }
    Ok(energy / (HBAR * omega_l))
}
