//! Physical constants (CODATA 2018) and unit helpers.

use std::f64::consts::PI;

/// Coulomb constant 1/(4 pi eps0), V m / C.
pub const COULOMB_K: f64 = 8.987_551_792_3e9;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Mass of 40Ca+ in atomic mass units (neutral atom mass minus one electron).
pub const CA40_MASS_AMU: f64 = 39.962_590_86 - 5.485_799_09e-4;

/// Bundle of the constants used by the model, for callers that prefer to
/// carry them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants {
    pub coulomb_constant: f64,
    pub elementary_charge: f64,
    pub atomic_mass_unit: f64,
    pub reduced_planck: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            coulomb_constant: COULOMB_K,
            elementary_charge: ELEMENTARY_CHARGE,
            atomic_mass_unit: ATOMIC_MASS_UNIT,
            reduced_planck: HBAR,
        }
    }
}

/// Mass of a 40Ca+ ion in kg.
pub fn ca40_mass() -> f64 {
    CA40_MASS_AMU * ATOMIC_MASS_UNIT
}

/// Angular frequency (rad/s) from a frequency in kHz.
pub fn khz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

/// Angular frequency (rad/s) from a frequency in MHz.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

pub fn joules_to_mev(e: f64) -> f64 {
    e / ELEMENTARY_CHARGE * 1e3
}

pub fn mev_to_joules(e: f64) -> f64 {
    e * 1e-3 * ELEMENTARY_CHARGE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_positive() {
        let c = PhysConstants::default();
        assert!(c.coulomb_constant > 0.0);
        assert!(c.elementary_charge > 0.0);
        assert!(c.atomic_mass_unit > 0.0);
        assert!(c.reduced_planck > 0.0);
    }

    #[test]
    fn coulomb_constant_matches_vacuum_permittivity() {
        let eps0 = 8.854_187_812_8e-12;
        let k = 1.0 / (4.0 * PI * eps0);
        assert!((k - COULOMB_K).abs() / k < 1e-9);
    }

    #[test]
    fn mev_round_trip() {
        let e = 0.4;
        assert!((joules_to_mev(mev_to_joules(e)) - e).abs() < 1e-15);
    }
}
