use crate::constants::COULOMB_K;
use crate::error::{Error, Result};
use crate::model::TrapParams;

/// Equilibrium distance of two ions in a harmonic well of frequency
/// `omega_l`: `d = (2 K q^2 / (m omega_l^2))^(1/3)`, m.
pub fn separation_vs_frequency(omega_l: f64, trap: &TrapParams) -> Result<f64> {
    if !(omega_l > 0.0 && omega_l.is_finite()) {
        return Err(Error::InvalidInput(format!("omega_L must be positive, got {omega_l}")));
    }
    let q = trap.ion_charge;
    Ok((2.0 * COULOMB_K * q * q / (trap.ion_mass * omega_l * omega_l)).cbrt())
}
