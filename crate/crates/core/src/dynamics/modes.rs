//! Small-oscillation analysis about a static configuration.

use nalgebra::{DMatrix, SymmetricEigen, Vector3};

use super::equilibrium::{configuration_hessian, equilibrium_with, EquilibriumOptions};
use super::fields::{PotentialField, QuadraticField};
use crate::constants::{ca40_mass, khz, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::numeric::bisect;

#[derive(Debug, Clone)]
pub struct NormalModes {
    /// Eigenvalues of the mass-weighted Hessian, ascending, rad^2/s^2.
    pub eigenvalues: Vec<f64>,
    /// `sqrt(|lambda|)` carrying the sign of `lambda`, rad/s.
    pub frequencies: Vec<f64>,
    /// Columns are unit mode vectors in the mass-weighted coordinates.
    pub vectors: DMatrix<f64>,
    pub unstable: bool,
}

impl NormalModes {
    pub fn from_hessian(hessian: DMatrix<f64>, mass: f64) -> Result<Self> {
        let n = hessian.nrows();
        if n == 0 || hessian.ncols() != n {
            return Err(Error::InvalidInput("Hessian must be square and non-empty".into()));
        }
        if !(mass > 0.0) {
            return Err(Error::InvalidInput("mass must be positive".into()));
        }
        let scale = hessian.abs().max();
        if !scale.is_finite() {
            return Err(Error::InvalidInput("Hessian has non-finite entries".into()));
        }
        let asym = (&hessian - hessian.transpose()).abs().max();
        if asym > 1e-9 * scale {
            return Err(Error::InvalidInput(format!(
                "Hessian is not symmetric (asymmetry {asym:e} vs scale {scale:e})"
            )));
        }
        let sym = (&hessian + hessian.transpose()) * (0.5 / mass);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let frequencies = eigenvalues.iter().map(|&l| l.signum() * l.abs().sqrt()).collect();
        let tol = 1e-9 * eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let unstable = eigenvalues[0] < -tol;
        Ok(Self {
            eigenvalues,
            frequencies,
            vectors,
            unstable,
        })
    }

    pub fn highest_frequency(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())).sqrt()
    }
}

pub fn normal_modes(
    field: &dyn PotentialField,
    t: f64,
    positions: &[Vector3<f64>],
    mass: f64,
    charge: f64,
) -> Result<NormalModes> {
    NormalModes::from_hessian(configuration_hessian(field, t, positions, charge), mass)
}

/// Eigenvalues of the Hessian block restricted to one Cartesian axis,
/// ascending, mass weighted.
pub fn axis_block_eigenvalues(hessian: &DMatrix<f64>, axis: usize, mass: f64) -> Vec<f64> {
    let n = hessian.nrows() / 3;
    let block = DMatrix::from_fn(n, n, |i, j| hessian[(3 * i + axis, 3 * j + axis)] / mass);
    let mut ev: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lowest transverse eigenvalue of an `n`-ion linear string along x with
/// transverse-to-axial frequency ratio `ratio`, in units of the axial
/// eigenvalue.
pub fn lowest_transverse_eigenvalue(n_ions: usize, ratio: f64) -> Result<f64> {
    let m = ca40_mass();
    let q = ELEMENTARY_CHARGE;
    let w = khz(100.0);
    let k = m * w * w;
    let stiff = 2.0 * ratio.max(1.0) + 1.0;
    let field = QuadraticField::harmonic(k, k * ratio * ratio, k * stiff * stiff);
    let opts = EquilibriumOptions {
        axis: Some(Vector3::x()),
        require_minimum: false,
        ..Default::default()
    };
    let positions = equilibrium_with(&field, 0.0, n_ions, q, &opts)?;
    let h = configuration_hessian(&field, 0.0, &positions, q);
    Ok(axis_block_eigenvalues(&h, 1, m)[0] / (w * w))
}

/// Smallest transverse-to-axial frequency ratio for which the linear string
/// of `n_ions` is stable against the zig-zag buckling.
pub fn zigzag_critical_ratio(n_ions: usize) -> Result<f64> {
    if !(2..=20).contains(&n_ions) {
        return Err(Error::InvalidInput(format!("n_ions must be in 2..=20, got {n_ions}")));
    }
    let mut err = None;
    let mut f = |r: f64| match lowest_transverse_eigenvalue(n_ions, r) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let hi = 2.0 * n_ions as f64;
    let root = bisect(&mut f, 0.5, hi, 1e-5);
    if let Some(e) = err {
        return Err(e);
    }
    root
}
