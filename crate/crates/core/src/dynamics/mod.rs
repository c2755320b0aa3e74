//! Classical dynamics of a string of ions: Coulomb interaction, static
//! configurations, normal modes and time integration.

pub mod coulomb;
pub mod energy;
pub mod equilibrium;
pub mod fields;
pub mod integrate;
pub mod modes;
pub mod state;

pub use energy::{secular_energy, total_energy, window_energy};
pub use equilibrium::{equilibrium_positions, equilibrium_with, EquilibriumOptions};
pub use fields::{
    DcQuadratic, FieldKind, FullRfField, PointChargeField, PotentialField, QuadraticField, SteeringSchedule,
};
pub use integrate::{integrate, integrate_sampled, propagate, step_limit, Trajectory};
pub use modes::{normal_modes, zigzag_critical_ratio, NormalModes};
pub use state::IonSystemState;
