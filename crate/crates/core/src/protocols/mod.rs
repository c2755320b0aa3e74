//! Turn protocols built on the dynamics layer.

pub mod onepoint;
pub mod ramp;
pub mod schedule;
pub mod steering;
pub mod swap;
pub mod sweep;
pub mod threepoint;

pub use onepoint::{full_rf_turn_field, in_plane_form, one_point_turn_field};
pub use ramp::{key_position_ramp, rc_filter, KeyPosition, RampTable};
pub use schedule::{theta_schedule, Direction, ProfileKind, TurnProfile};
pub use steering::{electrodes_to_steering, steering_to_electrodes, SteeringBasis};
pub use swap::{max_swap_step, run_swap, run_swap_traced, run_swap_with, SwapMode, SwapOptions, SwapResult};
pub use sweep::{envelope, envelope_points, heating_sweep, local_minima, log_grid, SweepParams, SweepRow};
pub use threepoint::{
    assess_determinism, default_path, direct_path, surrogate_background, three_point_turn, three_point_turn_with,
    waypoint_fields, DeterminismReport, SurrogateParams, ThreePointOptions, ThreePointResult,
};
