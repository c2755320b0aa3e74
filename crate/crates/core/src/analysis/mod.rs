//! Loss statistics, separation scaling and tabular export.

pub mod loss;
pub mod separation;
pub mod table;

pub use loss::{loss_energy_bound, thermal_escape_probability, LossBound, LossExperiment, TrialUnit};
pub use separation::separation_vs_frequency;
pub use table::{emit_table, format_float, sweep_table, trajectory_table, Format, Table, Value};
