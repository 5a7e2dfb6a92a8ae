//! Terminal control area arrival capacity as a maximum occupancy count.
//!
//! The capacity of one runway's arrival airspace is the proportion-weighted
//! flight time through its arrival paths divided by the probability-weighted
//! minimal threshold spacing between consecutive arrivals.
//!
//! - [`scenario`]: data model, JSON document schema, validation
//! - [`kinematics`]: constant-deceleration motion on two-segment paths
//! - [`pairwise`]: minimal initial spacing for each leading/trailing combination
//! - [`capacity`]: D_temp, T̄_thr and λ
//! - [`sensitivity`]: speed and separation sweeps
//! - [`occupancy_sim`]: saturated-stream simulator used as an oracle for λ
//! - [`trajectory_stats`]: gate statistics from track points
//! - [`cli`]: the `tma-cap` command line

pub mod capacity;
pub mod cli;
pub mod format;
pub mod kinematics;
pub mod occupancy_sim;
pub mod pairwise;
pub mod scenario;
pub mod sensitivity;
pub mod trajectory_stats;

pub use capacity::{capacity, CapacityReport};
pub use scenario::{load_scenario, load_scenario_file, AirspaceScenario};
