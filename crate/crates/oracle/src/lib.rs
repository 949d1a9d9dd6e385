//! Integer-time feasibility oracle.
//!
//! [`integer_time_reachable`] decides by brute force whether a railway
//! system with a concrete, integer valuation admits a schedule. It shares
//! only the model types with the synthesis engine. [`grid_compare`] runs
//! both over a grid of valuations and lists where they disagree.

pub mod grid;
pub mod search;

pub use grid::{grid_compare, Disagreement, GridAxis, GridError, GridReport};
pub use search::{default_horizon, integer_time_reachable, search, OracleError, OracleReport};
