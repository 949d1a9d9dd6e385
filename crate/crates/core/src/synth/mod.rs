//! Exact parametric zones and reachability synthesis.
//!
//! Zones are convex polyhedra over the clocks followed by the parameters,
//! with integer coefficients and implicit non-negativity of every variable.
//! [`ef_synth`] explores the symbolic state space of a translated network
//! and collects the parameter projections of all target zones into a
//! [`ParameterSet`].

mod dbm;
mod explore;
mod lp;
pub mod paramset;
pub mod poly;

pub use explore::{
    check_concrete, ef_synth, Mutation, Order, Status, SynthError, SynthOptions, SynthOutcome,
    SynthStats,
};
pub use paramset::ParameterSet;
pub use poly::{Polyhedron, Row, RowKind};

/// Zone over clocks then parameters.
pub type ParametricZone = Polyhedron;

/// Machine-readable result block.
pub fn format_outcome(out: &SynthOutcome) -> String {
    format!("status: {}\nresult: {}\n", out.status.as_str(), out.result)
}
