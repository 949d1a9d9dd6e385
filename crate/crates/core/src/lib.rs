//! Parameter synthesis for railway systems with uncertain segment durations.
//!
//! A [`model::ConstrainedRailwaySystem`] (rail network, trains, schedule
//! constraints) is compiled by [`translate`] into a network of parametric
//! timed automata ([`pta`]), on which [`synth`] computes the exact set of
//! parameter valuations for which every train completes its connection and
//! every schedule constraint holds.

pub mod dsl;
pub mod model;
pub mod pta;
pub mod rational;
pub mod scenario;
pub mod synth;
pub mod translate;

pub use model::ConstrainedRailwaySystem;
pub use rational::Rational;
