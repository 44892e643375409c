//! Simulation and analytic toolkit for the capacity of fractal D2D social
//! networks.
//!
//! The crate is organised around the pipeline used by the experiments:
//!
//! * [`graph`] samples a scale-free degree sequence and wires a
//!   degree-correlated social overlay, and answers level-`L` (BFS distance)
//!   queries on it.
//! * [`grid`] places users in the unit square and maps them onto the
//!   transmission-range grid used for multi-hop routing and TDMA reuse.
//! * [`sympoly`] holds the log-space elementary symmetric polynomial engine
//!   and the exact mean-hop evaluators built on it.
//! * [`traffic`] draws destinations and estimates mean hop counts by Monte
//!   Carlo, for direct and hierarchical communication.
//! * [`capacity`] maps hop counts to capacity and provides the closed-form
//!   scaling predictions and regression helpers.
//! * [`fractality`] implements greedy box covering, renormalisation and
//!   exponent estimation.
//! * [`experiment`] drives configured sweeps, serialises records and runs the
//!   acceptance suite.

pub mod capacity;
pub mod error;
pub mod experiment;
pub mod fractality;
pub mod graph;
pub mod grid;
pub mod oracle;
pub mod rng;
pub mod sympoly;
pub mod traffic;

pub use error::{Error, Result};
