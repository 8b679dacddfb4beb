//! Percolation engine for studying cluster-state generation from heralded
//! entanglement between atomic memories.
//!
//! The crate is organised around the Newman-Ziff method: bonds (or sites) of a
//! lattice are added one at a time in random order under a union-find
//! structure, giving the largest-component size and the first wrapping event
//! for every occupation number in a single pass. Fixed-probability results
//! follow by binomial convolution.
//!
//! * [`lattice`] builds square, triangular and hexagonal lattices, dilutes
//!   sites and contracts transparent nodes.
//! * [`percolation`] holds the union-find, sweeps, convolution, ensembles and
//!   threshold estimators.
//! * [`physics`] maps device parameters to bond probabilities and times.
//! * [`site_bond`] finds the minimal bond probability for a given site yield.
//! * [`transparent`] covers the transparent-node long-range architecture.

pub mod error;
pub mod lattice;
pub mod percolation;
pub mod physics;
pub mod rng;
pub mod site_bond;
pub mod transparent;

pub use error::{Error, Result};
pub use lattice::{Boundary, ContractedGraph, Geometry, Lattice, Pairing};
pub use percolation::{CanonicalCurve, MicrocanonicalCurve, SweepGraph};
pub use physics::{PhysicalParams, Scheme};
