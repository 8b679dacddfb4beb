//! Newman-Ziff percolation.
//!
//! A sweep adds every edge of a graph in random order and records the largest
//! cluster after each addition, plus the first addition that closes a loop
//! winding around the torus. Convolving that record with binomial weights
//! gives the canonical curve at any bond probability; ensembles average the
//! canonical curves of independent replicas.

mod convolve;
mod ensemble;
mod sweep;
mod threshold;
mod union_find;

pub use convolve::{binomial_upper_tail, convolve_binomial, BinomialWindow, ReplicaCanonical};
pub use ensemble::{ensemble_run, ensemble_with, map_replicas, replica_seed, CanonicalCurve};
pub use sweep::{
    run_site_sweep, run_sweep, run_sweep_with, MicrocanonicalCurve, SweepKind, SweepOptions,
    WrapEvents,
};
pub use threshold::{
    estimate_site_threshold, estimate_threshold, estimate_threshold_with, susceptibility_peak,
    wrap_crossing, wrap_probability, PeakEstimate, SizeEstimate, ThresholdEstimate, WrapSample,
    NU_2D,
};
pub use union_find::{Union, WindingUnionFind};

pub(crate) use threshold::{crossing_stderr, wrap_crossing_in};

use crate::lattice::{Boundary, ContractedGraph, Lattice};

/// Anything a sweep can run on.
pub trait SweepGraph: Sync {
    /// Total node count, used to normalise cluster fractions.
    fn node_count(&self) -> usize;
    fn active_count(&self) -> usize;
    fn is_active(&self, node: usize) -> bool;
    fn edges(&self) -> &[[u32; 2]];
    /// Whether [`displacement`](Self::displacement) is meaningful for winding
    /// detection.
    fn has_winding(&self) -> bool;
    /// Unwrapped offset from `edges()[edge][0]` to `edges()[edge][1]`.
    fn displacement(&self, edge: usize) -> [i32; 2];
}

impl SweepGraph for Lattice {
    fn node_count(&self) -> usize {
        Lattice::node_count(self)
    }

    fn active_count(&self) -> usize {
        Lattice::active_count(self)
    }

    fn is_active(&self, node: usize) -> bool {
        Lattice::is_active(self, node)
    }

    fn edges(&self) -> &[[u32; 2]] {
        Lattice::edges(self)
    }

    fn has_winding(&self) -> bool {
        self.boundary() == Boundary::Periodic
    }

    fn displacement(&self, edge: usize) -> [i32; 2] {
        let [a, b] = Lattice::edges(self)[edge];
        Lattice::displacement(self, a as usize, b as usize)
    }
}

impl SweepGraph for ContractedGraph {
    fn node_count(&self) -> usize {
        ContractedGraph::node_count(self)
    }

    fn active_count(&self) -> usize {
        self.active_nodes().len()
    }

    fn is_active(&self, node: usize) -> bool {
        ContractedGraph::is_active(self, node)
    }

    fn edges(&self) -> &[[u32; 2]] {
        ContractedGraph::edges(self)
    }

    fn has_winding(&self) -> bool {
        self.boundary() == Boundary::Periodic
    }

    fn displacement(&self, edge: usize) -> [i32; 2] {
        self.displacements()[edge]
    }
}

/// Bare edge list without geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainGraph {
    nodes: usize,
    edges: Vec<[u32; 2]>,
}

impl PlainGraph {
    pub fn new(nodes: usize, edges: Vec<[u32; 2]>) -> Self {
        assert!(edges
            .iter()
            .all(|e| (e[0] as usize) < nodes && (e[1] as usize) < nodes));
        PlainGraph { nodes, edges }
    }
}

impl SweepGraph for PlainGraph {
    fn node_count(&self) -> usize {
        self.nodes
    }

    fn active_count(&self) -> usize {
        self.nodes
    }

    fn is_active(&self, _node: usize) -> bool {
        true
    }

    fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    fn has_winding(&self) -> bool {
        false
    }

    fn displacement(&self, _edge: usize) -> [i32; 2] {
        [0, 0]
    }
}
