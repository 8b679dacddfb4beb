//! Finite two-dimensional lattices and the graphs derived from them.
//!
//! Nodes are indexed row-major, `index = y * L + x`, on an `L x L` grid.
//! Square and triangular lattices use the grid directly (the triangular lattice
//! adds the `(x+1, y+1)` diagonal). The hexagonal lattice is the brick-wall
//! embedding of the honeycomb: horizontal bonds everywhere and a vertical bond
//! from `(x, y)` to `(x, y+1)` whenever `x + y` is even. That requires an even
//! `L` so the parity pattern survives the wrap.

mod io;
mod transparent;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rng::{SimRng, Stream};

pub use io::{parse_edge_list, write_edge_list};
pub use transparent::{contract_transparent, contract_with_mask, ContractedGraph, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Square,
    Triangular,
    Hexagonal,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [Geometry::Square, Geometry::Triangular, Geometry::Hexagonal];

    /// Coordination number of the infinite lattice.
    pub fn degree(self) -> usize {
        match self {
            Geometry::Square => 4,
            Geometry::Triangular => 6,
            Geometry::Hexagonal => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Square => "square",
            Geometry::Triangular => "triangular",
            Geometry::Hexagonal => "hexagonal",
        }
    }

    /// Exact bond percolation threshold.
    pub fn bond_threshold(self) -> f64 {
        let s = 2.0 * (std::f64::consts::PI / 18.0).sin();
        match self {
            Geometry::Square => 0.5,
            Geometry::Triangular => s,
            Geometry::Hexagonal => 1.0 - s,
        }
    }

    /// Site percolation threshold (exact for triangular, numerical otherwise).
    pub fn site_threshold(self) -> f64 {
        match self {
            Geometry::Square => 0.592_746,
            Geometry::Triangular => 0.5,
            Geometry::Hexagonal => 0.697_043,
        }
    }

    /// Unit offsets to the neighbours a node links to "forward" on the grid.
    /// Hexagonal vertical links depend on parity and are handled separately.
    fn forward_offsets(self) -> &'static [(i64, i64)] {
        match self {
            Geometry::Square => &[(1, 0), (0, 1)],
            Geometry::Triangular => &[(1, 0), (0, 1), (1, 1)],
            Geometry::Hexagonal => &[(1, 0)],
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Geometry::Square),
            "triangular" => Ok(Geometry::Triangular),
            "hexagonal" | "honeycomb" => Ok(Geometry::Hexagonal),
            other => Err(Error::InvalidParameter(format!(
                "unknown geometry '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary '{other}'"
            ))),
        }
    }
}

/// A finite lattice with a canonical edge list.
///
/// Edges are stored as `[min, max]` pairs sorted lexicographically. Removed
/// sites keep their index and are tracked in an activity mask; `None` means
/// every site is active.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    geometry: Geometry,
    size: usize,
    boundary: Boundary,
    edges: Vec<[u32; 2]>,
    active: Option<Vec<bool>>,
    active_count: usize,
}

impl Lattice {
    pub fn new(geometry: Geometry, size: usize, boundary: Boundary) -> Result<Self> {
        build_lattice(geometry, size, boundary)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Linear size `L` (nodes per row).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Total node count `N`, including inactive sites.
    pub fn node_count(&self) -> usize {
        self.size * self.size
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active.as_ref().is_none_or(|mask| mask[node])
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.size, node / self.size)
    }

    /// Displacement from `a` to its neighbour `b` in unwrapped grid units.
    ///
    /// On periodic lattices neighbours differ by at most one step per axis, so
    /// the minimal image is unambiguous once `L >= 3`.
    pub fn displacement(&self, a: usize, b: usize) -> [i32; 2] {
        let l = self.size as i64;
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let mut dx = bx as i64 - ax as i64;
        let mut dy = by as i64 - ay as i64;
        if self.boundary == Boundary::Periodic {
            if dx > 1 {
                dx -= l;
            } else if dx < -1 {
                dx += l;
            }
            if dy > 1 {
                dy -= l;
            } else if dy < -1 {
                dy += l;
            }
        }
        [dx as i32, dy as i32]
    }

    /// Per-node degree counted from the edge list.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.node_count()];
        for &[a, b] in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    pub(crate) fn from_parts(
        geometry: Geometry,
        size: usize,
        boundary: Boundary,
        edges: Vec<[u32; 2]>,
        active: Option<Vec<bool>>,
    ) -> Self {
        let active_count = match &active {
            Some(mask) => mask.iter().filter(|&&a| a).count(),
            None => size * size,
        };
        Lattice {
            geometry,
            size,
            boundary,
            edges,
            active,
            active_count,
        }
    }
}

fn validate_size(geometry: Geometry, size: usize, boundary: Boundary) -> Result<()> {
    let err = |reason| Error::InvalidSize {
        geometry: geometry.name(),
        size,
        reason,
    };
    if boundary == Boundary::Periodic && size < 3 {
        return Err(err("periodic lattices need L >= 3"));
    }
    if size < 2 {
        return Err(err("L must be at least 2"));
    }
    if geometry == Geometry::Hexagonal && !size.is_multiple_of(2) {
        return Err(err("the brick-wall honeycomb tiles only even L"));
    }
    if size.checked_mul(size).is_none_or(|n| n > u32::MAX as usize) {
        return Err(err("node count exceeds 32-bit indexing"));
    }
    Ok(())
}

/// Build an `L x L` lattice with canonically ordered edges.
pub fn build_lattice(geometry: Geometry, size: usize, boundary: Boundary) -> Result<Lattice> {
    validate_size(geometry, size, boundary)?;
    let l = size as i64;
    let periodic = boundary == Boundary::Periodic;
    let capacity = size * size * geometry.degree() / 2;
    let mut edges = Vec::with_capacity(capacity);

    let mut link = |x: i64, y: i64, dx: i64, dy: i64| {
        let (nx, ny) = (x + dx, y + dy);
        let inside = (0..l).contains(&nx) && (0..l).contains(&ny);
        if !inside && !periodic {
            return;
        }
        let (nx, ny) = (nx.rem_euclid(l), ny.rem_euclid(l));
        let a = (y * l + x) as u32;
        let b = (ny * l + nx) as u32;
        edges.push([a.min(b), a.max(b)]);
    };

    for y in 0..l {
        for x in 0..l {
            for &(dx, dy) in geometry.forward_offsets() {
                link(x, y, dx, dy);
            }
            if geometry == Geometry::Hexagonal && (x + y) % 2 == 0 {
                link(x, y, 0, 1);
            }
        }
    }

    edges.sort_unstable();
    debug_assert!(edges.windows(2).all(|w| w[0] != w[1]));
    Ok(Lattice::from_parts(geometry, size, boundary, edges, None))
}

/// Remove each site independently with probability `1 - q`.
///
/// Node `i` survives when the `i`-th uniform draw of the dilution stream is
/// below `q`, so dilutions with the same seed are nested in `q`. Sites that
/// were already inactive stay inactive; removed sites lose all their edges but
/// keep their index.
pub fn dilute_sites(lattice: &Lattice, q: f64, seed: u64) -> Result<Lattice> {
    check_probability("q", q, true)?;
    let n = lattice.node_count();
    let mut rng = SimRng::new(seed, Stream::Dilution);
    let mask: Vec<bool> = (0..n)
        .map(|i| {
            let keep = rng.uniform() < q;
            keep && lattice.is_active(i)
        })
        .collect();
    let edges: Vec<[u32; 2]> = lattice
        .edges
        .iter()
        .copied()
        .filter(|&[a, b]| mask[a as usize] && mask[b as usize])
        .collect();
    let active = if mask.iter().all(|&a| a) {
        None
    } else {
        Some(mask)
    };
    Ok(Lattice::from_parts(
        lattice.geometry,
        lattice.size,
        lattice.boundary,
        edges,
        active,
    ))
}
