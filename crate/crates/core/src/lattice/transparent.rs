//! Transparent-node contraction of the square lattice.
//!
//! A transparent node routes light between its ports instead of hosting a
//! qubit. With straight-through routing its West/East ports and its
//! North/South ports are fused, so along each row and column an active node
//! links to the nearest active node beyond any run of transparent ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Boundary, Geometry, Lattice};
use crate::error::{Error, Result};
use crate::rng::{SimRng, Stream};

/// How a transparent node pairs its four ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// West-East and North-South.
    #[default]
    StraightThrough,
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pairing::StraightThrough => f.write_str("straight_through"),
        }
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "straight_through" | "straight-through" => Ok(Pairing::StraightThrough),
            other => Err(Error::InvalidParameter(format!(
                "unknown pairing '{other}'"
            ))),
        }
    }
}

/// Graph on the active nodes of a square lattice after contracting every
/// transparent node.
///
/// Edges are `[min, max]` pairs of original node indices in canonical order.
/// For each edge `hops[i]` counts the transparent nodes traversed and
/// `displacements[i]` is the unwrapped grid offset from `min` to `max` along
/// the routed path.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGraph {
    size: usize,
    boundary: Boundary,
    pairing: Pairing,
    active: Vec<bool>,
    active_nodes: Vec<u32>,
    edges: Vec<[u32; 2]>,
    hops: Vec<u32>,
    displacements: Vec<[i32; 2]>,
}

impl ContractedGraph {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    pub fn node_count(&self) -> usize {
        self.size * self.size
    }

    pub fn active_nodes(&self) -> &[u32] {
        &self.active_nodes
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    /// Realised active fraction.
    pub fn epsilon(&self) -> f64 {
        self.active_nodes.len() as f64 / self.node_count() as f64
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn hops(&self) -> &[u32] {
        &self.hops
    }

    pub fn displacements(&self) -> &[[i32; 2]] {
        &self.displacements
    }

    pub fn mean_active_degree(&self) -> f64 {
        if self.active_nodes.is_empty() {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.active_nodes.len() as f64
    }
}

/// Mark each node active with probability `epsilon` and contract the rest.
pub fn contract_transparent(
    lattice: &Lattice,
    epsilon: f64,
    pairing: Pairing,
    seed: u64,
) -> Result<ContractedGraph> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidProbability {
            name: "epsilon",
            value: epsilon,
            range: "(0, 1]",
        });
    }
    check_square(lattice)?;
    let mut rng = SimRng::new(seed, Stream::Transparency);
    let mask: Vec<bool> = (0..lattice.node_count())
        .map(|i| rng.uniform() < epsilon && lattice.is_active(i))
        .collect();
    contract_with_mask(lattice, &mask, pairing)
}

fn check_square(lattice: &Lattice) -> Result<()> {
    if lattice.geometry() != Geometry::Square {
        return Err(Error::UnsupportedGeometry(lattice.geometry().name()));
    }
    Ok(())
}

/// Contract a square lattice given an explicit activity mask.
pub fn contract_with_mask(
    lattice: &Lattice,
    active: &[bool],
    pairing: Pairing,
) -> Result<ContractedGraph> {
    check_square(lattice)?;
    let l = lattice.size();
    if active.len() != l * l {
        return Err(Error::InvalidParameter(format!(
            "activity mask has {} entries, lattice has {}",
            active.len(),
            l * l
        )));
    }
    let periodic = lattice.boundary() == Boundary::Periodic;
    let mut raw: Vec<([u32; 2], u32, [i32; 2])> = Vec::new();
    let mut line = Vec::with_capacity(l);

    // rows carry East-West links, columns North-South
    for axis in 0..2 {
        for fixed in 0..l {
            let index = |k: usize| {
                if axis == 0 {
                    fixed * l + k
                } else {
                    k * l + fixed
                }
            };
            line.clear();
            line.extend((0..l).filter(|&k| active[index(k)]));
            let step = |delta: i32| if axis == 0 { [delta, 0] } else { [0, delta] };
            for w in line.windows(2) {
                let delta = (w[1] - w[0]) as i32;
                push_edge(
                    &mut raw,
                    index(w[0]),
                    index(w[1]),
                    delta as u32 - 1,
                    step(delta),
                );
            }
            // the wrap link of a single active node is a self-loop and is dropped
            if periodic && line.len() >= 2 {
                let (first, last) = (line[0], line[line.len() - 1]);
                let delta = (first + l - last) as i32;
                push_edge(
                    &mut raw,
                    index(last),
                    index(first),
                    delta as u32 - 1,
                    step(delta),
                );
            }
        }
    }

    // duplicates keep the shortest route
    raw.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    raw.dedup_by(|later, earlier| later.0 == earlier.0);

    let active_nodes = (0..l * l)
        .filter(|&i| active[i])
        .map(|i| i as u32)
        .collect();
    Ok(ContractedGraph {
        size: l,
        boundary: lattice.boundary(),
        pairing,
        active: active.to_vec(),
        active_nodes,
        edges: raw.iter().map(|e| e.0).collect(),
        hops: raw.iter().map(|e| e.1).collect(),
        displacements: raw.iter().map(|e| e.2).collect(),
    })
}

/// Store `from -> to` in canonical orientation.
fn push_edge(
    raw: &mut Vec<([u32; 2], u32, [i32; 2])>,
    from: usize,
    to: usize,
    hops: u32,
    disp: [i32; 2],
) {
    let (a, b) = (from as u32, to as u32);
    if a < b {
        raw.push(([a, b], hops, disp));
    } else {
        raw.push(([b, a], hops, [-disp[0], -disp[1]]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    fn square(l: usize) -> Lattice {
        build_lattice(Geometry::Square, l, Boundary::Periodic).unwrap()
    }

    #[test]
    fn all_active_reproduces_lattice() {
        for l in [3, 5, 16] {
            let lat = square(l);
            let g = contract_transparent(&lat, 1.0, Pairing::StraightThrough, 1).unwrap();
            assert_eq!(g.edges(), lat.edges());
            assert!(g.hops().iter().all(|&h| h == 0));
            for (i, &[a, b]) in g.edges().iter().enumerate() {
                assert_eq!(
                    g.displacements()[i],
                    lat.displacement(a as usize, b as usize)
                );
            }
            assert_eq!(g.epsilon(), 1.0);
        }
    }

    #[test]
    fn center_transparent_three_by_three() {
        // 0 1 2
        // 3 4 5
        // 6 7 8
        let lat = square(3);
        let mut mask = vec![true; 9];
        mask[4] = false;
        let g = contract_with_mask(&lat, &mask, Pairing::StraightThrough).unwrap();
        assert!(g.edges().iter().all(|e| !e.contains(&4)));
        let expected: Vec<[u32; 2]> = lat
            .edges()
            .iter()
            .copied()
            .filter(|e| !e.contains(&4))
            .collect();
        // W-E (3,5) and N-S (1,7) are already wrap neighbours at L = 3, so
        // the routed links coincide with existing pairs
        assert_eq!(g.edges(), expected.as_slice());
        assert_eq!(g.edges().len(), 14);
        let pos = |e: [u32; 2]| g.edges().iter().position(|&x| x == e).unwrap();
        assert_eq!(g.hops()[pos([3, 5])], 0);
        assert_eq!(g.hops()[pos([1, 7])], 0);
    }

    #[test]
    fn center_transparent_five_by_five() {
        let lat = square(5);
        let mut mask = vec![true; 25];
        mask[12] = false;
        let g = contract_with_mask(&lat, &mask, Pairing::StraightThrough).unwrap();
        let pos = |e: [u32; 2]| g.edges().iter().position(|&x| x == e);
        let we = pos([11, 13]).expect("west-east link through centre");
        let ns = pos([7, 17]).expect("north-south link through centre");
        assert_eq!(g.hops()[we], 1);
        assert_eq!(g.displacements()[we], [2, 0]);
        assert_eq!(g.displacements()[ns], [0, 2]);
        assert_eq!(g.edges().len(), 50 - 4 + 2);
    }

    #[test]
    fn single_active_in_row_is_not_a_loop() {
        let lat = square(4);
        let mut mask = vec![false; 16];
        mask[5] = true;
        let g = contract_with_mask(&lat, &mask, Pairing::StraightThrough).unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn two_active_in_row_single_edge() {
        let lat = square(6);
        let mut mask = vec![false; 36];
        mask[6] = true;
        mask[9] = true;
        let g = contract_with_mask(&lat, &mask, Pairing::StraightThrough).unwrap();
        assert_eq!(g.edges(), &[[6, 9]]);
        assert_eq!(g.hops(), &[2]);
    }

    #[test]
    fn rows_form_cycles() {
        let lat = square(32);
        let g = contract_transparent(&lat, 0.3, Pairing::StraightThrough, 17).unwrap();
        for y in 0..32u32 {
            let row: Vec<u32> = (0..32)
                .map(|x| y * 32 + x)
                .filter(|&i| g.is_active(i as usize))
                .collect();
            let horizontal = g
                .edges()
                .iter()
                .zip(g.displacements())
                .filter(|(e, d)| d[1] == 0 && row.contains(&e[0]))
                .count();
            match row.len() {
                0 | 1 => assert_eq!(horizontal, 0),
                2 => assert_eq!(horizontal, 1),
                k => assert_eq!(horizontal, k),
            }
        }
    }

    #[test]
    fn sparse_mean_degree_near_four() {
        let lat = square(1024);
        let g = contract_transparent(&lat, 0.01, Pairing::StraightThrough, 5).unwrap();
        let deg = g.mean_active_degree();
        assert!((deg - 4.0).abs() < 0.02, "mean degree {deg}");
        assert!((g.epsilon() - 0.01).abs() < 0.001);
    }

    #[test]
    fn rejects_bad_inputs() {
        let lat = square(4);
        assert!(contract_transparent(&lat, 0.0, Pairing::StraightThrough, 0).is_err());
        let tri = build_lattice(Geometry::Triangular, 4, Boundary::Periodic).unwrap();
        assert!(matches!(
            contract_transparent(&tri, 0.5, Pairing::StraightThrough, 0),
            Err(Error::UnsupportedGeometry(_))
        ));
    }
}
