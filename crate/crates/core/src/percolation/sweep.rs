use serde::{Deserialize, Serialize};

use super::union_find::{Union, WindingUnionFind};
use super::SweepGraph;
use crate::error::{Error, Result};
use crate::rng::{SimRng, Stream};

/// What a sweep adds one at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Bond,
    Site,
}

/// First occupation count at which a winding cluster appears.
///
/// `x` and `y` record the first loop whose net winding has a non-zero
/// component along that axis; `any` is the earlier of the two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapEvents {
    pub any: Option<u32>,
    pub x: Option<u32>,
    pub y: Option<u32>,
}

impl WrapEvents {
    fn record(&mut self, step: u32, winding: [i32; 2]) {
        self.any.get_or_insert(step);
        if winding[0] != 0 {
            self.x.get_or_insert(step);
        }
        if winding[1] != 0 {
            self.y.get_or_insert(step);
        }
    }

    fn complete(&self) -> bool {
        self.x.is_some() && self.y.is_some()
    }
}

/// Largest-cluster size after every addition of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MicrocanonicalCurve {
    pub kind: SweepKind,
    /// `lcc[n]` is the largest cluster size after `n` additions.
    pub lcc: Vec<u32>,
    /// Normalisation for fractions (total nodes, active or not).
    pub nodes: usize,
    /// `None` when the graph has no well-defined winding.
    pub wrap: Option<WrapEvents>,
    /// Mean size of the clusters other than the largest,
    /// `(sum s^2 - lcc^2) / active`, after every addition. Only recorded on
    /// request.
    pub susceptibility: Option<Vec<f64>>,
    pub seed: u64,
}

/// Optional observables for [`run_sweep_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    pub susceptibility: bool,
}

impl MicrocanonicalCurve {
    /// Number of additions in the full sweep (`M` for bonds).
    pub fn steps(&self) -> usize {
        self.lcc.len() - 1
    }

    pub fn fraction(&self, n: usize) -> f64 {
        self.lcc[n] as f64 / self.nodes as f64
    }

    pub fn fractions(&self) -> Vec<f64> {
        let inv = 1.0 / self.nodes as f64;
        self.lcc.iter().map(|&c| c as f64 * inv).collect()
    }

    /// Wrap bond count: the first addition that closes a winding loop.
    pub fn wrap_step(&self) -> Option<u32> {
        self.wrap.and_then(|w| w.any)
    }
}

/// Add the graph's edges in a uniformly random order.
///
/// The edge order is a Fisher-Yates permutation drawn from the shuffle stream
/// of `seed`. Wrapping is only tracked when the graph reports usable
/// displacements.
pub fn run_sweep<G: SweepGraph + ?Sized>(graph: &G, seed: u64) -> Result<MicrocanonicalCurve> {
    run_sweep_with(graph, seed, SweepOptions::default())
}

pub fn run_sweep_with<G: SweepGraph + ?Sized>(
    graph: &G,
    seed: u64,
    options: SweepOptions,
) -> Result<MicrocanonicalCurve> {
    if graph.active_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let edges = graph.edges();
    let winding = graph.has_winding();
    let mut order: Vec<u32> = (0..edges.len() as u32).collect();
    SimRng::new(seed, Stream::Shuffle).shuffle(&mut order);

    let mut uf = WindingUnionFind::new(graph.node_count(), winding);
    let mut lcc = Vec::with_capacity(edges.len() + 1);
    lcc.push(uf.largest());
    let mut wrap = WrapEvents::default();

    let active = graph.active_count() as f64;
    // sum of squared cluster sizes over active nodes, exact in u64
    let mut squares = graph.active_count() as u64;
    let mut chi = options.susceptibility.then(|| {
        let mut v = Vec::with_capacity(edges.len() + 1);
        v.push((squares - 1) as f64 / active);
        v
    });

    for (step, &e) in order.iter().enumerate() {
        let [a, b] = edges[e as usize];
        // offsets are not consulted once both axes have wrapped
        let delta = if winding && !wrap.complete() {
            graph.displacement(e as usize)
        } else {
            [0, 0]
        };
        let before = chi.as_ref().map(|_| {
            (
                uf.component_size(a as usize) as u64,
                uf.component_size(b as usize) as u64,
            )
        });
        match uf.union(a as usize, b as usize, delta) {
            Union::Wrapped(w) => wrap.record(step as u32 + 1, w),
            Union::Merged(_) => {
                if let Some((sa, sb)) = before {
                    squares += 2 * sa * sb;
                }
            }
            Union::Internal => {}
        }
        let largest = uf.largest();
        lcc.push(largest);
        if let Some(chi) = chi.as_mut() {
            let big = largest as u64;
            chi.push((squares - big * big) as f64 / active);
        }
    }

    Ok(MicrocanonicalCurve {
        kind: SweepKind::Bond,
        lcc,
        nodes: graph.node_count(),
        wrap: winding.then_some(wrap),
        susceptibility: chi,
        seed,
    })
}

/// Occupy the graph's active sites in random order, every edge between
/// occupied sites present.
///
/// `lcc[0]` is zero since no site is occupied yet.
pub fn run_site_sweep<G: SweepGraph + ?Sized>(graph: &G, seed: u64) -> Result<MicrocanonicalCurve> {
    if graph.active_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = graph.node_count();
    let winding = graph.has_winding();
    let adjacency = Adjacency::new(graph);
    let mut order: Vec<u32> = (0..n as u32)
        .filter(|&i| graph.is_active(i as usize))
        .collect();
    SimRng::new(seed, Stream::Shuffle).shuffle(&mut order);

    let mut uf = WindingUnionFind::new(n, winding);
    let mut occupied = vec![false; n];
    let mut lcc = Vec::with_capacity(order.len() + 1);
    lcc.push(0);
    let mut wrap = WrapEvents::default();

    for (step, &site) in order.iter().enumerate() {
        let site = site as usize;
        occupied[site] = true;
        for &(nb, delta) in adjacency.neighbours(site) {
            if !occupied[nb as usize] {
                continue;
            }
            if let Union::Wrapped(w) = uf.union(site, nb as usize, delta) {
                wrap.record(step as u32 + 1, w);
            }
        }
        lcc.push(uf.largest());
    }

    Ok(MicrocanonicalCurve {
        kind: SweepKind::Site,
        lcc,
        nodes: n,
        wrap: winding.then_some(wrap),
        susceptibility: None,
        seed,
    })
}

/// Compressed adjacency with per-edge displacements.
struct Adjacency {
    offsets: Vec<usize>,
    entries: Vec<(u32, [i32; 2])>,
}

impl Adjacency {
    fn new<G: SweepGraph + ?Sized>(graph: &G) -> Self {
        let n = graph.node_count();
        let edges = graph.edges();
        let winding = graph.has_winding();
        let mut offsets = vec![0usize; n + 1];
        for &[a, b] in edges {
            offsets[a as usize + 1] += 1;
            offsets[b as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![(0u32, [0i32; 2]); 2 * edges.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            let d = if winding {
                graph.displacement(e)
            } else {
                [0, 0]
            };
            entries[fill[a as usize]] = (b, d);
            fill[a as usize] += 1;
            entries[fill[b as usize]] = (a, [-d[0], -d[1]]);
            fill[b as usize] += 1;
        }
        Adjacency { offsets, entries }
    }

    fn neighbours(&self, node: usize) -> &[(u32, [i32; 2])] {
        &self.entries[self.offsets[node]..self.offsets[node + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Boundary, Geometry};
    use crate::percolation::PlainGraph;

    #[test]
    fn path_graph_is_forced() {
        let g = PlainGraph::new(3, vec![[0, 1], [1, 2]]);
        for seed in 0..10 {
            let c = run_sweep(&g, seed).unwrap();
            assert_eq!(c.lcc, vec![1, 2, 3]);
            assert!(c.wrap.is_none());
            let f = c.fractions();
            assert!((f[0] - 1.0 / 3.0).abs() < 1e-15 && f[2] == 1.0);
        }
    }

    #[test]
    fn complete_graph_k4() {
        let edges = vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let g = PlainGraph::new(4, edges);
        for seed in 0..10 {
            let c = run_sweep(&g, seed).unwrap();
            assert_eq!(c.lcc[6], 4);
            assert!(c.lcc.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn lcc_matches_brute_force_every_hundred() {
        let lat = build_lattice(Geometry::Triangular, 40, Boundary::Periodic).unwrap();
        let c = run_sweep(&lat, 77).unwrap();
        // replay the same permutation with a naive BFS
        let mut order: Vec<u32> = (0..lat.edge_count() as u32).collect();
        SimRng::new(77, Stream::Shuffle).shuffle(&mut order);
        let n = lat.node_count();
        let mut adj = vec![Vec::new(); n];
        for (step, &e) in order.iter().enumerate() {
            let [a, b] = lat.edges()[e as usize];
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
            if (step + 1) % 100 == 0 {
                assert_eq!(
                    c.lcc[step + 1] as usize,
                    largest_by_bfs(&adj),
                    "step {}",
                    step + 1
                );
            }
        }
    }

    fn largest_by_bfs(adj: &[Vec<usize>]) -> usize {
        let mut seen = vec![false; adj.len()];
        let mut best = 0;
        for s in 0..adj.len() {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut count = 0;
            while let Some(u) = stack.pop() {
                count += 1;
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            best = best.max(count);
        }
        best
    }

    #[test]
    fn full_lattice_ends_connected_and_wrapped() {
        for g in Geometry::ALL {
            let lat = build_lattice(g, 16, Boundary::Periodic).unwrap();
            let c = run_sweep(&lat, 3).unwrap();
            assert_eq!(*c.lcc.last().unwrap() as usize, lat.node_count());
            let w = c.wrap.unwrap();
            assert!(w.any.is_some() && w.x.is_some() && w.y.is_some());
            assert_eq!(w.any, w.x.min(w.y));
        }
    }

    #[test]
    fn open_boundary_never_wraps() {
        let lat = build_lattice(Geometry::Square, 16, Boundary::Open).unwrap();
        let c = run_sweep(&lat, 3).unwrap();
        assert!(c.wrap.is_none());
    }

    #[test]
    fn site_sweep_full_occupation() {
        let lat = build_lattice(Geometry::Hexagonal, 12, Boundary::Periodic).unwrap();
        let c = run_site_sweep(&lat, 8).unwrap();
        assert_eq!(c.lcc[0], 0);
        assert_eq!(c.lcc[1], 1);
        assert_eq!(c.steps(), lat.node_count());
        assert_eq!(*c.lcc.last().unwrap() as usize, lat.node_count());
        assert!(c.wrap_step().is_some());
    }

    #[test]
    fn susceptibility_matches_brute_force() {
        let lat = build_lattice(Geometry::Square, 12, Boundary::Periodic).unwrap();
        let opts = SweepOptions {
            susceptibility: true,
        };
        let c = run_sweep_with(&lat, 5, opts).unwrap();
        let chi = c.susceptibility.as_ref().unwrap();
        assert_eq!(c.lcc, run_sweep(&lat, 5).unwrap().lcc);
        let mut order: Vec<u32> = (0..lat.edge_count() as u32).collect();
        SimRng::new(5, Stream::Shuffle).shuffle(&mut order);
        let n = lat.node_count();
        let mut adj = vec![Vec::new(); n];
        for (step, &e) in order.iter().enumerate() {
            let [a, b] = lat.edges()[e as usize];
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
            let sizes = cluster_sizes(&adj);
            let big = *sizes.iter().max().unwrap();
            let expected =
                (sizes.iter().map(|s| s * s).sum::<usize>() - big * big) as f64 / n as f64;
            assert!((chi[step + 1] - expected).abs() < 1e-12);
        }
        assert_eq!(*chi.last().unwrap(), 0.0);
        assert!((chi[0] - (n - 1) as f64 / n as f64).abs() < 1e-15);
    }

    fn cluster_sizes(adj: &[Vec<usize>]) -> Vec<usize> {
        let mut seen = vec![false; adj.len()];
        let mut out = Vec::new();
        for s in 0..adj.len() {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut count = 0;
            while let Some(u) = stack.pop() {
                count += 1;
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            out.push(count);
        }
        out
    }

    #[test]
    fn empty_graph_rejected() {
        let lat = build_lattice(Geometry::Square, 4, Boundary::Periodic).unwrap();
        let empty = crate::lattice::dilute_sites(&lat, 0.0, 1).unwrap();
        assert_eq!(run_sweep(&empty, 0), Err(Error::EmptyGraph));
    }
}
