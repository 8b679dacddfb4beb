/// Outcome of adding one edge to a [`WindingUnionFind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Union {
    /// Two clusters merged; carries the size of the merged cluster.
    Merged(u32),
    /// Endpoints already shared a cluster and the new loop does not wind.
    Internal,
    /// Endpoints already shared a cluster and the new loop winds around the
    /// torus by the given net offset.
    Wrapped([i32; 2]),
}

/// Union by size with path compression, optionally tracking each node's
/// unwrapped offset relative to its parent.
///
/// With offsets enabled, `offset[i] = pos(i) - pos(parent[i])` in an
/// embedding where every added edge has its geometric length. Closing a loop
/// whose offsets do not sum to zero means the cluster wraps the torus.
#[derive(Debug, Clone)]
pub struct WindingUnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    offset: Option<Vec<[i32; 2]>>,
    largest: u32,
    find_steps: u64,
}

impl WindingUnionFind {
    pub fn new(n: usize, track_offsets: bool) -> Self {
        WindingUnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            offset: track_offsets.then(|| vec![[0, 0]; n]),
            largest: if n > 0 { 1 } else { 0 },
            find_steps: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Size of the largest cluster.
    pub fn largest(&self) -> u32 {
        self.largest
    }

    /// Total parent hops taken by `find` so far.
    pub fn find_steps(&self) -> u64 {
        self.find_steps
    }

    pub fn component_size(&mut self, node: usize) -> u32 {
        let root = self.find(node);
        self.size[root]
    }

    pub fn find(&mut self, node: usize) -> usize {
        self.find_with_offset(node).0
    }

    /// Root of `node` and `pos(node) - pos(root)`, compressing the path.
    pub fn find_with_offset(&mut self, node: usize) -> (usize, [i32; 2]) {
        let mut root = node;
        let mut total = [0i32; 2];
        while self.parent[root] as usize != root {
            if let Some(off) = &self.offset {
                total[0] += off[root][0];
                total[1] += off[root][1];
            }
            root = self.parent[root] as usize;
            self.find_steps += 1;
        }
        let mut cur = node;
        let mut remaining = total;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            if let Some(off) = &mut self.offset {
                let old = off[cur];
                off[cur] = remaining;
                remaining[0] -= old[0];
                remaining[1] -= old[1];
            }
            cur = next;
        }
        (root, total)
    }

    /// Add the edge `a -> b` whose geometric displacement is `delta`.
    pub fn union(&mut self, a: usize, b: usize, delta: [i32; 2]) -> Union {
        let (ra, da) = self.find_with_offset(a);
        let (rb, db) = self.find_with_offset(b);
        // pos(rb) - pos(ra) when b sits at pos(a) + delta
        let shift = [da[0] + delta[0] - db[0], da[1] + delta[1] - db[1]];
        if ra == rb {
            return if self.offset.is_some() && shift != [0, 0] {
                Union::Wrapped(shift)
            } else {
                Union::Internal
            };
        }
        let (sa, sb) = (self.size[ra], self.size[rb]);
        // larger cluster keeps its root; ties go to the smaller index
        let (root, child, child_offset) = if sa > sb || (sa == sb && ra < rb) {
            (ra, rb, shift)
        } else {
            (rb, ra, [-shift[0], -shift[1]])
        };
        self.parent[child] = root as u32;
        if let Some(off) = &mut self.offset {
            off[child] = child_offset;
        }
        let merged = sa + sb;
        self.size[root] = merged;
        if merged > self.largest {
            self.largest = merged;
        }
        Union::Merged(merged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_and_sizes() {
        let mut uf = WindingUnionFind::new(5, false);
        assert_eq!(uf.union(0, 1, [1, 0]), Union::Merged(2));
        assert_eq!(uf.union(3, 4, [1, 0]), Union::Merged(2));
        assert_eq!(uf.union(1, 0, [-1, 0]), Union::Internal);
        assert_eq!(uf.union(4, 1, [0, 0]), Union::Merged(4));
        assert_eq!(uf.largest(), 4);
        assert_eq!(uf.component_size(2), 1);
        assert_eq!(uf.find(0), uf.find(3));
    }

    #[test]
    fn tie_keeps_smaller_root() {
        let mut uf = WindingUnionFind::new(4, false);
        uf.union(3, 2, [0, 0]);
        assert_eq!(uf.find(3), 2);
        uf.union(1, 0, [0, 0]);
        uf.union(2, 1, [0, 0]);
        assert_eq!(uf.find(3), 0);
    }

    #[test]
    fn ring_winds() {
        // 4-cycle around a torus of length 4, each step +1 in x
        let mut uf = WindingUnionFind::new(4, true);
        for i in 0..3 {
            assert!(matches!(uf.union(i, i + 1, [1, 0]), Union::Merged(_)));
        }
        assert_eq!(uf.union(3, 0, [1, 0]), Union::Wrapped([4, 0]));
    }

    #[test]
    fn contractible_loop_does_not_wind() {
        // unit square plaquette
        let mut uf = WindingUnionFind::new(4, true);
        uf.union(0, 1, [1, 0]);
        uf.union(1, 3, [0, 1]);
        uf.union(3, 2, [-1, 0]);
        assert_eq!(uf.union(2, 0, [0, -1]), Union::Internal);
    }

    #[test]
    fn offsets_survive_compression() {
        let mut uf = WindingUnionFind::new(6, true);
        // chain 0-1-2-3-4-5 with unit steps, merged out of order
        uf.union(4, 5, [1, 0]);
        uf.union(2, 3, [1, 0]);
        uf.union(0, 1, [1, 0]);
        uf.union(3, 4, [1, 0]);
        uf.union(1, 2, [1, 0]);
        let (r, _) = uf.find_with_offset(0);
        for i in 0..6 {
            let (ri, di) = uf.find_with_offset(i);
            assert_eq!(ri, r);
            let (_, d0) = uf.find_with_offset(0);
            assert_eq!(di[0] - d0[0], i as i32);
        }
    }
}
