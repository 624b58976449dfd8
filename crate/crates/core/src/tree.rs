//! Free and rooted unlabeled tree instances.
//!
//! Both types validate on construction and are immutable afterwards. Vertex
//! labels are dense `0..n`. Adjacency (free) and child lists (rooted) are
//! stored in compressed-row form so that traversals do not allocate.

use std::collections::VecDeque;

use crate::error::{CensusError, Result};

/// Vertex label.
pub type Vertex = u32;

fn csr(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<u32>, Vec<u32>) {
    let mut offsets = vec![0u32; n + 1];
    for (u, _) in pairs.clone() {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[n] as usize];
    for (u, v) in pairs {
        let slot = &mut fill[u as usize];
        targets[*slot as usize] = v;
        *slot += 1;
    }
    (offsets, targets)
}

/// The one or two centroid vertices of a free tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centroid {
    Single(Vertex),
    /// Adjacent bicentroid; each half has exactly `n / 2` vertices.
    Pair(Vertex, Vertex),
}

/// An unrooted tree on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeTree {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    offsets: Vec<u32>,
    adj: Vec<Vertex>,
}

impl FreeTree {
    /// Builds a tree from an edge list, rejecting anything that is not a
    /// spanning tree on `0..n` (self-loops, duplicate edges, cycles, wrong
    /// edge count, out-of-range labels).
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        if n == 0 {
            return Err(CensusError::InvalidTree("a tree needs at least one vertex".into()));
        }
        if edges.len() != n - 1 {
            return Err(CensusError::InvalidTree(format!(
                "expected {} edges for {} vertices, got {}",
                n - 1,
                n,
                edges.len()
            )));
        }
        let mut seen = rustc_hash::FxHashSet::default();
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(CensusError::InvalidTree(format!(
                    "edge ({u}, {v}) has a label outside 0..{n}"
                )));
            }
            if u == v {
                return Err(CensusError::InvalidTree(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(CensusError::InvalidTree(format!("duplicate edge ({u}, {v})")));
            }
        }
        let tree = Self::from_edges_unchecked(n, edges);
        // n - 1 distinct edges plus connectivity implies acyclic.
        let reached = tree.bfs_order(0).len();
        if reached != n {
            return Err(CensusError::InvalidTree(format!(
                "graph is disconnected: {reached} of {n} vertices reachable from 0"
            )));
        }
        Ok(tree)
    }

    pub(crate) fn from_edges_unchecked(n: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let (offsets, adj) = csr(n, edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]));
        FreeTree {
            n,
            edges,
            offsets,
            adj,
        }
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        assert!(n >= 1);
        Self::from_edges_unchecked(n, (1..n as u32).map(|v| (v - 1, v)).collect())
    }

    /// Star with center 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        assert!(n >= 1);
        Self::from_edges_unchecked(n, (1..n as u32).map(|v| (0, v)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        (self.offsets[v as usize + 1] - self.offsets[v as usize]) as usize
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n as u32).map(|v| self.degree(v)).collect()
    }

    /// Breadth-first vertex order starting at `start`.
    pub fn bfs_order(&self, start: Vertex) -> Vec<Vertex> {
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut queue = VecDeque::new();
        seen[start as usize] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in self.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Parent array of the tree hung from `root` (`parent[root] == root`)
    /// together with the BFS order used to build it.
    pub(crate) fn hang(&self, root: Vertex) -> (Vec<Vertex>, Vec<Vertex>) {
        let mut parent = vec![u32::MAX; self.n];
        let mut order = Vec::with_capacity(self.n);
        parent[root as usize] = root;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in self.neighbors(u) {
                if parent[w as usize] == u32::MAX {
                    parent[w as usize] = u;
                    order.push(w);
                }
            }
        }
        (parent, order)
    }

    /// The same tree with `root` designated; vertex labels are preserved.
    pub fn root_at(&self, root: Vertex) -> RootedTree {
        let (parent, _) = self.hang(root);
        RootedTree::from_parent_unchecked(parent, root)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(CensusError::InvalidInput("permutation length differs from n".into()));
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u as usize], perm[v as usize]))
            .collect();
        Self::new(self.n, edges)
    }

    /// Sizes of the subtrees hanging below each vertex when the tree is hung
    /// from `root`, plus that parent array.
    pub(crate) fn subtree_sizes(&self, root: Vertex) -> (Vec<Vertex>, Vec<u32>) {
        let (parent, order) = self.hang(root);
        let mut size = vec![1u32; self.n];
        for &v in order.iter().rev() {
            if v != root {
                size[parent[v as usize] as usize] += size[v as usize];
            }
        }
        (parent, size)
    }

    /// Centroid vertices: those whose removal leaves components of at most
    /// `n / 2` vertices.
    pub fn centroids(&self) -> Centroid {
        let n = self.n as u32;
        if n == 1 {
            return Centroid::Single(0);
        }
        let (parent, size) = self.subtree_sizes(0);
        let mut found = Vec::with_capacity(2);
        for v in 0..n {
            let mut largest = n - size[v as usize];
            for &w in self.neighbors(v) {
                if parent[w as usize] == v && w != v {
                    largest = largest.max(size[w as usize]);
                }
            }
            if 2 * largest <= n {
                found.push(v);
            }
        }
        match found.as_slice() {
            [c] => Centroid::Single(*c),
            [a, b] => Centroid::Pair(*a, *b),
            _ => unreachable!("a tree has one or two centroids"),
        }
    }

    /// Splits the tree at the edge `(a, b)` and returns the half containing
    /// `a` rooted at `a`, relabeled densely.
    pub(crate) fn half_rooted_at(&self, a: Vertex, b: Vertex) -> RootedTree {
        let mut local = vec![u32::MAX; self.n];
        let mut parent = Vec::new();
        let mut order = vec![a];
        local[a as usize] = 0;
        parent.push(0);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &w in self.neighbors(u) {
                if w == b && u == a {
                    continue;
                }
                if local[w as usize] == u32::MAX && w != a {
                    local[w as usize] = parent.len() as u32;
                    parent.push(local[u as usize]);
                    order.push(w);
                }
            }
        }
        RootedTree::from_parent_unchecked(parent, 0)
    }
}

/// A tree with a designated root. `parent[root] == root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: Vertex,
    parent: Vec<Vertex>,
    offsets: Vec<u32>,
    children: Vec<Vertex>,
}

impl RootedTree {
    /// Validates a parent array: exactly one self-parented entry (the root)
    /// and every vertex reaching it without cycles.
    pub fn new(parent: Vec<Vertex>, root: Vertex) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(CensusError::InvalidTree("a tree needs at least one vertex".into()));
        }
        if root as usize >= n {
            return Err(CensusError::InvalidTree(format!("root {root} outside 0..{n}")));
        }
        if parent[root as usize] != root {
            return Err(CensusError::InvalidTree(format!(
                "root {root} must be its own parent entry, found {}",
                parent[root as usize]
            )));
        }
        for (v, &p) in parent.iter().enumerate() {
            if p as usize >= n {
                return Err(CensusError::InvalidTree(format!("parent of {v} is {p}, outside 0..{n}")));
            }
            if p as usize == v && v != root as usize {
                return Err(CensusError::InvalidTree(format!("vertex {v} is a second root")));
            }
        }
        let tree = Self::from_parent_unchecked(parent, root);
        if tree.bfs_order().len() != n {
            return Err(CensusError::InvalidTree("parent array contains a cycle".into()));
        }
        Ok(tree)
    }

    pub(crate) fn from_parent_unchecked(parent: Vec<Vertex>, root: Vertex) -> Self {
        let n = parent.len();
        let (offsets, children) = csr(
            n,
            parent
                .iter()
                .enumerate()
                .filter(|&(v, _)| v as u32 != root)
                .map(|(v, &p)| (p, v as u32)),
        );
        RootedTree {
            root,
            parent,
            offsets,
            children,
        }
    }

    /// Builds the rooted tree encoded by a level sequence (root at level 1,
    /// preorder). Vertex `i` is the `i`-th entry.
    pub fn from_levels(levels: &[u32]) -> Result<Self> {
        if levels.first() != Some(&1) {
            return Err(CensusError::InvalidInput("level sequence must start with 1".into()));
        }
        let mut parent = vec![0u32; levels.len()];
        // last vertex seen at each level
        let mut last_at: Vec<u32> = vec![0; levels.len() + 2];
        for (i, &l) in levels.iter().enumerate().skip(1) {
            if l < 2 || l > levels[i - 1] + 1 {
                return Err(CensusError::InvalidInput(format!(
                    "level {l} at position {i} does not follow {}",
                    levels[i - 1]
                )));
            }
            parent[i] = last_at[l as usize - 1];
            last_at[l as usize] = i as u32;
        }
        Ok(Self::from_parent_unchecked(parent, 0))
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent_array(&self) -> &[Vertex] {
        &self.parent
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        (v != self.root).then(|| self.parent[v as usize])
    }

    #[inline]
    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> Vec<Vertex> {
        let mut order = Vec::with_capacity(self.n());
        order.push(self.root);
        let mut head = 0;
        while head < order.len() && order.len() <= self.n() {
            let u = order[head];
            head += 1;
            order.extend_from_slice(self.children(u));
        }
        order
    }

    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.n()];
        for v in self.bfs_order() {
            if v != self.root {
                depth[v as usize] = depth[self.parent[v as usize] as usize] + 1;
            }
        }
        depth
    }

    /// Forgets the root.
    pub fn to_free(&self) -> FreeTree {
        let edges = (0..self.n() as u32)
            .filter(|&v| v != self.root)
            .map(|v| (self.parent[v as usize], v))
            .collect();
        FreeTree::from_edges_unchecked(self.n(), edges)
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(CensusError::InvalidInput("permutation length differs from n".into()));
        }
        let mut parent = vec![0u32; self.n()];
        for (v, &p) in self.parent.iter().enumerate() {
            parent[perm[v] as usize] = perm[p as usize];
        }
        Self::new(parent, perm[self.root as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_edge_lists() {
        assert!(FreeTree::new(0, vec![]).is_err());
        assert!(FreeTree::new(3, vec![(0, 1)]).is_err());
        assert!(FreeTree::new(3, vec![(0, 1), (1, 1)]).is_err());
        assert!(FreeTree::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(FreeTree::new(3, vec![(0, 1), (1, 3)]).is_err());
        assert!(FreeTree::new(4, vec![(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(FreeTree::new(1, vec![]).is_ok());
        assert!(FreeTree::new(3, vec![(2, 1), (0, 1)]).is_ok());
    }

    #[test]
    fn rejects_malformed_parent_arrays() {
        assert!(RootedTree::new(vec![0, 0, 1], 0).is_ok());
        assert!(RootedTree::new(vec![1, 0, 1], 0).is_err());
        assert!(RootedTree::new(vec![0, 2, 1], 0).is_err());
        assert!(RootedTree::new(vec![0, 1, 1], 0).is_err());
        assert!(RootedTree::new(vec![0, 5], 0).is_err());
    }

    #[test]
    fn centroids_of_paths_and_stars() {
        assert_eq!(FreeTree::path(1).centroids(), Centroid::Single(0));
        assert_eq!(FreeTree::path(2).centroids(), Centroid::Pair(0, 1));
        assert_eq!(FreeTree::path(5).centroids(), Centroid::Single(2));
        assert_eq!(FreeTree::path(6).centroids(), Centroid::Pair(2, 3));
        assert_eq!(FreeTree::star(7).centroids(), Centroid::Single(0));
    }

    #[test]
    fn level_sequence_round_trip() {
        let t = RootedTree::from_levels(&[1, 2, 3, 2, 2]).unwrap();
        assert_eq!(t.parent_array(), &[0, 0, 1, 0, 0]);
        assert_eq!(t.children(0), &[1, 3, 4]);
        assert!(RootedTree::from_levels(&[1, 3]).is_err());
        assert!(RootedTree::from_levels(&[2]).is_err());
    }

    #[test]
    fn halves_of_a_bicentroid() {
        let t = FreeTree::path(6);
        let h = t.half_rooted_at(2, 3);
        assert_eq!(h.n(), 3);
        assert_eq!(h.depths().iter().max(), Some(&2));
    }
}
