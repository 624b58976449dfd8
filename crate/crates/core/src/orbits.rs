//! Automorphism vertex classes (orbits), fixed vertices, distinct rootings and
//! automorphism group sizes, plus a brute-force oracle.
//!
//! Fast route: in a rooted tree two vertices share an orbit iff the sequences
//! of subtree ids along their paths from the root agree. Every automorphism of
//! a free tree preserves its centroid set, so free-tree orbits are the rooted
//! orbits at the centroid; for a bicentroid each vertex is keyed by its path
//! from its own half's root, which merges mirrored vertices exactly when the
//! two halves are isomorphic.

use num_bigint::BigUint;
use num_traits::One;
use rustc_hash::FxHashMap;

use crate::canon::{canonical_rooted_code, subtree_ids, SubtreeInterner};
use crate::error::{CensusError, Result};
use crate::tree::{Centroid, FreeTree, RootedTree, Vertex};

/// Default vertex bound for [`brute_force_orbits_free`] and friends.
pub const BRUTE_FORCE_BOUND: usize = 10;

/// Partition of `0..n` into classes numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitPartition {
    class_of: Vec<u32>,
    sizes: Vec<u32>,
}

impl OrbitPartition {
    /// Builds a partition from arbitrary per-vertex labels; vertices with equal
    /// labels share a class. Class ids are renumbered by first appearance.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut ids: FxHashMap<L, u32> = FxHashMap::default();
        let mut sizes = Vec::new();
        let class_of = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                let id = *ids.entry(*l).or_insert(next);
                if id as usize == sizes.len() {
                    sizes.push(0);
                }
                sizes[id as usize] += 1;
                id
            })
            .collect();
        OrbitPartition { class_of, sizes }
    }

    pub fn n(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self) -> &[u32] {
        &self.class_of
    }

    pub fn class_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn class_sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Number of singleton classes.
    pub fn fixed_count(&self) -> usize {
        self.sizes.iter().filter(|&&s| s == 1).count()
    }

    pub fn fixed_vertices(&self) -> Vec<Vertex> {
        (0..self.n() as u32)
            .filter(|&v| self.sizes[self.class_of[v as usize] as usize] == 1)
            .collect()
    }

    pub fn same_class(&self, u: Vertex, v: Vertex) -> bool {
        self.class_of[u as usize] == self.class_of[v as usize]
    }
}

/// Root-path keys; `top` gives the key of each vertex whose parent is not
/// followed (the root, or both centers of a bicentroid).
/// Also returns the number of distinct pair keys.
fn path_keys(
    order: &[Vertex],
    parent: &[Vertex],
    ids: &[u32],
    top: impl Fn(Vertex) -> Option<u64>,
) -> (Vec<u64>, usize) {
    let mut pairs: FxHashMap<(u64, u32), u64> =
        FxHashMap::with_capacity_and_hasher(parent.len(), Default::default());
    let mut key = vec![0u64; parent.len()];
    // top keys live in the upper half so they never collide with pair keys
    for &v in order {
        key[v as usize] = match top(v) {
            Some(k) => (1 << 63) | k,
            None => {
                let next = pairs.len() as u64;
                *pairs
                    .entry((key[parent[v as usize] as usize], ids[v as usize]))
                    .or_insert(next)
            }
        };
    }
    (key, pairs.len())
}

/// Orbits under root-preserving automorphisms. The root is always a singleton.
pub fn orbits_rooted(t: &RootedTree) -> OrbitPartition {
    let mut interner = SubtreeInterner::with_capacity(t.n());
    let ids = subtree_ids(t, &mut interner);
    let root = t.root();
    let (keys, _) = path_keys(&t.bfs_order(), t.parent_array(), &ids, |v| (v == root).then_some(0));
    OrbitPartition::from_labels(&keys)
}

/// Root-path keys of a free tree seen from its centroid, and the number of
/// distinct keys.
fn free_keys(t: &FreeTree) -> (Vec<u64>, usize) {
    let (a, other) = match t.centroids() {
        Centroid::Single(c) => (c, None),
        Centroid::Pair(a, b) => (a, Some(b)),
    };
    let (parent, order) = t.hang(a);
    let mut interner = SubtreeInterner::with_capacity(t.n());
    let mut ids = vec![0u32; t.n()];
    for &v in order.iter().rev() {
        ids[v as usize] = interner.intern(
            t.neighbors(v)
                .iter()
                .filter(|&&w| parent[w as usize] == v && w != v)
                .map(|&w| ids[w as usize]),
        );
    }
    match other {
        None => {
            let (keys, pairs) = path_keys(&order, &parent, &ids, |v| (v == a).then_some(0));
            (keys, pairs + 1)
        }
        Some(b) => {
            // the half on a's side, with b's branch removed
            let half_a = interner.intern(
                t.neighbors(a)
                    .iter()
                    .filter(|&&w| w != b)
                    .map(|&w| ids[w as usize]),
            );
            let half_b = ids[b as usize];
            let (keys, pairs) = path_keys(&order, &parent, &ids, |v| {
                if v == a {
                    Some(half_a as u64)
                } else if v == b {
                    Some(half_b as u64)
                } else {
                    None
                }
            });
            (keys, pairs + if half_a == half_b { 1 } else { 2 })
        }
    }
}

/// Orbits under all automorphisms of a free tree.
pub fn orbits_free(t: &FreeTree) -> OrbitPartition {
    OrbitPartition::from_labels(&free_keys(t).0)
}

/// Number of pairwise non-isomorphic rooted trees obtained by rooting `t` at
/// each of its vertices, which is its number of vertex classes.
pub fn distinct_rootings(t: &FreeTree) -> usize {
    free_keys(t).1
}

/// Counts distinct rooted canonical codes over all `n` rootings directly.
/// Quadratic; used to cross-check [`distinct_rootings`].
pub fn distinct_rooted_codes(t: &FreeTree) -> usize {
    let mut codes: Vec<_> = (0..t.n() as u32)
        .map(|v| canonical_rooted_code(&t.root_at(v)))
        .collect();
    codes.sort_unstable();
    codes.dedup();
    codes.len()
}

fn factorial(k: u32) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Product over vertices of `m!` for each multiplicity `m` of identical child
/// subtrees.
fn aut_product(children_ids: impl Iterator<Item = Vec<u32>>) -> BigUint {
    let mut total = BigUint::one();
    for mut ids in children_ids {
        ids.sort_unstable();
        let mut run = 1u32;
        for i in 1..=ids.len() {
            if i < ids.len() && ids[i] == ids[i - 1] {
                run += 1;
            } else {
                if run > 1 {
                    total *= factorial(run);
                }
                run = 1;
            }
        }
    }
    total
}

/// Order of the root-preserving automorphism group.
pub fn aut_size_rooted(t: &RootedTree) -> BigUint {
    let mut interner = SubtreeInterner::with_capacity(t.n());
    let ids = subtree_ids(t, &mut interner);
    aut_product(
        (0..t.n() as u32).map(|v| t.children(v).iter().map(|&c| ids[c as usize]).collect()),
    )
}

/// Order of the full automorphism group of a free tree.
pub fn aut_size_free(t: &FreeTree) -> BigUint {
    match t.centroids() {
        Centroid::Single(c) => aut_size_rooted(&t.root_at(c)),
        Centroid::Pair(a, b) => {
            let ha = t.half_rooted_at(a, b);
            let hb = t.half_rooted_at(b, a);
            let base = aut_size_rooted(&ha) * aut_size_rooted(&hb);
            if canonical_rooted_code(&ha) == canonical_rooted_code(&hb) {
                base * 2u32
            } else {
                base
            }
        }
    }
}

/// True when `t` has a central edge whose removal leaves two isomorphic
/// rooted halves.
pub fn has_symmetrical_edge(t: &FreeTree) -> bool {
    match t.centroids() {
        Centroid::Single(_) => false,
        Centroid::Pair(a, b) => {
            canonical_rooted_code(&t.half_rooted_at(a, b))
                == canonical_rooted_code(&t.half_rooted_at(b, a))
        }
    }
}

/// Whether `set` induces a connected subgraph of `t`. The empty set counts as
/// connected.
pub fn induces_connected(t: &FreeTree, set: &[Vertex]) -> bool {
    let Some(&start) = set.first() else {
        return true;
    };
    let mut inside = vec![false; t.n()];
    for &v in set {
        inside[v as usize] = true;
    }
    let mut seen = vec![false; t.n()];
    let mut stack = vec![start];
    seen[start as usize] = true;
    let mut reached = 0;
    while let Some(u) = stack.pop() {
        reached += 1;
        for &w in t.neighbors(u) {
            if inside[w as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    reached == set.len()
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n as u32).collect())
    }
    fn find(&mut self, v: u32) -> u32 {
        let mut r = v;
        while self.0[r as usize] != r {
            r = self.0[r as usize];
        }
        let mut v = v;
        while self.0[v as usize] != r {
            let next = self.0[v as usize];
            self.0[v as usize] = r;
            v = next;
        }
        r
    }
    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb) as usize] = ra.min(rb);
        }
    }
}

/// Calls `visit` with every automorphism of the tree given by `adj`
/// (optionally fixing `root`), found by backtracking over vertex bijections.
fn for_each_automorphism(adj: &[Vec<u32>], root: Option<u32>, mut visit: impl FnMut(&[u32])) {
    let n = adj.len();
    let start = root.unwrap_or(0);
    // BFS order with BFS parents: each vertex after the first has exactly one
    // earlier neighbor.
    let mut order = vec![start];
    let mut bfs_parent = vec![u32::MAX; n];
    let mut seen = vec![false; n];
    seen[start as usize] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &w in &adj[u as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                bfs_parent[w as usize] = u;
                order.push(w);
            }
        }
    }

    let edge_set: rustc_hash::FxHashSet<(u32, u32)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, ns)| ns.iter().map(move |&w| (u as u32, w)))
        .collect();

    struct Search<'a> {
        adj: &'a [Vec<u32>],
        order: &'a [u32],
        bfs_parent: &'a [u32],
        edge_set: &'a rustc_hash::FxHashSet<(u32, u32)>,
        image: Vec<u32>,
        used: Vec<bool>,
    }

    fn extend(s: &mut Search<'_>, depth: usize, visit: &mut dyn FnMut(&[u32])) {
        if depth == s.order.len() {
            let ok = s
                .edge_set
                .iter()
                .all(|&(u, w)| s.edge_set.contains(&(s.image[u as usize], s.image[w as usize])));
            if ok {
                visit(&s.image);
            }
            return;
        }
        let v = s.order[depth];
        let p = s.bfs_parent[v as usize];
        let candidates: Vec<u32> = s.adj[s.image[p as usize] as usize].clone();
        for c in candidates {
            if s.used[c as usize] || s.adj[c as usize].len() != s.adj[v as usize].len() {
                continue;
            }
            s.used[c as usize] = true;
            s.image[v as usize] = c;
            extend(s, depth + 1, visit);
            s.used[c as usize] = false;
        }
    }

    let first_images: Vec<u32> = match root {
        Some(r) => vec![r],
        None => (0..n as u32)
            .filter(|&c| adj[c as usize].len() == adj[start as usize].len())
            .collect(),
    };
    let mut search = Search {
        adj,
        order: &order,
        bfs_parent: &bfs_parent,
        edge_set: &edge_set,
        image: vec![u32::MAX; n],
        used: vec![false; n],
    };
    for c in first_images {
        search.used[c as usize] = true;
        search.image[start as usize] = c;
        extend(&mut search, 1, &mut visit);
        search.used[c as usize] = false;
    }
}

fn brute_force(adj: Vec<Vec<u32>>, root: Option<u32>, bound: usize) -> Result<(OrbitPartition, u64)> {
    let n = adj.len();
    if n > bound {
        return Err(CensusError::BoundExceeded {
            what: "brute-force automorphism enumeration",
            n,
            bound,
        });
    }
    let mut uf = UnionFind::new(n);
    let mut count = 0u64;
    for_each_automorphism(&adj, root, |perm| {
        count += 1;
        for (v, &img) in perm.iter().enumerate() {
            uf.union(v as u32, img);
        }
    });
    let labels: Vec<u32> = (0..n as u32).map(|v| uf.find(v)).collect();
    Ok((OrbitPartition::from_labels(&labels), count))
}

fn free_adj(t: &FreeTree) -> Vec<Vec<u32>> {
    (0..t.n() as u32).map(|v| t.neighbors(v).to_vec()).collect()
}

fn rooted_adj(t: &RootedTree) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); t.n()];
    for v in 0..t.n() as u32 {
        if let Some(p) = t.parent(v) {
            adj[v as usize].push(p);
            adj[p as usize].push(v);
        }
    }
    adj
}

/// Ground-truth orbits of a free tree by enumerating every automorphism.
/// Refuses trees with more than `bound` vertices.
pub fn brute_force_orbits_free(t: &FreeTree, bound: usize) -> Result<OrbitPartition> {
    brute_force(free_adj(t), None, bound).map(|r| r.0)
}

/// Ground-truth root-preserving orbits.
pub fn brute_force_orbits_rooted(t: &RootedTree, bound: usize) -> Result<OrbitPartition> {
    brute_force(rooted_adj(t), Some(t.root()), bound).map(|r| r.0)
}

/// Number of automorphisms, by enumeration.
pub fn brute_force_aut_count_free(t: &FreeTree, bound: usize) -> Result<u64> {
    brute_force(free_adj(t), None, bound).map(|r| r.1)
}

pub fn brute_force_aut_count_rooted(t: &RootedTree, bound: usize) -> Result<u64> {
    brute_force(rooted_adj(t), Some(t.root()), bound).map(|r| r.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chair() -> FreeTree {
        // c = 0 adjacent to leaves 1, 2 and to the path 0 - 3 - 4
        FreeTree::new(5, vec![(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap()
    }

    fn complete_binary_height_two() -> RootedTree {
        RootedTree::new(vec![0, 0, 0, 1, 1, 2, 2], 0).unwrap()
    }

    #[test]
    fn path_and_star_orbits() {
        let p = orbits_free(&FreeTree::path(3));
        assert_eq!((p.class_count(), p.fixed_count()), (2, 1));
        let s = orbits_free(&FreeTree::star(4));
        assert_eq!((s.class_count(), s.fixed_count()), (2, 1));
    }

    #[test]
    fn chair_orbits_match_brute_force() {
        let t = chair();
        let p = orbits_free(&t);
        assert_eq!((p.class_count(), p.fixed_count()), (4, 3));
        assert_eq!(p, brute_force_orbits_free(&t, BRUTE_FORCE_BOUND).unwrap());
    }

    #[test]
    fn rooted_orbit_examples() {
        let star = FreeTree::star(4).root_at(0);
        assert_eq!(orbits_rooted(&star).class_count(), 2);
        let path = FreeTree::path(3).root_at(0);
        assert_eq!(orbits_rooted(&path).class_count(), 3);
        let bin = complete_binary_height_two();
        let p = orbits_rooted(&bin);
        assert_eq!(p.class_count(), 3);
        assert_eq!(p, brute_force_orbits_rooted(&bin, BRUTE_FORCE_BOUND).unwrap());
    }

    #[test]
    fn distinct_rootings_examples() {
        assert_eq!(distinct_rootings(&FreeTree::path(2)), 1);
        assert_eq!(distinct_rootings(&FreeTree::path(4)), 2);
        assert_eq!(distinct_rootings(&FreeTree::star(4)), 2);
        assert_eq!(distinct_rooted_codes(&FreeTree::path(4)), 2);
    }

    #[test]
    fn automorphism_group_sizes() {
        assert_eq!(aut_size_rooted(&FreeTree::path(4).root_at(0)), BigUint::from(1u32));
        assert_eq!(aut_size_rooted(&FreeTree::star(6).root_at(0)), BigUint::from(120u32));
        assert_eq!(aut_size_rooted(&complete_binary_height_two()), BigUint::from(8u32));
        assert_eq!(brute_force_aut_count_rooted(&complete_binary_height_two(), 10).unwrap(), 8);
        assert_eq!(aut_size_free(&FreeTree::path(2)), BigUint::from(2u32));
        assert_eq!(aut_size_free(&FreeTree::star(4)), BigUint::from(6u32));
        assert_eq!(aut_size_free(&FreeTree::path(4)), BigUint::from(2u32));
        assert_eq!(brute_force_aut_count_free(&FreeTree::path(4), 10).unwrap(), 2);
    }

    #[test]
    fn brute_force_refuses_large_trees() {
        let err = brute_force_orbits_free(&FreeTree::path(11), BRUTE_FORCE_BOUND).unwrap_err();
        assert!(matches!(err, CensusError::BoundExceeded { bound: 10, n: 11, .. }));
    }

    #[test]
    fn tiny_trees_agree_with_oracle() {
        for n in 1..=2 {
            let t = FreeTree::path(n);
            assert_eq!(orbits_free(&t), brute_force_orbits_free(&t, 10).unwrap());
            let r = t.root_at(0);
            assert_eq!(orbits_rooted(&r), brute_force_orbits_rooted(&r, 10).unwrap());
        }
    }

    #[test]
    fn symmetrical_edge_and_fixed_set() {
        let p4 = FreeTree::path(4);
        let orbits = orbits_free(&p4);
        assert_eq!(orbits.fixed_count(), 0);
        assert!(has_symmetrical_edge(&p4));
        let p5 = FreeTree::path(5);
        assert!(!has_symmetrical_edge(&p5));
        assert!(induces_connected(&p5, &orbits_free(&p5).fixed_vertices()));
        assert!(!induces_connected(&p5, &[0, 2]));
    }
}
