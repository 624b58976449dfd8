//! Pattern occurrences.
//!
//! A pattern `M` occurs in `T` on a vertex subset `S` when `T[S]` is
//! isomorphic to `M` through a map sending every internal pattern vertex
//! (degree at least 2 in `M`) to a vertex with exactly the same degree in
//! `T`. External pattern vertices (degree 1) may land on vertices of any
//! degree. Occurrences are distinct vertex subsets.
//!
//! [`count_pattern`] counts constrained embeddings by backtracking from a
//! pattern centroid and divides by `|Aut(M)|`. Every valid subset carries
//! exactly `|Aut(M)|` valid embeddings because automorphisms preserve
//! degrees, so the division is exact.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{CensusError, Result};
use crate::orbits::aut_size_free;
use crate::tree::{Centroid, FreeTree, RootedTree, Vertex};

/// Bounds for [`count_pattern_oracle`].
pub const ORACLE_MAX_TREE: usize = 20;
pub const ORACLE_MAX_PATTERN: usize = 8;

#[derive(Debug, Clone)]
pub struct Pattern {
    name: String,
    shape: FreeTree,
    internal: Vec<bool>,
    aut: u64,
    // (vertex, already-placed neighbor) in BFS order from a centroid
    order: Vec<(Vertex, Option<Vertex>)>,
}

impl Pattern {
    /// Rejects patterns with fewer than two vertices.
    pub fn new(name: impl Into<String>, shape: FreeTree) -> Result<Self> {
        let m = shape.n();
        if m < 2 {
            return Err(CensusError::InvalidInput(
                "a pattern needs at least two vertices (one edge)".into(),
            ));
        }
        let internal = (0..m as u32).map(|v| shape.degree(v) >= 2).collect();
        let aut = aut_size_free(&shape)
            .to_u64()
            .ok_or_else(|| CensusError::InvalidInput("pattern automorphism group too large".into()))?;
        let start = match shape.centroids() {
            Centroid::Single(c) | Centroid::Pair(c, _) => c,
        };
        let (parent, bfs) = shape.hang(start);
        let order = bfs
            .into_iter()
            .map(|v| (v, (v != start).then(|| parent[v as usize])))
            .collect();
        Ok(Pattern {
            name: name.into(),
            shape,
            internal,
            aut,
            order,
        })
    }

    pub fn edge() -> Self {
        Self::new("edge", FreeTree::path(2)).expect("valid")
    }

    /// Path on `k >= 2` vertices.
    pub fn path(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(CensusError::InvalidInput(format!("path pattern needs k >= 2, got {k}")));
        }
        Self::new(format!("path{k}"), FreeTree::path(k))
    }

    /// Star whose center has degree `d >= 2` (`d + 1` vertices).
    pub fn star(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(CensusError::InvalidInput(format!("star pattern needs d >= 2, got {d}")));
        }
        Self::new(format!("star{d}"), FreeTree::star(d + 1))
    }

    /// Five vertices: a degree-3 vertex with two leaves and a two-edge path.
    pub fn chair() -> Self {
        let shape = FreeTree::new(5, vec![(0, 1), (0, 2), (0, 3), (3, 4)]).expect("valid");
        Self::new("chair", shape).expect("valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &FreeTree {
        &self.shape
    }

    pub fn m(&self) -> usize {
        self.shape.n()
    }

    pub fn is_internal(&self, v: Vertex) -> bool {
        self.internal[v as usize]
    }

    pub fn aut_size(&self) -> u64 {
        self.aut
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn admissible(t: &FreeTree, m: &Pattern, pv: Vertex, tv: Vertex) -> bool {
    !m.is_internal(pv) || t.degree(tv) == m.shape.degree(pv)
}

/// Number of injective adjacency-preserving maps `M -> T` that respect the
/// internal-degree rule.
pub fn count_embeddings(t: &FreeTree, m: &Pattern) -> u64 {
    if m.m() > t.n() {
        return 0;
    }
    let mut image = vec![u32::MAX; m.m()];
    let mut used = vec![false; t.n()];

    fn extend(t: &FreeTree, m: &Pattern, depth: usize, image: &mut [u32], used: &mut [bool]) -> u64 {
        if depth == m.order.len() {
            return 1;
        }
        let (pv, anchor) = m.order[depth];
        let anchor = anchor.expect("only the first pattern vertex lacks an anchor");
        let mut total = 0;
        for &tv in t.neighbors(image[anchor as usize]) {
            if used[tv as usize] || !admissible(t, m, pv, tv) {
                continue;
            }
            used[tv as usize] = true;
            image[pv as usize] = tv;
            total += extend(t, m, depth + 1, image, used);
            used[tv as usize] = false;
        }
        total
    }

    let first = m.order[0].0;
    let mut total = 0;
    for tv in 0..t.n() as u32 {
        if !admissible(t, m, first, tv) {
            continue;
        }
        used[tv as usize] = true;
        image[first as usize] = tv;
        total += extend(t, m, 1, &mut image, &mut used);
        used[tv as usize] = false;
    }
    total
}

pub fn count_pattern(t: &FreeTree, m: &Pattern) -> BigUint {
    let embeddings = count_embeddings(t, m);
    assert_eq!(
        embeddings % m.aut,
        0,
        "embedding count {embeddings} not divisible by |Aut(M)| = {}",
        m.aut
    );
    BigUint::from(embeddings / m.aut)
}

/// Occurrences in a rooted tree; the root plays no role.
pub fn count_pattern_rooted(t: &RootedTree, m: &Pattern) -> BigUint {
    count_pattern(&t.to_free(), m)
}

/// Number of vertices of degree exactly `d`, which is the number of
/// occurrences of the star with center degree `d`.
pub fn count_star_pattern(t: &FreeTree, d: usize) -> Result<BigUint> {
    if d < 2 {
        return Err(CensusError::InvalidInput(format!("star pattern needs d >= 2, got {d}")));
    }
    Ok(BigUint::from((0..t.n() as u32).filter(|&v| t.degree(v) == d).count()))
}

/// Number of `k`-vertex paths whose `k - 2` inner vertices have degree 2.
pub fn count_path_pattern(t: &FreeTree, k: usize) -> Result<BigUint> {
    if k < 2 {
        return Err(CensusError::InvalidInput(format!("path pattern needs k >= 2, got {k}")));
    }
    // directed walks: start anywhere, step into a neighbor, then keep going
    // through degree-2 vertices only
    let mut directed = 0u64;
    for start in 0..t.n() as u32 {
        for &first in t.neighbors(start) {
            let (mut prev, mut cur) = (start, first);
            let mut len = 2;
            while len < k {
                if t.degree(cur) != 2 {
                    break;
                }
                let ns = t.neighbors(cur);
                let next = if ns[0] == prev { ns[1] } else { ns[0] };
                prev = cur;
                cur = next;
                len += 1;
            }
            if len == k {
                directed += 1;
            }
        }
    }
    Ok(BigUint::from(directed / 2))
}

/// Ground truth by enumerating every connected vertex subset of size `|M|`
/// and searching all bijections onto the pattern. Exponential; refuses
/// trees above 20 vertices and patterns above 8.
pub fn count_pattern_oracle(t: &FreeTree, m: &Pattern) -> Result<BigUint> {
    if t.n() > ORACLE_MAX_TREE {
        return Err(CensusError::BoundExceeded {
            what: "pattern oracle (tree order)",
            n: t.n(),
            bound: ORACLE_MAX_TREE,
        });
    }
    if m.m() > ORACLE_MAX_PATTERN {
        return Err(CensusError::BoundExceeded {
            what: "pattern oracle (pattern order)",
            n: m.m(),
            bound: ORACLE_MAX_PATTERN,
        });
    }
    let n = t.n();
    let mut adjacent = vec![vec![false; n]; n];
    for &(u, v) in t.edges() {
        adjacent[u as usize][v as usize] = true;
        adjacent[v as usize][u as usize] = true;
    }
    let mut count = 0u64;
    for_each_connected_subset(t, m.m(), |subset| {
        if subset_matches(t, &adjacent, m, subset) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Whether some bijection from pattern vertices onto `subset` maps pattern
/// edges to tree edges and satisfies the degree rule.
fn subset_matches(t: &FreeTree, adjacent: &[Vec<bool>], m: &Pattern, subset: &[Vertex]) -> bool {
    let k = m.m();
    let pattern_adj: Vec<Vec<bool>> = (0..k as u32)
        .map(|u| (0..k as u32).map(|v| m.shape.neighbors(u).contains(&v)).collect())
        .collect();
    let mut assign = vec![usize::MAX; k];
    let mut taken = vec![false; k];

    fn place(
        pv: usize,
        t: &FreeTree,
        adjacent: &[Vec<bool>],
        pattern_adj: &[Vec<bool>],
        m: &Pattern,
        subset: &[Vertex],
        assign: &mut [usize],
        taken: &mut [bool],
    ) -> bool {
        if pv == assign.len() {
            return true;
        }
        for slot in 0..subset.len() {
            if taken[slot] {
                continue;
            }
            let tv = subset[slot];
            if m.is_internal(pv as u32) && t.degree(tv) != m.shape.degree(pv as u32) {
                continue;
            }
            let consistent = (0..pv).all(|prev| {
                pattern_adj[pv][prev] == adjacent[tv as usize][subset[assign[prev]] as usize]
            });
            if !consistent {
                continue;
            }
            taken[slot] = true;
            assign[pv] = slot;
            if place(pv + 1, t, adjacent, pattern_adj, m, subset, assign, taken) {
                return true;
            }
            taken[slot] = false;
        }
        false
    }

    place(0, t, adjacent, &pattern_adj, m, subset, &mut assign, &mut taken)
}

/// Every connected vertex subset of size `k`, each exactly once (ESU
/// enumeration: subsets are grown from their smallest vertex).
pub fn for_each_connected_subset(t: &FreeTree, k: usize, mut visit: impl FnMut(&[Vertex])) {
    fn grow(
        t: &FreeTree,
        k: usize,
        anchor: Vertex,
        subset: &mut Vec<Vertex>,
        extension: Vec<Vertex>,
        visit: &mut dyn FnMut(&[Vertex]),
    ) {
        if subset.len() == k {
            visit(subset);
            return;
        }
        let mut extension = extension;
        while let Some(w) = extension.pop() {
            let mut next = extension.clone();
            for &u in t.neighbors(w) {
                if u <= anchor || subset.contains(&u) || next.contains(&u) {
                    continue;
                }
                // exclusive neighborhood: not adjacent to the current subset
                if subset.iter().any(|&s| t.neighbors(s).contains(&u)) {
                    continue;
                }
                next.push(u);
            }
            subset.push(w);
            grow(t, k, anchor, subset, next, visit);
            subset.pop();
        }
    }

    if k == 0 || k > t.n() {
        return;
    }
    for v in 0..t.n() as u32 {
        let extension = t.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        let mut subset = vec![v];
        grow(t, k, v, &mut subset, extension, &mut visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn chair_tree() -> FreeTree {
        FreeTree::new(5, vec![(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn single_vertex_pattern_rejected() {
        assert!(Pattern::new("dot", FreeTree::path(1)).is_err());
        assert!(Pattern::path(1).is_err());
        assert!(Pattern::star(1).is_err());
    }

    #[test]
    fn worked_examples() {
        assert_eq!(count_pattern(&FreeTree::path(4), &Pattern::edge()), big(3));
        assert_eq!(count_pattern(&FreeTree::path(5), &Pattern::path(3).unwrap()), big(3));
        assert_eq!(count_pattern(&chair_tree(), &Pattern::star(3).unwrap()), big(1));
        assert_eq!(count_pattern(&FreeTree::star(5), &Pattern::star(3).unwrap()), big(0));
        assert_eq!(count_pattern(&FreeTree::path(5), &Pattern::path(4).unwrap()), big(2));
    }

    #[test]
    fn oracle_examples() {
        let p5 = FreeTree::path(5);
        assert_eq!(count_pattern_oracle(&p5, &Pattern::path(4).unwrap()).unwrap(), big(2));
        assert_eq!(count_pattern_oracle(&p5, &Pattern::path(3).unwrap()).unwrap(), big(3));
        // whole-tree match
        assert_eq!(count_pattern_oracle(&chair_tree(), &Pattern::chair()).unwrap(), big(1));
        assert_eq!(count_pattern_oracle(&chair_tree(), &Pattern::star(3).unwrap()).unwrap(), big(1));
        assert!(count_pattern_oracle(&FreeTree::path(21), &Pattern::edge()).is_err());
        assert!(count_pattern_oracle(&FreeTree::path(10), &Pattern::path(9).unwrap()).is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(count_star_pattern(&FreeTree::star(4), 3).unwrap(), big(1));
        assert_eq!(count_star_pattern(&FreeTree::path(5), 2).unwrap(), big(3));
        assert_eq!(count_path_pattern(&FreeTree::path(5), 4).unwrap(), big(2));
        assert_eq!(count_path_pattern(&chair_tree(), 2).unwrap(), big(4));
        assert!(count_star_pattern(&FreeTree::path(5), 1).is_err());
        assert!(count_path_pattern(&FreeTree::path(5), 1).is_err());
    }

    #[test]
    fn connected_subsets_of_a_star() {
        // star on 5: subsets of size 3 containing the center: C(4,2) = 6
        let mut count = 0;
        for_each_connected_subset(&FreeTree::star(5), 3, |s| {
            assert!(s.contains(&0));
            count += 1;
        });
        assert_eq!(count, 6);
        let mut paths = 0;
        for_each_connected_subset(&FreeTree::path(6), 3, |_| paths += 1);
        assert_eq!(paths, 4);
    }

    #[test]
    fn pattern_automorphisms() {
        assert_eq!(Pattern::edge().aut_size(), 2);
        assert_eq!(Pattern::star(3).unwrap().aut_size(), 6);
        assert_eq!(Pattern::chair().aut_size(), 2);
        assert_eq!(Pattern::path(4).unwrap().aut_size(), 2);
    }
}
