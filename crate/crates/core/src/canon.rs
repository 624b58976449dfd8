//! AHU canonical forms.
//!
//! [`canonical_rooted_code`] processes levels bottom-up. At each level every
//! vertex gets the sorted tuple of its children's ranks; the tuples are sorted,
//! deduplicated and their positions become the ranks passed to the level above.
//! The code is the concatenation of the sorted tuple lists, deepest level
//! first, each tuple length-prefixed:
//!
//! ```text
//! [height, |level_h|, len, ranks.., len, ranks.., |level_h-1|, ...]
//! ```
//!
//! Two rooted trees produce the same code iff they are isomorphic, and codes
//! compare lexicographically as `u32` sequences.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::tree::{Centroid, FreeTree, RootedTree, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode(Vec<u32>);

impl CanonicalCode {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Big-endian hex rendering of the code words.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self.0.iter().flat_map(|w| w.to_be_bytes()).collect();
        hex::encode(bytes)
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn canonical_rooted_code(t: &RootedTree) -> CanonicalCode {
    let depth = t.depths();
    let height = *depth.iter().max().unwrap_or(&0) as usize;
    let mut by_level: Vec<Vec<Vertex>> = vec![Vec::new(); height + 1];
    for v in 0..t.n() as u32 {
        by_level[depth[v as usize] as usize].push(v);
    }

    let mut rank = vec![0u32; t.n()];
    let mut code = vec![height as u32];
    for level in by_level.iter().rev() {
        let mut tuples: Vec<(Vec<u32>, Vertex)> = level
            .iter()
            .map(|&v| {
                let mut tuple: Vec<u32> = t.children(v).iter().map(|&c| rank[c as usize]).collect();
                tuple.sort_unstable();
                (tuple, v)
            })
            .collect();
        tuples.sort_unstable();

        code.push(tuples.len() as u32);
        let mut next = 0u32;
        for i in 0..tuples.len() {
            if i > 0 && tuples[i].0 != tuples[i - 1].0 {
                next += 1;
            }
            rank[tuples[i].1 as usize] = next;
            code.push(tuples[i].0.len() as u32);
            code.extend_from_slice(&tuples[i].0);
        }
    }
    CanonicalCode(code)
}

/// Canonical code of a free tree: the rooted code at the centroid, or for a
/// bicentroid the two half codes (split at the central edge) in ascending
/// order.
pub fn canonical_free_code(t: &FreeTree) -> CanonicalCode {
    match t.centroids() {
        Centroid::Single(c) => {
            let mut code = vec![1];
            code.extend_from_slice(canonical_rooted_code(&t.root_at(c)).as_slice());
            CanonicalCode(code)
        }
        Centroid::Pair(a, b) => {
            let ha = canonical_rooted_code(&t.half_rooted_at(a, b));
            let hb = canonical_rooted_code(&t.half_rooted_at(b, a));
            let (lo, hi) = if ha <= hb { (ha, hb) } else { (hb, ha) };
            let mut code = vec![2, lo.0.len() as u32];
            code.extend_from_slice(&lo.0);
            code.extend_from_slice(&hi.0);
            CanonicalCode(code)
        }
    }
}

/// Maps sorted multisets of child ids to dense ids. Ids are only meaningful
/// within one interner: two subtrees interned by the same instance get the
/// same id iff they are isomorphic as rooted trees. The leaf is always id 0.
///
/// Keys live back to back in one arena; the map goes from a key hash to the
/// newest id with that hash and `chain` links older ids with the same hash.
#[derive(Debug)]
pub(crate) struct SubtreeInterner {
    heads: FxHashMap<u64, u32>,
    chain: Vec<u32>,
    spans: Vec<(u32, u32)>,
    arena: Vec<u32>,
    scratch: Vec<u32>,
}

const NO_ID: u32 = u32::MAX;

impl Default for SubtreeInterner {
    fn default() -> Self {
        SubtreeInterner {
            heads: FxHashMap::default(),
            chain: vec![NO_ID],
            spans: vec![(0, 0)],
            arena: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

impl SubtreeInterner {
    /// Room for about `n` distinct subtrees.
    pub fn with_capacity(n: usize) -> Self {
        let mut s = Self::default();
        s.heads.reserve(n);
        s.chain.reserve(n);
        s.spans.reserve(n);
        s.arena.reserve(n);
        s
    }

    /// Id of the subtree whose children have the given ids (any order).
    pub fn intern(&mut self, child_ids: impl IntoIterator<Item = u32>) -> u32 {
        self.scratch.clear();
        self.scratch.extend(child_ids);
        if self.scratch.is_empty() {
            return 0;
        }
        self.scratch.sort_unstable();
        let hash = {
            use std::hash::{Hash, Hasher};
            let mut h = rustc_hash::FxHasher::default();
            self.scratch.hash(&mut h);
            h.finish()
        };
        let head = self.heads.get(&hash).copied().unwrap_or(NO_ID);
        let mut probe = head;
        while probe != NO_ID {
            let (lo, hi) = self.spans[probe as usize];
            if self.arena[lo as usize..hi as usize] == self.scratch[..] {
                return probe;
            }
            probe = self.chain[probe as usize];
        }
        let id = self.spans.len() as u32;
        let lo = self.arena.len() as u32;
        self.arena.extend_from_slice(&self.scratch);
        self.spans.push((lo, self.arena.len() as u32));
        self.chain.push(head);
        self.heads.insert(hash, id);
        id
    }
}

/// Tree-local subtree ids for every vertex of `t`, computed bottom-up.
pub(crate) fn subtree_ids(t: &RootedTree, interner: &mut SubtreeInterner) -> Vec<u32> {
    let mut id = vec![0u32; t.n()];
    for &v in t.bfs_order().iter().rev() {
        id[v as usize] = interner.intern(t.children(v).iter().map(|&c| id[c as usize]));
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_has_minimal_code() {
        let t = RootedTree::new(vec![0], 0).unwrap();
        assert_eq!(canonical_rooted_code(&t).as_slice(), &[0, 1, 0]);
    }

    #[test]
    fn path_rooted_at_either_end() {
        let p = FreeTree::path(3);
        assert_eq!(
            canonical_rooted_code(&p.root_at(0)),
            canonical_rooted_code(&p.root_at(2))
        );
        assert_ne!(
            canonical_rooted_code(&p.root_at(0)),
            canonical_rooted_code(&p.root_at(1))
        );
    }

    #[test]
    fn path_relabeled_keeps_free_code() {
        let p = FreeTree::path(4);
        let q = FreeTree::new(4, vec![(2, 0), (0, 3), (3, 1)]).unwrap();
        assert_eq!(canonical_free_code(&p), canonical_free_code(&q));
        assert_ne!(canonical_free_code(&p), canonical_free_code(&FreeTree::star(4)));
    }

    #[test]
    fn free_trees_on_five_vertices_are_distinct() {
        let chair = FreeTree::new(5, vec![(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
        let codes = [
            canonical_free_code(&FreeTree::path(5)),
            canonical_free_code(&FreeTree::star(5)),
            canonical_free_code(&chair),
        ];
        assert_ne!(codes[0], codes[1]);
        assert_ne!(codes[0], codes[2]);
        assert_ne!(codes[1], codes[2]);
    }

    #[test]
    fn interner_ignores_child_order() {
        let mut i = SubtreeInterner::default();
        let leaf = i.intern([]);
        let a = i.intern([leaf, 7]);
        let b = i.intern([7, leaf]);
        assert_eq!(a, b);
        assert_ne!(a, leaf);
    }
}
