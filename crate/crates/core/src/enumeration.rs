//! Exhaustive generation of unlabeled trees, one representative per
//! isomorphism class.
//!
//! Rooted trees use the canonical level-sequence successor of Beyer and
//! Hedetniemi; free trees use the constant-amortized-time successor of Wright,
//! Richmond, Odlyzko and McKay, which walks canonical level sequences of
//! center-rooted trees directly.

use num_bigint::BigUint;

use crate::canon::canonical_rooted_code;
use crate::error::{CensusError, Result};
use crate::tree::{Centroid, FreeTree, RootedTree};

/// Default largest order either enumerator accepts.
pub const ENUMERATION_BOUND: usize = 18;

/// Preorder depths of a rooted tree, root at level 1. Canonical sequences
/// are the lexicographically largest among all orderings of the same tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LevelSequence(Vec<u32>);

impl LevelSequence {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        RootedTree::from_levels(&levels)?;
        Ok(LevelSequence(levels))
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn to_tree(&self) -> RootedTree {
        RootedTree::from_levels(&self.0).expect("validated on construction")
    }
}

fn check_bound(what: &'static str, n: usize, bound: usize) -> Result<()> {
    if n == 0 {
        return Err(CensusError::InvalidInput("order must be at least 1".into()));
    }
    if n > bound {
        return Err(CensusError::BoundExceeded { what, n, bound });
    }
    Ok(())
}

/// Visits the canonical level sequence of every rooted tree on `n` vertices,
/// in decreasing lexicographic order. Returns the number visited.
pub fn for_each_rooted_level_sequence(n: usize, bound: usize, mut visit: impl FnMut(&[u32])) -> Result<u64> {
    check_bound("rooted enumeration", n, bound)?;
    let mut levels: Vec<u32> = (1..=n as u32).collect();
    let mut count = 0u64;
    loop {
        visit(&levels);
        count += 1;
        // last position deeper than a child of the root
        let Some(p) = levels.iter().rposition(|&l| l > 2) else {
            return Ok(count);
        };
        let target = levels[p] - 1;
        let q = levels[..p]
            .iter()
            .rposition(|&l| l == target)
            .expect("a shallower ancestor precedes every non-root entry");
        let shift = p - q;
        for i in p..n {
            levels[i] = levels[i - shift];
        }
    }
}

pub fn enumerate_rooted_bounded(n: usize, bound: usize, mut visit: impl FnMut(&RootedTree)) -> Result<BigUint> {
    for_each_rooted_level_sequence(n, bound, |levels| {
        visit(&RootedTree::from_levels(levels).expect("successor keeps sequences valid"))
    })
    .map(BigUint::from)
}

/// Every rooted tree on `n` vertices exactly once (up to isomorphism).
pub fn enumerate_rooted(n: usize, visit: impl FnMut(&RootedTree)) -> Result<BigUint> {
    enumerate_rooted_bounded(n, ENUMERATION_BOUND, visit)
}

const INF: i64 = i64::MAX / 4;

/// State of the free-tree successor. Arrays are 1-based: `l[i]` is the level
/// of vertex `i` and `w[i]` its parent (`w[1] == 0`).
struct FreeTreeGenerator {
    n: i64,
    l: Vec<i64>,
    w: Vec<i64>,
    p: i64,
    q: i64,
    h1: i64,
    h2: i64,
    c: i64,
    r: i64,
}

impl FreeTreeGenerator {
    /// First tree: two paths of lengths `k-1` and `n-k` hanging from the
    /// root. Requires `n >= 3`.
    fn new(n: usize) -> Self {
        let n = n as i64;
        let k = n / 2 + 1;
        let mut l = vec![0i64; n as usize + 1];
        let mut w = vec![0i64; n as usize + 1];
        for i in 1..=k {
            l[i as usize] = i;
        }
        for i in k + 1..=n {
            l[i as usize] = i - k + 1;
        }
        for i in 1..=n {
            w[i as usize] = i - 1;
        }
        w[k as usize + 1] = 1;
        FreeTreeGenerator {
            n,
            l,
            w,
            p: if n == 4 { 3 } else { n },
            q: if n <= 3 { 0 } else { n - 1 },
            h1: k,
            h2: n,
            c: if n % 2 == 0 { n + 1 } else { INF },
            r: k,
        }
    }

    fn finished(&self) -> bool {
        self.q == 0
    }

    fn edges(&self) -> Vec<(u32, u32)> {
        (2..=self.n as usize)
            .map(|i| ((self.w[i] - 1) as u32, (i - 1) as u32))
            .collect()
    }

    fn advance(&mut self) {
        let n = self.n;
        let (l, w) = (&mut self.l, &mut self.w);
        let (mut p, mut q, mut h1, mut h2, mut c, mut r) = (self.p, self.q, self.h1, self.h2, self.c, self.r);
        let at = |v: &Vec<i64>, i: i64| v[i as usize];

        let mut fixit = false;
        let mut needr = false;
        let mut needc = false;
        let mut needh2 = false;

        if c == n + 1
            || (p == h2
                && ((at(l, h1) == at(l, h2) + 1 && n - h2 > r - h1)
                    || (at(l, h1) == at(l, h2) && n - h2 + 1 < r - h1)))
        {
            if at(l, r) > 3 {
                p = r;
                q = at(w, r);
                if h1 == r {
                    h1 -= 1;
                }
                fixit = true;
            } else {
                p = r;
                r -= 1;
                q = 2;
            }
        }

        if p <= h1 {
            h1 = p - 1;
        }
        if p <= r {
            needr = true;
        } else if p <= h2 {
            needh2 = true;
        } else if at(l, h2) == at(l, h1) - 1 && n - h2 == r - h1 {
            if p <= c {
                needc = true;
            }
        } else {
            c = INF;
        }

        let oldp = p;
        let delta = q - p;
        let oldlq = at(l, q);
        let oldwq = at(w, q);
        p = INF;

        for i in oldp..=n {
            l[i as usize] = at(l, i + delta);
            if at(l, i) == 2 {
                w[i as usize] = 1;
            } else {
                p = i;
                q = if at(l, i) == oldlq {
                    oldwq
                } else {
                    at(w, i + delta) - delta
                };
                w[i as usize] = q;
            }
            if needr && at(l, i) == 2 {
                needr = false;
                needh2 = true;
                r = i - 1;
            }
            if needh2 && at(l, i) <= at(l, i - 1) && i > r + 1 {
                needh2 = false;
                h2 = i - 1;
                if at(l, h2) == at(l, h1) - 1 && n - h2 == r - h1 {
                    needc = true;
                } else {
                    c = INF;
                }
            }
            if needc {
                if at(l, i) != at(l, h1 - h2 + i) - 1 {
                    needc = false;
                    c = i;
                } else {
                    c = i + 1;
                }
            }
        }

        if fixit {
            r = n - h1 + 1;
            for i in r + 1..=n {
                l[i as usize] = i - r + 1;
                w[i as usize] = i - 1;
            }
            w[r as usize + 1] = 1;
            h2 = n;
            p = n;
            q = p - 1;
            c = INF;
        } else {
            if p == INF {
                p = if at(l, oldp - 1) != 2 { oldp - 1 } else { oldp - 2 };
                q = at(w, p);
            }
            if needh2 {
                h2 = n;
                c = if at(l, h2) == at(l, h1) - 1 && h1 == r { n + 1 } else { INF };
            }
        }

        (self.p, self.q, self.h1, self.h2, self.c, self.r) = (p, q, h1, h2, c, r);
    }
}

/// Visits the edge list of every free tree on `n` vertices.
pub fn for_each_free_edge_list(n: usize, bound: usize, mut visit: impl FnMut(&[(u32, u32)])) -> Result<u64> {
    check_bound("free enumeration", n, bound)?;
    if n <= 2 {
        visit(FreeTree::path(n).edges());
        return Ok(1);
    }
    let mut gen = FreeTreeGenerator::new(n);
    let mut count = 0u64;
    loop {
        visit(&gen.edges());
        count += 1;
        if gen.finished() {
            return Ok(count);
        }
        gen.advance();
    }
}

pub fn enumerate_free_bounded(n: usize, bound: usize, mut visit: impl FnMut(&FreeTree)) -> Result<BigUint> {
    for_each_free_edge_list(n, bound, |edges| {
        visit(&FreeTree::from_edges_unchecked(n, edges.to_vec()))
    })
    .map(BigUint::from)
}

/// Every free tree on `n` vertices exactly once (up to isomorphism).
pub fn enumerate_free(n: usize, visit: impl FnMut(&FreeTree)) -> Result<BigUint> {
    enumerate_free_bounded(n, ENUMERATION_BOUND, visit)
}

/// Slow reference enumerator: keeps the rooted trees whose root is a
/// centroid and whose rooted code is the smallest among centroid rootings.
pub fn enumerate_free_by_filtering(n: usize, bound: usize, mut visit: impl FnMut(&FreeTree)) -> Result<BigUint> {
    let mut count = 0u64;
    enumerate_rooted_bounded(n, bound, |rooted| {
        let free = rooted.to_free();
        let root = rooted.root();
        let keep = match free.centroids() {
            Centroid::Single(c) => c == root,
            Centroid::Pair(a, b) if a == root || b == root => {
                let other = if a == root { b } else { a };
                canonical_rooted_code(rooted) <= canonical_rooted_code(&free.root_at(other))
            }
            Centroid::Pair(..) => false,
        };
        if keep {
            count += 1;
            visit(&free);
        }
    })?;
    Ok(BigUint::from(count))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::canon::canonical_free_code;
    use crate::counting::{free_counts, rooted_counts};

    #[test]
    fn rooted_small_orders() {
        assert_eq!(enumerate_rooted(1, |_| {}).unwrap(), BigUint::from(1u32));
        let mut codes = BTreeSet::new();
        let count = enumerate_rooted(6, |t| {
            codes.insert(canonical_rooted_code(t));
        })
        .unwrap();
        assert_eq!(count, BigUint::from(20u32));
        assert_eq!(codes.len(), 20);
        assert_eq!(enumerate_rooted(10, |_| {}).unwrap(), BigUint::from(719u32));
    }

    #[test]
    fn free_small_orders() {
        assert_eq!(enumerate_free(4, |_| {}).unwrap(), BigUint::from(2u32));
        let mut codes = BTreeSet::new();
        let count = enumerate_free(7, |t| {
            codes.insert(canonical_free_code(t));
        })
        .unwrap();
        assert_eq!(count, BigUint::from(11u32));
        assert_eq!(codes.len(), 11);
        assert_eq!(enumerate_free(12, |_| {}).unwrap(), BigUint::from(551u32));
    }

    #[test]
    fn counts_and_distinctness_up_to_twelve() {
        let r = rooted_counts(12);
        let t = free_counts(12);
        for n in 1..=12 {
            let mut codes = BTreeSet::new();
            let count = enumerate_free(n, |tree| {
                codes.insert(canonical_free_code(tree));
            })
            .unwrap();
            assert_eq!(&count, t.get(n), "free n = {n}");
            assert_eq!(codes.len() as u64, u64::try_from(&count).unwrap(), "free duplicates at n = {n}");
            assert_eq!(&enumerate_rooted(n, |_| {}).unwrap(), r.get(n), "rooted n = {n}");
        }
    }

    #[test]
    fn filtering_oracle_agrees() {
        for n in 1..=10 {
            let mut fast = BTreeSet::new();
            enumerate_free(n, |t| {
                fast.insert(canonical_free_code(t));
            })
            .unwrap();
            let mut slow = BTreeSet::new();
            enumerate_free_by_filtering(n, ENUMERATION_BOUND, |t| {
                slow.insert(canonical_free_code(t));
            })
            .unwrap();
            assert_eq!(fast, slow, "n = {n}");
        }
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(matches!(
            enumerate_free(19, |_| {}),
            Err(CensusError::BoundExceeded { bound: 18, .. })
        ));
        assert!(matches!(enumerate_rooted(0, |_| {}), Err(CensusError::InvalidInput(_))));
        assert!(enumerate_rooted_bounded(5, 4, |_| {}).is_err());
    }

    #[test]
    fn level_sequence_validation() {
        assert!(LevelSequence::new(vec![1, 2, 3, 2]).is_ok());
        assert!(LevelSequence::new(vec![1, 3]).is_err());
        assert_eq!(LevelSequence::new(vec![1, 2, 2]).unwrap().to_tree().n(), 3);
    }
}
