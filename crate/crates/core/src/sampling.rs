//! Uniform random unlabeled trees.
//!
//! Rooted trees come from the recursive method: a tree on `N` vertices is a
//! tree on `N - m` vertices whose root receives `m / d` identical copies of a
//! tree on `d` vertices, where the pair `(m, d)` (`d | m`) is drawn with
//! weight `d * r_d * r_{N-m}`. These weights sum to `(N - 1) r_N`, and every
//! rooted tree comes out with probability exactly `1 / r_N`.
//!
//! Free trees come from rejection: draw a uniform rooted tree, forget the
//! root, and accept with probability `1 / X(T)` where `X(T)` is the number of
//! vertex classes. A free tree underlies exactly `X(T)` rooted classes, so
//! each free tree is accepted with the same probability `1 / r_N` per draw.
//!
//! Bucket selection is exact. A 64-bit prefix of a uniform real decides the
//! bucket unless it lands on a precomputed boundary word, in which case the
//! real is extended with further random words and compared against the exact
//! big-integer boundaries.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::counting::{divisor_sums, rooted_counts, CountTable, ExactRatio, free_counts_from};
use crate::error::{CensusError, Result};
use crate::orbits::distinct_rootings;
use crate::tree::{FreeTree, RootedTree};

/// Generator used for every random stream in the crate.
pub type CensusRng = Xoshiro256PlusPlus;

/// Default cap on rooted draws per accepted free tree.
pub const DEFAULT_RETRY_CAP: u64 = 1_000_000;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seed from which independent per-draw streams are derived.
///
/// Stream `i` is xoshiro256++ seeded (through SplitMix64) with
/// `mix64(seed + mix64(i + φ))`, where `mix64` is the SplitMix64 finalizer and
/// `φ = 0x9E3779B97F4A7C15`. Streams are reproducible within a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { seed }
    }

    pub fn stream(&self, index: u64) -> CensusRng {
        let salt = mix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15));
        CensusRng::seed_from_u64(mix64(self.seed.wrapping_add(salt)))
    }
}

/// Exact categorical choice over buckets given by cumulative big-integer
/// weights.
#[derive(Debug, Clone)]
struct Buckets {
    // floor(cum[i] * 2^64 / total) for the k - 1 interior boundaries
    boundaries: Vec<u64>,
}

impl Buckets {
    fn from_cumulative(cum: &[BigUint]) -> Self {
        let total = cum.last().expect("at least one bucket");
        let boundaries = cum[1..cum.len() - 1]
            .iter()
            .map(|c| ((c << 64u32) / total).to_u64().expect("interior boundary below total"))
            .collect();
        Buckets { boundaries }
    }

    fn pick<R: RngCore + ?Sized>(&self, rng: &mut R, exact: impl FnOnce() -> Vec<BigUint>) -> usize {
        if self.boundaries.is_empty() {
            return 0;
        }
        let h = rng.next_u64();
        let idx = self.boundaries.partition_point(|&b| b < h);
        if idx == self.boundaries.len() || self.boundaries[idx] != h {
            return idx;
        }
        exact_pick(&exact(), h, rng)
    }
}

/// Continues the uniform real whose first 64 bits are `prefix` until its
/// bucket among `cum[0] = 0 < cum[1] < ... < cum[k]` is certain.
fn exact_pick<R: RngCore + ?Sized>(cum: &[BigUint], prefix: u64, rng: &mut R) -> usize {
    let total = cum.last().expect("at least one bucket");
    let mut v = BigUint::from(prefix);
    let mut bits = 64u64;
    loop {
        v = (v << 64u32) + rng.next_u64();
        bits += 64;
        let lo = &v * total;
        let hi = &lo + total;
        let idx = cum.partition_point(|c| (c << bits) <= lo) - 1;
        if hi <= (&cum[idx + 1] << bits) {
            return idx;
        }
    }
}

/// Exact uniform sampler for rooted trees up to a fixed order.
#[derive(Debug, Clone)]
pub struct RootedSampler {
    r: CountTable,
    c: Vec<BigUint>,
    // size_buckets[N] chooses m in 1..N
    size_buckets: Vec<Buckets>,
    // divisor_buckets[m] chooses among the divisors of m
    divisors: Vec<Vec<u32>>,
    divisor_buckets: Vec<Buckets>,
}

impl RootedSampler {
    pub fn new(max_n: usize) -> Self {
        assert!(max_n >= 1);
        let r = rooted_counts(max_n);
        let c = divisor_sums(r.padded());
        let mut sampler = RootedSampler {
            r,
            c,
            size_buckets: vec![Buckets { boundaries: vec![] }; max_n + 1],
            divisors: vec![Vec::new(); max_n + 1],
            divisor_buckets: vec![Buckets { boundaries: vec![] }; max_n + 1],
        };
        for m in 1..max_n {
            sampler.divisors[m] = (1..=m as u32).filter(|d| m as u32 % d == 0).collect();
            let cum = sampler.divisor_cumulative(m);
            sampler.divisor_buckets[m] = Buckets::from_cumulative(&cum);
        }
        for size in 2..=max_n {
            let cum = sampler.size_cumulative(size);
            assert_eq!(
                cum.last().unwrap(),
                &(sampler.r.get(size) * (size - 1)),
                "recursive weights must sum to (N - 1) r_N"
            );
            sampler.size_buckets[size] = Buckets::from_cumulative(&cum);
        }
        sampler
    }

    pub fn max_n(&self) -> usize {
        self.r.max_n()
    }

    pub fn counts(&self) -> &CountTable {
        &self.r
    }

    /// Cumulative weights `c_m r_{size-m}` for `m = 1..size`, in increasing m.
    fn size_cumulative(&self, size: usize) -> Vec<BigUint> {
        let r = self.r.padded();
        let mut cum = Vec::with_capacity(size);
        cum.push(BigUint::zero());
        for m in 1..size {
            let next = cum.last().unwrap() + &self.c[m] * &r[size - m];
            cum.push(next);
        }
        cum
    }

    /// Cumulative weights `d r_d` over the divisors of `m`, increasing d.
    fn divisor_cumulative(&self, m: usize) -> Vec<BigUint> {
        let r = self.r.padded();
        let mut cum = Vec::with_capacity(self.divisors[m].len() + 1);
        cum.push(BigUint::zero());
        for &d in &self.divisors[m] {
            let next = cum.last().unwrap() + &r[d as usize] * d;
            cum.push(next);
        }
        cum
    }

    /// Appends a uniform rooted tree on `size` vertices to `parent` and
    /// returns the index of its root (whose parent entry is itself).
    fn grow<R: RngCore + ?Sized>(&self, size: usize, rng: &mut R, parent: &mut Vec<u32>) -> u32 {
        let root = parent.len() as u32;
        parent.push(root);
        let mut remaining = size;
        while remaining > 1 {
            let m = 1 + self.size_buckets[remaining].pick(rng, || self.size_cumulative(remaining));
            let di = self.divisor_buckets[m].pick(rng, || self.divisor_cumulative(m));
            let d = self.divisors[m][di] as usize;

            let start = parent.len();
            let sub_root = self.grow(d, rng, parent);
            parent[sub_root as usize] = root;
            let end = parent.len();
            for _ in 1..m / d {
                let offset = (parent.len() - start) as u32;
                parent.push(root);
                for k in start + 1..end {
                    let p = parent[k] + offset;
                    parent.push(p);
                }
            }
            remaining -= m;
        }
        root
    }

    /// A uniformly random rooted tree on `n` vertices.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<RootedTree> {
        if n == 0 || n > self.max_n() {
            return Err(CensusError::InvalidInput(format!(
                "sampler supports orders 1..={}, asked for {n}",
                self.max_n()
            )));
        }
        let mut parent = Vec::with_capacity(n);
        let root = self.grow(n, rng, &mut parent);
        debug_assert_eq!(parent.len(), n);
        Ok(RootedTree::from_parent_unchecked(parent, root))
    }
}

/// An accepted free tree and what it cost.
#[derive(Debug, Clone)]
pub struct FreeDraw {
    pub tree: FreeTree,
    /// Rooted draws used, including the accepted one.
    pub draws: u64,
    /// Number of vertex classes of the accepted tree.
    pub classes: usize,
}

/// Exact uniform sampler for free trees by orbit-count rejection.
#[derive(Debug, Clone)]
pub struct FreeSampler {
    rooted: RootedSampler,
    retry_cap: u64,
}

impl FreeSampler {
    pub fn new(max_n: usize) -> Self {
        Self::with_retry_cap(max_n, DEFAULT_RETRY_CAP)
    }

    pub fn with_retry_cap(max_n: usize, retry_cap: u64) -> Self {
        FreeSampler {
            rooted: RootedSampler::new(max_n),
            retry_cap,
        }
    }

    pub fn rooted(&self) -> &RootedSampler {
        &self.rooted
    }

    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Result<FreeDraw> {
        for draws in 1..=self.retry_cap {
            let tree = self.rooted.sample(n, rng)?.to_free();
            let classes = distinct_rootings(&tree);
            if rng.gen_range(0..classes) == 0 {
                return Ok(FreeDraw { tree, draws, classes });
            }
        }
        Err(CensusError::RetryCapExceeded {
            n,
            cap: self.retry_cap,
        })
    }
}

/// Bookkeeping for a batch of samples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub n: usize,
    pub samples: u64,
    /// Rooted trees drawn in total.
    pub draws: u64,
    /// Rooted draws rejected by the free sampler; zero for rooted sampling.
    pub rejections: u64,
    pub seed: u64,
}

pub fn sample_rooted_uniform(n: usize, rng: &mut CensusRng) -> Result<RootedTree> {
    RootedSampler::new(n.max(1)).sample(n, rng)
}

pub fn sample_free_uniform(n: usize, rng: &mut CensusRng, seed: u64) -> Result<(FreeTree, SampleReport)> {
    let draw = FreeSampler::new(n.max(1)).sample(n, rng)?;
    let report = SampleReport {
        n,
        samples: 1,
        draws: draw.draws,
        rejections: draw.draws - 1,
        seed,
    };
    Ok((draw.tree, report))
}

/// Probability that one rooted draw is accepted by the free sampler,
/// `t_n / r_n`.
pub fn acceptance_rate_prediction(n: usize) -> ExactRatio {
    assert!(n >= 1);
    let r = rooted_counts(n);
    let t = free_counts_from(&r);
    ExactRatio::new(t.get(n).clone(), r.get(n).clone())
}

#[cfg(test)]
mod tests {
    use num_traits::One;
    use rand::SeedableRng;

    use super::*;
    use crate::canon::canonical_rooted_code;

    #[test]
    fn single_vertex_always() {
        let mut rng = RngState::new(9).stream(0);
        for _ in 0..10 {
            assert_eq!(sample_rooted_uniform(1, &mut rng).unwrap().n(), 1);
        }
    }

    #[test]
    fn sampled_trees_have_requested_order() {
        let s = RootedSampler::new(60);
        let mut rng = RngState::new(1).stream(0);
        for n in 1..=60 {
            let t = s.sample(n, &mut rng).unwrap();
            assert_eq!(t.n(), n);
            // the unchecked constructor must still produce a valid tree
            RootedTree::new(t.parent_array().to_vec(), t.root()).unwrap();
        }
        assert!(s.sample(61, &mut rng).is_err());
    }

    #[test]
    fn same_seed_same_stream() {
        let s = RootedSampler::new(30);
        let a: Vec<_> = (0..5).map(|i| s.sample(30, &mut RngState::new(4).stream(i)).unwrap()).collect();
        let b: Vec<_> = (0..5).map(|i| s.sample(30, &mut RngState::new(4).stream(i)).unwrap()).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn edge_needs_one_draw() {
        let mut rng = RngState::new(3).stream(0);
        let (t, report) = sample_free_uniform(2, &mut rng, 3).unwrap();
        assert_eq!(t.n(), 2);
        assert_eq!(report.draws, 1);
        assert_eq!(report.rejections, 0);
    }

    #[test]
    fn acceptance_rates() {
        assert_eq!(acceptance_rate_prediction(1), ExactRatio::one());
        assert_eq!(acceptance_rate_prediction(4), ExactRatio::new(2u32.into(), 4u32.into()));
        assert_eq!(acceptance_rate_prediction(10), ExactRatio::new(106u32.into(), 719u32.into()));
    }

    #[test]
    fn exact_pick_resolves_boundaries() {
        // three buckets with weights 1, 2, 1 out of 4: boundaries at 1/4, 3/4
        let cum: Vec<BigUint> = [0u32, 1, 3, 4].iter().map(|&x| BigUint::from(x)).collect();
        let b = Buckets::from_cumulative(&cum);
        assert_eq!(b.boundaries, vec![1u64 << 62, 3u64 << 62]);
        let mut rng = CensusRng::seed_from_u64(0);
        // a prefix exactly on a boundary means V >= boundary
        assert_eq!(exact_pick(&cum, 1u64 << 62, &mut rng), 1);
        assert_eq!(exact_pick(&cum, (1u64 << 62) - 1, &mut rng), 0);
        assert_eq!(exact_pick(&cum, 3u64 << 62, &mut rng), 2);
    }

    #[test]
    fn tiny_orders_hit_every_class() {
        let s = RootedSampler::new(6);
        let mut codes = std::collections::BTreeSet::new();
        let mut rng = RngState::new(11).stream(0);
        for _ in 0..2000 {
            codes.insert(canonical_rooted_code(&s.sample(6, &mut rng).unwrap()));
        }
        assert_eq!(codes.len(), 20);
    }
}
