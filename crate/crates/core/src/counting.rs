//! Exact counts of unlabeled rooted and free trees, and exact orbit-count
//! distributions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::enumeration::{enumerate_free_bounded, enumerate_rooted_bounded};
use crate::error::{CensusError, Result};
use crate::orbits::{orbits_free, orbits_rooted};
use crate::par::{map_range, Execution};

/// Exact nonnegative ratio in lowest terms.
pub type ExactRatio = Ratio<BigUint>;

/// Default enumeration bounds for [`orbit_distribution`].
pub const DISTRIBUTION_BOUND_FREE: usize = 16;
pub const DISTRIBUTION_BOUND_ROOTED: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    Rooted,
    Free,
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeKind::Rooted => "rooted",
            TreeKind::Free => "free",
        })
    }
}

impl FromStr for TreeKind {
    type Err = CensusError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rooted" => Ok(TreeKind::Rooted),
            "free" => Ok(TreeKind::Free),
            other => Err(CensusError::InvalidInput(format!(
                "unknown tree kind {other:?} (expected rooted or free)"
            ))),
        }
    }
}

/// Counts indexed by order `1..=max_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    kind: TreeKind,
    // values[0] is a placeholder zero so that values[n] is the count at order n
    values: Vec<BigUint>,
}

impl CountTable {
    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn max_n(&self) -> usize {
        self.values.len() - 1
    }

    /// Count at order `n`; panics outside `1..=max_n`.
    pub fn get(&self, n: usize) -> &BigUint {
        assert!(n >= 1 && n <= self.max_n(), "order {n} outside 1..={}", self.max_n());
        &self.values[n]
    }

    /// `(n, count)` pairs for `n = 1..=max_n`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.values.iter().enumerate().skip(1)
    }

    /// Zero-padded slice with `slice[n]` the count at order `n`.
    pub fn padded(&self) -> &[BigUint] {
        &self.values
    }
}

/// Divisor sums `c_j = sum_{d | j} d * r_d` for `j = 0..r.len()`, given a
/// zero-padded rooted table `r`.
pub fn divisor_sums(r: &[BigUint]) -> Vec<BigUint> {
    let max = r.len() - 1;
    let mut c = vec![BigUint::zero(); max + 1];
    for d in 1..=max {
        let term = &r[d] * d;
        for j in (d..=max).step_by(d) {
            c[j] += &term;
        }
    }
    c
}

/// Rooted tree counts from `r_{n+1} = (1/n) sum_{j=1}^{n} c_j r_{n+1-j}`
/// with `c_j = sum_{d|j} d r_d`, `r_1 = 1`.
pub fn rooted_counts(max_n: usize) -> CountTable {
    assert!(max_n >= 1);
    let mut r = vec![BigUint::zero(); max_n + 1];
    let mut c = vec![BigUint::zero(); max_n + 1];
    r[1] = BigUint::one();
    for n in 1..max_n {
        // r_n just became known: fold n * r_n into every multiple of n
        let term = &r[n] * n;
        for j in (n..=max_n).step_by(n) {
            c[j] += &term;
        }
        let mut acc = BigUint::zero();
        for j in 1..=n {
            acc += &c[j] * &r[n + 1 - j];
        }
        let (q, rem) = acc.div_rem(&BigUint::from(n));
        assert!(rem.is_zero(), "recurrence division by {n} left remainder {rem}");
        r[n + 1] = q;
    }
    CountTable {
        kind: TreeKind::Rooted,
        values: r,
    }
}

/// One step of the fixed-point iteration `r <- x * exp(sum_{k>=1} r(x^k)/k)`
/// on power series truncated after degree `max_n` (index = degree).
pub(crate) fn exp_iteration(prev: &[BigRational]) -> Vec<BigRational> {
    let max_n = prev.len() - 1;
    // a(x) = sum_k r(x^k)/k, needed up to degree max_n - 1
    let mut a = vec![BigRational::zero(); max_n];
    for k in 1..max_n.max(1) {
        let inv_k = BigRational::new(BigInt::one(), BigInt::from(k));
        for (deg, coeff) in prev.iter().enumerate().skip(1) {
            let target = deg * k;
            if target >= max_n {
                break;
            }
            if !coeff.is_zero() {
                a[target] += coeff * &inv_k;
            }
        }
    }
    // b = exp(a): m b_m = sum_{k=1}^{m} k a_k b_{m-k}
    let mut b = vec![BigRational::zero(); max_n];
    if max_n > 0 {
        b[0] = BigRational::one();
    }
    for m in 1..max_n {
        let mut acc = BigRational::zero();
        for k in 1..=m {
            if !a[k].is_zero() && !b[m - k].is_zero() {
                acc += &a[k] * &b[m - k] * BigInt::from(k);
            }
        }
        b[m] = acc / BigInt::from(m);
    }
    let mut next = vec![BigRational::zero(); max_n + 1];
    for (m, coeff) in b.into_iter().enumerate() {
        next[m + 1] = coeff;
    }
    next
}

/// Number of fixed-point iterations, starting from `r(x) = x`, until the
/// truncated series stops changing, together with the limit.
pub(crate) fn exp_fixed_point(max_n: usize) -> (usize, Vec<BigRational>) {
    let mut series = vec![BigRational::zero(); max_n + 1];
    series[1] = BigRational::one();
    for iteration in 1..=max_n + 1 {
        let next = exp_iteration(&series);
        if next == series {
            return (iteration - 1, series);
        }
        series = next;
    }
    unreachable!("coefficient n is final after n iterations")
}

/// Same table as [`rooted_counts`], computed by iterating the exponential
/// functional equation on rational power series.
pub fn rooted_counts_via_exp(max_n: usize) -> CountTable {
    assert!(max_n >= 1);
    let (_, series) = exp_fixed_point(max_n);
    let values = series
        .into_iter()
        .enumerate()
        .map(|(deg, coeff)| {
            assert!(coeff.is_integer(), "coefficient {deg} is not integral: {coeff}");
            let int = coeff.to_integer();
            assert!(!int.is_negative());
            int.to_biguint().expect("nonnegative")
        })
        .collect();
    CountTable {
        kind: TreeKind::Rooted,
        values,
    }
}

/// Free tree counts from rooted counts via `t = r - (r^2 - r(x^2)) / 2`.
pub fn free_counts_from(r: &CountTable) -> CountTable {
    assert_eq!(r.kind, TreeKind::Rooted);
    let max_n = r.max_n();
    let rv = &r.values;
    let mut t = vec![BigUint::zero(); max_n + 1];
    for n in 1..=max_n {
        let mut pairs = BigUint::zero();
        for i in 1..n {
            pairs += &rv[i] * &rv[n - i];
        }
        if n % 2 == 0 {
            pairs -= &rv[n / 2];
        }
        let (half, rem) = pairs.div_rem(&BigUint::from(2u32));
        assert!(rem.is_zero(), "odd dissimilarity numerator at n = {n}");
        t[n] = &rv[n] - half;
    }
    CountTable {
        kind: TreeKind::Free,
        values: t,
    }
}

pub fn free_counts(max_n: usize) -> CountTable {
    free_counts_from(&rooted_counts(max_n))
}

/// Number of trees of order `n` with each number `k` of vertex classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable {
    pub kind: TreeKind,
    pub n: usize,
    pub counts: BTreeMap<usize, BigUint>,
}

impl DistributionTable {
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// Exact mean of the class count.
    pub fn mean(&self) -> ExactRatio {
        let weighted: BigUint = self.counts.iter().map(|(&k, c)| c * k).sum();
        ExactRatio::new(weighted, self.total())
    }

    /// `Pr(X = k)` for every `k` present.
    pub fn probabilities(&self) -> Vec<(usize, ExactRatio)> {
        let total = self.total();
        self.counts
            .iter()
            .map(|(&k, c)| (k, ExactRatio::new(c.clone(), total.clone())))
            .collect()
    }
}

const BATCH: usize = 4096;

/// Class count of every tree of the given kind and order, in enumeration
/// order. Trees are buffered in batches whose orbit computations run under
/// `exec`.
pub(crate) fn class_counts_by_enumeration(
    kind: TreeKind,
    n: usize,
    bound: usize,
    exec: Execution,
) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    match kind {
        TreeKind::Free => {
            let mut batch = Vec::with_capacity(BATCH);
            let flush = |batch: &mut Vec<_>, out: &mut Vec<u32>| {
                let b: &Vec<crate::tree::FreeTree> = batch;
                out.extend(map_range(b.len() as u64, exec, |i| {
                    orbits_free(&b[i as usize]).class_count() as u32
                }));
                batch.clear();
            };
            enumerate_free_bounded(n, bound, |t| {
                batch.push(t.clone());
                if batch.len() == BATCH {
                    flush(&mut batch, &mut out);
                }
            })?;
            flush(&mut batch, &mut out);
        }
        TreeKind::Rooted => {
            let mut batch = Vec::with_capacity(BATCH);
            let flush = |batch: &mut Vec<_>, out: &mut Vec<u32>| {
                let b: &Vec<crate::tree::RootedTree> = batch;
                out.extend(map_range(b.len() as u64, exec, |i| {
                    orbits_rooted(&b[i as usize]).class_count() as u32
                }));
                batch.clear();
            };
            enumerate_rooted_bounded(n, bound, |t| {
                batch.push(t.clone());
                if batch.len() == BATCH {
                    flush(&mut batch, &mut out);
                }
            })?;
            flush(&mut batch, &mut out);
        }
    }
    Ok(out)
}

/// Exact distribution of the number of vertex classes over all trees of
/// order `n`, by exhaustive enumeration. Refuses `n` above the default
/// bound (16 free, 15 rooted).
pub fn orbit_distribution(kind: TreeKind, n: usize) -> Result<DistributionTable> {
    let bound = match kind {
        TreeKind::Free => DISTRIBUTION_BOUND_FREE,
        TreeKind::Rooted => DISTRIBUTION_BOUND_ROOTED,
    };
    orbit_distribution_bounded(kind, n, bound, Execution::default())
}

pub fn orbit_distribution_bounded(
    kind: TreeKind,
    n: usize,
    bound: usize,
    exec: Execution,
) -> Result<DistributionTable> {
    if n > bound {
        return Err(CensusError::BoundExceeded {
            what: "orbit distribution",
            n,
            bound,
        });
    }
    let classes = class_counts_by_enumeration(kind, n, bound, exec)?;
    let mut counts: BTreeMap<usize, BigUint> = BTreeMap::new();
    for k in classes {
        *counts.entry(k as usize).or_default() += 1u32;
    }
    let table = DistributionTable { kind, n, counts };
    let expected = match kind {
        TreeKind::Free => free_counts(n).get(n).clone(),
        TreeKind::Rooted => rooted_counts(n).get(n).clone(),
    };
    if table.total() != expected {
        return Err(CensusError::Internal(format!(
            "distribution row sum {} differs from the {kind} count {expected} at n = {n}",
            table.total()
        )));
    }
    Ok(table)
}

/// Mean number of vertex classes of a uniform free tree of order `n`, which
/// is `r_n / t_n` because each free tree has exactly as many distinct
/// rootings as vertex classes.
pub fn mean_orbits_exact(n: usize) -> ExactRatio {
    assert!(n >= 1);
    let r = rooted_counts(n);
    let t = free_counts_from(&r);
    ExactRatio::new(r.get(n).clone(), t.get(n).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn as_u64(t: &CountTable) -> Vec<u64> {
        t.iter().map(|(_, v)| u64::try_from(v).unwrap()).collect()
    }

    #[test]
    fn small_rooted_and_free_counts() {
        assert_eq!(as_u64(&rooted_counts(7)), vec![1, 1, 2, 4, 9, 20, 48]);
        assert_eq!(as_u64(&free_counts(4)), vec![1, 1, 1, 2]);
        let t = free_counts(10);
        assert_eq!(t.get(7), &BigUint::from(11u32));
        assert_eq!(t.get(10), &BigUint::from(106u32));
    }

    #[test]
    fn exp_route_single_vertex() {
        assert_eq!(as_u64(&rooted_counts_via_exp(1)), vec![1]);
        assert_eq!(rooted_counts_via_exp(12), rooted_counts(12));
    }

    #[test]
    fn fixed_point_coefficients_stabilize_triangularly() {
        let max_n = 10;
        let (_, limit) = exp_fixed_point(max_n);
        let mut series = vec![BigRational::zero(); max_n + 1];
        series[1] = BigRational::one();
        for iteration in 1..=max_n {
            series = exp_iteration(&series);
            // coefficients up to degree iteration + 1 are final
            for deg in 1..=(iteration + 1).min(max_n) {
                assert_eq!(series[deg], limit[deg], "degree {deg} after {iteration} iterations");
            }
        }
    }

    #[test]
    fn distributions_for_small_orders() {
        let d4 = orbit_distribution(TreeKind::Free, 4).unwrap();
        assert_eq!(d4.counts, BTreeMap::from([(2, BigUint::from(2u32))]));
        let d5 = orbit_distribution(TreeKind::Free, 5).unwrap();
        let one = BigUint::one();
        assert_eq!(
            d5.counts,
            BTreeMap::from([(2, one.clone()), (3, one.clone()), (4, one)])
        );
        let r2 = orbit_distribution(TreeKind::Rooted, 2).unwrap();
        assert_eq!(r2.counts, BTreeMap::from([(2, BigUint::one())]));
    }

    #[test]
    fn distribution_refuses_above_bound() {
        let err = orbit_distribution(TreeKind::Free, 17).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("16"));
    }

    #[test]
    fn exact_means() {
        assert_eq!(mean_orbits_exact(1), ExactRatio::from_integer(BigUint::one()));
        assert_eq!(mean_orbits_exact(4), ExactRatio::from_integer(BigUint::from(2u32)));
        assert_eq!(mean_orbits_exact(5), ExactRatio::from_integer(BigUint::from(3u32)));
        let d = orbit_distribution(TreeKind::Free, 9).unwrap();
        assert_eq!(d.mean(), mean_orbits_exact(9));
    }

    #[test]
    fn divisor_sums_match_definition() {
        let r = rooted_counts(12);
        let c = divisor_sums(r.padded());
        for j in 1..=12usize {
            let direct: BigUint = (1..=j).filter(|d| j % d == 0).map(|d| r.get(d) * d).sum();
            assert_eq!(c[j], direct);
        }
    }
}
