//! Numerical constants of the tree generating functions.
//!
//! With `r(x)` the rooted-tree series and `E(x) = sum_{k>=2} r(x^k)/k`, the
//! singularity `x0` is the root of `g(x) = x exp(1 + E(x)) - 1`. Near `x0`
//! the series behaves like `1 - b1 sqrt(x0 - x)`, and
//!
//! ```text
//! r_n ~ D x0^{-n} n^{-3/2}      t_n ~ C x0^{-n} n^{-5/2}
//! ```
//!
//! `C` and `D` come from Richardson extrapolation of the scaled count
//! sequences; `D` also follows from `b1` as `b1 sqrt(x0) / (2 sqrt(pi))`.
//! Everything is double precision. Big counts enter through scaled
//! logarithms so nothing overflows.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::counting::{free_counts_from, rooted_counts, CountTable};
use crate::error::{CensusError, Result};

pub const MIN_TRUNCATION: usize = 60;
/// Beyond this the float view of `r_N` overflows.
pub const MAX_TRUNCATION: usize = 600;
pub const DEFAULT_TRUNCATION: usize = 150;
pub const MIN_EXTRAPOLATION_ORDER: usize = 60;
/// Past a few hundred terms the rounding of `n ln x0` dominates the
/// Richardson differences.
pub const MAX_EXTRAPOLATION_ORDER: usize = 400;
pub const DEFAULT_EXTRAPOLATION_ORDER: usize = 200;
pub const DEFAULT_RICHARDSON_DEPTH: usize = 3;
pub const MIN_TOLERANCE: f64 = 1e-12;

const BRACKET: (f64, f64) = (0.3, 0.36);

/// A number with the method that produced it and an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub method: &'static str,
}

/// `ln x` for a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    assert!(x.bits() > 0, "logarithm of zero");
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit value fits in f64");
    top.ln() + shift as f64 * LN_2
}

/// `a / b` to full double precision.
pub fn ratio_to_f64(a: &BigUint, b: &BigUint) -> f64 {
    let (la, lb) = (a.bits() as i64, b.bits() as i64);
    // scale so the integer quotient carries about 64 significant bits
    let scale = 64 - (la - lb);
    let q = if scale >= 0 {
        (a << scale as u64) / b
    } else {
        a / (b << (-scale) as u64)
    };
    q.to_f64().expect("quotient fits") * 2f64.powi(-scale as i32)
}

/// Rooted-tree series truncated at order `N`.
#[derive(Debug, Clone)]
pub struct SeriesTruncation {
    counts: CountTable,
    // coeffs[k] = r_k as a float, coeffs[0] = 0
    coeffs: Vec<f64>,
}

impl SeriesTruncation {
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=MAX_TRUNCATION).contains(&order) {
            return Err(CensusError::InvalidInput(format!(
                "truncation order must lie in 1..={MAX_TRUNCATION}, got {order}"
            )));
        }
        Ok(Self::from_counts(rooted_counts(order)))
    }

    pub fn from_counts(counts: CountTable) -> Self {
        assert!(counts.max_n() <= MAX_TRUNCATION);
        let coeffs = counts
            .padded()
            .iter()
            .map(|c| c.to_f64().expect("coefficient fits in f64"))
            .collect();
        SeriesTruncation { counts, coeffs }
    }

    pub fn order(&self) -> usize {
        self.counts.max_n()
    }

    /// Exact coefficients `r_1..r_N`.
    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn coefficients_f64(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncated `r(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Truncated `r'(x)`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    /// `E(x) = sum_{k>=2} r(x^k)/k`, summed until the terms vanish.
    pub fn e_tail(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut xk = x;
        for k in 2..2000 {
            xk *= x;
            let term = self.eval(xk) / k as f64;
            sum += term;
            if term < f64::EPSILON * 1e-3 * sum {
                break;
            }
        }
        sum
    }

    /// `E'(x) = sum_{k>=2} x^{k-1} r'(x^k)`.
    pub fn e_tail_derivative(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut xk1 = 1.0;
        for _ in 2..2000 {
            xk1 *= x;
            let term = xk1 * self.eval_derivative(xk1 * x);
            sum += term;
            if term < f64::EPSILON * 1e-3 * sum {
                break;
            }
        }
        sum
    }

    /// `g(x) = x exp(1 + E(x)) - 1`, increasing on the bracket.
    pub fn characteristic(&self, x: f64) -> f64 {
        x * (1.0 + self.e_tail(x)).exp() - 1.0
    }
}

fn check_truncation(order: usize) -> Result<()> {
    if !(MIN_TRUNCATION..=MAX_TRUNCATION).contains(&order) {
        return Err(CensusError::InvalidInput(format!(
            "truncation order must lie in {MIN_TRUNCATION}..={MAX_TRUNCATION}, got {order}"
        )));
    }
    Ok(())
}

/// Root of `g` on `(0.3, 0.36)`: bisection with a secant proposal whenever
/// it stays inside the bracket, run to machine precision. Fails if the
/// endpoints do not bracket a sign change or if `|g(x0)| > tol`.
pub fn solve_singularity(order: usize, tol: f64) -> Result<f64> {
    check_truncation(order)?;
    if !(tol >= MIN_TOLERANCE) {
        return Err(CensusError::InvalidInput(format!(
            "tolerance must be at least {MIN_TOLERANCE:e}, got {tol:e}"
        )));
    }
    solve_on(&SeriesTruncation::new(order)?, tol)
}

pub fn solve_on(series: &SeriesTruncation, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = BRACKET;
    let (mut g_lo, mut g_hi) = (series.characteristic(lo), series.characteristic(hi));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(CensusError::NoSignChange { lo, hi, g_lo, g_hi });
    }
    let mut use_secant = true;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let secant = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        // alternate so a stalled secant side cannot slow convergence
        let x = if use_secant && secant > lo && secant < hi { secant } else { mid };
        use_secant = !use_secant;
        if x <= lo || x >= hi {
            break;
        }
        let gx = series.characteristic(x);
        if gx == 0.0 {
            lo = x;
            hi = x;
            g_lo = 0.0;
            break;
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
        } else {
            hi = x;
            g_hi = gx;
        }
        debug_assert!(g_lo <= 0.0 && g_hi > 0.0);
    }
    let (x0, gx0) = if g_lo.abs() <= g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    if gx0.abs() > tol {
        return Err(CensusError::Internal(format!(
            "singularity search ended at x = {x0} with |g| = {:e} > {tol:e}",
            gx0.abs()
        )));
    }
    Ok(x0)
}

fn b1_at(series: &SeriesTruncation, x0: f64) -> f64 {
    (2.0 * (1.0 + x0 * series.e_tail_derivative(x0)) / x0).sqrt()
}

/// `b1 = sqrt(2 (1 + x0 E'(x0)) / x0)`. The error estimate is the change
/// when the truncation is cut to three quarters, plus a rounding floor.
pub fn compute_b1(order: usize, x0: f64) -> Result<Estimate> {
    check_truncation(order)?;
    if !(x0 > BRACKET.0 && x0 < BRACKET.1) {
        return Err(CensusError::InvalidInput(format!("x0 = {x0} outside {BRACKET:?}")));
    }
    let full = b1_at(&SeriesTruncation::new(order)?, x0);
    let cut = b1_at(&SeriesTruncation::new(order * 3 / 4)?, x0);
    Ok(Estimate {
        value: full,
        error: (full - cut).abs() + 1e-12,
        method: "characteristic system",
    })
}

pub fn d_from_b1(b1: f64, x0: f64) -> f64 {
    b1 * x0.sqrt() / (2.0 * PI.sqrt())
}

/// `R_K(n) = sum_{j=0}^{K} (-1)^{K-j} (n+j)^K s_{n+j} / (j! (K-j)!)`,
/// which removes the `1/n .. 1/n^K` corrections from `s`. `s` is indexed
/// by order with `s[0]` unused.
pub fn richardson(s: &[f64], n: usize, depth: usize) -> f64 {
    assert!(n >= 1 && n + depth < s.len());
    let mut fact = vec![1.0f64; depth + 1];
    for i in 1..=depth {
        fact[i] = fact[i - 1] * i as f64;
    }
    (0..=depth)
        .map(|j| {
            let sign = if (depth - j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((n + j) as f64).powi(depth as i32) * s[n + j] / (fact[j] * fact[depth - j])
        })
        .sum()
}

/// Extrapolated limit of `s` using the final `depth + 1` terms. The error
/// estimate is the gap to the previous column plus the propagated rounding
/// when each term carries relative error `term_rel_error`; the weights grow
/// like `n^depth`, so the rounding term matters at large `n`.
pub fn richardson_limit(s: &[f64], depth: usize, term_rel_error: f64) -> (f64, f64) {
    let last = s.len() - 1;
    assert!(depth >= 1 && last > depth + 1);
    let n = last - depth;
    let value = richardson(s, n, depth);
    let previous = richardson(s, n + 1, depth - 1);
    let magnified: f64 = {
        let abs: Vec<f64> = s.iter().map(|v| v.abs()).collect();
        // the alternating signs are dropped by summing magnitudes
        let mut fact = 1.0;
        let mut total = 0.0;
        for j in 0..=depth {
            if j > 0 {
                fact *= j as f64;
            }
            let mut rest = 1.0;
            for i in 1..=depth - j {
                rest *= i as f64;
            }
            total += ((n + j) as f64).powi(depth as i32) * abs[n + j] / (fact * rest);
        }
        total
    };
    (value, (value - previous).abs() + magnified * term_rel_error)
}

fn check_extrapolation(max_n: usize, depth: usize) -> Result<()> {
    if !(MIN_EXTRAPOLATION_ORDER..=MAX_EXTRAPOLATION_ORDER).contains(&max_n) {
        return Err(CensusError::InvalidInput(format!(
            "extrapolation order must lie in {MIN_EXTRAPOLATION_ORDER}..={MAX_EXTRAPOLATION_ORDER}, got {max_n}"
        )));
    }
    if depth == 0 || depth > 8 {
        return Err(CensusError::InvalidInput(format!("Richardson depth must lie in 1..=8, got {depth}")));
    }
    Ok(())
}

/// `a_n = t_n n^{5/2} x0^n` and `d_n = r_n n^{3/2} x0^n` for `n = 1..=max_n`.
pub fn scaled_sequences(r: &CountTable, t: &CountTable, x0: f64) -> (Vec<f64>, Vec<f64>) {
    let lx = x0.ln();
    let mut a = vec![0.0; r.max_n() + 1];
    let mut d = vec![0.0; r.max_n() + 1];
    for n in 1..=r.max_n() {
        let base = n as f64 * lx;
        let ln_n = (n as f64).ln();
        a[n] = (ln_big(t.get(n)) + 2.5 * ln_n + base).exp();
        d[n] = (ln_big(r.get(n)) + 1.5 * ln_n + base).exp();
    }
    (a, d)
}

/// `(C, D)` with the default truncation and Richardson depth.
#[allow(non_snake_case)]
pub fn extrapolate_C_D(max_n: usize) -> Result<(Estimate, Estimate)> {
    let x0 = solve_singularity(DEFAULT_TRUNCATION, MIN_TOLERANCE)?;
    extrapolate_c_d_with(max_n, x0, DEFAULT_RICHARDSON_DEPTH)
}

pub fn extrapolate_c_d_with(max_n: usize, x0: f64, depth: usize) -> Result<(Estimate, Estimate)> {
    check_extrapolation(max_n, depth)?;
    let r = rooted_counts(max_n);
    let t = free_counts_from(&r);
    let (a, d) = scaled_sequences(&r, &t, x0);
    // each term is exp of a sum of logs near n |ln x0| in size
    let rel = 4.0 * f64::EPSILON * max_n as f64 * x0.ln().abs();
    let (c_val, c_err) = richardson_limit(&a, depth, rel);
    let (d_val, d_err) = richardson_limit(&d, depth, rel);
    Ok((
        Estimate {
            value: c_val,
            error: c_err,
            method: "richardson on t_n n^(5/2) x0^n",
        },
        Estimate {
            value: d_val,
            error: d_err,
            method: "richardson on r_n n^(3/2) x0^n",
        },
    ))
}

/// Both routes to `mu_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuEstimate {
    /// Extrapolated `r_n / (n t_n)`; the headline value.
    pub sequence: Estimate,
    /// `D / C`.
    pub ratio: Estimate,
}

impl MuEstimate {
    pub fn value(&self) -> f64 {
        self.sequence.value
    }

    pub fn routes_agree(&self) -> bool {
        (self.sequence.value - self.ratio.value).abs() <= self.sequence.error + self.ratio.error
    }
}

/// `r_n / (n t_n)` for `n = 1..=max_n`, index 0 unused.
pub fn mean_fraction_sequence(r: &CountTable, t: &CountTable) -> Vec<f64> {
    let mut s = vec![0.0; r.max_n() + 1];
    for n in 1..=r.max_n() {
        s[n] = ratio_to_f64(r.get(n), &(t.get(n) * BigUint::from(n)));
    }
    s
}

pub fn estimate_mu_r(max_n: usize) -> Result<MuEstimate> {
    let x0 = solve_singularity(DEFAULT_TRUNCATION, MIN_TOLERANCE)?;
    estimate_mu_r_with(max_n, x0, DEFAULT_RICHARDSON_DEPTH)
}

pub fn estimate_mu_r_with(max_n: usize, x0: f64, depth: usize) -> Result<MuEstimate> {
    let (c, d) = extrapolate_c_d_with(max_n, x0, depth)?;
    let r = rooted_counts(max_n);
    let t = free_counts_from(&r);
    let (value, error) = richardson_limit(&mean_fraction_sequence(&r, &t), depth, f64::EPSILON);
    let ratio = d.value / c.value;
    Ok(MuEstimate {
        sequence: Estimate {
            value,
            error,
            method: "richardson on r_n/(n t_n)",
        },
        ratio: Estimate {
            value: ratio,
            error: ratio * (c.error / c.value + d.error / d.value),
            method: "D/C",
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub truncation: usize,
    pub max_n: usize,
    pub richardson_depth: usize,
    pub x0: Estimate,
    pub b1: Estimate,
    #[serde(rename = "C")]
    pub c: Estimate,
    #[serde(rename = "D")]
    pub d: Estimate,
    #[serde(rename = "D_from_b1")]
    pub d_from_b1: Estimate,
    pub mu_r: MuEstimate,
}

impl AsymptoticConstants {
    pub fn compute(truncation: usize, max_n: usize) -> Result<Self> {
        Self::compute_with_depth(truncation, max_n, DEFAULT_RICHARDSON_DEPTH)
    }

    pub fn compute_with_depth(truncation: usize, max_n: usize, depth: usize) -> Result<Self> {
        check_truncation(truncation)?;
        check_extrapolation(max_n, depth)?;
        let x0 = solve_singularity(truncation, MIN_TOLERANCE)?;
        let x0_cut = solve_singularity(truncation * 3 / 4, MIN_TOLERANCE).unwrap_or(x0);
        let x0_est = Estimate {
            value: x0,
            error: (x0 - x0_cut).abs() + f64::EPSILON * x0,
            method: "bracketed root of x exp(1 + E(x)) - 1",
        };
        let b1 = compute_b1(truncation, x0)?;
        let db1 = d_from_b1(b1.value, x0);
        let d_from_b1 = Estimate {
            value: db1,
            error: db1 * (b1.error / b1.value + 0.5 * x0_est.error / x0),
            method: "b1 sqrt(x0) / (2 sqrt(pi))",
        };
        let (c, d) = extrapolate_c_d_with(max_n, x0, depth)?;
        let mu_r = estimate_mu_r_with(max_n, x0, depth)?;
        Ok(AsymptoticConstants {
            truncation,
            max_n,
            richardson_depth: depth,
            x0: x0_est,
            b1,
            c,
            d,
            d_from_b1,
            mu_r,
        })
    }

    /// Whether the two estimates of `D` agree within their errors.
    pub fn d_routes_agree(&self) -> bool {
        (self.d.value - self.d_from_b1.value).abs() <= self.d.error + self.d_from_b1.error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_signs() {
        let s = SeriesTruncation::new(100).unwrap();
        assert!(s.characteristic(0.30) < 0.0);
        assert!(s.characteristic(0.36) > 0.0);
        assert!(s.eval(0.3) < 1.0);
        assert!(s.eval_derivative(0.1) > 0.0);
    }

    #[test]
    fn singularity_and_b1() {
        let x0 = solve_singularity(100, 1e-12).unwrap();
        assert!((x0 - 0.3383219).abs() < 1e-6, "{x0}");
        let x0_60 = solve_singularity(60, 1e-12).unwrap();
        assert!((x0 - x0_60).abs() < 1e-10);
        let b1 = compute_b1(100, x0).unwrap();
        assert!((b1.value - 2.6811266).abs() < 1e-3, "{b1:?}");
        assert!((d_from_b1(b1.value, x0) - 0.4399).abs() < 5e-3);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_singularity(59, 1e-12).is_err());
        assert!(solve_singularity(100, 1e-13).is_err());
        assert!(extrapolate_c_d_with(59, 0.338, 3).is_err());
        assert!(extrapolate_c_d_with(100, 0.338, 0).is_err());
    }

    #[test]
    fn conversions() {
        let big = BigUint::from(3u32).pow(500);
        assert!((ln_big(&big) - 500.0 * 3f64.ln()).abs() < 1e-9);
        assert_eq!(ratio_to_f64(&BigUint::from(9u32), &BigUint::from(15u32)), 0.6);
        let q = ratio_to_f64(&BigUint::from(2u32).pow(300), &(BigUint::from(3u32) * BigUint::from(2u32).pow(300)));
        assert!((q - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn richardson_removes_polynomial_corrections() {
        let s: Vec<f64> = (0..40)
            .map(|n| if n == 0 { 0.0 } else { 2.0 + 1.0 / n as f64 - 3.0 / (n * n) as f64 })
            .collect();
        let (v, _) = richardson_limit(&s, 3, f64::EPSILON);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn default_constants_are_consistent() {
        let k = AsymptoticConstants::compute(DEFAULT_TRUNCATION, DEFAULT_EXTRAPOLATION_ORDER).unwrap();
        assert!((k.c.value - 0.5349).abs() < 1e-2, "{k:?}");
        assert!((k.d.value - 0.4399).abs() < 1e-2, "{k:?}");
        assert!(k.d_routes_agree(), "{k:?}");
        assert!(k.mu_r.routes_agree(), "{k:?}");
        assert!((0.81..=0.83).contains(&k.mu_r.value()));
        // raw d_n overshoots and then decreases toward its limit
        let r = rooted_counts(200);
        let (_, d) = scaled_sequences(&r, &free_counts_from(&r), k.x0.value);
        assert!(d[10..].windows(2).all(|w| w[0] > w[1]));
        assert!(d[200] > k.d.value);
    }

    #[test]
    fn mean_fraction_anchor() {
        let r = rooted_counts(5);
        let t = free_counts_from(&r);
        assert_eq!(mean_fraction_sequence(&r, &t)[5], 0.6);
    }
}
