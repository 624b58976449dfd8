//! End-to-end acceptance checks. Each test prints one `[PASS]`/`[FAIL]`
//! line (run with `--nocapture` to see them) and then asserts.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::Rng;

use tree_census::asymptotics::{
    compute_b1, d_from_b1, estimate_mu_r, extrapolate_C_D, solve_singularity, DEFAULT_EXTRAPOLATION_ORDER,
    DEFAULT_TRUNCATION,
};
use tree_census::canon::{canonical_free_code, canonical_rooted_code};
use tree_census::counting::{
    free_counts, mean_orbits_exact, orbit_distribution, rooted_counts, rooted_counts_via_exp, ExactRatio, TreeKind,
};
use tree_census::enumeration::{enumerate_free, enumerate_rooted};
use tree_census::experiments::{
    run_fixed_vertex_experiment, run_orbit_experiment, run_pattern_experiment, ExperimentConfig, PatternSpec,
};
use tree_census::orbits::{brute_force_orbits_free, brute_force_orbits_rooted, orbits_free, orbits_rooted};
use tree_census::patterns::{count_pattern, count_pattern_oracle, Pattern};
use tree_census::sampling::{FreeSampler, RngState, RootedSampler};
use tree_census::stats::{chi_square_test, NormalityPolicy, SampleStats};

fn report(ok: bool, name: &str, detail: String, elapsed: Duration) {
    println!(
        "[{}] {name}: {detail} ({:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

#[test]
fn counts_match_enumeration() {
    let start = Instant::now();
    let r = rooted_counts(16);
    let t = free_counts(16);
    let mut mismatches = Vec::new();
    for n in 1..=16 {
        let rooted = enumerate_rooted(n, |_| {}).unwrap();
        let free = enumerate_free(n, |_| {}).unwrap();
        if &rooted != r.get(n) || &free != t.get(n) {
            mismatches.push(n);
        }
    }
    let anchors = r.get(16) == &BigUint::from(235381u32) && t.get(16) == &BigUint::from(19320u32);
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && anchors && elapsed < Duration::from_secs(60);
    report(
        ok,
        "exact counts equal exhaustive enumeration, n <= 16",
        format!("r16 = {}, t16 = {}, mismatches {mismatches:?}", r.get(16), t.get(16)),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn recurrence_matches_exp_iteration() {
    let start = Instant::now();
    let a = rooted_counts(64);
    let b = rooted_counts_via_exp(64);
    let elapsed = start.elapsed();
    let ok = a == b && elapsed < Duration::from_secs(5);
    report(
        ok,
        "divisor-sum recurrence equals exp fixed point, n <= 64",
        format!("r64 = {}", a.get(64)),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn mean_orbit_identity() {
    let start = Instant::now();
    let r = rooted_counts(14);
    let t = free_counts(14);
    let mut bad = Vec::new();
    for n in 1..=14 {
        let mean = mean_orbits_exact(n);
        let identity = &mean * ExactRatio::from_integer(t.get(n).clone()) == ExactRatio::from_integer(r.get(n).clone());
        let dist = orbit_distribution(TreeKind::Free, n).unwrap();
        if !identity || &dist.total() != t.get(n) || dist.mean() != mean {
            bad.push(n);
        }
    }
    let elapsed = start.elapsed();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(120);
    report(
        ok,
        "mean classes times t_n equals r_n and distribution rows sum to t_n, n <= 14",
        format!("failures at {bad:?}"),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn fast_orbits_match_brute_force() {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut bad = 0u64;
    for n in 1..=8 {
        enumerate_free(n, |t| {
            checked += 1;
            if orbits_free(t) != brute_force_orbits_free(t, 8).unwrap() {
                bad += 1;
            }
        })
        .unwrap();
        enumerate_rooted(n, |t| {
            checked += 1;
            if orbits_rooted(t) != brute_force_orbits_rooted(t, 8).unwrap() {
                bad += 1;
            }
        })
        .unwrap();
    }
    let elapsed = start.elapsed();
    let ok = bad == 0 && elapsed < Duration::from_secs(60);
    report(
        ok,
        "orbit partitions equal brute-force automorphism orbits, n <= 8",
        format!("{checked} trees, {bad} mismatches"),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn constants_match_published_values() {
    let start = Instant::now();
    let x0 = solve_singularity(DEFAULT_TRUNCATION, 1e-12).unwrap();
    let b1 = compute_b1(DEFAULT_TRUNCATION, x0).unwrap();
    let (c, d) = extrapolate_C_D(DEFAULT_EXTRAPOLATION_ORDER).unwrap();
    let elapsed = start.elapsed();
    let ok = (x0 - 0.3383219).abs() <= 1e-6
        && (b1.value - 2.6811266).abs() <= 1e-3
        && (c.value - 0.5349).abs() <= 1e-2
        && (d.value - 0.4399).abs() <= 1e-2
        && (d_from_b1(b1.value, x0) - 0.4399).abs() <= 5e-3
        && elapsed < Duration::from_secs(10);
    report(
        ok,
        "x0, b1, C and D",
        format!(
            "x0 = {x0:.10}, b1 = {:.7} +- {:.1e}, C = {:.6} +- {:.1e}, D = {:.6} +- {:.1e}",
            b1.value, b1.error, c.value, c.error, d.value, d.error
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn mu_r_by_both_routes() {
    let start = Instant::now();
    let mu = estimate_mu_r(DEFAULT_EXTRAPOLATION_ORDER).unwrap();
    let elapsed = start.elapsed();
    let range = 0.81..=0.83;
    let ok = range.contains(&mu.sequence.value) && range.contains(&mu.ratio.value) && elapsed < Duration::from_secs(10);
    report(
        ok,
        "mu_r from r_n/(n t_n) and from D/C",
        format!(
            "sequence {:.6} +- {:.1e}, ratio {:.6} +- {:.1e}",
            mu.sequence.value, mu.sequence.error, mu.ratio.value, mu.ratio.error
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn free_orbit_fraction_at_500() {
    let start = Instant::now();
    let rep = run_orbit_experiment(&ExperimentConfig::new(TreeKind::Free, 500, 2000, 20240501)).unwrap();
    let elapsed = start.elapsed();
    let f = &rep.fraction;
    let ok = (0.80..=0.84).contains(&f.mean) && f.std_error < 0.005 && elapsed < Duration::from_secs(300);
    report(
        ok,
        "mean classes / n for free trees, n = 500, 2000 samples",
        format!(
            "mean {:.4}, se {:.5}, {} rooted draws",
            f.mean, f.std_error, rep.sampling.draws
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn fixed_vertices_at_200() {
    let start = Instant::now();
    let rep = run_fixed_vertex_experiment(&ExperimentConfig::new(TreeKind::Free, 200, 1000, 20240502)).unwrap();
    let elapsed = start.elapsed();
    let ok = rep.exceedance_fraction >= 0.99 && rep.connected_samples == 1000 && elapsed < Duration::from_secs(120);
    report(
        ok,
        "more than floor(n/24) fixed vertices, n = 200, 1000 samples",
        format!(
            "fraction {:.3} (95% {:.3}..{:.3}), mean fixed {:.1}, connected {}/1000",
            rep.exceedance_fraction, rep.exceedance_interval.0, rep.exceedance_interval.1, rep.fixed.mean,
            rep.connected_samples
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn samplers_are_uniform() {
    let start = Instant::now();
    let streams = RngState::new(20240503);

    let rooted = RootedSampler::new(6);
    let mut classes: HashMap<_, u64> = HashMap::new();
    enumerate_rooted(6, |t| {
        classes.insert(canonical_rooted_code(t), 0);
    })
    .unwrap();
    for i in 0..20000 {
        let t = rooted.sample(6, &mut streams.stream(i)).unwrap();
        *classes.get_mut(&canonical_rooted_code(&t)).expect("known class") += 1;
    }
    let observed: Vec<u64> = classes.values().copied().collect();
    let rooted_chi = chi_square_test(&observed, &[1.0 / 20.0; 20]).unwrap();

    let free = FreeSampler::new(7);
    let mut classes: HashMap<_, u64> = HashMap::new();
    enumerate_free(7, |t| {
        classes.insert(canonical_free_code(t), 0);
    })
    .unwrap();
    let mut draws = 0u64;
    for i in 0..22000 {
        let d = free.sample(7, &mut streams.stream(1_000_000 + i)).unwrap();
        draws += d.draws;
        *classes.get_mut(&canonical_free_code(&d.tree)).expect("known class") += 1;
    }
    let observed: Vec<u64> = classes.values().copied().collect();
    let free_chi = chi_square_test(&observed, &[1.0 / 11.0; 11]).unwrap();

    // every rooted draw is accepted independently with probability t_7 / r_7 = 11/48
    let p = 11.0 / 48.0;
    let rejection = (draws - 22000) as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    let z = (rejection - (1.0 - p)) / se;

    let elapsed = start.elapsed();
    let ok = rooted_chi.passes(1e-3)
        && free_chi.passes(1e-3)
        && z.abs() <= 3.0
        && classes.len() == 11
        && elapsed < Duration::from_secs(60);
    report(
        ok,
        "rooted n = 6 and free n = 7 samplers are uniform",
        format!(
            "rooted chi2 {:.1} (p {:.3}), free chi2 {:.1} (p {:.3}), rejection {:.4} vs {:.4} (z {z:.2})",
            rooted_chi.statistic,
            rooted_chi.p_value,
            free_chi.statistic,
            free_chi.p_value,
            rejection,
            1.0 - p
        ),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn pattern_counts_match_subset_oracle() {
    let start = Instant::now();
    let patterns = [
        Pattern::edge(),
        Pattern::path(3).unwrap(),
        Pattern::path(4).unwrap(),
        Pattern::star(3).unwrap(),
        Pattern::star(4).unwrap(),
        Pattern::chair(),
    ];
    let mut checked = 0u64;
    let mut bad = 0u64;
    for n in 1..=9 {
        enumerate_free(n, |t| {
            for m in &patterns {
                checked += 1;
                if count_pattern(t, m) != count_pattern_oracle(t, m).unwrap() {
                    bad += 1;
                }
            }
        })
        .unwrap();
    }
    let elapsed = start.elapsed();
    let ok = bad == 0 && elapsed < Duration::from_secs(120);
    report(
        ok,
        "pattern counts equal the connected-subset oracle, n <= 9, 6 patterns",
        format!("{checked} pairs, {bad} mismatches"),
        elapsed,
    );
    assert!(ok);
}

#[test]
fn star_counts_look_normal() {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(TreeKind::Free, 400, 5000, 20240504).with_pattern(PatternSpec::Star(3));
    let rep = run_pattern_experiment(&cfg).unwrap();
    let z = rep.standardized.clone().expect("star counts vary");
    let verdict = NormalityPolicy::default().check(&z);

    let mut rng = RngState::new(20240505).stream(0);
    let control: Vec<f64> = (0..5000).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let control_stats = SampleStats::from_values(&control).unwrap();
    let control_verdict = NormalityPolicy::default().check(&control_stats);

    let elapsed = start.elapsed();
    let ok = verdict.passes() && !control_verdict.passes() && elapsed < Duration::from_secs(600);
    report(
        ok,
        "standardized star3 counts, free n = 400, 5000 samples, pass the normality policy; exponential control fails",
        format!(
            "mean {:.2}, var {:.2}, skew {:.3}, ex.kurt {:.3}, KS {:.4}; control skew {:.2}, KS {:.3}",
            rep.counts.mean,
            rep.counts.variance,
            z.skewness.unwrap(),
            z.excess_kurtosis.unwrap(),
            z.ks_distance.unwrap(),
            control_stats.skewness.unwrap(),
            control_stats.ks_distance.unwrap()
        ),
        elapsed,
    );
    assert!(ok);
}
