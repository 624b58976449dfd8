//! Monte Carlo and exhaustive experiments.
//!
//! Sample `i` of an experiment draws from its own stream
//! `RngState::new(seed).stream(i)`, and results are merged in index order.
//! A run is therefore a function of `(seed, n, samples)` alone; the worker
//! count changes only the wall time.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::counting::{orbit_distribution, DistributionTable, TreeKind};
use crate::enumeration::{enumerate_free, enumerate_rooted};
use crate::error::{CensusError, Result};
use crate::orbits::{has_symmetrical_edge, induces_connected, orbits_free, orbits_rooted};
use crate::par::{try_map_range, Execution};
use crate::patterns::{count_pattern, Pattern};
use crate::sampling::{FreeSampler, RngState, RootedSampler, SampleReport};
use crate::stats::{standardize, NormalityPolicy, NormalityVerdict, SampleStats};
use crate::tree::{FreeTree, RootedTree};

/// Largest order for exhaustive experiments.
pub const EXHAUSTIVE_BOUND: usize = 16;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Sample,
    /// Every tree of the given order once.
    Exhaustive,
}

/// `edge`, `chair`, `star<d>` (center degree `d`) or `path<k>` (`k` vertices).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PatternSpec {
    Edge,
    Chair,
    Star(usize),
    Path(usize),
}

impl PatternSpec {
    pub fn build(&self) -> Result<Pattern> {
        match *self {
            PatternSpec::Edge => Ok(Pattern::edge()),
            PatternSpec::Chair => Ok(Pattern::chair()),
            PatternSpec::Star(d) => Pattern::star(d),
            PatternSpec::Path(k) => Pattern::path(k),
        }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::Edge => f.write_str("edge"),
            PatternSpec::Chair => f.write_str("chair"),
            PatternSpec::Star(d) => write!(f, "star{d}"),
            PatternSpec::Path(k) => write!(f, "path{k}"),
        }
    }
}

impl FromStr for PatternSpec {
    type Err = CensusError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            CensusError::InvalidInput(format!(
                "unknown pattern {s:?} (expected edge, chair, star<d> or path<k>)"
            ))
        };
        let spec = match s {
            "edge" => PatternSpec::Edge,
            "chair" => PatternSpec::Chair,
            _ => {
                if let Some(d) = s.strip_prefix("star") {
                    PatternSpec::Star(d.parse().map_err(|_| bad())?)
                } else if let Some(k) = s.strip_prefix("path") {
                    PatternSpec::Path(k.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        };
        spec.build()?;
        Ok(spec)
    }
}

impl TryFrom<String> for PatternSpec {
    type Error = CensusError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PatternSpec> for String {
    fn from(p: PatternSpec) -> String {
        p.to_string()
    }
}

fn default_id() -> String {
    "experiment".into()
}

fn default_samples() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub kind: TreeKind,
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pattern: Option<PatternSpec>,
    /// `0` uses every core, `1` runs sequentially.
    #[serde(default)]
    pub workers: usize,
    /// JSON summary destination.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Optional per-sample CSV destination.
    #[serde(default)]
    pub samples_csv: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
}

impl ExperimentConfig {
    pub fn new(kind: TreeKind, n: usize, samples: u64, seed: u64) -> Self {
        ExperimentConfig {
            id: default_id(),
            kind,
            n,
            samples,
            seed,
            pattern: None,
            workers: 0,
            out: None,
            samples_csv: None,
            mode: Mode::Sample,
        }
    }

    pub fn with_pattern(mut self, pattern: PatternSpec) -> Self {
        self.pattern = Some(pattern);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn exhaustive(mut self) -> Self {
        self.mode = Mode::Exhaustive;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| CensusError::InvalidInput(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(CensusError::InvalidInput("n must be at least 1".into()));
        }
        if self.samples == 0 && self.mode == Mode::Sample {
            return Err(CensusError::InvalidInput("samples must be at least 1".into()));
        }
        if self.mode == Mode::Exhaustive && self.n > EXHAUSTIVE_BOUND {
            return Err(CensusError::BoundExceeded {
                what: "exhaustive experiment",
                n: self.n,
                bound: EXHAUSTIVE_BOUND,
            });
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::from_workers(self.workers)
    }
}

/// Applies `f` to every tree the config asks for, in a fixed order, and
/// returns the results with the sampling bookkeeping. Free trees are handed
/// over as free trees and rooted trees as rooted trees.
fn collect<T, F>(cfg: &ExperimentConfig, f: F) -> Result<(Vec<T>, SampleReport)>
where
    T: Send,
    F: Fn(Drawn<'_>) -> Result<T> + Sync + Send,
{
    cfg.validate()?;
    let n = cfg.n;
    match cfg.mode {
        Mode::Exhaustive => {
            let mut out = Vec::new();
            let mut err = None;
            let mut visit = |d: Drawn<'_>| {
                if err.is_none() {
                    match f(d) {
                        Ok(v) => out.push(v),
                        Err(e) => err = Some(e),
                    }
                }
            };
            match cfg.kind {
                TreeKind::Free => enumerate_free(n, |t| visit(Drawn::Free(t)))?,
                TreeKind::Rooted => enumerate_rooted(n, |t| visit(Drawn::Rooted(t)))?,
            };
            if let Some(e) = err {
                return Err(e);
            }
            let report = SampleReport {
                n,
                samples: out.len() as u64,
                draws: 0,
                rejections: 0,
                seed: cfg.seed,
            };
            Ok((out, report))
        }
        Mode::Sample => {
            let streams = RngState::new(cfg.seed);
            let rows: Vec<(T, u64)> = match cfg.kind {
                TreeKind::Rooted => {
                    let sampler = RootedSampler::new(n);
                    try_map_range(cfg.samples, cfg.execution(), |i| {
                        let mut rng = streams.stream(i);
                        let t = sampler.sample(n, &mut rng)?;
                        Ok((f(Drawn::Rooted(&t))?, 1))
                    })?
                }
                TreeKind::Free => {
                    let sampler = FreeSampler::new(n);
                    try_map_range(cfg.samples, cfg.execution(), |i| {
                        let mut rng = streams.stream(i);
                        let d = sampler.sample(n, &mut rng)?;
                        Ok((f(Drawn::Free(&d.tree))?, d.draws))
                    })?
                }
            };
            let draws: u64 = rows.iter().map(|r| r.1).sum();
            let report = SampleReport {
                n,
                samples: cfg.samples,
                draws,
                rejections: draws - cfg.samples,
                seed: cfg.seed,
            };
            Ok((rows.into_iter().map(|r| r.0).collect(), report))
        }
    }
}

#[derive(Clone, Copy)]
enum Drawn<'a> {
    Free(&'a FreeTree),
    Rooted(&'a RootedTree),
}

/// One line of a per-sample CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub index: u64,
    pub value: u64,
}

pub fn write_samples_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CensusError::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| CensusError::Internal(e.to_string()))?;
    }
    w.flush()
        .map_err(|e| CensusError::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn rows(values: &[u64]) -> Vec<SampleRow> {
    values
        .iter()
        .enumerate()
        .map(|(i, &value)| SampleRow { index: i as u64, value })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub id: String,
    pub kind: TreeKind,
    pub n: usize,
    pub mode: Mode,
    /// Vertex classes per tree.
    pub classes: SampleStats,
    /// Vertex classes divided by `n`.
    pub fraction: SampleStats,
    pub sampling: SampleReport,
    #[serde(skip)]
    pub values: Vec<u64>,
}

impl OrbitReport {
    pub fn rows(&self) -> Vec<SampleRow> {
        rows(&self.values)
    }
}

/// Number of vertex classes `X_n` of uniform trees.
pub fn run_orbit_experiment(cfg: &ExperimentConfig) -> Result<OrbitReport> {
    let (values, sampling) = collect(cfg, |d| {
        Ok(match d {
            Drawn::Free(t) => orbits_free(t).class_count() as u64,
            Drawn::Rooted(t) => orbits_rooted(t).class_count() as u64,
        })
    })?;
    let n = cfg.n as f64;
    let fractions: Vec<f64> = values.iter().map(|&x| x as f64 / n).collect();
    Ok(OrbitReport {
        id: cfg.id.clone(),
        kind: cfg.kind,
        n: cfg.n,
        mode: cfg.mode,
        classes: SampleStats::from_counts(&values)?,
        fraction: SampleStats::compute(&fractions, Some(1.0 / n))?,
        sampling,
        values,
    })
}

/// Fixed-vertex facts about one free tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedProfile {
    pub n: usize,
    pub fixed: usize,
    pub classes: usize,
    /// `floor(n / 24)`.
    pub threshold: usize,
    pub exceeds: bool,
    /// Empty or connected.
    pub fixed_set_connected: bool,
    pub symmetrical_edge: bool,
}

pub fn fixed_vertex_profile(t: &FreeTree) -> FixedProfile {
    let orbits = orbits_free(t);
    let fixed = orbits.fixed_vertices();
    let threshold = t.n() / 24;
    FixedProfile {
        n: t.n(),
        fixed: fixed.len(),
        classes: orbits.class_count(),
        threshold,
        exceeds: fixed.len() > threshold,
        fixed_set_connected: induces_connected(t, &fixed),
        symmetrical_edge: has_symmetrical_edge(t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedRow {
    pub index: u64,
    pub fixed: usize,
    pub exceeds: bool,
    pub symmetrical_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedReport {
    pub id: String,
    pub n: usize,
    pub mode: Mode,
    pub fixed: SampleStats,
    pub threshold: usize,
    pub exceedances: u64,
    pub exceedance_fraction: f64,
    /// Wilson 95% interval for the exceedance probability.
    pub exceedance_interval: (f64, f64),
    pub connected_samples: u64,
    pub symmetrical_edge_samples: u64,
    pub sampling: SampleReport,
    #[serde(skip)]
    pub per_sample: Vec<FixedRow>,
}

/// Fixed vertices of uniform free trees against `floor(n / 24)`. A
/// disconnected nonempty fixed set is an internal error.
pub fn run_fixed_vertex_experiment(cfg: &ExperimentConfig) -> Result<FixedReport> {
    if cfg.kind != TreeKind::Free {
        return Err(CensusError::InvalidInput("the fixed-vertex experiment needs free trees".into()));
    }
    let (profiles, sampling) = collect(cfg, |d| {
        let Drawn::Free(t) = d else { unreachable!("free kind checked") };
        let p = fixed_vertex_profile(t);
        if !p.fixed_set_connected {
            return Err(CensusError::Internal(format!(
                "fixed set of a tree on {} vertices is not connected",
                p.n
            )));
        }
        Ok(p)
    })?;
    let total = profiles.len() as u64;
    let exceedances = profiles.iter().filter(|p| p.exceeds).count() as u64;
    let fixed: Vec<u64> = profiles.iter().map(|p| p.fixed as u64).collect();
    let per_sample = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| FixedRow {
            index: i as u64,
            fixed: p.fixed,
            exceeds: p.exceeds,
            symmetrical_edge: p.symmetrical_edge,
        })
        .collect();
    Ok(FixedReport {
        id: cfg.id.clone(),
        n: cfg.n,
        mode: cfg.mode,
        fixed: SampleStats::from_counts(&fixed)?,
        threshold: cfg.n / 24,
        exceedances,
        exceedance_fraction: exceedances as f64 / total as f64,
        exceedance_interval: crate::stats::wilson_interval(exceedances, total, crate::stats::Z_95),
        connected_samples: profiles.iter().filter(|p| p.fixed_set_connected).count() as u64,
        symmetrical_edge_samples: profiles.iter().filter(|p| p.symmetrical_edge).count() as u64,
        sampling,
        per_sample,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport {
    pub id: String,
    pub kind: TreeKind,
    pub n: usize,
    pub mode: Mode,
    pub pattern: String,
    pub counts: SampleStats,
    /// `(X - mean) / sd`; absent when every count is equal.
    pub standardized: Option<SampleStats>,
    pub degenerate: bool,
    pub normality: Option<NormalityVerdict>,
    pub sampling: SampleReport,
    #[serde(skip)]
    pub values: Vec<u64>,
}

impl PatternReport {
    pub fn rows(&self) -> Vec<SampleRow> {
        rows(&self.values)
    }
}

/// Occurrences `X_{n,M}` of the configured pattern in uniform trees.
pub fn run_pattern_experiment(cfg: &ExperimentConfig) -> Result<PatternReport> {
    let spec = cfg
        .pattern
        .as_ref()
        .ok_or_else(|| CensusError::InvalidInput("pattern experiment needs a pattern".into()))?;
    let pattern = spec.build()?;
    let (values, sampling) = collect(cfg, |d| {
        let c = match d {
            Drawn::Free(t) => count_pattern(t, &pattern),
            Drawn::Rooted(t) => count_pattern(&t.to_free(), &pattern),
        };
        c.to_u64()
            .ok_or_else(|| CensusError::Internal("pattern count exceeds 64 bits".into()))
    })?;
    pattern_report(cfg, spec, values, sampling)
}

fn pattern_report(
    cfg: &ExperimentConfig,
    spec: &PatternSpec,
    values: Vec<u64>,
    sampling: SampleReport,
) -> Result<PatternReport> {
    let counts = SampleStats::from_counts(&values)?;
    let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let standardized = match standardize(&floats) {
        Some(z) => Some(SampleStats::compute(&z, Some(1.0 / counts.std_dev()))?),
        None => None,
    };
    let normality = standardized.as_ref().map(|s| NormalityPolicy::default().check(s));
    Ok(PatternReport {
        id: cfg.id.clone(),
        kind: cfg.kind,
        n: cfg.n,
        mode: cfg.mode,
        pattern: spec.to_string(),
        degenerate: counts.degenerate,
        counts,
        standardized,
        normality,
        sampling,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveReport {
    pub kind: TreeKind,
    pub n: usize,
    /// `(classes, trees)` pairs.
    pub counts: Vec<(usize, String)>,
    /// `(classes, probability)` as exact fractions `"p/q"`.
    pub probabilities: Vec<(usize, String)>,
    pub mean_exact: String,
    pub stats: SampleStats,
    #[serde(skip)]
    pub table: DistributionTable,
}

/// Exact distribution of the number of vertex classes over all trees of
/// order `n`.
pub fn run_exhaustive_distribution(kind: TreeKind, n: usize) -> Result<ExhaustiveReport> {
    let table = orbit_distribution(kind, n)?;
    let mut values = Vec::new();
    for (&k, c) in &table.counts {
        let c = c.to_usize().expect("enumerable counts fit in memory");
        values.extend(std::iter::repeat_n(k as u64, c));
    }
    let mean = table.mean();
    Ok(ExhaustiveReport {
        kind,
        n,
        counts: table.counts.iter().map(|(&k, c)| (k, c.to_string())).collect(),
        probabilities: table
            .probabilities()
            .into_iter()
            .map(|(k, p)| (k, format!("{}/{}", p.numer(), p.denom())))
            .collect(),
        mean_exact: format!("{}/{}", mean.numer(), mean.denom()),
        stats: SampleStats::from_counts(&values)?,
        table,
    })
}
