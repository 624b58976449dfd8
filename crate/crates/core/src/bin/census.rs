//! `census`: command-line front end for tree-census.
//!
//! Exit codes: 0 success, 2 invalid input, 3 feasibility bound refused,
//! 4 internal error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use tree_census::asymptotics::{
    AsymptoticConstants, DEFAULT_EXTRAPOLATION_ORDER, DEFAULT_RICHARDSON_DEPTH, DEFAULT_TRUNCATION,
};
use tree_census::canon::{canonical_free_code, canonical_rooted_code};
use tree_census::counting::{
    free_counts_from, orbit_distribution_bounded, rooted_counts, rooted_counts_via_exp, TreeKind,
    DISTRIBUTION_BOUND_FREE, DISTRIBUTION_BOUND_ROOTED,
};
use tree_census::enumeration::{enumerate_free_bounded, enumerate_rooted_bounded, ENUMERATION_BOUND};
use tree_census::experiments::{
    run_exhaustive_distribution, run_fixed_vertex_experiment, run_orbit_experiment,
    run_pattern_experiment, write_samples_csv, ExperimentConfig, Mode, PatternSpec,
};
use tree_census::par::Execution;
use tree_census::patterns::{count_pattern, Pattern};
use tree_census::sampling::{FreeSampler, RngState, RootedSampler, SampleReport};
use tree_census::text::{format_free_tree, format_rooted_tree, parse_free_tree, parse_rooted_tree};
use tree_census::tree::{FreeTree, RootedTree};
use tree_census::{CensusError, Result};

#[derive(Parser)]
#[command(name = "census", version, about = "Counting, enumeration, sampling and statistics for unlabeled trees")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads: 0 uses all cores, 1 runs sequentially.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format. Tree-producing commands default to the tree text
    /// format, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Experiment config (JSON object with the ExperimentConfig fields).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact numbers of rooted or free trees for n = 1..=max_n.
    Count {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        max_n: usize,
        /// Compute rooted counts by exp fixed-point iteration instead of the
        /// divisor-sum recurrence.
        #[arg(long)]
        via_exp: bool,
    },
    /// Exact distribution of the number of vertex classes at order n.
    Dist {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        /// Largest order to enumerate (defaults: 16 free, 15 rooted).
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Every tree of order n, one per isomorphism class.
    Enumerate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = ENUMERATION_BOUND)]
        bound: usize,
    },
    /// Uniform random trees of order n.
    Sample {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Occurrences of a pattern, counted as distinct vertex subsets. Internal
    /// pattern vertices (degree >= 2) must keep their degree in the tree.
    Pattern {
        /// Tree file ("-" for stdin).
        #[arg(long)]
        tree: PathBuf,
        /// Read the tree in the rooted format; the root is ignored.
        #[arg(long)]
        rooted: bool,
        #[command(flatten)]
        pattern: PatternArg,
    },
    /// Asymptotic constants x0, b1, C, D and mu_r with error estimates.
    Constants {
        #[arg(long, default_value_t = DEFAULT_EXTRAPOLATION_ORDER)]
        max_n: usize,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
        #[arg(long, default_value_t = DEFAULT_RICHARDSON_DEPTH)]
        depth: usize,
    },
    /// Number of vertex classes of uniform trees.
    OrbitExp(ExpArgs),
    /// Fixed vertices of uniform free trees against floor(n/24).
    FixedExp(ExpArgs),
    /// Pattern occurrences in uniform trees, with normality diagnostics.
    PatternExp(ExpArgs),
    /// Exact class-count distribution with summary statistics.
    ExactDist {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Rooted,
    Free,
}

impl From<KindArg> for TreeKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rooted => TreeKind::Rooted,
            KindArg::Free => TreeKind::Free,
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PatternArg {
    /// Pattern tree file in the free-tree format.
    #[arg(long = "pattern")]
    file: Option<PathBuf>,
    /// Star whose center has degree D.
    #[arg(long)]
    star: Option<usize>,
    /// Path on K vertices.
    #[arg(long)]
    path: Option<usize>,
    /// edge, chair, star<d> or path<k>.
    #[arg(long)]
    named: Option<String>,
}

#[derive(Args)]
struct ExpArgs {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    /// edge, chair, star<d> or path<k>.
    #[arg(long)]
    pattern: Option<String>,
    /// Enumerate every tree instead of sampling.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long)]
    id: Option<String>,
    /// Per-sample CSV destination.
    #[arg(long)]
    samples_csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("census: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CensusError {
    CensusError::InvalidInput(format!("{}: {e}", path.display()))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| io_err(path, e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| io_err(path, e))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CensusError::InvalidInput(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(0);
    let exec = Execution::from_workers(cli.workers.unwrap_or(0));
    let format = cli.format;
    match &cli.command {
        Command::Count { kind, max_n, via_exp } => {
            if *max_n == 0 {
                return Err(CensusError::InvalidInput("max-n must be at least 1".into()));
            }
            let r = if *via_exp { rooted_counts_via_exp(*max_n) } else { rooted_counts(*max_n) };
            let table = match TreeKind::from(*kind) {
                TreeKind::Rooted => r,
                TreeKind::Free => free_counts_from(&r),
            };
            let text = match format.unwrap_or(Format::Json) {
                Format::Csv => csv_text(
                    &["n", "count"],
                    table.iter().map(|(n, c)| vec![n.to_string(), c.to_string()]),
                ),
                Format::Json => to_json(&json!({
                    "kind": table.kind(),
                    "method": if *via_exp { "exp fixed point" } else { "divisor-sum recurrence" },
                    "counts": table.iter().map(|(n, c)| json!({"n": n, "count": c.to_string()})).collect::<Vec<_>>(),
                })),
            };
            emit(out, &text)
        }
        Command::Dist { kind, n, bound } => {
            let kind = TreeKind::from(*kind);
            let bound = bound.unwrap_or(match kind {
                TreeKind::Free => DISTRIBUTION_BOUND_FREE,
                TreeKind::Rooted => DISTRIBUTION_BOUND_ROOTED,
            });
            if *n == 0 {
                return Err(CensusError::InvalidInput("n must be at least 1".into()));
            }
            let table = orbit_distribution_bounded(kind, *n, bound, exec)?;
            let probs = table.probabilities();
            let text = match format.unwrap_or(Format::Json) {
                Format::Csv => csv_text(
                    &["classes", "trees", "probability"],
                    table.counts.iter().zip(&probs).map(|((k, c), (_, p))| {
                        vec![k.to_string(), c.to_string(), format!("{}/{}", p.numer(), p.denom())]
                    }),
                ),
                Format::Json => {
                    let mean = table.mean();
                    to_json(&json!({
                        "kind": kind,
                        "n": n,
                        "total": table.total().to_string(),
                        "mean": format!("{}/{}", mean.numer(), mean.denom()),
                        "rows": table.counts.iter().zip(&probs).map(|((k, c), (_, p))| json!({
                            "classes": k,
                            "trees": c.to_string(),
                            "probability": format!("{}/{}", p.numer(), p.denom()),
                        })).collect::<Vec<_>>(),
                    }))
                }
            };
            emit(out, &text)
        }
        Command::Enumerate { kind, n, bound } => {
            let mut free = Vec::new();
            let mut rooted = Vec::new();
            match TreeKind::from(*kind) {
                TreeKind::Free => {
                    enumerate_free_bounded(*n, *bound, |t| free.push(t.clone()))?;
                }
                TreeKind::Rooted => {
                    enumerate_rooted_bounded(*n, *bound, |t| rooted.push(t.clone()))?;
                }
            }
            emit(out, &render_trees(&free, &rooted, format, None))
        }
        Command::Sample { kind, n, count } => {
            if *n == 0 || *count == 0 {
                return Err(CensusError::InvalidInput("n and count must be at least 1".into()));
            }
            let streams = RngState::new(seed);
            let mut free = Vec::new();
            let mut rooted = Vec::new();
            let mut report = SampleReport {
                n: *n,
                samples: *count,
                seed,
                ..Default::default()
            };
            match TreeKind::from(*kind) {
                TreeKind::Free => {
                    let sampler = FreeSampler::new(*n);
                    let draws = tree_census::par::try_map_range(*count, exec, |i| {
                        sampler.sample(*n, &mut streams.stream(i))
                    })?;
                    for d in draws {
                        report.draws += d.draws;
                        free.push(d.tree);
                    }
                    report.rejections = report.draws - count;
                }
                TreeKind::Rooted => {
                    let sampler = RootedSampler::new(*n);
                    rooted = tree_census::par::try_map_range(*count, exec, |i| {
                        sampler.sample(*n, &mut streams.stream(i))
                    })?;
                    report.draws = *count;
                }
            }
            eprintln!(
                "census: {} samples, {} rooted draws, {} rejected",
                report.samples, report.draws, report.rejections
            );
            emit(out, &render_trees(&free, &rooted, format, Some(&report)))
        }
        Command::Pattern { tree, rooted, pattern } => {
            let text = read_input(tree)?;
            let t = if *rooted {
                parse_rooted_tree(&text)?.to_free()
            } else {
                parse_free_tree(&text)?
            };
            let m = build_pattern(pattern)?;
            let occurrences = count_pattern(&t, &m);
            let text = match format.unwrap_or(Format::Json) {
                Format::Csv => csv_text(
                    &["n", "pattern", "occurrences"],
                    [vec![t.n().to_string(), m.name().to_string(), occurrences.to_string()]],
                ),
                Format::Json => to_json(&json!({
                    "n": t.n(),
                    "pattern": m.name(),
                    "occurrences": occurrences.to_u64().map(|v| json!(v)).unwrap_or_else(|| json!(occurrences.to_string())),
                    "convention": "distinct vertex subsets",
                })),
            };
            emit(out, &text)
        }
        Command::Constants { max_n, truncation, depth } => {
            let k = AsymptoticConstants::compute_with_depth(*truncation, *max_n, *depth)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&k),
                Format::Csv => {
                    let rows = [
                        ("x0", k.x0),
                        ("b1", k.b1),
                        ("C", k.c),
                        ("D", k.d),
                        ("D_from_b1", k.d_from_b1),
                        ("mu_r", k.mu_r.sequence),
                        ("mu_r_ratio", k.mu_r.ratio),
                    ];
                    csv_text(
                        &["constant", "value", "error", "method"],
                        rows.iter().map(|(name, e)| {
                            vec![name.to_string(), e.value.to_string(), e.error.to_string(), e.method.to_string()]
                        }),
                    )
                }
            };
            emit(out, &text)
        }
        Command::OrbitExp(args) => {
            let cfg = experiment_config(cli, args)?;
            let rep = run_orbit_experiment(&cfg)?;
            finish_experiment(&cfg, format, &rep, &rep.rows())
        }
        Command::FixedExp(args) => {
            let mut cfg = experiment_config(cli, args)?;
            if args.kind.is_none() && cli.config.is_none() {
                cfg.kind = TreeKind::Free;
            }
            let rep = run_fixed_vertex_experiment(&cfg)?;
            finish_experiment(&cfg, format, &rep, &rep.per_sample)
        }
        Command::PatternExp(args) => {
            let cfg = experiment_config(cli, args)?;
            let rep = run_pattern_experiment(&cfg)?;
            finish_experiment(&cfg, format, &rep, &rep.rows())
        }
        Command::ExactDist { kind, n } => {
            let rep = run_exhaustive_distribution(TreeKind::from(*kind), *n)?;
            let text = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&rep),
                Format::Csv => csv_text(
                    &["classes", "trees", "probability"],
                    rep.counts
                        .iter()
                        .zip(&rep.probabilities)
                        .map(|((k, c), (_, p))| vec![k.to_string(), c.clone(), p.clone()]),
                ),
            };
            emit(out, &text)
        }
    }
}

fn build_pattern(arg: &PatternArg) -> Result<Pattern> {
    if let Some(path) = &arg.file {
        let shape = parse_free_tree(&read_input(path)?)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pattern".into());
        return Pattern::new(name, shape);
    }
    if let Some(d) = arg.star {
        return Pattern::star(d);
    }
    if let Some(k) = arg.path {
        return Pattern::path(k);
    }
    let name = arg.named.as_deref().expect("clap requires one pattern source");
    name.parse::<PatternSpec>()?.build()
}

/// The config file (if any) overridden by explicit flags.
fn experiment_config(cli: &Cli, args: &ExpArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_json(&read_input(path)?)?,
        None => {
            let n = args
                .n
                .ok_or_else(|| CensusError::InvalidInput("--n is required without --config".into()))?;
            let kind = args.kind.map(TreeKind::from).unwrap_or(TreeKind::Free);
            ExperimentConfig::new(kind, n, 1000, 0)
        }
    };
    if let Some(k) = args.kind {
        cfg.kind = k.into();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(p) = &args.pattern {
        cfg.pattern = Some(p.parse()?);
    }
    if args.exhaustive {
        cfg.mode = Mode::Exhaustive;
    }
    if let Some(id) = &args.id {
        cfg.id = id.clone();
    }
    if let Some(p) = &args.samples_csv {
        cfg.samples_csv = Some(p.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// JSON summary (or per-sample CSV with `--format csv`) to `cfg.out`, plus
/// the optional per-sample CSV file.
fn finish_experiment<T: Serialize, R: Serialize>(
    cfg: &ExperimentConfig,
    format: Option<Format>,
    summary: &T,
    rows: &[R],
) -> Result<()> {
    if let Some(path) = &cfg.samples_csv {
        write_samples_csv(path, rows)?;
    }
    let text = match format.unwrap_or(Format::Json) {
        Format::Json => to_json(summary),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| CensusError::Internal(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
        }
    };
    emit(cfg.out.as_deref(), &text)
}

fn render_trees(
    free: &[FreeTree],
    rooted: &[RootedTree],
    format: Option<Format>,
    report: Option<&SampleReport>,
) -> String {
    match format {
        None => {
            let mut s = String::new();
            for t in free {
                s.push_str(&format_free_tree(t));
            }
            for t in rooted {
                s.push_str(&format_rooted_tree(t));
            }
            s
        }
        Some(Format::Csv) => {
            let mut rows = Vec::new();
            for (i, t) in free.iter().enumerate() {
                for &(u, v) in t.edges() {
                    rows.push(vec![i.to_string(), u.to_string(), v.to_string()]);
                }
            }
            if !free.is_empty() {
                return csv_text(&["tree", "u", "v"], rows);
            }
            for (i, t) in rooted.iter().enumerate() {
                for (v, &p) in t.parent_array().iter().enumerate() {
                    rows.push(vec![i.to_string(), v.to_string(), p.to_string()]);
                }
            }
            csv_text(&["tree", "vertex", "parent"], rows)
        }
        Some(Format::Json) => {
            let trees: Vec<_> = free
                .iter()
                .map(|t| json!({"n": t.n(), "code": canonical_free_code(t).to_hex(), "edges": t.edges()}))
                .chain(rooted.iter().map(|t| {
                    json!({
                        "n": t.n(),
                        "root": t.root(),
                        "code": canonical_rooted_code(t).to_hex(),
                        "parents": t.parent_array(),
                    })
                }))
                .collect();
            match report {
                Some(r) => to_json(&json!({"report": r, "trees": trees})),
                None => to_json(&trees),
            }
        }
    }
}
