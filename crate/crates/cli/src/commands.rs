//! Subcommand implementations.

use std::cmp::Ordering;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use rifs_core::cache;
use rifs_core::commuting::{
    block_extremes, find_sink, interpolation_check, local_dim_interval, neck_distribution,
    step_log_bound, CommutingError,
};
use rifs_core::config::ConfigFile;
use rifs_core::field::{format_rational, parse_rational};
use rifs_core::lyapunov::{
    dimension_mc, isolated_point_scan, local_dim_mc, Policy,
};
use rifs_core::model::{
    cylinders, empirical_local_dim, sample_word, validate as validate_model, ModelError, Rifs,
    UsscOutcome, ValidateMode,
};
use rifs_core::netgraph::{
    covering_weight_oracle, enumerate as enumerate_graph, essential_class,
    finite_type_union_check, measure_vector, path_interval, validate_liveness, CvGraph,
    GraphError, PathStep,
};
use rifs_core::precision::Ctx;
use rifs_core::rng::stream;
use rifs_core::spectrum::{alpha_endpoints, beta, dimension_ussc, spectrum_curve, SpectrumError};

use crate::artifacts::{self, RunManifest};
use crate::{CommonOpts, ModeArg, PolicyArg};

/// Error carrying the process exit code: 1 for validation/general failures,
/// 2 for budget exhaustion.
pub struct CliError {
    inner: anyhow::Error,
    code: u8,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        self.code
    }

    fn validation(msg: impl Into<String>) -> Self {
        CliError { inner: anyhow!(msg.into()), code: 1 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if f.alternate() {
            write!(f, "{:#}", self.inner)
        } else {
            write!(f, "{}", self.inner)
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(inner: anyhow::Error) -> Self {
        CliError { inner, code: 1 }
    }
}

impl From<rifs_core::config::ConfigError> for CliError {
    fn from(e: rifs_core::config::ConfigError) -> Self {
        CliError { inner: anyhow::Error::new(e), code: 1 }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::BudgetExceeded(_, _) => 2,
            _ => 1,
        };
        CliError { inner: anyhow::Error::new(e), code }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        let code = match &e {
            GraphError::FiniteTypeBudgetExceeded { .. } => 2,
            GraphError::Model(ModelError::BudgetExceeded(_, _)) => 2,
            _ => 1,
        };
        CliError { inner: anyhow::Error::new(e), code }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        let code = match &e {
            SpectrumError::BudgetExceeded { .. } => 2,
            _ => 1,
        };
        CliError { inner: anyhow::Error::new(e), code }
    }
}

impl From<CommutingError> for CliError {
    fn from(e: CommutingError) -> Self {
        let code = match &e {
            CommutingError::ExplosionGuard { .. } | CommutingError::CapTooSmall { .. } => 2,
            CommutingError::Graph(GraphError::FiniteTypeBudgetExceeded { .. }) => 2,
            _ => 1,
        };
        CliError { inner: anyhow::Error::new(e), code }
    }
}

impl From<rifs_core::lyapunov::McError> for CliError {
    fn from(e: rifs_core::lyapunov::McError) -> Self {
        CliError { inner: anyhow::Error::new(e), code: 1 }
    }
}

pub type CliResult = Result<(), CliError>;

struct Loaded {
    cfg: ConfigFile,
    rifs: Rifs,
    seed: u64,
    ctx: Ctx,
    config_hash: String,
    graph_hash: String,
}

fn load(common: &CommonOpts) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))
        .map_err(CliError::from)?;
    let mut cfg = ConfigFile::from_json(&text)?;
    if let Some(theta) = &common.theta {
        cfg.theta = theta.split(',').map(|t| t.trim().to_string()).collect();
    }
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    let rifs = cfg.build()?;
    if let Some(warning) = rifs.field().warning() {
        eprintln!("warning: {warning}");
    }
    let seed = cfg.seed.unwrap_or(0);
    let ctx = Ctx::from_digits(common.precision_digits);
    let config_hash = cfg.config_hash()?;
    let graph_hash = cfg.graph_hash()?;
    Ok(Loaded { cfg, rifs, seed, ctx, config_hash, graph_hash })
}

/// Load the graph from cache or enumerate (and store when a dir is given).
fn get_graph(
    loaded: &Loaded,
    cap: usize,
    cache_dir: Option<&Path>,
) -> Result<(CvGraph, &'static str), CliError> {
    if let Some(dir) = cache_dir {
        if let Some(graph) = cache::load_graph(dir, &loaded.graph_hash, loaded.rifs.field()) {
            return Ok((graph, "hit"));
        }
    }
    let graph = enumerate_graph(&loaded.rifs, cap)?;
    if let Some(dir) = cache_dir {
        cache::save_graph(dir, &loaded.graph_hash, &graph)
            .with_context(|| format!("writing cache under {}", dir.display()))
            .map_err(CliError::from)?;
        return Ok((graph, "saved"));
    }
    Ok((graph, "computed"))
}

fn policy_of(arg: PolicyArg) -> Policy {
    match arg {
        PolicyArg::Leftmost => Policy::GivenPath(vec![0]),
        PolicyArg::Random => Policy::RandomChild,
        PolicyArg::Min => Policy::MinBlock,
        PolicyArg::Max => Policy::MaxBlock,
    }
}

fn manifest(command: &str, loaded: &Loaded) -> RunManifest {
    RunManifest::new(command, loaded.config_hash.clone(), loaded.cfg.seed)
}

fn maybe_write(
    out: &Option<PathBuf>,
    manifest: &RunManifest,
    result: &impl Serialize,
    extra: &[(&str, &str)],
) -> CliResult {
    if let Some(dir) = out {
        artifacts::write(dir, manifest, result, extra)?;
        println!("artifacts: {}", dir.display());
    }
    Ok(())
}

// ---- validate ----

pub fn validate(common: CommonOpts, mode: ModeArg) -> CliResult {
    let loaded = load(&common)?;
    let mode_core = match mode {
        ModeArg::Spectrum => ValidateMode::Spectrum,
        ModeArg::FiniteType => ValidateMode::FiniteType,
    };
    let report = validate_model(&loaded.rifs, mode_core);
    println!(
        "mode: {}",
        match mode_core {
            ValidateMode::Spectrum => "spectrum",
            ValidateMode::FiniteType => "finite-type",
        }
    );
    println!("hull [0,1]: {}", if report.hull_ok { "pass" } else { "FAIL" });
    for d in &report.hull_detail {
        println!("  {d}");
    }
    println!(
        "equicontractive: {}",
        if report.equicontractive { "yes" } else { "no" }
    );
    match &report.ussc {
        UsscOutcome::Pass => println!("USSC: pass"),
        UsscOutcome::FailInconclusive { system, first, second } => println!(
            "USSC: fail (inconclusive): system {} images {} and {} overlap or touch on the hull",
            system + 1,
            first + 1,
            second + 1
        ),
    }
    println!("regular: {}", if report.regular { "yes" } else { "no" });
    let passed = report.passed();
    println!("result: {}", if passed { "PASS" } else { "FAIL" });

    let m = manifest("validate", &loaded).param("mode", format!("{mode_core:?}"));
    maybe_write(&common.out, &m, &report, &[])?;
    if passed {
        Ok(())
    } else {
        Err(CliError::validation("validation failed"))
    }
}

// ---- spectrum ----

pub fn spectrum(common: CommonOpts, q_min: f64, q_max: f64, q_step: f64, cap: usize) -> CliResult {
    let loaded = load(&common)?;
    let report = validate_model(&loaded.rifs, ValidateMode::Spectrum);
    if report.ussc != UsscOutcome::Pass {
        eprintln!("warning: USSC check did not pass; the spectrum formulas assume separation");
    }
    if q_step <= 0.0 || q_max <= q_min {
        return Err(CliError::validation("need q_min < q_max and q_step > 0"));
    }
    let mut grid = Vec::new();
    let mut q = q_min;
    while q <= q_max + 1e-12 {
        grid.push(q);
        q += q_step;
    }
    let curve = spectrum_curve(&loaded.rifs, &grid, &loaded.ctx, cap)?;

    let mut csv = String::from("q,beta,alpha,f,residual\n");
    for s in &curve.samples {
        csv.push_str(&format!("{},{},{},{},{}\n", s.q, s.beta, s.alpha, s.f, s.residual));
    }
    print!("{csv}");
    eprintln!(
        "dim_K = {:.12}; alpha in [{:.12}, {:.12}]; {} minimizing / {} maximizing vectors",
        curve.dim_k,
        curve.endpoints.alpha_min,
        curve.endpoints.alpha_max,
        curve.endpoints.argmin.len(),
        curve.endpoints.argmax.len()
    );

    let m = manifest("spectrum", &loaded)
        .param("q_min", q_min)
        .param("q_max", q_max)
        .param("q_step", q_step)
        .param("cap", cap)
        .param("precision_digits", common.precision_digits);
    maybe_write(&common.out, &m, &curve, &[("spectrum.csv", &csv)])
}

// ---- enumerate ----

pub fn enumerate(
    common: CommonOpts,
    cap: usize,
    cache_dir: Option<PathBuf>,
    liveness: bool,
    pooled: bool,
) -> CliResult {
    let loaded = load(&common)?;
    if pooled {
        let count = finite_type_union_check(&loaded.rifs, cap)?;
        println!("pooled-contraction system is finite type: {count} reduced characteristic vectors");
        println!("the full system is therefore finite type");
        let m = manifest("enumerate", &loaded).param("pooled", true).param("cap", cap);
        return maybe_write(&common.out, &m, &json!({ "pooled_vector_count": count }), &[]);
    }
    let (graph, cache_state) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    println!("reduced characteristic vectors: {}", graph.vector_count());
    if graph.has_gap_class {
        println!(
            "  net-interval classes: {} (plus one class for uncovered gap windows)",
            graph.node_count()
        );
    }
    let max_level = graph.nodes.iter().map(|n| n.level).max().unwrap_or(0);
    println!("  discovered across {} levels", max_level + 1);
    println!("cache: {cache_state}");
    let mut liveness_failures = Vec::new();
    if liveness {
        liveness_failures = validate_liveness(&graph, &loaded.rifs, 14, 3, loaded.seed)?;
        if liveness_failures.is_empty() {
            println!("liveness: every class is hit by a deep cylinder");
        } else {
            println!("liveness: NO witness found for classes {liveness_failures:?}");
        }
    }

    let m = manifest("enumerate", &loaded)
        .param("cap", cap)
        .param("liveness", liveness)
        .param("graph_hash", &loaded.graph_hash);
    let result = json!({
        "vector_count": graph.vector_count(),
        "node_count": graph.node_count(),
        "has_gap_class": graph.has_gap_class,
        "liveness_failures": liveness_failures,
        "nodes": graph.nodes.iter().map(|n| json!({
            "length": n.cv.length.to_string(),
            "neighbours": n.cv.neighbours.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "level": n.level,
        })).collect::<Vec<_>>(),
    });
    maybe_write(&common.out, &m, &result, &[])
}

// ---- essential ----

pub fn essential(common: CommonOpts, cap: usize, cache_dir: Option<PathBuf>) -> CliResult {
    let loaded = load(&common)?;
    let (graph, _) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    let ess = essential_class(&graph)?;
    println!("essential class: {} of {} classes", ess.nodes.len(), graph.node_count());
    for &id in &ess.nodes {
        let cv = &graph.nodes[id].cv;
        let nbrs: Vec<String> = cv.neighbours.iter().map(|v| v.to_string()).collect();
        println!("  [{id}] ({}, ({}))", cv.length, nbrs.join(", "));
    }
    let n = ess.nodes.len();
    for (letter, mat) in ess.count_matrices.iter().enumerate() {
        println!("count matrix, letter {}:", letter + 1);
        for row in 0..n {
            let cells: Vec<String> = (0..n).map(|c| mat[row * n + c].to_string()).collect();
            println!("  [ {} ]", cells.join(" "));
        }
    }
    let m = manifest("essential", &loaded).param("cap", cap);
    maybe_write(&common.out, &m, &ess, &[])
}

// ---- dimension ----

pub fn dimension(
    common: CommonOpts,
    depth: usize,
    trials: usize,
    cap: usize,
    cache_dir: Option<PathBuf>,
) -> CliResult {
    let loaded = load(&common)?;
    let (graph, _) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    let ess = essential_class(&graph)?;
    let est = dimension_mc(
        &ess,
        &graph.ratio,
        loaded.rifs.theta(),
        depth,
        trials,
        loaded.seed,
        &loaded.ctx,
    );
    println!(
        "dimension = {:.12} (stderr {:.3e}, {} trials, depth {}, seed {})",
        est.value, est.stderr, est.trials, est.depth, est.seed
    );
    let m = manifest("dimension", &loaded)
        .param("depth", depth)
        .param("trials", trials)
        .param("cap", cap);
    maybe_write(&common.out, &m, &est, &[])
}

// ---- localdim ----

#[allow(clippy::too_many_arguments)]
pub fn localdim(
    common: CommonOpts,
    policy: PolicyArg,
    depth: usize,
    trials: usize,
    allow_irregular: bool,
    cap: usize,
    cache_dir: Option<PathBuf>,
) -> CliResult {
    let loaded = load(&common)?;
    let (graph, _) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    let pol = policy_of(policy);
    let est = local_dim_mc(
        &loaded.rifs,
        &graph,
        &pol,
        depth,
        trials,
        loaded.seed,
        allow_irregular,
        &loaded.ctx,
    )?;
    println!(
        "local dimension [{}] = {:.12} (stderr {:.3e}, {} trials, depth {}, seed {})",
        est.policy.as_deref().unwrap_or("?"),
        est.value,
        est.stderr,
        est.trials,
        est.depth,
        est.seed
    );
    let m = manifest("localdim", &loaded)
        .param("policy", est.policy.clone())
        .param("depth", depth)
        .param("trials", trials)
        .param("allow_irregular", allow_irregular)
        .param("cap", cap);
    maybe_write(&common.out, &m, &est, &[])
}

// ---- commuting ----

#[allow(clippy::too_many_arguments)]
pub fn commuting(
    common: CommonOpts,
    sink_len: usize,
    block_max: usize,
    neck_cap: usize,
    cap: usize,
    cache_dir: Option<PathBuf>,
    interpolate: Option<usize>,
    depth: usize,
    trials: usize,
) -> CliResult {
    let loaded = load(&common)?;
    let (graph, _) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    let Some(sink) = find_sink(&graph, sink_len) else {
        return Err(CliError::validation(format!(
            "no sink word of length <= {sink_len} found"
        )));
    };
    let word_display: Vec<String> =
        sink.word.iter().map(|l| (l + 1).to_string()).collect();
    println!("sink word: ({})", word_display.join(","));
    let cv = &graph.nodes[sink.node].cv;
    let nbrs: Vec<String> = cv.neighbours.iter().map(|v| v.to_string()).collect();
    println!("sink vector: ({}, ({}))", cv.length, nbrs.join(", "));
    println!("commuting: {}", if sink.commuting { "yes" } else { "no (norm bounds only)" });

    let blocks = block_extremes(&graph, &sink, block_max, 10_000_000)?;
    println!("block extremes by neck length:");
    println!("  {:>3}  {:>16}  {:>16}  {:>10}", "n", "min", "max", "paths");
    for row in &blocks.rows {
        println!(
            "  {:>3}  {:>16}  {:>16}  {:>10}",
            row.n,
            format_rational(&row.min),
            format_rational(&row.max),
            row.paths
        );
    }
    let neck = neck_distribution(loaded.rifs.theta(), &sink, neck_cap, 1e-9)?;
    println!("E(neck length) = {}", format_rational(&neck.expectation));
    let bound = step_log_bound(&graph, &loaded.ctx);
    let interval = local_dim_interval(&blocks, &neck, &graph.ratio, bound, &loaded.ctx);
    println!(
        "local-dimension interval: [{:.12}, {:.12}]{}",
        interval.lo,
        interval.hi,
        if interval.exact_endpoints { "" } else { " (bounds only)" }
    );
    if interval.lo_error > 0.0 || interval.hi_error > 0.0 {
        println!(
            "  truncation error bounds: lo {:.3e}, hi {:.3e}",
            interval.lo_error, interval.hi_error
        );
    }
    if let Some(s) = &interval.lo_symbolic {
        println!("  lo = {s}");
    }
    if let Some(s) = &interval.hi_symbolic {
        println!("  hi = {s}");
    }

    let sweep = interpolate.map(|steps| {
        let steps = steps.max(2);
        let t_grid: Vec<f64> =
            (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
        interpolation_check(
            &blocks,
            loaded.rifs.theta(),
            &sink,
            &graph.ratio,
            &t_grid,
            depth,
            trials,
            loaded.seed,
            &loaded.ctx,
        )
    });
    if let Some(samples) = &sweep {
        println!("interpolation sweep:");
        for s in samples {
            println!("  t = {:.3}: {:.9} (stderr {:.3e})", s.t, s.value, s.stderr);
        }
    }

    let m = manifest("commuting", &loaded)
        .param("sink_len", sink_len)
        .param("block_max", block_max)
        .param("neck_cap", neck_cap)
        .param("cap", cap)
        .param("interpolate", interpolate);
    let result = json!({
        "sink": sink,
        "blocks": blocks,
        "neck": neck,
        "interval": interval,
        "interpolation": sweep,
    });
    maybe_write(&common.out, &m, &result, &[])
}

// ---- simulate ----

pub fn simulate(
    common: CommonOpts,
    depth: usize,
    x: Option<String>,
    levels: Option<String>,
    budget: usize,
) -> CliResult {
    let loaded = load(&common)?;
    let word = sample_word(loaded.rifs.theta(), depth, loaded.seed);
    let letters_display: Vec<String> =
        word.letters.iter().map(|l| (l + 1).to_string()).collect();
    println!("word (seed {}): {}", loaded.seed, letters_display.join(""));

    match x {
        None => {
            let set = cylinders(&loaded.rifs, &word, depth, budget)?;
            println!("cylinders at level {depth}: {}", set.entries.len());
            println!("  {:>6}  {:>14}  {:>14}  {:>12}", "i", "left", "length", "weight");
            for (i, e) in set.entries.iter().enumerate().take(64) {
                println!(
                    "  {:>6}  {:>14}  {:>14}  {:>12}",
                    i,
                    e.left.to_string(),
                    e.length.to_string(),
                    format_rational(&e.weight)
                );
            }
            if set.entries.len() > 64 {
                println!("  ... ({} more)", set.entries.len() - 64);
            }
            let m = manifest("simulate", &loaded)
                .param("depth", depth)
                .param("budget", budget);
            maybe_write(&common.out, &m, &set, &[])
        }
        Some(x_raw) => {
            let x = loaded
                .rifs
                .field()
                .from_rational(parse_rational(&x_raw).map_err(|e| CliError::validation(e.to_string()))?);
            let levels: Vec<usize> = match levels {
                Some(text) => text
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::validation(format!("bad levels: {e}")))?,
                None => {
                    let mut ls: Vec<usize> =
                        [depth / 4, depth / 2, depth].into_iter().filter(|&n| n > 0).collect();
                    ls.dedup();
                    ls
                }
            };
            let est = empirical_local_dim(&loaded.rifs, &word, &x, &levels, budget, &loaded.ctx)?;
            println!("empirical local dimension at x = {x_raw}:");
            for (n, v) in &est {
                println!("  n = {n:>4}: {v:.9}");
            }
            let m = manifest("simulate", &loaded)
                .param("depth", depth)
                .param("x", &x_raw)
                .param("levels", &levels)
                .param("budget", budget);
            let result = json!({
                "x": x_raw,
                "estimates": est.iter().map(|(n, v)| json!({"n": n, "estimate": v})).collect::<Vec<_>>(),
            });
            maybe_write(&common.out, &m, &result, &[])
        }
    }
}

// ---- oracle ----

pub fn oracle(common: CommonOpts, trials: usize, cap: usize) -> CliResult {
    let loaded = load(&common)?;
    let rifs = &loaded.rifs;
    let ctx = &loaded.ctx;
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {}", if ok { "ok  " } else { "FAIL" }, name);
        if !ok {
            failures += 1;
        }
    };

    // 1. exact comparison agrees with high-precision numerics
    {
        let field = rifs.field();
        let mut rng = stream(loaded.seed, "oracle-field", 0);
        let mut ok = true;
        for _ in 0..1000 {
            let a = field.scalar(
                (0..field.degree())
                    .map(|_| {
                        BigRational::new(
                            rand::Rng::random_range(&mut rng, -40i64..=40).into(),
                            rand::Rng::random_range(&mut rng, 1i64..=16).into(),
                        )
                    })
                    .collect(),
            );
            let b = field.scalar(
                (0..field.degree())
                    .map(|_| {
                        BigRational::new(
                            rand::Rng::random_range(&mut rng, -40i64..=40).into(),
                            rand::Rng::random_range(&mut rng, 1i64..=16).into(),
                        )
                    })
                    .collect(),
            );
            let exact = a.compare(&b);
            let numeric = if a == b {
                Ordering::Equal
            } else {
                let fa = rifs_core::precision::to_f64(&a.to_big(ctx));
                let fb = rifs_core::precision::to_f64(&b.to_big(ctx));
                fa.partial_cmp(&fb).unwrap()
            };
            if exact != numeric {
                ok = false;
                break;
            }
        }
        check("field comparison vs high-precision evaluation (1000 pairs)", ok);
    }

    // 2. cylinder mass conservation and nesting
    {
        let word = sample_word(rifs.theta(), 6, loaded.seed);
        let mut ok = true;
        let mut prev: Option<rifs_core::model::CylinderSet> = None;
        for n in 0..=6 {
            match cylinders(rifs, &word, n, 1 << 22) {
                Ok(set) => {
                    let total: BigRational = set.entries.iter().map(|e| e.weight.clone()).sum();
                    if total != BigRational::from_integer(1.into()) {
                        ok = false;
                    }
                    if let Some(p) = &prev {
                        for e in &set.entries {
                            let inside = p.entries.iter().any(|pa| {
                                pa.left.compare(&e.left) != Ordering::Greater
                                    && pa
                                        .left
                                        .add(&pa.length)
                                        .unwrap()
                                        .compare(&e.left.add(&e.length).unwrap())
                                        != Ordering::Less
                            });
                            if !inside {
                                ok = false;
                            }
                        }
                    }
                    prev = Some(set);
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        check("cylinder mass conservation and nesting (levels 0..6)", ok);
    }

    // 3. separation: disjoint cylinders when the hull check passes
    {
        let report = validate_model(rifs, ValidateMode::Spectrum);
        if report.ussc == UsscOutcome::Pass {
            let word = sample_word(rifs.theta(), 8, loaded.seed.wrapping_add(1));
            let mut ok = true;
            for n in 1..=8 {
                if let Ok(set) = cylinders(rifs, &word, n, 1 << 22) {
                    for pair in set.entries.windows(2) {
                        let right = pair[0].left.add(&pair[0].length).unwrap();
                        if right.compare(&pair[1].left) != Ordering::Less {
                            ok = false;
                        }
                    }
                }
            }
            check("separated systems keep cylinders disjoint (levels 1..8)", ok);
        } else {
            println!("skip separation check (hull images overlap)");
        }
    }

    // 4. measure recursion vs covering-coding oracle
    if rifs.is_equicontractive() {
        match enumerate_graph(rifs, cap) {
            Ok(graph) => {
                let mut ok = true;
                for trial in 0..trials as u64 {
                    let mut rng = stream(loaded.seed, "oracle-measure", trial);
                    let n = 1 + (rand::Rng::random_range(&mut rng, 0..10u32)) as usize;
                    let word = sample_word(rifs.theta(), n, loaded.seed ^ (trial + 1));
                    let mut node = 0usize;
                    let mut path = Vec::with_capacity(n);
                    for i in 0..n {
                        let letter = word.letters[i];
                        let kids = &graph.edges[node][letter as usize];
                        let pick =
                            rand::Rng::random_range(&mut rng, 0..kids.len() as u32) as usize;
                        let e = &kids[pick];
                        path.push(PathStep { letter, child: e.child, ordinal: e.ordinal });
                        node = e.child;
                    }
                    let q = measure_vector(&graph, &word, &path).unwrap();
                    let target = path_interval(&graph, &path).unwrap();
                    let oracle = covering_weight_oracle(rifs, &word, &target, path.len()).unwrap();
                    let weights: Vec<BigRational> =
                        oracle.into_iter().map(|(_, w)| w).collect();
                    if weights != q.entries {
                        ok = false;
                        break;
                    }
                }
                check("measure recursion equals covering-coding oracle (exact)", ok);
            }
            Err(GraphError::FiniteTypeBudgetExceeded { .. }) => {
                println!("skip measure oracle (vector cap exceeded)");
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        println!("skip measure oracle (not equicontractive)");
    }

    // 5. scaling function: root at q = 1, dimension at q = 0, convexity
    {
        let b1 = beta(rifs, 1.0, ctx)?;
        let b0 = beta(rifs, 0.0, ctx)?;
        let s = dimension_ussc(rifs, ctx)?;
        let mut ok = b1.beta.abs() <= 1e-12 && (b0.beta - s).abs() <= 1e-12;
        let vals: Vec<f64> = (-10..=10)
            .map(|i| beta(rifs, i as f64 * 0.5, ctx).map(|e| e.beta))
            .collect::<Result<_, _>>()?;
        for w in vals.windows(3) {
            if w[0] - 2.0 * w[1] + w[2] < -1e-8 {
                ok = false;
            }
        }
        check("scaling function: beta(1) = 0, beta(0) = dim, convex", ok);
    }

    // 6. extremal choice vectors satisfy the exchange property
    {
        let ep = alpha_endpoints(rifs, ctx, 1 << 20)?;
        let mut ok = true;
        for set in [&ep.argmin, &ep.argmax] {
            for a in set.iter() {
                for b in set.iter() {
                    for k in 0..a.len() {
                        let mut swapped = a.clone();
                        swapped[k] = b[k];
                        if !set.contains(&swapped) {
                            ok = false;
                        }
                    }
                }
            }
        }
        check("extremal choice vectors closed under coordinate swaps", ok);
    }

    println!(
        "{} checks failed",
        if failures == 0 { "0".to_string() } else { failures.to_string() }
    );
    if failures == 0 {
        Ok(())
    } else {
        Err(CliError::validation(format!("{failures} oracle checks failed")))
    }
}

// ---- isolated ----

#[allow(clippy::too_many_arguments)]
pub fn isolated(
    common: CommonOpts,
    depth: usize,
    trials: usize,
    cycle_len: usize,
    analytic_constant: Option<usize>,
    cap: usize,
    cache_dir: Option<PathBuf>,
) -> CliResult {
    let loaded = load(&common)?;
    let (graph, _) = get_graph(&loaded, cap, cache_dir.as_deref())?;
    let scan = isolated_point_scan(
        &loaded.rifs,
        &graph,
        depth,
        trials,
        loaded.seed,
        cycle_len,
        analytic_constant,
        &loaded.ctx,
    )?;
    println!("local dimension at 0 (closed form): {:.12}", scan.left_dim);
    println!(
        "interior essential supremum (cycles <= {cycle_len}): {:.12}",
        scan.interior_sup
    );
    println!(
        "measure-typical interior estimate: {:.12} (stderr {:.3e})",
        scan.interior_typical.value, scan.interior_typical.stderr
    );
    println!("gap: {:.12}", scan.gap);
    if let Some(bound) = scan.analytic_bound {
        println!("analytic interior bound (caller constant): {bound:.12}");
    }
    println!(
        "isolated-point flag: {}",
        if scan.flag { "RAISED" } else { "not raised" }
    );
    let m = manifest("isolated", &loaded)
        .param("depth", depth)
        .param("trials", trials)
        .param("cycle_len", cycle_len)
        .param("analytic_constant", analytic_constant)
        .param("cap", cap);
    maybe_write(&common.out, &m, &scan, &[])
}
