//! `lsfjoin`: generators, joins, baselines and evaluation from the command
//! line. Exit status is 0 on success, 1 on usage or parameter errors and 2
//! on runtime errors.

mod manifest;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lsf_join::cluster::{ClusterConfig, Execution, Strategy};
use lsf_join::eval;
use lsf_join::graph::{self, BipartiteGraph, MatchingParams, SkewedParams};
use lsf_join::join::{self, AlphaChoice, JoinConfig, JoinRun, PairSet};
use lsf_join::sketch::SketchSize;
use lsf_join::Threshold;
use serde_json::json;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "lsfjoin", version, about = "Approximate all-pairs cosine similarity join on bipartite graphs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate or convert a graph.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run a similarity join.
    Join(JoinCmd),
    /// Measure recall against planted pairs or a sampled exact oracle.
    Eval(EvalCmd),
    /// Tabulate the communication/work exponent curves.
    Cost(CostCmd),
    /// Histogram of cosine similarity over sampled pairs.
    Histogram(HistogramCmd),
    /// The profile Φ of a graph.
    Phi(PhiCmd),
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Hot/cold skewed graph.
    Skewed {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        gamma: f64,
        /// Cold pool size (default N·d/20).
        #[arg(long)]
        cold_pool: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: GraphOut,
    },
    /// Planted matching of N/2 similar pairs.
    Matching {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        tau: Threshold,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Planted pairs TSV (default: <out>.pairs.tsv).
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[command(flatten)]
        out: GraphOut,
    },
    /// Re-read an edge list (or graph cache) and write it back out.
    EdgeList {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: GraphOut,
    },
}

#[derive(Args, Debug)]
struct GraphOut {
    /// Edge-list TSV output.
    #[arg(long, default_value = "graph.tsv")]
    out: PathBuf,
    /// Also write the binary graph cache here.
    #[arg(long)]
    binary: Option<PathBuf>,
    /// Run manifest (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Lsf,
    HashJoin,
    Combined,
}

#[derive(Args, Debug, Clone)]
struct JoinParams {
    /// Graph: edge-list TSV or binary cache.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tau: Threshold,
    /// Survival probability per dimension, or `auto`.
    #[arg(long, default_value = "auto")]
    alpha: String,
    /// Right-hand side of the automatic alpha rule.
    #[arg(long, default_value_t = lsf_join::filter::DEFAULT_TARGET_COLLISIONS)]
    target_collisions: f64,
    /// Repetitions per iteration (power of two).
    #[arg(long, default_value_t = 1 << 16)]
    k: u64,
    /// Independent iterations.
    #[arg(long, default_value_t = 1)]
    beta: u32,
    /// Simulated processors.
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Lsf)]
    strategy: StrategyArg,
    /// Repetition exponent for the combined strategy.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat all degrees as one range.
    #[arg(long)]
    single_bucket: bool,
    /// Only tally costs; emit no pairs.
    #[arg(long)]
    account_only: bool,
    /// Verify only pairs touching this many sampled nodes (the sample is
    /// drawn with --sample-seed, as in `eval`).
    #[arg(long)]
    focus_sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Filter on sketches of s = d/(z·tau) buckets per degree range.
    #[arg(long, conflicts_with = "sketch_c")]
    sketch_z: Option<f64>,
    /// Filter on sketches of s = d/C buckets per degree range.
    #[arg(long)]
    sketch_c: Option<f64>,
    /// Multi-round matching mode with this many rounds.
    #[arg(long)]
    rounds: Option<u32>,
    /// Scale of the matching-mode iteration schedule.
    #[arg(long, default_value_t = 1.0)]
    schedule_scale: f64,
}

#[derive(Args, Debug)]
struct JoinCmd {
    #[command(flatten)]
    params: JoinParams,
    /// Pairs TSV `u v cosine`.
    #[arg(long, default_value = "pairs.tsv")]
    out: PathBuf,
    /// CostReport JSON (default: <out>.cost.json).
    #[arg(long)]
    cost: Option<PathBuf>,
    /// Run manifest (default: <out>.manifest.json).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalCmd {
    /// Graph the pairs refer to.
    #[arg(long)]
    input: PathBuf,
    /// Pairs TSV produced by `join`.
    #[arg(long, required_unless_present = "sweep_beta")]
    pairs: Option<PathBuf>,
    /// Planted pairs TSV; otherwise a sampled exact oracle is used.
    #[arg(long)]
    planted: Option<PathBuf>,
    /// Oracle threshold (defaults to the join's --tau in sweep mode).
    #[arg(long)]
    tau: Option<Threshold>,
    #[arg(long, default_value_t = 1000)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Run the join with beta = 1..=B and write a recall/survivor CSV.
    #[arg(long)]
    sweep_beta: Option<u32>,
    #[command(flatten)]
    sweep: SweepArgs,
    /// Report JSON (or CSV in sweep mode); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Join flags used by `eval --sweep-beta`.
#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, default_value_t = lsf_join::filter::DEFAULT_TARGET_COLLISIONS)]
    target_collisions: f64,
    #[arg(long, default_value_t = 1 << 16)]
    k: u64,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    single_bucket: bool,
}

#[derive(Args, Debug)]
struct CostCmd {
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 0.0)]
    c_min: f64,
    #[arg(long, default_value_t = 2.0)]
    c_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HistogramCmd {
    #[arg(long)]
    input: PathBuf,
    /// Equal-width bins over [0, 1].
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Sampled pairs.
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PhiCmd {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Largest N computed exactly; above it Φ is estimated.
    #[arg(long, default_value_t = 10_000)]
    exact_limit: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that come from bad arguments rather than failed work.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run_argv(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() {
            return 1;
        }
        if let Some(lsf_join::Error::Domain(_)) = cause.downcast_ref::<lsf_join::Error>() {
            return 1;
        }
    }
    2
}

fn run_argv(argv: &[String]) -> Result<()> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let msg = e.render().to_string();
            return Err(usage(msg.trim_end().trim_start_matches("error: ").to_string()));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // A pool may already exist when replaying; keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    let mut man = RunManifest::new(argv.to_vec(), cli.threads);
    match cli.command {
        Command::Gen { kind } => cmd_gen(kind, &mut man, start),
        Command::Join(cmd) => cmd_join(cmd, &mut man, start),
        Command::Eval(cmd) => cmd_eval(cmd),
        Command::Cost(cmd) => cmd_cost(cmd),
        Command::Histogram(cmd) => cmd_histogram(cmd),
        Command::Phi(cmd) => cmd_phi(cmd),
        Command::Replay { manifest } => {
            let man = RunManifest::read(&manifest)?;
            if man.argv.get(1).map(String::as_str) == Some("replay") {
                return Err(usage("a manifest cannot replay another replay"));
            }
            run_argv(&man.argv)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Reads an edge list or, when the file starts with the cache magic, a
/// binary graph.
fn load_graph(path: &Path) -> Result<BipartiteGraph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut r = BufReader::new(file);
    let head = r.fill_buf()?;
    let g = if head.starts_with(graph::BINARY_MAGIC) { graph::read_binary(r) } else { graph::load_edge_list(r) };
    g.with_context(|| format!("reading {}", path.display()))
}

fn write_graph(g: &BipartiteGraph, out: &GraphOut, man: &mut RunManifest) -> Result<()> {
    graph::write_edge_list(g, create(&out.out)?)?;
    man.output("edges", &out.out);
    if let Some(b) = &out.binary {
        graph::write_binary(g, create(b)?)?;
        man.output("binary", b);
    }
    Ok(())
}

fn cmd_gen(kind: GenKind, man: &mut RunManifest, start: Instant) -> Result<()> {
    let out_manifest = |out: &GraphOut| out.manifest.clone().unwrap_or_else(|| with_suffix(&out.out, ".manifest.json"));
    let (g, out) = match kind {
        GenKind::Skewed { n, d, gamma, cold_pool, seed, out } => {
            let params = SkewedParams { n, d, gamma, cold_pool, seed };
            let g = graph::gen_skewed(&params)?;
            man.seeds.insert("seed".into(), seed);
            man.params = json!({ "kind": "skewed", "n": n, "d": d, "gamma": gamma,
                "cold_pool": params.cold_size(), "hot": params.hot_size()? });
            (g, out)
        }
        GenKind::Matching { n, d, tau, seed, pairs, out } => {
            let (g, planted) = graph::gen_matching(&MatchingParams { n, d, tau, seed })?;
            let pairs_path = pairs.unwrap_or_else(|| with_suffix(&out.out, ".pairs.tsv"));
            let mut w = create(&pairs_path)?;
            for (a, b) in &planted {
                writeln!(w, "{}\t{}", g.right_labels().name(*a), g.right_labels().name(*b))?;
            }
            w.flush()?;
            man.output("planted", &pairs_path);
            man.seeds.insert("seed".into(), seed);
            man.params = json!({ "kind": "matching", "n": n, "d": d, "tau": tau });
            (g, out)
        }
        GenKind::EdgeList { input, out } => {
            let g = load_graph(&input)?;
            man.params = json!({ "kind": "edge-list", "input": input });
            (g, out)
        }
    };
    write_graph(&g, &out, man)?;
    man.results = json!({ "m": g.m(), "n": g.n(), "edges": g.edge_count() });
    man.finish(start);
    man.write(&out_manifest(&out))
}

fn alpha_choice(alpha: &str, target: f64) -> Result<AlphaChoice> {
    if alpha == "auto" {
        return Ok(AlphaChoice::Auto { target_collisions: target });
    }
    let a: f64 = alpha.parse().map_err(|_| usage(format!("--alpha must be a number or `auto`, got {alpha:?}")))?;
    Ok(AlphaChoice::Fixed(a))
}

fn build_configs(p: &JoinParams, g: &BipartiteGraph) -> Result<(JoinConfig, ClusterConfig)> {
    let mut cfg = JoinConfig::new(p.tau, alpha_choice(&p.alpha, p.target_collisions)?, p.k, p.beta, p.seed)?
        .with_single_bucket(p.single_bucket);
    match (p.sketch_z, p.sketch_c) {
        (Some(z), _) => cfg = cfg.with_sketch(SketchSize::Slack { z })?,
        (_, Some(c)) => cfg = cfg.with_sketch(SketchSize::Compression { c })?,
        _ => {}
    }
    if let Some(size) = p.focus_sample {
        cfg = cfg.with_focus(eval::sample_nodes(g.n(), size, p.sample_seed)?);
    }
    let strategy = match (p.strategy, p.c) {
        (StrategyArg::Lsf, None) => Strategy::Lsf,
        (StrategyArg::HashJoin, None) => Strategy::HashJoin,
        (StrategyArg::Combined, Some(c)) => Strategy::Combined { c },
        (StrategyArg::Combined, None) => return Err(usage("--strategy combined needs --c")),
        (_, Some(_)) => return Err(usage("--c only applies to --strategy combined")),
    };
    let execution = if p.account_only { Execution::AccountOnly } else { Execution::Verify };
    let cluster = ClusterConfig::new(p.p, prf_cluster_seed(p.seed), strategy).with_execution(execution);
    cluster.validate()?;
    Ok((cfg, cluster))
}

/// Processor assignment and grid placement get their own stream of the
/// run seed.
fn prf_cluster_seed(seed: u64) -> u64 {
    lsf_join::prf::subseed(seed, lsf_join::prf::tag::ASSIGN, 0)
}

fn cmd_join(cmd: JoinCmd, man: &mut RunManifest, start: Instant) -> Result<()> {
    let p = &cmd.params;
    let g = load_graph(&p.input)?;
    let (cfg, cluster) = build_configs(p, &g)?;
    man.seeds.insert("seed".into(), p.seed);
    man.seeds.insert("cluster_seed".into(), cluster.seed);
    if p.focus_sample.is_some() {
        man.seeds.insert("sample_seed".into(), p.sample_seed);
    }
    let mut cfg_json = serde_json::to_value(&cfg)?;
    if let Some(obj) = cfg_json.as_object_mut() {
        // The focus list is reproducible from the sample size and seed.
        obj.insert("focus".into(), json!(p.focus_sample));
    }
    man.params = json!({ "input": p.input, "join": cfg_json, "cluster": cluster, "rounds": p.rounds,
        "schedule_scale": p.schedule_scale });

    let (pairs, cost, results) = match p.rounds {
        Some(r) => {
            let run = join::matching_join(&g, &cfg, &cluster, r, p.schedule_scale)?;
            let res = json!({ "pairs": run.pairs.len(), "rounds": run.rounds });
            (run.pairs, run.cost, res)
        }
        None => {
            let run = join::lsf_join(&g, &cfg, &cluster)?;
            let res = join_results(&run);
            (run.pairs, run.cost, res)
        }
    };
    pairs.write_tsv(&g, create(&cmd.out)?)?;
    man.output("pairs", &cmd.out);
    let cost_path = cmd.cost.clone().unwrap_or_else(|| with_suffix(&cmd.out, ".cost.json"));
    serde_json::to_writer_pretty(create(&cost_path)?, &cost.summary())?;
    man.output("cost", &cost_path);
    man.results = results;
    man.finish(start);
    man.write(&cmd.manifest.clone().unwrap_or_else(|| with_suffix(&cmd.out, ".manifest.json")))
}

fn join_results(run: &JoinRun) -> serde_json::Value {
    json!({ "pairs": run.pairs.len(), "k": run.k, "degree_ranges": run.buckets, "iterations": run.iterations })
}

fn read_planted(g: &BipartiteGraph, path: &Path) -> Result<Vec<(u32, u32)>> {
    let set = PairSet::read_tsv(
        g,
        BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?),
    )
    .with_context(|| format!("reading {}", path.display()))?;
    let mut v: Vec<(u32, u32)> = set.iter().map(|p| (p.u, p.v)).collect();
    v.sort_unstable();
    Ok(v)
}

fn emit(out: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
        }
    }
    Ok(())
}

fn cmd_eval(cmd: EvalCmd) -> Result<()> {
    let g = load_graph(&cmd.input)?;
    if let Some(b) = cmd.sweep_beta {
        return eval_sweep(&cmd, &g, b);
    }
    let pairs_path = cmd.pairs.as_ref().ok_or_else(|| usage("--pairs is required"))?;
    let mut raw = String::new();
    File::open(pairs_path)
        .with_context(|| format!("cannot open {}", pairs_path.display()))?
        .read_to_string(&mut raw)?;
    let found = PairSet::read_tsv(&g, raw.as_bytes()).with_context(|| format!("reading {}", pairs_path.display()))?;
    let report = match &cmd.planted {
        Some(path) => {
            let planted = read_planted(&g, path)?;
            let r = eval::recall_of_pairs(&found, &planted)?;
            json!({ "truth": "planted", "truth_pairs": planted.len(), "found_pairs": found.len(), "recall": r })
        }
        None => {
            let tau = cmd.tau.ok_or_else(|| usage("--tau is required without --planted"))?;
            let truth = eval::ground_truth(&g, tau, cmd.sample.min(g.n()), cmd.sample_seed)?;
            let r = eval::recall(&found, &truth)?;
            json!({ "truth": "sampled", "tau": tau, "sample": truth.sample.len(), "sample_seed": cmd.sample_seed,
                "truth_pairs": truth.len(), "found_pairs": found.len(), "recall": r })
        }
    };
    emit(&cmd.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

/// One join with the largest beta; recall at beta `b` counts truth pairs
/// first found in an iteration below `b`, which is what a run with that
/// beta would return.
fn eval_sweep(cmd: &EvalCmd, g: &BipartiteGraph, max_beta: u32) -> Result<()> {
    if max_beta == 0 {
        return Err(usage("--sweep-beta must be at least 1"));
    }
    let s = &cmd.sweep;
    let (truth_pairs, tau, focus): (Vec<(u32, u32)>, Threshold, Option<Vec<u32>>) = match &cmd.planted {
        Some(path) => {
            let tau = cmd.tau.ok_or_else(|| usage("--tau is required"))?;
            (read_planted(g, path)?, tau, None)
        }
        None => {
            let tau = cmd.tau.ok_or_else(|| usage("--tau is required"))?;
            let truth = eval::ground_truth(g, tau, cmd.sample.min(g.n()), cmd.sample_seed)?;
            let sample = truth.sample.clone();
            (truth.pairs, tau, Some(sample))
        }
    };
    if truth_pairs.is_empty() {
        return Err(lsf_join::Error::Domain("recall undefined: the ground truth is empty".into()).into());
    }
    let mut cfg = JoinConfig::new(tau, alpha_choice(&s.alpha, s.target_collisions)?, s.k, max_beta, s.seed)?
        .with_single_bucket(s.single_bucket);
    if let Some(f) = focus {
        cfg = cfg.with_focus(f);
    }
    let cluster = ClusterConfig::lsf(s.p, prf_cluster_seed(s.seed));
    let run = join::lsf_join(g, &cfg, &cluster)?;
    let mut first = vec![0u64; max_beta as usize];
    for &(a, b) in &truth_pairs {
        if let Some(p) = run.pairs.get(a, b) {
            first[p.iteration as usize] += 1;
        }
    }
    emit(&cmd.out, |w| {
        writeln!(w, "beta,recall,survivors,candidate_pairs,found_pairs")?;
        let (mut hit, mut survivors, mut candidates) = (0u64, 0u64, 0u64);
        for (i, st) in run.iterations.iter().enumerate() {
            hit += first[i];
            survivors += st.survivors;
            candidates += st.candidate_pairs;
            let recall = hit as f64 / truth_pairs.len() as f64;
            writeln!(w, "{},{recall},{survivors},{candidates},{}", i + 1, st.total_pairs)?;
        }
        Ok(())
    })
}

fn cmd_cost(cmd: CostCmd) -> Result<()> {
    let pts = eval::exponent_curve(cmd.tau, cmd.c_min, cmd.c_max, cmd.step)?;
    emit(&cmd.out, |w| {
        writeln!(w, "c,comm_exponent,work_exponent,regime")?;
        for p in &pts {
            let regime = if p.c <= 1.0 { "combined" } else { "lsf" };
            writeln!(w, "{},{},{},{regime}", p.c, p.comm, p.work)?;
        }
        Ok(())
    })
}

fn cmd_histogram(cmd: HistogramCmd) -> Result<()> {
    if cmd.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let g = load_graph(&cmd.input)?;
    let h = eval::similarity_histogram(&g, &eval::uniform_edges(cmd.bins), cmd.pairs, cmd.seed)?;
    emit(&cmd.out, |w| Ok(h.write_csv(w)?))
}

fn cmd_phi(cmd: PhiCmd) -> Result<()> {
    if !(cmd.alpha > 0.0 && cmd.alpha <= 1.0) {
        return Err(usage(format!("--alpha = {} must lie in (0, 1]", cmd.alpha)));
    }
    let g = load_graph(&cmd.input)?;
    let phi = eval::profile_phi(&g, cmd.alpha, cmd.exact_limit, cmd.samples, cmd.seed)?;
    let report = json!({ "alpha": cmd.alpha, "n": g.n(), "phi": phi.value, "std_error": phi.std_error,
        "exact": phi.exact, "pairs": "ordered" });
    emit(&cmd.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}
