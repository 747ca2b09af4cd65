use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use fusionproc::cxy::{
    check_cxy_lemma, check_key_lemma, check_martingale, parse_increment_file, parse_increments, run_cxy, CxyConfig,
};
use fusionproc::edge_stream::{StreamMode, GENERATOR};
use fusionproc::greedy_cut::{brute_force_multiway_cut, build_example_graph, edge_first_greedy, WeightedGraph};
use fusionproc::harness::{
    aggregate_rows, phase_estimate, selftest, sweep, AggregateRow, KSpec, Milestones, Omega, SweepRow, SweepSpec,
    VERSION,
};
use fusionproc::par::WORKERS_ENV;
use fusionproc::process::{run, EventKind, EventSpec, ProcessConfig, StopRule};

#[derive(Parser)]
#[command(name = "fusionproc", version, about = "Simulate k-processes, CDF-processes and related experiments")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One process run, printed as a JSONL record.
    Run(RunArgs),
    /// Repeated k-process runs over an (n, k) grid, written as CSV.
    Sweep(SweepArgs),
    /// Locate the k where the mean final L1/n crosses 1/2.
    PhaseEstimate(PhaseArgs),
    /// Edge-first greedy multiway cut, optionally against the exact optimum.
    Greedy(GreedyArgs),
    /// The (C,x,y) urn: a trajectory summary or one of the tail checks.
    Cxy(CxyArgs),
    /// Fast deterministic checks of the library.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    /// Stop at the first step with k components (k-process only).
    Early,
    /// Consider every pair.
    Exhaustive,
    /// Stop after --steps considered pairs.
    AtStep,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    /// Number of special vertices (vertices 0..k).
    #[arg(long, conflicts_with = "family")]
    k: Option<usize>,
    /// Forbidden-set family: one set per line, vertices separated by spaces or commas.
    #[arg(long)]
    family: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to `early` for k-processes and `exhaustive` otherwise.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Step count for `--mode at-step`.
    #[arg(long)]
    steps: Option<u64>,
    /// Comma-separated snapshot steps; `m1` and `m3` name the milestones.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<String>,
    /// ω(n): loglog, log or const:<c>.
    #[arg(long, default_value = "loglog")]
    omega: Omega,
    #[arg(long, value_enum, default_value = "lazy")]
    stream: StreamArg,
    /// Record every considered pair and its outcome.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StreamArg {
    Lazy,
    FullShuffle,
}

impl From<StreamArg> for StreamMode {
    fn from(s: StreamArg) -> Self {
        match s {
            StreamArg::Lazy => StreamMode::Lazy,
            StreamArg::FullShuffle => StreamMode::FullShuffle,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Comma-separated k values: integers or `alpha*n^beta`.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<KSpec>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Base seed; run r of the i-th (n, k) point uses seed + i*reps + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "loglog")]
    omega: Omega,
    /// Per-run CSV (stdout when absent). Metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-(n, k) aggregate CSV.
    #[arg(long)]
    aggregate: Option<PathBuf>,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated k grid.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GreedyArgs {
    /// Graph file: "n m" then m lines "u v w".
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    graph: Option<PathBuf>,
    /// Generate the K_{n^2} instance with tie-break weight 1+eps, as `n,eps`.
    #[arg(long)]
    example: Option<String>,
    /// Comma-separated terminal vertices (implied by --example).
    #[arg(long, value_delimiter = ',')]
    terminals: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also compute the exact optimum by exhaustive search.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CxyCheck {
    Martingale,
    Key,
    Cxy,
}

#[derive(Args)]
struct CxyArgs {
    /// Increments inline: `5x1000` or `3,1,4` or a mix.
    #[arg(long, conflicts_with = "c_file", required_unless_present = "c_file")]
    c: Option<String>,
    /// Increments from a file, one integer per line.
    #[arg(long)]
    c_file: Option<PathBuf>,
    #[arg(long)]
    x: u64,
    #[arg(long)]
    y: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    check: Option<CxyCheck>,
    /// Deviation multiplier for `--check key`.
    #[arg(long, default_value_t = 2.0)]
    w: f64,
    /// Monte Carlo runs for the checks.
    #[arg(long, default_value_t = 10_000)]
    runs: usize,
}

fn meta(command: &str) -> Value {
    json!({ "command": command, "version": VERSION, "generator": GENERATOR })
}

fn emit(record: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, record)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// One forbidden set per non-blank line; `#` starts a comment.
fn parse_family(text: &str) -> Result<Vec<Vec<usize>>> {
    let mut family = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let set = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().with_context(|| format!("line {}: bad vertex {t:?}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        family.push(set);
    }
    Ok(family)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = match (&args.family, args.k) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let family = parse_family(&text).with_context(|| format!("parsing {}", path.display()))?;
            ProcessConfig::cdf(args.n, family, args.seed)
        }
        (None, Some(k)) => ProcessConfig::kprocess(args.n, k, args.seed),
        (None, None) => ProcessConfig::gnm(args.n, 0, args.seed).stop(StopRule::Exhaustive),
    };
    let milestones = args.k.map(|k| Milestones::new(args.n, k, args.omega));
    let mode = args.mode.unwrap_or(if args.k.is_some() { Mode::Early } else { Mode::Exhaustive });
    cfg = match mode {
        Mode::Early if args.k.is_none() => bail!("--mode early needs --k"),
        Mode::Early => cfg.stop(StopRule::AtKComponents),
        Mode::Exhaustive => cfg.stop(StopRule::Exhaustive),
        Mode::AtStep => match args.steps {
            Some(s) => cfg.stop(StopRule::AtStep(s)),
            None => bail!("--mode at-step needs --steps"),
        },
    };
    let mut steps = Vec::new();
    for s in &args.snapshots {
        let step = match (s.as_str(), &milestones) {
            ("m1", Some(ms)) => ms.m1,
            ("m3", Some(ms)) => ms.m3,
            ("m1" | "m3", None) => bail!("snapshot {s} needs --k"),
            _ => s.parse().with_context(|| format!("snapshot {s:?} is not m1, m3 or a step number"))?,
        };
        steps.push(step);
    }
    steps.sort_unstable();
    steps.dedup();
    cfg = cfg.snapshots(steps.clone()).stream(args.stream.into()).trace(args.trace);
    if let Some(ms) = &milestones {
        cfg = cfg.register_event(EventSpec::new("m2", EventKind::LargestComponentSpecial { after: ms.m1 }))?;
    }
    let start = Instant::now();
    let report = run(&cfg)?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    let mut rec = meta("run");
    rec["config"] = json!({
        "n": args.n,
        "k": args.k,
        "family": args.family,
        "seed": args.seed,
        "mode": mode,
        "steps": args.steps,
        "snapshots": args.snapshots,
        "snapshot_steps": steps,
        "omega": args.omega.to_string(),
        "stream": cfg.stream,
    });
    rec["milestones"] = serde_json::to_value(&milestones)?;
    rec["report"] = serde_json::to_value(&report)?;
    rec["runtime_ms"] = json!(runtime_ms);
    emit(&rec)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn cmd_sweep(args: SweepArgs, workers: Option<usize>) -> Result<()> {
    let spec = SweepSpec {
        ns: args.n.clone(),
        ks: args.k.clone(),
        reps: args.reps,
        base_seed: args.seed,
        omega: args.omega,
        workers,
    };
    let points = spec.points()?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => {
            let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
            let mut m = meta("sweep");
            m["n"] = json!(args.n);
            m["k"] = json!(args.k.iter().map(|k| k.to_string()).collect::<Vec<_>>());
            m["points"] = json!(points);
            m["reps"] = json!(args.reps);
            m["base_seed"] = json!(args.seed);
            m["omega"] = json!(args.omega.to_string());
            m["seed_rule"] = json!("seed = base_seed + point_index * reps + rep, points in ascending (n, k)");
            std::fs::write(&meta_path, format!("{m}\n")).with_context(|| format!("writing {}", meta_path.display()))?;
            Box::new(create(path)?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(SweepRow::HEADER)?;
    w.flush()?;
    let rows = sweep(&spec, |rows| {
        for r in rows {
            w.write_record(r.record()).map_err(|e| fusionproc::Error::Output(e.to_string()))?;
        }
        w.flush().map_err(|e| fusionproc::Error::Output(e.to_string()))
    })?;
    if let Some(path) = &args.aggregate {
        let mut a = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(path)?);
        a.write_record(AggregateRow::header())?;
        for row in aggregate_rows(&rows)? {
            a.write_record(row.record())?;
        }
        a.flush()?;
    }
    Ok(())
}

fn cmd_phase(args: PhaseArgs, workers: Option<usize>) -> Result<()> {
    let est = phase_estimate(args.n, &args.k, args.reps, args.seed, workers)?;
    let mut rec = meta("phase-estimate");
    rec["config"] = json!({ "n": args.n, "k": args.k, "reps": args.reps, "seed": args.seed });
    rec["estimate"] = serde_json::to_value(&est)?;
    emit(&rec)
}

fn cmd_greedy(args: GreedyArgs) -> Result<()> {
    let (g, terminals) = match (&args.graph, &args.example) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let g = WeightedGraph::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            if args.terminals.is_empty() {
                bail!("--terminals is required with --graph");
            }
            (g, args.terminals.clone())
        }
        (None, Some(spec)) => {
            let (n, eps) = spec.split_once(',').context("--example takes `n,eps`")?;
            let n: usize = n.trim().parse().context("--example: bad n")?;
            let eps: f64 = eps.trim().parse().context("--example: bad eps")?;
            build_example_graph(n, eps)?
        }
        (None, None) => bail!("one of --graph or --example is required"),
    };
    let res = edge_first_greedy(&g, &terminals, args.seed)?;
    let mut rec = meta("greedy");
    rec["config"] = json!({
        "graph": args.graph,
        "example": args.example,
        "terminals": terminals,
        "seed": args.seed,
        "oracle": args.oracle,
    });
    rec["graph"] = json!({ "n": g.n(), "edges": g.edges().len(), "total_weight": g.total_weight() });
    rec["greedy"] = json!({
        "retained_weight": res.retained_weight,
        "removed_weight": res.removed_weight,
        "retained": res.retained.len(),
        "removed": res.removed.len(),
    });
    if args.oracle {
        let opt = brute_force_multiway_cut(&g, &terminals)?;
        let ratio = if opt.removed_weight > 0.0 {
            Some(res.removed_weight / opt.removed_weight)
        } else if res.removed_weight == 0.0 {
            Some(1.0)
        } else {
            None
        };
        rec["oracle"] = json!({ "removed_weight": opt.removed_weight, "removed": opt.removed.len(), "ratio": ratio });
    }
    emit(&rec)
}

fn cmd_cxy(args: CxyArgs) -> Result<()> {
    let increments = match (&args.c, &args.c_file) {
        (Some(s), _) => parse_increments(s)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_increment_file(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => bail!("one of --c or --c-file is required"),
    };
    let cfg = CxyConfig::new(increments, args.x, args.y, args.seed)?;
    let mut rec = meta("cxy");
    rec["config"] = json!({
        "c": args.c,
        "c_file": args.c_file,
        "r": cfg.increments.len(),
        "c_max": cfg.c_max(),
        "x": args.x,
        "y": args.y,
        "seed": args.seed,
        "check": args.check,
        "runs": args.runs,
    });
    match args.check {
        None => {
            let tr = run_cxy(&cfg);
            let x = tr.final_x();
            let t = tr.final_t();
            rec["result"] = json!({
                "t_final": t,
                "x_final": x,
                "y_final": t - x,
                "ratio_start": args.x as f64 / (args.x + args.y) as f64,
                "ratio_final": x as f64 / t as f64,
            });
        }
        Some(CxyCheck::Martingale) => rec["result"] = serde_json::to_value(check_martingale(&cfg, args.runs)?)?,
        Some(CxyCheck::Key) => {
            let chk = check_key_lemma(&cfg, args.w, args.runs)?;
            rec["config"]["w"] = json!(args.w);
            rec["result"] = serde_json::to_value(&chk)?;
            rec["result"]["holds"] = json!(chk.holds());
        }
        Some(CxyCheck::Cxy) => rec["result"] = serde_json::to_value(check_cxy_lemma(&cfg, args.runs)?)?,
    }
    emit(&rec)
}

fn cmd_selftest() -> Result<()> {
    let checks = selftest::run_all();
    let mut out = io::stdout().lock();
    for c in &checks {
        if c.passed {
            writeln!(out, "PASS {}", c.name)?;
        } else {
            writeln!(out, "FAIL {}: {}", c.name, c.detail)?;
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} self-test check(s) failed");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.filter(|&w| w > 0);
    if let Some(w) = workers {
        // the urn checks read the bound from the environment
        std::env::set_var(WORKERS_ENV, w.to_string());
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a, workers),
        Command::PhaseEstimate(a) => cmd_phase(a, workers),
        Command::Greedy(a) => cmd_greedy(a),
        Command::Cxy(a) => cmd_cxy(a),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
