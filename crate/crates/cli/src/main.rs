//! `wpinq`: measure a protected edge list under a budget, then synthesize a
//! graph from the measurements alone.
//!
//! ```text
//! wpinq measure --input g.txt --query degseq,ccdf,nodecount,tbi --epsilon 0.1 --budget 1 --out-dir m
//! wpinq synthesize m/*.meas --steps 100000 --out-dir s
//! wpinq gen-benchmark --nodes 1000 --edges 5000 --beta 0.6 --out-dir b
//! wpinq report --input b/benchmark.edges --steps 20000
//! ```

mod ledger;

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wpinq::graphlib::generators::{barabasi_albert, complete_graph, rewire};
use wpinq::graphlib::stats::{sum_squared_degrees, triangle_count};
use wpinq::graphlib::{graph_plan, jdd_sala_baseline, Graph, GraphQuery, Symmetrization, EDGES};
use wpinq::inference::{
    fit_from_measurements, measure_graph, run_mcmc, synthesize, ScoreParams, SynthesisConfig, SyntheticState,
    DEFAULT_POW, SEED_QUERIES,
};
use wpinq::privacy::{BudgetAccount, Measurement, NoiseSource};

use ledger::LedgerFile;

/// Identifier of the directly noised joint-degree baseline.
const SALA_ID: &str = "jdd-sala";

#[derive(Parser, Debug)]
#[command(
    name = "wpinq",
    version,
    about = "Weighted private queries over graphs and synthetic graph fitting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Charge the input's budget ledger and write one measurement file per query.
    Measure(MeasureArgs),
    /// Fit a degree sequence, build a seed graph and walk it toward the target measurements.
    Synthesize(SynthesizeArgs),
    /// Write a preferential-attachment graph and a degree-preserving rewired copy.
    GenBenchmark(GenArgs),
    /// Print graph size, per-operator index sizes and MCMC throughput.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Protected edge list, one `a b` pair per line.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated: ccdf, degseq, nodecount, nodes, jdd, jdd-sala, tbd, sbd, tbi.
    #[arg(long, value_delimiter = ',', required = true)]
    query: Vec<String>,
    #[arg(long)]
    epsilon: f64,
    /// Total budget; only used when the ledger is created.
    #[arg(long)]
    budget: Option<f64>,
    /// Degree bucket width for `tbd`.
    #[arg(long, default_value_t = 1)]
    bucket_k: u32,
    #[arg(long, default_value = "symmetric-directed")]
    symmetrization: Symmetrization,
    #[arg(long, default_value_t = 0)]
    seed_noise: u64,
    /// Release exact values (testing only).
    #[arg(long)]
    zero_noise: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SynthesizeArgs {
    /// Measurement files; `degseq`, `ccdf` and `nodecount` seed the graph, the rest are fit targets.
    #[arg(required = true)]
    measurements: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    steps: u64,
    #[arg(long, default_value_t = DEFAULT_POW)]
    pow: f64,
    #[arg(long, default_value_t = 1000)]
    trace_interval: u64,
    #[arg(long, default_value_t = 0)]
    seed_graph: u64,
    #[arg(long, default_value_t = 0)]
    seed_walk: u64,
    #[arg(long, default_value = "symmetric-directed")]
    symmetrization: Symmetrization,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    /// Target edge count; ignored with `--complete`.
    #[arg(long, default_value_t = 0)]
    edges: usize,
    /// Dynamical exponent in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Emit the complete graph on `--nodes` nodes.
    #[arg(long)]
    complete: bool,
    /// Successful swaps for the rewired copy; defaults to ten per edge.
    #[arg(long)]
    rewire_swaps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed_graph: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Benchmark edge list. Its ledger is not consulted: do not point this at protected data.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated target queries for the throughput run.
    #[arg(long, value_delimiter = ',', default_value = "tbi")]
    query: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    bucket_k: u32,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    #[arg(long, default_value_t = DEFAULT_POW)]
    pow: f64,
    #[arg(long, default_value_t = 0)]
    seed_noise: u64,
    #[arg(long, default_value_t = 0)]
    seed_walk: u64,
    #[arg(long, default_value = "symmetric-directed")]
    symmetrization: Symmetrization,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Measure(args) => measure(args),
        Command::Synthesize(args) => synthesize_cmd(args),
        Command::GenBenchmark(args) => gen_benchmark(args),
        Command::Report(args) => report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Parsed `--query` list: graph queries in order, plus whether the baseline was asked for.
fn parse_queries(names: &[String], bucket_k: u32) -> Result<(Vec<GraphQuery>, bool)> {
    if bucket_k == 0 {
        bail!("--bucket-k must be at least 1");
    }
    let mut queries = Vec::new();
    let mut sala = false;
    let mut seen = BTreeSet::new();
    for name in names {
        let name = name.trim();
        if !seen.insert(name.to_string()) {
            bail!("query {name} requested twice");
        }
        match name {
            SALA_ID => sala = true,
            "tbd" => queries.push(GraphQuery::Tbd { bucket: bucket_k }),
            other => queries.push(other.parse()?),
        }
    }
    Ok((queries, sala))
}

fn read_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Graph::read_edge_list(BufReader::new(file))?)
}

fn write_graph(graph: &Graph, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    graph.write_edge_list(&mut out)?;
    out.flush()?;
    Ok(())
}

fn measure(args: MeasureArgs) -> Result<()> {
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        bail!("--epsilon must be positive and finite, got {}", args.epsilon);
    }
    let (queries, sala) = parse_queries(&args.query, args.bucket_k)?;
    let mut uses = if sala { 1 } else { 0 };
    if !queries.is_empty() {
        let plan = graph_plan(&queries, args.symmetrization)?;
        for q in &queries {
            uses += plan.uses(&q.id(), EDGES)?;
        }
    }
    let cost = uses as f64 * args.epsilon;
    let mut file = LedgerFile::open(&args.input, args.budget)?;
    let mut account = BudgetAccount::new();
    account.restore(EDGES, file.ledger);
    if let Err(e) = account.clone().charge_uses(&[(EDGES, uses)], args.epsilon) {
        bail!(
            "refused: this request would cost {cost:.16e} ({uses} uses at ε = {}), but {:.16e} of the cap {:.16e} remains ({e})",
            args.epsilon,
            file.ledger.cap - file.ledger.spent,
            file.ledger.cap,
        );
    }

    let mut noise = if args.zero_noise {
        NoiseSource::zero()
    } else {
        NoiseSource::seeded(args.seed_noise)
    };
    let (measurements, baseline) = {
        let graph = read_graph(&args.input)?;
        let measurements = if queries.is_empty() {
            Vec::new()
        } else {
            measure_graph(
                &graph,
                &queries,
                args.symmetrization,
                args.epsilon,
                &mut account,
                &mut noise,
            )?
        };
        let baseline = if sala {
            account.charge_uses(&[(EDGES, 1)], args.epsilon)?;
            Some(jdd_sala_baseline(&graph, args.epsilon, &mut noise)?)
        } else {
            None
        };
        (measurements, baseline)
    };

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for m in &measurements {
        let path = args.out_dir.join(format!("{}.meas", m.query_id()));
        let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        m.write_to(&mut out)?;
        out.flush()?;
        println!("wrote {} ({} released values)", path.display(), m.released_count());
    }
    if let Some(table) = baseline {
        let path = args.out_dir.join(format!("{SALA_ID}.txt"));
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "# query_id {SALA_ID}")?;
        writeln!(out, "# epsilon {:.16e}", args.epsilon)?;
        for ((di, dj), value) in &table {
            writeln!(out, "{di}\t{dj}\t{value:.16e}")?;
        }
        out.flush()?;
        println!("wrote {} ({} degree pairs)", path.display(), table.len());
    }

    let ledger = account.ledger(EDGES).expect("edges ledger was restored above");
    file.commit(ledger, cost, &args.query.join(","))?;
    println!(
        "budget {}: spent {:.16e} of {:.16e}",
        file.path.display(),
        ledger.spent,
        ledger.cap
    );
    Ok(())
}

fn read_measurement(path: &Path) -> Result<Measurement> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Measurement::read_from(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn synthesize_cmd(args: SynthesizeArgs) -> Result<()> {
    let mut all = Vec::new();
    for path in &args.measurements {
        all.push(Arc::new(read_measurement(path)?));
    }
    let seed_ids: Vec<String> = SEED_QUERIES.iter().map(|q| q.id()).collect();
    let sequence = fit_from_measurements(&all)?;
    let targets: Vec<Arc<Measurement>> = all
        .iter()
        .filter(|m| !seed_ids.iter().any(|id| id == m.query_id()))
        .cloned()
        .collect();
    let config = SynthesisConfig {
        policy: args.symmetrization,
        params: ScoreParams::new(args.pow)?,
        steps: args.steps,
        trace_interval: args.trace_interval,
        graph_seed: args.seed_graph,
        walk_seed: args.seed_walk,
    };
    let started = Instant::now();
    let out = synthesize(&sequence, &targets, &config)?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    write_graph(&out.seed, &args.out_dir.join("seed.edges"))?;
    write_graph(&out.graph, &args.out_dir.join("synthetic.edges"))?;
    let trace_path = args.out_dir.join("trace.csv");
    let mut trace = BufWriter::new(File::create(&trace_path)?);
    out.report.trace.write_csv(&mut trace)?;
    trace.flush()?;

    let r = &out.report;
    println!("fitted {} degrees; targets: {}", sequence.len(), target_names(&targets));
    println!(
        "steps {} accepted {} rejected {} invalid {} (acceptance {:.4})",
        r.steps,
        r.accepted,
        r.rejected,
        r.invalid,
        r.acceptance_rate()
    );
    if let Some(last) = r.trace.last() {
        println!(
            "final discrepancy {:.16e}, triangles {}, assortativity {:.16e}",
            last.discrepancy, last.triangles, last.assortativity
        );
    }
    if r.steps > 0 {
        println!("{:.1} steps/s", r.steps as f64 / elapsed.max(f64::MIN_POSITIVE));
    }
    println!("wrote {}", args.out_dir.display());
    Ok(())
}

fn target_names(targets: &[Arc<Measurement>]) -> String {
    if targets.is_empty() {
        "none".into()
    } else {
        targets.iter().map(|m| m.query_id()).collect::<Vec<_>>().join(",")
    }
}

fn gen_benchmark(args: GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed_graph);
    let graph = if args.complete {
        complete_graph(args.nodes)
    } else {
        if !(args.beta > 0.0 && args.beta < 1.0) {
            bail!("--beta must lie in (0, 1), got {}", args.beta);
        }
        if args.nodes < 2 || args.edges == 0 {
            bail!("need --nodes ≥ 2 and --edges ≥ 1 (or --complete)");
        }
        barabasi_albert(args.nodes, args.edges, args.beta, &mut rng)
    };
    let swaps = args.rewire_swaps.unwrap_or(10 * graph.num_edges());
    let rewired = rewire(&graph, swaps, &mut rng);

    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    for (name, g) in [("benchmark.edges", &graph), ("benchmark-rewired.edges", &rewired)] {
        let path = args.out_dir.join(name);
        write_graph(g, &path)?;
        println!(
            "wrote {}: {} nodes, {} edges, {} triangles",
            path.display(),
            g.num_nodes(),
            g.num_edges(),
            triangle_count(g)
        );
    }
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let graph = read_graph(&args.input)?;
    println!("nodes {}", graph.num_nodes());
    println!("edges {}", graph.num_edges());
    println!("sum of squared degrees {}", sum_squared_degrees(&graph));
    println!("triangles {}", triangle_count(&graph));

    let (queries, sala) = parse_queries(&args.query, args.bucket_k)?;
    if sala {
        bail!("{SALA_ID} is not an incremental query and has no throughput to report");
    }
    if queries.is_empty() {
        return Ok(());
    }
    let mut account = BudgetAccount::new();
    account.register(EDGES, f64::MAX)?;
    let targets: Vec<Arc<Measurement>> = measure_graph(
        &graph,
        &queries,
        args.symmetrization,
        args.epsilon,
        &mut account,
        &mut NoiseSource::seeded(args.seed_noise),
    )?
    .into_iter()
    .map(Arc::new)
    .collect();
    let mut state = SyntheticState::new(graph, &targets, args.symmetrization, ScoreParams::new(args.pow)?)?;

    println!("index sizes (operator, state entries, output records):");
    for (label, state_entries, outputs) in state.evaluation().index_sizes() {
        println!("  {label}\t{state_entries}\t{outputs}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed_walk);
    let started = Instant::now();
    let r = run_mcmc(&mut state, args.steps, 0, &mut rng)?;
    let elapsed = started.elapsed().as_secs_f64();
    if r.steps > 0 {
        println!(
            "mcmc {} steps in {:.3}s: {:.1} steps/s (acceptance {:.4})",
            r.steps,
            elapsed,
            r.steps as f64 / elapsed.max(f64::MIN_POSITIVE),
            r.acceptance_rate()
        );
    }
    Ok(())
}
