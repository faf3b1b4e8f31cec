//! Command-line harness: generate point sets, check grid smoothness, run
//! the simulated-clique protocol, verify artifacts against a sequential
//! recomputation, and batch scaling sweeps.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 failed verdict
//! (non-smooth input, refused run, or verification mismatch).

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cliquedt::formats::{read_edges, read_points, read_regions, write_edges, write_points, write_regions};
use cliquedt::geometry::{voronoi_in_square_oracle, VoronoiRegion};
use cliquedt::protocol::{run_protocol, EmptySquarePolicy, ProtocolConfig, RunTrace};
use cliquedt::smoothness::{
    check_grid_smoothness, generate_adversarial_cluster, generate_perturbed_grid,
    generate_uniform, grid_jitter_bits, SmoothnessViolation,
};
use cliquedt::{ceil_log2, DelaunayEdge, Point, Square};

#[derive(Parser)]
#[command(name = "cliquedt", version, about = "Exact Delaunay/Voronoi on a simulated congested clique")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a point set and report whether it is grid-smooth.
    Generate(GenerateArgs),
    /// Check a point file for grid smoothness.
    CheckSmooth {
        /// Input points file.
        points: PathBuf,
    },
    /// Run the protocol on a point file and write edge, region, and
    /// report artifacts.
    Run(RunArgs),
    /// Recompute the diagram sequentially and compare artifacts exactly.
    Verify {
        /// Input points file.
        points: PathBuf,
        /// Edge list to verify.
        edges: PathBuf,
        /// Region file to verify.
        regions: PathBuf,
    },
    /// Run a size sweep and tabulate rounds and messages.
    Scaling(ScalingArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Generator {
    /// Jittered grid; always grid-smooth.
    Grid,
    /// Independent uniform points; usually but not always smooth.
    Uniform,
    /// Half the points packed beside an empty cell; never smooth.
    Cluster,
}

#[derive(Args)]
struct GenerateArgs {
    /// Clique size; n^2 points are generated.
    #[arg(long)]
    n: usize,
    /// Coordinate bits (grid side 2^bits); default suits the generator.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Generator::Grid)]
    generator: Generator,
    /// Output points file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Input points file; the count must be n^2 for some n >= 2.
    points: PathBuf,
    /// Output directory for edges.txt, regions.json, report.json.
    #[arg(long)]
    out: PathBuf,
    /// Run even if the input fails the smoothness check.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    knobs: CostKnobs,
}

/// Simulator pricing overrides, shared by run and scaling.
#[derive(Args)]
struct CostKnobs {
    /// Rounds charged per routing invocation.
    #[arg(long, value_name = "ROUNDS")]
    r_route: Option<u64>,
    /// Rounds charged per sorting invocation.
    #[arg(long, value_name = "ROUNDS")]
    r_sort: Option<u64>,
    /// Per-message budget as a multiple of ceil(log2 n) bits.
    #[arg(long, value_name = "FACTOR")]
    cmsg: Option<u32>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Comma-separated clique sizes.
    #[arg(long, value_delimiter = ',', default_values_t = vec![4usize, 8, 16])]
    sizes: Vec<usize>,
    /// Seeds per size; rounds and messages are averaged.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = Generator::Grid)]
    generator: Generator,
    /// Coordinate bits; default suits each size.
    #[arg(long)]
    bits: Option<u32>,
    /// Also write the table as a JSON array.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    knobs: CostKnobs,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args),
        Cmd::CheckSmooth { points } => cmd_check_smooth(points),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify { points, edges, regions } => cmd_verify(points, edges, regions),
        Cmd::Scaling(args) => cmd_scaling(args),
    }
}

fn generate(kind: Generator, count: u64, seed: u64, bits: u32) -> Result<Vec<Point>> {
    let points = match kind {
        Generator::Grid => generate_perturbed_grid(count, seed, bits),
        Generator::Uniform => generate_uniform(count, seed, bits),
        Generator::Cluster => generate_adversarial_cluster(count, seed, bits),
    }?;
    Ok(points)
}

fn violation_text(v: &SmoothnessViolation) -> String {
    format!(
        "square ({}) holds {} points while ({}) is empty at squared cell gap {}",
        v.heavy, v.heavy_count, v.empty, v.gap_squared
    )
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    if args.n < 2 {
        bail!("clique size must be at least 2, got {}", args.n);
    }
    let count = (args.n * args.n) as u64;
    let bits = args.bits.unwrap_or_else(|| grid_jitter_bits(count));
    let points = generate(args.generator, count, args.seed, bits)?;
    write_points(&args.out, &points, bits).context("writing points")?;
    let report = check_grid_smoothness(&points, bits, bits)?;
    let verdict = match &report.counterexample {
        None => "smooth: yes".to_string(),
        Some(v) => format!("smooth: no ({})", violation_text(v)),
    };
    println!(
        "wrote {} points ({} bits) to {}; {}",
        points.len(),
        bits,
        args.out.display(),
        verdict
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check_smooth(path: PathBuf) -> Result<ExitCode> {
    let (points, bits) = read_points(&path).context("reading points")?;
    let report = check_grid_smoothness(&points, bits, bits)?;
    match &report.counterexample {
        None => {
            println!("smooth: yes ({} points, {} bits)", points.len(), bits);
            Ok(ExitCode::SUCCESS)
        }
        Some(v) => {
            println!("smooth: no; {}", violation_text(v));
            Ok(ExitCode::from(2))
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    certified: bool,
    verdict: &'a str,
    trace: &'a RunTrace,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let (points, bits) = read_points(&args.points).context("reading points")?;
    let count = points.len() as u64;
    let n = count.isqrt() as usize;
    if n < 2 || (n * n) as u64 != count {
        bail!("point count {count} is not n^2 for any clique size n >= 2");
    }

    let smooth = check_grid_smoothness(&points, bits, bits)?;
    if let Some(v) = &smooth.counterexample {
        println!("input is not smooth: {}", violation_text(v));
        if !args.force {
            println!("refusing to run; pass --force to run anyway");
            return Ok(ExitCode::from(2));
        }
    }

    let mut cfg = ProtocolConfig::new(n, bits);
    if let Some(r) = args.knobs.r_route {
        cfg.r_route = r;
    }
    if let Some(r) = args.knobs.r_sort {
        cfg.r_sort = r;
    }
    if let Some(c) = args.knobs.cmsg {
        cfg.c_msg = c;
    }
    if args.force {
        cfg.empty_square = EmptySquarePolicy::Skip;
    }

    let out = match run_protocol(&points, &cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("protocol abort: {e}");
            return Ok(ExitCode::FAILURE);
        }
    };

    fs::create_dir_all(&args.out).context("creating output directory")?;
    let certified = smooth.ok();
    let verdict = if certified {
        "input certified smooth"
    } else {
        "input not certified"
    };
    write_edges(&args.out.join("edges.txt"), out.edges.iter(), bits)?;
    write_regions(&args.out.join("regions.json"), &out.regions, bits)?;
    let report = RunReport { certified, verdict, trace: &out.trace };
    fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("trace serializes"),
    )
    .context("writing report")?;

    println!(
        "n={} bits={} levels={} rounds={} messages={} edges={} regions={}; {}",
        n,
        bits,
        out.trace.levels.len(),
        out.trace.cost.rounds,
        out.trace.cost.messages,
        out.edges.len(),
        out.regions.len(),
        verdict
    );
    Ok(ExitCode::SUCCESS)
}

fn edge_text(e: &DelaunayEdge) -> String {
    format!("{} {} {} {}", e.u.x, e.u.y, e.v.x, e.v.y)
}

/// Reports the first position where two sorted edge lists differ, in
/// file-line terms.
fn first_edge_diff(got: &[DelaunayEdge], want: &[DelaunayEdge]) -> Option<String> {
    for i in 0..got.len().max(want.len()) {
        match (got.get(i), want.get(i)) {
            (Some(g), Some(w)) if g == w => continue,
            (Some(g), Some(w)) => {
                return Some(format!(
                    "edge {i}: file has \"{}\", recomputation wants \"{}\"",
                    edge_text(g),
                    edge_text(w)
                ))
            }
            (Some(g), None) => return Some(format!("edge {i}: extra \"{}\"", edge_text(g))),
            (None, Some(w)) => return Some(format!("edge {i}: missing \"{}\"", edge_text(w))),
            (None, None) => unreachable!(),
        }
    }
    None
}

fn first_region_diff(got: &[VoronoiRegion], want: &[VoronoiRegion]) -> Option<String> {
    for i in 0..got.len().max(want.len()) {
        match (got.get(i), want.get(i)) {
            (Some(g), Some(w)) => {
                if g.site != w.site {
                    return Some(format!(
                        "region {i}: file is for site {}, recomputation wants site {}",
                        g.site, w.site
                    ));
                }
                if g.vertices != w.vertices {
                    let j = g
                        .vertices
                        .iter()
                        .zip(&w.vertices)
                        .position(|(a, b)| a != b)
                        .unwrap_or(g.vertices.len().min(w.vertices.len()));
                    return Some(format!(
                        "region of {}: vertex {j} differs (file {:?}, recomputation {:?})",
                        g.site,
                        g.vertices.get(j),
                        w.vertices.get(j)
                    ));
                }
                if g.arcs != w.arcs {
                    let j = g
                        .arcs
                        .iter()
                        .zip(&w.arcs)
                        .position(|(a, b)| a != b)
                        .unwrap_or(g.arcs.len().min(w.arcs.len()));
                    return Some(format!(
                        "region of {}: arc {j} differs (file {:?}, recomputation {:?})",
                        g.site,
                        g.arcs.get(j),
                        w.arcs.get(j)
                    ));
                }
            }
            (Some(g), None) => {
                return Some(format!("region {i}: extra region for site {}", g.site))
            }
            (None, Some(w)) => {
                return Some(format!("region {i}: missing region for site {}", w.site))
            }
            (None, None) => unreachable!(),
        }
    }
    None
}

fn cmd_verify(points: PathBuf, edges: PathBuf, regions: PathBuf) -> Result<ExitCode> {
    let (points, bits) = read_points(&points).context("reading points")?;
    let (mut got_edges, edge_bits) = read_edges(&edges).context("reading edges")?;
    let (mut got_regions, region_bits) = read_regions(&regions).context("reading regions")?;
    if edge_bits != bits || region_bits != bits {
        bail!(
            "bit widths disagree: points {bits}, edges {edge_bits}, regions {region_bits}"
        );
    }

    let (want_regions, want_edges) = voronoi_in_square_oracle(&points, Square::unit(bits))
        .context("sequential recomputation")?;
    let want_edges: Vec<DelaunayEdge> = want_edges.into_iter().collect();
    got_edges.sort();
    got_regions.sort_by_key(|r| r.site);

    if let Some(diff) = first_edge_diff(&got_edges, &want_edges) {
        println!("verify FAIL: {diff}");
        return Ok(ExitCode::from(2));
    }
    if let Some(diff) = first_region_diff(&got_regions, &want_regions) {
        println!("verify FAIL: {diff}");
        return Ok(ExitCode::from(2));
    }
    println!(
        "verify PASS: {} edges and {} regions match the sequential recomputation",
        got_edges.len(),
        got_regions.len()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ScalingRow {
    n: usize,
    bits: u32,
    levels: u32,
    rounds: f64,
    messages: f64,
    rounds_per_log: f64,
    messages_per_quasilinear: f64,
}

fn cmd_scaling(args: ScalingArgs) -> Result<ExitCode> {
    if args.seeds == 0 {
        bail!("need at least one seed");
    }
    let mut rows = Vec::new();
    for &n in &args.sizes {
        if n < 2 {
            bail!("clique size must be at least 2, got {n}");
        }
        let count = (n * n) as u64;
        let bits = args.bits.unwrap_or_else(|| grid_jitter_bits(count));
        let mut cfg = ProtocolConfig::new(n, bits);
        if let Some(r) = args.knobs.r_route {
            cfg.r_route = r;
        }
        if let Some(r) = args.knobs.r_sort {
            cfg.r_sort = r;
        }
        if let Some(c) = args.knobs.cmsg {
            cfg.c_msg = c;
        }
        let (mut rounds, mut messages, mut levels) = (0u64, 0u64, 0u32);
        for seed in 0..args.seeds {
            let points = generate(args.generator, count, seed, bits)?;
            let out = run_protocol(&points, &cfg)
                .with_context(|| format!("n {n} seed {seed}"))?;
            rounds += out.trace.cost.rounds;
            messages += out.trace.cost.messages;
            levels = levels.max(out.trace.levels.len() as u32);
        }
        let k = args.seeds as f64;
        let (rounds, messages) = (rounds as f64 / k, messages as f64 / k);
        let log = f64::from(ceil_log2(n as u64));
        rows.push(ScalingRow {
            n,
            bits,
            levels,
            rounds,
            messages,
            rounds_per_log: rounds / log,
            messages_per_quasilinear: messages / ((n * n) as f64 * log),
        });
    }

    let mut table = String::new();
    writeln!(
        table,
        "{:>5} {:>5} {:>7} {:>10} {:>10} {:>13} {:>18}",
        "n", "bits", "levels", "rounds", "messages", "rounds/log2n", "msgs/(n^2 log2 n)"
    )
    .unwrap();
    for r in &rows {
        writeln!(
            table,
            "{:>5} {:>5} {:>7} {:>10.1} {:>10.1} {:>13.2} {:>18.2}",
            r.n, r.bits, r.levels, r.rounds, r.messages, r.rounds_per_log, r.messages_per_quasilinear
        )
        .unwrap();
    }
    print!("{table}");
    if let Some(path) = &args.out {
        fs::write(path, serde_json::to_string_pretty(&rows).expect("rows serialize"))
            .context("writing table")?;
    }
    Ok(ExitCode::SUCCESS)
}
