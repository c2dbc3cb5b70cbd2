mod config;
mod svg;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use slelab_core::domain::build_disk_domain;
use slelab_core::lattice::{Lattice, LatticeWalkSpec, Vertex};
use slelab_core::lerw::{LerwSampler, LoopErasedPath};
use slelab_core::loewner::{sle_trace, write_curve_csv, Mode};
use slelab_core::observables::{peano_driving, DiskToHalfPlane, MAX_DT_FRACTION, PEANO_SPACING};
use slelab_core::loewner::ZipperOptions;
use slelab_core::peano::{to_plane, GridTree, PeanoConfig};
use slelab_core::rng::{streams, RngKey};
use slelab_core::stats::Verdict;
use slelab_core::ust::{wilson_ust, WeightedGraph};
use slelab_core::verify::{run_suite, Budget, Model, Suite, SuiteOptions};

use config::{ExperimentConfig, Overrides, SEED_ENV};
use svg::Svg;

#[derive(Parser, Debug)]
#[command(name = "slelab", version, about = "Loop-erased walks, spanning-tree Peano curves and their Loewner driving functions")]
struct Cli {
    /// Worker threads for replica-parallel work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one object and write JSON/CSV plus an SVG rendering.
    Sample {
        kind: Kind,
        #[command(flatten)]
        o: Overrides,
    },
    /// Run a verification suite; exit 0 on pass, 1 on failure, 2 if inconclusive.
    Verify {
        suite: String,
        #[command(flatten)]
        o: Overrides,
    },
    /// Time the main samplers.
    Bench {
        #[command(flatten)]
        o: Overrides,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Lerw,
    Ust,
    Peano,
    Sle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(64)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let env_seed = std::env::var(SEED_ENV).ok();
    match cli.command {
        Command::Sample { kind, o } => {
            let name = format!("sample {}", format!("{kind:?}").to_lowercase());
            let c = prepare(&o, &name, env_seed)?;
            match kind {
                Kind::Lerw => sample_lerw(&c)?,
                Kind::Ust => sample_ust(&c)?,
                Kind::Peano => sample_peano(&c)?,
                Kind::Sle => sample_sle(&c)?,
            }
            Ok(0)
        }
        Command::Verify { suite, o } => {
            let c = prepare(&o, &format!("verify {suite}"), env_seed)?;
            let s: Suite = suite.parse()?;
            let opts = SuiteOptions {
                budget: c.budget.parse::<Budget>()?,
                seed: c.seed,
                model: c.model.parse::<Model>()?,
                max_trees: c.max_trees,
            };
            let start = Instant::now();
            let report = run_suite(s, &opts)?;
            let path = c.out.join("report.json");
            write_json(&path, &report)?;
            for e in &report.entries {
                println!("{:<12} {}: {:.6} [{}]", format!("{:?}", e.verdict).to_lowercase(), e.test, e.estimate, e.criterion);
            }
            for n in &report.notes {
                println!("note: {n}");
            }
            let v = report.verdict();
            println!("{}: {:?} in {:.1} s; report {}", report.name, v, start.elapsed().as_secs_f64(), path.display());
            Ok(match v {
                Verdict::Pass => 0,
                Verdict::Fail => 1,
                Verdict::Inconclusive => 2,
            })
        }
        Command::Bench { o } => {
            let c = prepare(&o, "bench", env_seed)?;
            bench(&c)?;
            Ok(0)
        }
    }
}

/// Resolves the configuration, creates the output directory and persists
/// the resolved configuration there.
fn prepare(o: &Overrides, experiment: &str, env_seed: Option<String>) -> Result<ExperimentConfig> {
    let c = o.resolve(experiment, env_seed)?;
    fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    write_json(&c.out.join("experiment.json"), &c)?;
    Ok(c)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_svg(c: &ExperimentConfig, name: &str, svg: &Svg) -> Result<()> {
    let path = c.out.join(name);
    fs::write(&path, svg.finish(!c.deterministic)).with_context(|| format!("writing {}", path.display()))
}

fn plane(v: Vertex) -> Complex64 {
    Complex64::new(v.x as f64, v.y as f64)
}

#[derive(Serialize)]
struct LerwOutput {
    radius: f64,
    seed: u64,
    exit: [i32; 4],
    path: LoopErasedPath,
}

fn sample_lerw(c: &ExperimentConfig) -> Result<()> {
    let domain = build_disk_domain(c.radius, Lattice::Square)?;
    let mut sampler = LerwSampler::new(&domain, &LatticeWalkSpec::simple_square())?;
    let mut rng = RngKey::new(c.seed).with_stream(streams::LERW).rng();
    let d = sampler.sample_decomposition(&mut rng)?;
    let e = d.walk.exit_pair.context("walk did not exit")?;
    write_json(
        &c.out.join("lerw.json"),
        &LerwOutput { radius: c.radius, seed: c.seed, exit: [e.inner.x, e.inner.y, e.outer.x, e.outer.y], path: d.gamma.clone() },
    )?;
    let pts: Vec<Complex64> = d.gamma.vertices.iter().map(|&v| plane(v)).collect();
    let r = Complex64::new(c.radius, c.radius);
    let mut svg = Svg::new(-r * 1.02, r * 1.02, 800.0 / (2.04 * c.radius));
    svg.circle(Complex64::new(0.0, 0.0), c.radius, "#999999");
    svg.polyline(&pts, "black", 1.0);
    svg.dot(Complex64::new(0.0, 0.0), 3.0, "red");
    write_svg(c, "lerw.svg", &svg)
}

#[derive(Serialize)]
struct UstOutput {
    width: i32,
    height: i32,
    seed: u64,
    edges: Vec<[i32; 4]>,
}

fn sample_ust(c: &ExperimentConfig) -> Result<()> {
    if c.width < 1 || c.height < 1 {
        bail!("width and height must be positive");
    }
    let (w, h) = (c.width + 1, c.height + 1);
    let id = |x: i32, y: i32| (y * w + x) as usize;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    let g = WeightedGraph::unweighted((w * h) as usize, &edges)?;
    let mut rng = RngKey::new(c.seed).with_stream(streams::WILSON).rng();
    let t = wilson_ust(&g, 0, None, &mut rng)?;
    let at = |i: usize| Vertex::new(i as i32 % w, i as i32 / w);
    let segs: Vec<(Vertex, Vertex)> = t.edges.iter().map(|&k| (at(g.edges()[k].0), at(g.edges()[k].1))).collect();
    write_json(
        &c.out.join("ust.json"),
        &UstOutput { width: c.width, height: c.height, seed: c.seed, edges: segs.iter().map(|(a, b)| [a.x, a.y, b.x, b.y]).collect() },
    )?;
    let corners = [Complex64::new(0.0, 0.0), Complex64::new(c.width as f64, c.height as f64)];
    let mut svg = Svg::fitting(&corners, 1.0, 800.0);
    svg.segments(&segs.iter().map(|&(a, b)| (plane(a), plane(b))).collect::<Vec<_>>(), "black", 1.5);
    write_svg(c, "ust.svg", &svg)
}

fn tree_segments(t: &GridTree) -> Vec<(Complex64, Complex64)> {
    t.edges.iter().map(|&(a, b)| (to_plane(a), to_plane(b))).collect()
}

fn sample_peano(c: &ExperimentConfig) -> Result<()> {
    let cfg = PeanoConfig::rectangle(c.width, c.height)?;
    let mut rng = RngKey::new(c.seed).with_stream(streams::PEANO).rng();
    let tree = cfg.sample_tree(&mut rng)?;
    let dual = cfg.dual_tree(&tree)?;
    let path = cfg.peano_curve(&tree)?;
    write_json(&c.out.join("peano_config.json"), &cfg.to_json())?;
    write_json(&c.out.join("tree.json"), &tree)?;
    write_json(&c.out.join("dual_tree.json"), &dual)?;
    write_json(&c.out.join("peano.json"), &path)?;
    let pts = path.points();
    let mut svg = Svg::fitting(&pts, 1.0, 900.0);
    svg.segments(&tree_segments(&tree), "#1f4e9c", 1.5);
    svg.segments(&tree_segments(&dual), "#c0392b", 1.0);
    svg.polyline(&pts, "black", 0.8);
    svg.dot(to_plane(cfg.a()), 3.0, "green");
    svg.dot(to_plane(cfg.b()), 3.0, "orange");
    write_svg(c, "peano.svg", &svg)
}

fn sample_sle(c: &ExperimentConfig) -> Result<()> {
    let mode: Mode = c.mode.parse()?;
    let mut rng = RngKey::new(c.seed).with_stream(streams::SLE).rng();
    let trace = sle_trace(c.kappa, mode, c.t_max, c.dt, &mut rng)?;
    let mut f = fs::File::create(c.out.join("driving.csv"))?;
    trace.record.write_csv(&mut f)?;
    let mut f = fs::File::create(c.out.join("trace.csv"))?;
    write_curve_csv(&mut f, &trace.record.times, &trace.curve())?;
    let curve = trace.curve();
    let mut svg = match mode {
        Mode::Radial => {
            let mut s = Svg::new(Complex64::new(-1.05, -1.05), Complex64::new(1.05, 1.05), 400.0);
            s.circle(Complex64::new(0.0, 0.0), 1.0, "#999999");
            s
        }
        Mode::Chordal => {
            let mut s = Svg::fitting(curve.iter().chain(&[Complex64::new(0.0, 0.0)]), 0.1, 800.0);
            let w = 10.0 * c.t_max.sqrt() + 1.0;
            s.segments(&[(Complex64::new(-w, 0.0), Complex64::new(w, 0.0))], "#999999", 1.0);
            s
        }
    };
    svg.polyline(&curve, "black", 1.0);
    write_svg(c, "sle.svg", &svg)
}

#[derive(Serialize)]
struct BenchEntry {
    task: String,
    seconds: f64,
    repeats: usize,
}

fn bench(c: &ExperimentConfig) -> Result<()> {
    let mut out = Vec::new();
    let mut time = |task: String, repeats: usize, f: &mut dyn FnMut() -> Result<()>| -> Result<()> {
        let s = Instant::now();
        for _ in 0..repeats {
            f()?;
        }
        let e = BenchEntry { task, seconds: s.elapsed().as_secs_f64() / repeats as f64, repeats };
        println!("{:<45} {:>10.4} s", e.task, e.seconds);
        out.push(e);
        Ok(())
    };
    let key = RngKey::new(c.seed);
    let domain = build_disk_domain(c.radius, Lattice::Square)?;
    let mut sampler = LerwSampler::new(&domain, &LatticeWalkSpec::simple_square())?;
    let mut rng = key.with_stream(streams::LERW).rng();
    time(format!("LERW, disk radius {}", c.radius), 20, &mut || sampler.sample_reversed(&mut rng).map(|_| ()).map_err(Into::into))?;
    let cfg = PeanoConfig::disk(c.radius, PI, 0.0)?;
    let mut rng = key.with_stream(streams::PEANO).rng();
    let mut tree = None;
    time(format!("Wilson UST, Peano disk radius {}", c.radius), 3, &mut || {
        tree = Some(cfg.sample_tree(&mut rng)?);
        Ok(())
    })?;
    let tree = tree.unwrap();
    let map = DiskToHalfPlane::for_config(&cfg)?;
    let opts = ZipperOptions { max_dt: MAX_DT_FRACTION * 0.1, t_max: 0.1, ..Default::default() };
    time("Peano driving function to T = 0.1".into(), 1, &mut || {
        peano_driving(&cfg, &map, &tree, PEANO_SPACING, opts).map(|_| ()).map_err(Into::into)
    })?;
    let mut rng = key.with_stream(streams::SLE).rng();
    time("SLE(2) chordal trace, 1000 steps".into(), 3, &mut || {
        sle_trace(2.0, Mode::Chordal, 1.0, 1e-3, &mut rng).map(|_| ()).map_err(Into::into)
    })?;
    write_json(&c.out.join("bench.json"), &out)
}
