use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use digits::analysis::{sauer_bound, tail_bounds, tail_exact, TailParams};
use digits::oracles::VerifierConfig;
use digits::post::parse_postcondition;
use digits::search::{
    predicted_queries, Engine, EngineConfig, Problem, SynthesizerKind, TauMode,
    ThresholdDenominator,
};
use digits::sketch::HoleAssignment;
use digits::{BoxProgram, InputDistribution, Program, ProgramClass};
use digits_cli::bench::{self, BenchmarkSpec, Overrides, TauSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DenomArg {
    Depth,
    Length,
}

#[derive(Parser)]
#[command(name = "digits", version, about = "Distribution-guided inductive synthesis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// RNG seed for sampling and verification pools.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true)]
    time_budget_s: Option<f64>,
    /// Maximum search depth (number of samples).
    #[arg(long, global = true)]
    depth_budget: Option<usize>,
    /// Fixed pruning threshold in (0, 1].
    #[arg(long, global = true, conflicts_with = "adaptive")]
    tau: Option<f64>,
    /// Adaptive threshold mode (shrink tau to the best verified error).
    #[arg(long, global = true)]
    adaptive: bool,
    /// SMT solver executable for sketch synthesis.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Per-query solver timeout in milliseconds.
    #[arg(long, global = true)]
    solver_timeout_ms: Option<u64>,
    /// Sample-pool size per verification call.
    #[arg(long, global = true)]
    verify_samples: Option<usize>,
    /// Output directory (default: print to stdout where applicable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Denominator of the pruning ratio.
    #[arg(long, global = true, value_enum)]
    threshold_denominator: Option<DenomArg>,
    /// Re-issue a synthesis query once when the solver answers unknown.
    #[arg(long, global = true)]
    retry_unknown: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a benchmark spec file end to end.
    Run {
        /// Benchmark spec (JSON).
        spec: PathBuf,
    },
    /// Synthesize for a one-shot problem given on the command line.
    Synth {
        /// Program class: interval, rect<D> (e.g. rect2), or sketch.
        #[arg(long)]
        class: String,
        /// Interval specification upper bound (class interval).
        #[arg(long)]
        spec: Option<f64>,
        /// Box specification "lo1,lo2,..:hi1,hi2,.." (class rectD).
        #[arg(long)]
        spec_box: Option<String>,
        /// Sketch file (class sketch); the functional spec is constant 0.
        #[arg(long)]
        sketch: Option<PathBuf>,
        /// Postcondition text.
        #[arg(long)]
        post: String,
        /// Distribution JSON file (default: uniform on [0,1] or [-1,1]^d).
        #[arg(long)]
        dist: Option<PathBuf>,
    },
    /// Emit the analysis table (CSV): measured vs predicted query counts,
    /// growth envelopes, and tail bounds per depth.
    Analyze {
        #[arg(long, default_value = "interval")]
        class: String,
        #[arg(long)]
        m_max: usize,
        /// True disagreement probability for the tail columns.
        #[arg(long, default_value_t = 0.1)]
        tail_k: f64,
        /// Pruning threshold for the tail columns.
        #[arg(long, default_value_t = 0.2)]
        tail_tau: f64,
    },
    /// Sketch utilities.
    Sketch {
        #[command(subcommand)]
        cmd: SketchCmd,
    },
    /// Regenerate the shipped benchmark suite.
    GenBench {},
}

#[derive(Subcommand)]
enum SketchCmd {
    /// Parse a sketch file, report its shape, and optionally evaluate it.
    Check {
        file: PathBuf,
        /// Input vector (repeat per coordinate).
        #[arg(long = "input", num_args = 1.., value_delimiter = ',')]
        inputs: Vec<f64>,
        /// Hole values (repeat per hole, in source order).
        #[arg(long = "holes", num_args = 1.., value_delimiter = ',')]
        holes: Vec<f64>,
    },
}

/// Usage errors exit 2, infrastructure errors exit 1.
enum CliError {
    Usage(anyhow::Error),
    Infra(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Infra(e)
    }
}

fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Infra(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides {
        seed: cli.seed,
        time_budget_s: cli.time_budget_s,
        depth_budget: cli.depth_budget,
        tau: if cli.adaptive {
            Some(TauSpec::Named("adaptive".into()))
        } else {
            cli.tau.map(TauSpec::Fixed)
        },
        solver: cli.solver.clone(),
        solver_timeout_ms: cli.solver_timeout_ms,
        verify_samples: cli.verify_samples,
        denominator: cli.threshold_denominator.map(|d| match d {
            DenomArg::Depth => ThresholdDenominator::Depth,
            DenomArg::Length => ThresholdDenominator::Length,
        }),
        retry_unknown: cli.retry_unknown,
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let ov = overrides(&cli);
    match &cli.cmd {
        Cmd::Run { spec } => cmd_run(spec, &cli, &ov),
        Cmd::Synth {
            class,
            spec,
            spec_box,
            sketch,
            post,
            dist,
        } => cmd_synth(class, *spec, spec_box, sketch, post, dist, &cli, &ov),
        Cmd::Analyze {
            class,
            m_max,
            tail_k,
            tail_tau,
        } => cmd_analyze(class, *m_max, *tail_k, *tail_tau, &cli, &ov),
        Cmd::Sketch {
            cmd: SketchCmd::Check {
                file,
                inputs,
                holes,
            },
        } => cmd_sketch_check(file, inputs, holes),
        Cmd::GenBench {} => {
            let dir = cli
                .out
                .clone()
                .ok_or_else(|| usage(anyhow!("gen-bench requires --out DIR")))?;
            let written = bench::write_suite(&dir)?;
            println!("wrote {} files to {}", written.len(), dir.display());
            Ok(())
        }
    }
}

fn cmd_run(spec_path: &PathBuf, cli: &Cli, ov: &Overrides) -> Result<(), CliError> {
    let spec = BenchmarkSpec::from_file(spec_path).map_err(usage)?;
    let base_dir = spec_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let outdir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&spec.name));
    let summary = bench::run_experiment(&spec, &base_dir, &outdir, ov)?;
    println!(
        "{}: {} completed, {} skipped, {} failed -> {}",
        summary.name,
        summary.completed,
        summary.skipped,
        summary.failed,
        outdir.display()
    );
    if !summary.sample_sharing_ok {
        return Err(CliError::Infra(anyhow!(
            "sample-sharing audit failed: same-seed runs consumed different samples"
        )));
    }
    if summary.completed == 0 && (summary.failed > 0 || summary.skipped > 0) {
        return Err(CliError::Infra(anyhow!("all runs failed or were skipped")));
    }
    Ok(())
}

fn parse_box(text: &str) -> Result<BoxProgram> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("--spec-box must look like lo1,lo2:hi1,hi2"))?;
    let parse_vec = |s: &str| -> Result<Vec<f64>> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| anyhow!("{e}: {v:?}")))
            .collect()
    };
    let (lo, hi) = (parse_vec(lo)?, parse_vec(hi)?);
    if lo.len() != hi.len() || lo.is_empty() {
        bail!("--spec-box bounds must be nonempty and of equal dimension");
    }
    Ok(BoxProgram::new(lo, hi))
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    class: &str,
    spec_hi: Option<f64>,
    spec_box: &Option<String>,
    sketch: &Option<PathBuf>,
    post: &str,
    dist: &Option<PathBuf>,
    cli: &Cli,
    ov: &Overrides,
) -> Result<(), CliError> {
    let post = parse_postcondition(post).map_err(usage)?;
    let (synth, spec_prog): (SynthesizerKind, Program) = if class == "interval" {
        let hi = spec_hi.ok_or_else(|| usage(anyhow!("class interval requires --spec HI")))?;
        (
            SynthesizerKind::Box(ProgramClass::Interval),
            Program::interval(hi),
        )
    } else if let Some(d) = class.strip_prefix("rect") {
        let d: usize = d
            .parse()
            .map_err(|_| usage(anyhow!("bad class {class:?}; use rect<D>, e.g. rect2")))?;
        let b = parse_box(
            spec_box
                .as_deref()
                .ok_or_else(|| usage(anyhow!("class rect{d} requires --spec-box")))?,
        )
        .map_err(usage)?;
        if b.dim() != d {
            return Err(usage(anyhow!("--spec-box dimension differs from class")));
        }
        (
            SynthesizerKind::Box(ProgramClass::Rect { dim: d }),
            Program::Box(b),
        )
    } else if class == "sketch" {
        let path = sketch
            .as_ref()
            .ok_or_else(|| usage(anyhow!("class sketch requires --sketch FILE")))?;
        let source = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(usage)?;
        let ast = digits::sketch::parse(&source).map_err(usage)?.unroll();
        let dim = ast.inputs.len();
        let solver = match &ov.solver {
            Some(cmd) => digits::sketch::smt::SolverConfig::new(cmd.clone()),
            None => digits::sketch::smt::SolverConfig::discover().ok_or_else(|| {
                CliError::Infra(anyhow!(
                    "no SMT solver found; set --solver or DIGITS_SOLVER"
                ))
            })?,
        };
        (
            SynthesizerKind::Sketch {
                ast: Arc::new(ast),
                solver,
            },
            Program::constant_zero(dim),
        )
    } else {
        return Err(usage(anyhow!(
            "unknown class {class:?} (interval, rect<D>, sketch)"
        )));
    };

    let dim = spec_prog.dimension();
    let distribution = match dist {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(usage)?;
            InputDistribution::from_json(&text).map_err(usage)?
        }
        None if class == "interval" => InputDistribution::uniform_unit(),
        None => InputDistribution::uniform_cube(dim),
    };

    let run = bench::RunSpec {
        tau: TauSpec::Fixed(1.0),
        time_budget_s: None,
        // keep unbudgeted invocations finite
        depth_budget: Some(50),
        seed: 0,
    };
    let config = bench::engine_config(&run, ov)?;
    let problem = Problem {
        spec: Arc::new(spec_prog),
        dist: distribution,
        post,
        synth,
    };
    let mut engine = Engine::new(problem, config).map_err(usage)?;
    let report = engine.run();
    println!("{}", serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?);
    if let Some(dir) = &cli.out {
        bench::write_report_files(dir, &report)?;
    }
    Ok(())
}

fn cmd_analyze(
    class: &str,
    m_max: usize,
    tail_k: f64,
    tail_tau: f64,
    cli: &Cli,
    ov: &Overrides,
) -> Result<(), CliError> {
    if m_max == 0 || m_max > 200 {
        return Err(usage(anyhow!("--m-max must be in 1..=200")));
    }
    let (program_class, spec, dist): (ProgramClass, Program, InputDistribution) = match class {
        "interval" => (
            ProgramClass::Interval,
            Program::interval(0.5),
            InputDistribution::uniform_unit(),
        ),
        _ => {
            let Some(d) = class.strip_prefix("rect").and_then(|d| d.parse().ok()) else {
                return Err(usage(anyhow!("analyze supports interval or rect<D>")));
            };
            let mut lo = vec![-1.0; d];
            let mut hi = vec![1.0; d];
            lo[0] = 0.0;
            hi[0] = 0.5;
            (
                ProgramClass::Rect { dim: d },
                Program::Box(BoxProgram::new(lo, hi)),
                InputDistribution::uniform_cube(d),
            )
        }
    };
    if matches!(program_class, ProgramClass::Rect { dim } if dim > 1) && m_max > 20 {
        return Err(usage(anyhow!(
            "rect dichotomy prediction enumerates 2^m labelings; use --m-max <= 20"
        )));
    }
    let vc = program_class.vc_dimension().unwrap();
    let seed = ov.seed.unwrap_or(0);
    let verifier = VerifierConfig {
        samples: ov.verify_samples.unwrap_or(200),
        seed,
        ..VerifierConfig::default()
    };
    let problem = Problem {
        spec: Arc::new(spec),
        dist,
        post: digits::post::Postcondition::vacuous(),
        synth: SynthesizerKind::Box(program_class.clone()),
    };
    // one unpruned run to the deepest m; per-depth counts are re-measured
    // with fresh engines on the same seed (identical sample prefixes)
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let config = EngineConfig {
            tau: TauMode::Fixed(1.0),
            depth_budget: Some(m),
            seed,
            verifier,
            ..EngineConfig::default()
        };
        let mut engine = Engine::new(problem.clone(), config).map_err(anyhow::Error::from)?;
        let report = engine.run();
        let predicted =
            predicted_queries(&program_class, engine.samples(), m).map_err(anyhow::Error::from)?;
        let envelope = if m >= vc {
            format!("{}", sauer_bound(vc, m).map_err(anyhow::Error::from)?)
        } else {
            String::new()
        };
        let t = TailParams::new(m, tail_k, tail_tau).map_err(usage)?;
        let (hoeffding, kl) = tail_bounds(&t).map_err(usage)?;
        rows.push([
            m.to_string(),
            report.counters.synth_queries.to_string(),
            predicted.to_string(),
            envelope,
            format!("{}", tail_exact(&t)),
            format!("{hoeffding}"),
            format!("{kl}"),
        ]);
    }

    let header = [
        "m",
        "measured_queries",
        "lemma1_prediction",
        "sauer_envelope",
        "tail_exact",
        "tail_hoeffding",
        "tail_kl",
    ];
    let mut w: csv::Writer<Box<dyn std::io::Write>> = match &cli.out {
        Some(path) => csv::Writer::from_writer(Box::new(
            fs::File::create(path).map_err(anyhow::Error::from)?,
        )),
        None => csv::Writer::from_writer(Box::new(std::io::stdout())),
    };
    w.write_record(header).map_err(anyhow::Error::from)?;
    for row in rows {
        w.write_record(&row).map_err(anyhow::Error::from)?;
    }
    w.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

fn cmd_sketch_check(file: &PathBuf, inputs: &[f64], holes: &[f64]) -> Result<(), CliError> {
    let source = fs::read_to_string(file)
        .with_context(|| format!("cannot read {}", file.display()))
        .map_err(usage)?;
    let ast = digits::sketch::parse(&source).map_err(usage)?;
    let unrolled = ast.unroll();
    println!("name: {}", ast.name);
    println!("inputs: {}", ast.inputs.join(", "));
    println!("holes: {}", ast.holes.len());
    for h in &ast.holes {
        println!("  h{} in [{}, {}]", h.index, h.lo, h.hi);
    }
    println!("loop_free: {}", ast.is_loop_free());
    println!("assert_events (after unrolling): {}", unrolled.asserts().len());
    if !holes.is_empty() || !inputs.is_empty() {
        if holes.len() != ast.holes.len() {
            return Err(usage(anyhow!(
                "expected {} hole values, got {}",
                ast.holes.len(),
                holes.len()
            )));
        }
        if inputs.len() != ast.inputs.len() {
            return Err(usage(anyhow!(
                "expected {} inputs, got {}",
                ast.inputs.len(),
                inputs.len()
            )));
        }
        let assignment = HoleAssignment::new(holes.to_vec());
        if !assignment.in_ranges(&ast) {
            return Err(usage(anyhow!("hole values outside their ranges")));
        }
        let (ret, events) = unrolled.evaluate(&assignment, inputs);
        println!("output: {}", u8::from(ret));
        let events: Vec<String> = events.iter().map(|e| u8::from(*e).to_string()).collect();
        println!("events: [{}]", events.join(", "));
    }
    Ok(())
}
