//! Benchmark specs, suite generators, and the experiment runner.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use digits::oracles::VerifierConfig;
use digits::post::parse_postcondition;
use digits::search::{
    Engine, EngineConfig, Problem, RunReport, SynthesizerKind, TauMode, ThresholdDenominator,
};
use digits::sketch::smt::SolverConfig;
use digits::{BoxProgram, InputDistribution, Program, ProgramClass};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassSpec {
    Interval,
    Rect { dim: usize },
    /// Sketch file path, relative to the benchmark spec file.
    Sketch { file: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecProgram {
    Interval { hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    ConstantZero { dim: usize },
}

impl SpecProgram {
    pub fn to_program(&self) -> Program {
        match self {
            SpecProgram::Interval { hi } => Program::interval(*hi),
            SpecProgram::Box { lo, hi } => Program::Box(BoxProgram::new(lo.clone(), hi.clone())),
            SpecProgram::ConstantZero { dim } => Program::constant_zero(*dim),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub class: ClassSpec,
    pub spec: SpecProgram,
    pub distribution: InputDistribution,
    pub postcondition: String,
}

/// Either a fixed ratio or the string `"adaptive"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Fixed(f64),
    Named(String),
}

impl TauSpec {
    pub fn to_mode(&self) -> Result<TauMode> {
        match self {
            TauSpec::Fixed(t) => {
                if !(*t > 0.0 && *t <= 1.0) {
                    bail!("fixed tau must be in (0, 1], got {t}");
                }
                Ok(TauMode::Fixed(*t))
            }
            TauSpec::Named(s) if s == "adaptive" => Ok(TauMode::Adaptive { initial: 1.0 }),
            TauSpec::Named(s) => bail!("unknown tau mode {s:?} (expected a number or \"adaptive\")"),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TauSpec::Fixed(t) => format!("tau{t}"),
            TauSpec::Named(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSpec {
    pub tau: TauSpec,
    #[serde(default)]
    pub time_budget_s: Option<f64>,
    #[serde(default)]
    pub depth_budget: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: String,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    pub runs: Vec<RunSpec>,
}

impl BenchmarkSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read benchmark spec {}", path.display()))?;
        let spec: BenchmarkSpec = serde_json::from_str(&text)
            .with_context(|| format!("malformed benchmark spec {}", path.display()))?;
        spec.problem.distribution.validate()?;
        Ok(spec)
    }
}

/// Knobs applied on top of a benchmark spec (CLI flags).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub time_budget_s: Option<f64>,
    pub depth_budget: Option<usize>,
    pub tau: Option<TauSpec>,
    pub solver: Option<String>,
    pub solver_timeout_ms: Option<u64>,
    pub verify_samples: Option<usize>,
    pub denominator: Option<ThresholdDenominator>,
    pub retry_unknown: bool,
}

fn solver_config(ov: &Overrides) -> Option<SolverConfig> {
    let mut cfg = match &ov.solver {
        Some(cmd) => Some(SolverConfig::new(cmd.clone())),
        None => SolverConfig::discover(),
    }?;
    if let Some(ms) = ov.solver_timeout_ms {
        cfg.timeout = Duration::from_millis(ms);
    }
    Some(cfg)
}

/// Builds the engine problem from a problem spec. `base_dir` resolves
/// relative sketch paths. Returns Ok(None) when the problem needs an SMT
/// solver and none is configured or discoverable.
pub fn build_problem(
    ps: &ProblemSpec,
    base_dir: &Path,
    ov: &Overrides,
) -> Result<Option<Problem>> {
    let post = parse_postcondition(&ps.postcondition)
        .with_context(|| format!("bad postcondition {:?}", ps.postcondition))?;
    let synth = match &ps.class {
        ClassSpec::Interval => SynthesizerKind::Box(ProgramClass::Interval),
        ClassSpec::Rect { dim } => SynthesizerKind::Box(ProgramClass::Rect { dim: *dim }),
        ClassSpec::Sketch { file } => {
            let path = base_dir.join(file);
            let source = fs::read_to_string(&path)
                .with_context(|| format!("cannot read sketch {}", path.display()))?;
            // unroll once: the evaluator and the event indices of the
            // postcondition both work on the loop-free form
            let ast = digits::sketch::parse(&source)
                .with_context(|| format!("cannot parse sketch {}", path.display()))?
                .unroll();
            let Some(solver) = solver_config(ov) else {
                return Ok(None);
            };
            SynthesizerKind::Sketch {
                ast: Arc::new(ast),
                solver,
            }
        }
    };
    Ok(Some(Problem {
        spec: Arc::new(ps.spec.to_program()),
        dist: ps.distribution.clone(),
        post,
        synth,
    }))
}

pub fn engine_config(run: &RunSpec, ov: &Overrides) -> Result<EngineConfig> {
    let tau_spec = ov.tau.clone().unwrap_or_else(|| run.tau.clone());
    let seed = ov.seed.unwrap_or(run.seed);
    let time_budget = ov
        .time_budget_s
        .or(run.time_budget_s)
        .map(Duration::from_secs_f64);
    let depth_budget = ov.depth_budget.or(run.depth_budget);
    let mut verifier = VerifierConfig {
        seed,
        ..VerifierConfig::default()
    };
    if let Some(n) = ov.verify_samples {
        verifier.samples = n;
    }
    Ok(EngineConfig {
        tau: tau_spec.to_mode()?,
        denominator: ov.denominator.unwrap_or(ThresholdDenominator::Depth),
        time_budget,
        depth_budget,
        seed,
        verifier,
        retry_unknown: ov.retry_unknown,
    })
}

pub fn write_report_files(dir: &Path, report: &RunReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    for (file, series) in [
        ("depth_vs_time.csv", &report.depth_series),
        ("error_vs_time.csv", &report.error_series),
    ] {
        let mut w = csv::Writer::from_path(dir.join(file))?;
        w.write_record(["time_s", "value"])?;
        for p in series {
            w.write_record([format!("{}", p.t_secs), format!("{}", p.value)])?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunStatus {
    pub run_id: String,
    pub tau_mode: String,
    pub seed: u64,
    pub status: String,
    pub sample_hash: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub completed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub runs: Vec<RunStatus>,
    /// True when all completed runs sharing a seed consumed the same sample
    /// prefix (compared by each run's consumed-sample hash at equal depth).
    pub sample_sharing_ok: bool,
}

/// Executes every configured run of a benchmark, writing per-run artifact
/// directories plus a combined `summary.csv` under `outdir`.
pub fn run_experiment(
    spec: &BenchmarkSpec,
    base_dir: &Path,
    outdir: &Path,
    ov: &Overrides,
) -> Result<ExperimentSummary> {
    fs::create_dir_all(outdir)
        .with_context(|| format!("cannot create {}", outdir.display()))?;
    let mut summary_w = csv::Writer::from_path(outdir.join("summary.csv"))?;
    summary_w.write_record([
        "benchmark",
        "tau_mode",
        "seed",
        "final_depth",
        "best_error",
        "synth_queries",
        "wall_s",
    ])?;

    let mut statuses = Vec::new();
    let mut completed = 0;
    let mut skipped = 0;
    let mut failed = 0;
    // (seed, depth) -> sample hash prefix audit
    let mut seen: Vec<(u64, usize, String)> = Vec::new();
    let mut sharing_ok = true;

    for run in &spec.runs {
        let seed = ov.seed.unwrap_or(run.seed);
        let tau_label = ov.tau.as_ref().unwrap_or(&run.tau).label();
        let run_id = format!("{}_{}_seed{}", spec.name, tau_label, seed);
        let problem = match build_problem(&spec.problem, base_dir, ov) {
            Ok(Some(p)) => p,
            Ok(None) => {
                eprintln!("skipping {run_id}: no SMT solver configured (set DIGITS_SOLVER or --solver)");
                statuses.push(RunStatus {
                    run_id,
                    tau_mode: tau_label,
                    seed,
                    status: "skipped: no SMT solver".into(),
                    sample_hash: None,
                });
                skipped += 1;
                continue;
            }
            Err(e) => {
                eprintln!("failed {run_id}: {e:#}");
                statuses.push(RunStatus {
                    run_id,
                    tau_mode: tau_label,
                    seed,
                    status: format!("failed: {e:#}"),
                    sample_hash: None,
                });
                failed += 1;
                continue;
            }
        };
        let config = engine_config(run, ov)?;
        let mut engine = Engine::new(problem, config)?;
        let report = engine.run();

        // same-seed runs must share the sample sequence: runs that reached
        // equal depth must report equal hashes
        for (s, d, h) in &seen {
            if *s == seed && *d == report.depth && *h != report.sample_hash {
                sharing_ok = false;
            }
        }
        seen.push((seed, report.depth, report.sample_hash.clone()));

        write_report_files(&outdir.join(&run_id), &report)?;
        summary_w.write_record([
            spec.name.clone(),
            report.tau_mode.clone(),
            seed.to_string(),
            report.depth.to_string(),
            report
                .best
                .as_ref()
                .map(|b| b.error.to_string())
                .unwrap_or_default(),
            report.counters.synth_queries.to_string(),
            format!("{:.3}", report.wall_s),
        ])?;
        statuses.push(RunStatus {
            run_id,
            tau_mode: report.tau_mode.clone(),
            seed,
            status: "completed".into(),
            sample_hash: Some(report.sample_hash.clone()),
        });
        completed += 1;
    }
    summary_w.flush()?;

    let summary = ExperimentSummary {
        name: spec.name.clone(),
        completed,
        skipped,
        failed,
        runs: statuses,
        sample_sharing_ok: sharing_ok,
    };
    fs::write(
        outdir.join("experiment.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Suite generators.
// ---------------------------------------------------------------------------

const TAU_GRID: [f64; 5] = [0.07, 0.15, 0.3, 0.5, 1.0];
const GROUP_POST: &str = "Pr[ret == 1 && x1 <= 0] / Pr[x1 <= 0] >= \
                          Pr[ret == 1 && x1 >= 0] / Pr[x1 >= 0]";

fn b_label(b: f64) -> String {
    // 0.05 -> "005", 0.1 -> "01", 0.2 -> "02"
    format!("{b}").replace("0.", "0").replace('.', "")
}

/// Synthetic hyperrectangle benchmark: spec box `[0, 2b] x [-1, 1]^{d-1}`
/// over `Uniform[-1,1]^d`, group-balance postcondition plus a minimum mass
/// of `b`. The optimal achievable error of a correct program is exactly `b`.
pub fn gen_synthetic(d: usize, b: f64) -> BenchmarkSpec {
    assert!((1..=3).contains(&d) && b > 0.0 && b < 0.5);
    let mut lo = vec![-1.0; d];
    let mut hi = vec![1.0; d];
    lo[0] = 0.0;
    hi[0] = 2.0 * b;
    let mut runs: Vec<RunSpec> = TAU_GRID
        .iter()
        .filter(|t| **t >= b)
        .map(|t| RunSpec {
            tau: TauSpec::Fixed(*t),
            time_budget_s: Some(120.0),
            depth_budget: None,
            seed: 1,
        })
        .collect();
    runs.push(RunSpec {
        tau: TauSpec::Named("adaptive".into()),
        time_budget_s: Some(120.0),
        depth_budget: None,
        seed: 1,
    });
    let mut params = serde_json::Map::new();
    params.insert("d".into(), d.into());
    params.insert("b".into(), b.into());
    params.insert("vc_dim".into(), (2 * d).into());
    params.insert("optimal_error".into(), b.into());
    BenchmarkSpec {
        name: format!("synthetic_d{d}_b{}", b_label(b)),
        problem: ProblemSpec {
            class: ClassSpec::Rect { dim: d },
            spec: SpecProgram::Box { lo, hi },
            distribution: InputDistribution::uniform_cube(d),
            postcondition: format!("{GROUP_POST} && Pr[ret == 1] >= {b}"),
        },
        params,
        runs,
    }
}

/// The thermostat-controller sketch source with the loop bound and the
/// return threshold instantiated.
pub fn thermostat_source(unrollings: usize, n_threshold: usize) -> String {
    format!(
        r#"// Thermostat controller sketch: {unrollings} timesteps, pass band {n_threshold} degrees.
int thermostat(double lin, double ltarget) {{
    double h = ??(0, 10);
    double tOn = ltarget + ??(-10, 0);
    double tOff = ltarget + ??(0, 10);
    double isOn = 0.0;
    double K = 0.1;
    double curL = lin;
    assert(tOn < tOff; 0.9);
    assert(h > 0; 0.9);
    assert(h < 20; 0.9);
    for (int i = 0; i < {unrollings}; i = i + 1) {{
        if (isOn > 0.5) {{
            curL = curL + (h - K * (curL - lin));
            if (curL > tOff) {{
                isOn = 0.0;
            }}
        }} else {{
            curL = curL - K * (curL - lin);
            if (curL < tOn) {{
                isOn = 1.0;
            }}
        }}
        assert(curL < 120; 0.9);
    }}
    double err = abs(curL - ltarget);
    if (err < {n_threshold}) {{
        return 0;
    }}
    return 1;
}}
"#
    )
}

/// Thermostat benchmark: the sketch above, a Gaussian-mixture initial
/// temperature crossed with a Gaussian target, the assert-event conjunction
/// as the postcondition, and the constant-0 functional specification.
pub fn gen_thermostat(unrollings: usize, n_threshold: usize) -> (BenchmarkSpec, String) {
    assert!([5, 10, 20, 40].contains(&unrollings) && [2, 4, 8].contains(&n_threshold));
    let sketch_file = format!("thermostat_u{unrollings}_n{n_threshold}.skh");
    let post = (0..3 + unrollings)
        .map(|i| format!("Pr[event{i} == 1] > 0.9"))
        .collect::<Vec<_>>()
        .join(" && ");
    let mut params = serde_json::Map::new();
    params.insert("unrollings".into(), unrollings.into());
    params.insert("n_threshold".into(), n_threshold.into());
    params.insert("assert_terms".into(), (3 + unrollings).into());
    let spec = BenchmarkSpec {
        name: format!("thermostat_u{unrollings}_n{n_threshold}"),
        problem: ProblemSpec {
            class: ClassSpec::Sketch { file: sketch_file },
            spec: SpecProgram::ConstantZero { dim: 2 },
            distribution: digits::dist::thermostat_pre(),
            postcondition: post,
        },
        params,
        runs: vec![RunSpec {
            tau: TauSpec::Named("adaptive".into()),
            time_budget_s: Some(600.0),
            depth_budget: None,
            seed: 1,
        }],
    };
    (spec, thermostat_source(unrollings, n_threshold))
}

/// Stand-in for the fairness-repair suite: hyperrectangle specs at three
/// sizes under the group-balance postcondition, run with both a tight fixed
/// threshold and the adaptive mode on shared sample sets.
pub fn gen_fairness_standin(size: char) -> BenchmarkSpec {
    let (d, b) = match size {
        's' => (1, 0.1),
        'm' => (2, 0.1),
        'l' => (3, 0.15),
        _ => panic!("size must be one of s, m, l"),
    };
    let mut lo = vec![-0.5; d];
    let mut hi = vec![0.5; d];
    lo[0] = 0.0;
    hi[0] = 2.0 * b;
    let runs = (1..=3u64)
        .flat_map(|seed| {
            [
                RunSpec {
                    tau: TauSpec::Fixed(1.0),
                    time_budget_s: Some(120.0),
                    depth_budget: None,
                    seed,
                },
                RunSpec {
                    tau: TauSpec::Named("adaptive".into()),
                    time_budget_s: Some(120.0),
                    depth_budget: None,
                    seed,
                },
            ]
        })
        .collect();
    let mut params = serde_json::Map::new();
    params.insert("d".into(), d.into());
    params.insert("b".into(), b.into());
    params.insert("size".into(), size.to_string().into());
    BenchmarkSpec {
        name: format!("fairness_standin_{size}"),
        problem: ProblemSpec {
            class: ClassSpec::Rect { dim: d },
            spec: SpecProgram::Box { lo, hi },
            distribution: InputDistribution::uniform_cube(d),
            postcondition: format!("{GROUP_POST} && Pr[ret == 1] >= {b}"),
        },
        params,
        runs,
    }
}

/// Writes the full shipped benchmark suite into `dir`.
pub fn write_suite(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    fn save(dir: &Path, written: &mut Vec<PathBuf>, spec: &BenchmarkSpec) -> Result<()> {
        let path = dir.join(format!("{}.json", spec.name));
        fs::write(&path, serde_json::to_string_pretty(spec)? + "\n")?;
        written.push(path);
        Ok(())
    }
    for d in 1..=3 {
        for b in [0.05, 0.1, 0.2] {
            let spec = gen_synthetic(d, b);
            save(dir, &mut written, &spec)?;
        }
    }
    for u in [5, 10, 20, 40] {
        for n in [2, 4, 8] {
            let (spec, source) = gen_thermostat(u, n);
            let skh = dir.join(format!("thermostat_u{u}_n{n}.skh"));
            fs::write(&skh, source)?;
            written.push(skh);
            save(dir, &mut written, &spec)?;
        }
    }
    for size in ['s', 'm', 'l'] {
        let spec = gen_fairness_standin(size);
        save(dir, &mut written, &spec)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spec_shape() {
        let s = gen_synthetic(1, 0.1);
        assert_eq!(s.name, "synthetic_d1_b01");
        let SpecProgram::Box { lo, hi } = &s.problem.spec else {
            panic!()
        };
        assert_eq!((lo.as_slice(), hi.as_slice()), (&[0.0][..], &[0.2][..]));
        // tau grid keeps only tau >= b (0.07 drops at b = 0.1), plus adaptive
        assert_eq!(s.runs.len(), 5);
        parse_postcondition(&s.problem.postcondition).unwrap();
    }

    #[test]
    fn synthetic_excludes_small_taus() {
        let s = gen_synthetic(2, 0.2);
        let fixed: Vec<f64> = s
            .runs
            .iter()
            .filter_map(|r| match r.tau {
                TauSpec::Fixed(t) => Some(t),
                _ => None,
            })
            .collect();
        assert_eq!(fixed, vec![0.3, 0.5, 1.0]);
    }

    #[test]
    fn thermostat_sketch_parses() {
        let (spec, source) = gen_thermostat(5, 8);
        let ast = digits::sketch::parse(&source).unwrap();
        assert_eq!(ast.holes.len(), 3);
        assert_eq!(ast.unroll().asserts().len(), 8); // 3 pre-loop + 5 in-loop
        let post = parse_postcondition(&spec.problem.postcondition).unwrap();
        assert_eq!(post.prob_term_count(), 8);
        let (spec40, _) = gen_thermostat(40, 2);
        assert_eq!(
            parse_postcondition(&spec40.problem.postcondition)
                .unwrap()
                .prob_term_count(),
            43
        );
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = gen_synthetic(2, 0.05);
        let text = serde_json::to_string(&s).unwrap();
        let back: BenchmarkSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back.name, s.name);
        assert_eq!(back.runs.len(), s.runs.len());
    }

    #[test]
    fn zero_budget_run_reports_depth_zero() {
        let spec = gen_synthetic(1, 0.1);
        let run = RunSpec {
            tau: TauSpec::Fixed(1.0),
            time_budget_s: None,
            depth_budget: Some(0),
            seed: 1,
        };
        let ov = Overrides {
            verify_samples: Some(500),
            ..Overrides::default()
        };
        let problem = build_problem(&spec.problem, Path::new("."), &ov)
            .unwrap()
            .unwrap();
        let config = engine_config(&run, &ov).unwrap();
        let report = Engine::new(problem, config).unwrap().run();
        assert_eq!(report.depth, 0);
        // the spec program itself violates the balance postcondition, so
        // there is no best at depth 0
        assert!(report.best.is_none());
    }
}
