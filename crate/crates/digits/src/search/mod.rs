//! The trie search engine.
//!
//! The trie's nodes are constraint strings: node `sigma` at level `l` pins
//! the outputs on the first `l` samples. Exploring a child either reuses the
//! parent's program (when it already produces the required output on the new
//! sample — solution propagation) or issues one synthesis query. Threshold
//! pruning skips children whose label string flips more than `tau * depth`
//! bits of the specification's labels; adaptive mode shrinks `tau` to the
//! best verified error found so far.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::analysis::count_dichotomies;
use crate::dist::InputDistribution;
use crate::labels::ConstraintString;
use crate::oracles::{
    error_estimate, synth_box, synth_sketch, verify, SynthesisResult, VerifierConfig,
};
use crate::post::Postcondition;
use crate::program::{Estimate, Program, ProgramClass};
use crate::sample::{sample, SampleSequence, Sampler};
use crate::sketch::smt::SolverConfig;
use crate::sketch::SketchAst;
use crate::ConfigError;

/// Which exact synthesizer answers the per-node queries.
#[derive(Clone)]
pub enum SynthesizerKind {
    Box(ProgramClass),
    Sketch {
        ast: Arc<SketchAst>,
        solver: SolverConfig,
    },
}

impl SynthesizerKind {
    pub fn class(&self) -> ProgramClass {
        match self {
            SynthesizerKind::Box(c) => c.clone(),
            SynthesizerKind::Sketch { ast, .. } => ProgramClass::Sketch {
                ast: Arc::clone(ast),
            },
        }
    }
}

/// A search problem: the functional specification (also the root program and
/// the error reference), the input distribution, the postcondition, and the
/// synthesizer for the program class.
#[derive(Clone)]
pub struct Problem {
    pub spec: Arc<Program>,
    pub dist: InputDistribution,
    pub post: Postcondition,
    pub synth: SynthesizerKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    Fixed(f64),
    /// Start at `initial` and shrink to the best verified error so far.
    Adaptive { initial: f64 },
}

impl TauMode {
    fn initial(&self) -> f64 {
        match self {
            TauMode::Fixed(t) => *t,
            TauMode::Adaptive { initial } => *initial,
        }
    }
}

/// Denominator of the pruning ratio: the current trie depth (a blocked child
/// can unblock as the trie deepens) or the child's own length (a block is
/// permanent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdDenominator {
    Depth,
    Length,
}

#[derive(Clone)]
pub struct EngineConfig {
    pub tau: TauMode,
    pub denominator: ThresholdDenominator,
    pub time_budget: Option<Duration>,
    pub depth_budget: Option<usize>,
    pub seed: u64,
    pub verifier: VerifierConfig,
    /// Re-issue a synthesis query once when the solver answers unknown.
    pub retry_unknown: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            tau: TauMode::Fixed(1.0),
            denominator: ThresholdDenominator::Depth,
            time_budget: None,
            depth_budget: None,
            seed: 0,
            verifier: VerifierConfig::default(),
            retry_unknown: false,
        }
    }
}

/// True when a child with `flips` label flips may be explored at pruning
/// ratio `tau` over `denominator` samples.
pub fn threshold_allows(flips: usize, tau: f64, denominator: usize) -> bool {
    flips as f64 <= tau * denominator as f64 + 1e-9
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub synth_queries: u64,
    pub propagations: u64,
    /// Children skipped by the threshold at creation time (cumulative; a
    /// later unblock does not decrement).
    pub blocked_nodes: u64,
    pub ver_calls: u64,
    pub unknown_results: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestReport {
    pub params: Vec<f64>,
    pub class: String,
    pub error: f64,
    pub error_half_width: f64,
    pub found_at_depth: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TauPoint {
    pub t_secs: f64,
    pub depth: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesPoint {
    pub t_secs: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub best: Option<BestReport>,
    pub depth: usize,
    pub counters: Counters,
    pub tau_trace: Vec<TauPoint>,
    pub depth_series: Vec<SeriesPoint>,
    pub error_series: Vec<SeriesPoint>,
    /// Hash of the sample sequence actually consumed (audit: runs configured
    /// to share samples must report equal hashes).
    pub sample_hash: String,
    pub flags: Vec<String>,
    pub wall_s: f64,
    pub seed: u64,
    pub tau_mode: String,
}

enum NodeProgram {
    Solved(Arc<Program>),
    Bottom,
    Unknown,
}

struct Node {
    program: NodeProgram,
    flips: u32,
}

struct BlockedChild {
    parent: ConstraintString,
    bit: bool,
    flips: u32,
}

enum SampleSource {
    Draw(Sampler),
    Fixed(Vec<Vec<f64>>),
}

struct Best {
    program: Arc<Program>,
    error: Estimate,
    depth: usize,
}

pub struct Engine {
    problem: Problem,
    config: EngineConfig,
    source: SampleSource,
    samples: SampleSequence,
    trie: HashMap<ConstraintString, Node>,
    expand_now: VecDeque<ConstraintString>,
    next_level: VecDeque<ConstraintString>,
    blocked: Vec<BlockedChild>,
    depth: usize,
    tau: f64,
    best: Option<Best>,
    error_cache: HashMap<u64, Estimate>,
    counters: Counters,
    tau_trace: Vec<TauPoint>,
    depth_series: Vec<SeriesPoint>,
    error_series: Vec<SeriesPoint>,
    flags: Vec<String>,
    started: Instant,
}

impl Engine {
    pub fn new(problem: Problem, config: EngineConfig) -> Result<Self, ConfigError> {
        problem.dist.validate()?;
        let sampler = Sampler::new(problem.dist.clone(), config.seed)?;
        Ok(Self::with_source(problem, config, SampleSource::Draw(sampler)))
    }

    /// Engine over a fixed, pre-drawn sample list instead of a sampler.
    /// Deepening past the list is a depth-budget stop.
    pub fn with_samples(problem: Problem, config: EngineConfig, points: Vec<Vec<f64>>) -> Self {
        Self::with_source(problem, config, SampleSource::Fixed(points))
    }

    fn with_source(problem: Problem, config: EngineConfig, source: SampleSource) -> Self {
        let tau = config.tau.initial();
        let seed = config.seed;
        Self {
            problem,
            config,
            source,
            samples: SampleSequence::empty(seed),
            trie: HashMap::new(),
            expand_now: VecDeque::new(),
            next_level: VecDeque::new(),
            blocked: Vec::new(),
            depth: 0,
            tau,
            best: None,
            error_cache: HashMap::new(),
            counters: Counters::default(),
            tau_trace: Vec::new(),
            depth_series: Vec::new(),
            error_series: Vec::new(),
            flags: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn samples(&self) -> &SampleSequence {
        &self.samples
    }

    /// Constraint strings of the solved (non-bottom, non-unknown) nodes at
    /// the given level, in sorted order, paired with their program params.
    pub fn solved_at_level(&self, level: usize) -> Vec<(ConstraintString, Vec<f64>)> {
        let mut out: Vec<(ConstraintString, Vec<f64>)> = self
            .trie
            .iter()
            .filter(|(s, _)| s.len() == level)
            .filter_map(|(s, n)| match &n.program {
                NodeProgram::Solved(p) => Some((s.clone(), p.params())),
                _ => None,
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|x| x == f) {
            self.flags.push(f.to_string());
        }
    }

    fn out_of_time(&self) -> bool {
        self.config
            .time_budget
            .is_some_and(|b| self.started.elapsed() >= b)
    }

    fn record_series(&mut self) {
        let t = self.started.elapsed().as_secs_f64();
        self.depth_series.push(SeriesPoint {
            t_secs: t,
            value: self.depth as f64,
        });
        if let Some(best) = &self.best {
            self.error_series.push(SeriesPoint {
                t_secs: t,
                value: best.error.value,
            });
        }
    }

    /// Verifies a freshly synthesized program and folds it into the best.
    fn consider(&mut self, program: &Arc<Program>) {
        self.counters.ver_calls += 1;
        let report = verify(
            program,
            &self.problem.dist,
            &self.problem.post,
            &self.config.verifier,
        );
        if report.degenerate {
            self.flag("degenerate_conditioning");
        }
        if report.thin_conditioning {
            self.flag("thin_conditioning");
        }
        if !report.accepted {
            return;
        }
        let key = crate::oracles::program_seed(0, program);
        let err = *self.error_cache.entry(key).or_insert_with(|| {
            error_estimate(
                program,
                &self.problem.spec,
                &self.problem.dist,
                &self.config.verifier,
            )
        });
        let improves = self.best.as_ref().is_none_or(|b| err.value < b.error.value);
        if improves {
            self.best = Some(Best {
                program: Arc::clone(program),
                error: err,
                depth: self.depth,
            });
            if matches!(self.config.tau, TauMode::Adaptive { .. }) && err.value < self.tau {
                self.tau = err.value;
                self.tau_trace.push(TauPoint {
                    t_secs: self.started.elapsed().as_secs_f64(),
                    depth: self.depth,
                    tau: self.tau,
                });
            }
        }
    }

    fn synthesize(&mut self, child: &ConstraintString) -> NodeProgram {
        self.counters.synth_queries += 1;
        let result = match &self.problem.synth {
            SynthesizerKind::Box(class) => {
                let examples: Vec<(&[f64], bool)> = (0..child.len())
                    .map(|i| (self.samples.point(i + 1), child.bit(i)))
                    .collect();
                synth_box(class, &examples)
            }
            SynthesizerKind::Sketch { ast, solver } => {
                let examples: Vec<(Vec<f64>, bool)> = (0..child.len())
                    .map(|i| (self.samples.point(i + 1).to_vec(), child.bit(i)))
                    .collect();
                let mut r = synth_sketch(ast, &examples, solver);
                if self.config.retry_unknown {
                    if let Ok(SynthesisResult::Unknown(_)) = r {
                        r = synth_sketch(ast, &examples, solver);
                    }
                }
                match r {
                    Ok(r) => r,
                    Err(e) => {
                        self.flag("solver_error");
                        SynthesisResult::Unknown(e.to_string())
                    }
                }
            }
        };
        match result {
            SynthesisResult::Program(p) => {
                let p = Arc::new(p);
                self.consider(&p);
                NodeProgram::Solved(p)
            }
            SynthesisResult::Bottom => NodeProgram::Bottom,
            SynthesisResult::Unknown(_) => {
                self.counters.unknown_results += 1;
                self.flag("solver_unknown");
                NodeProgram::Unknown
            }
        }
    }

    /// Creates (or blocks) the child `parent . bit`. Returns true if the
    /// child was created and is expandable.
    fn explore_child(&mut self, parent: &ConstraintString, bit: bool, parent_flips: u32) {
        let child = parent.child(bit);
        if self.trie.contains_key(&child) {
            return; // already resurrected or explored
        }
        let x = self.samples.point(child.len());
        let spec_bit = self.problem.spec.eval(x);
        let flips = parent_flips + u32::from(bit != spec_bit);
        let denom = match self.config.denominator {
            ThresholdDenominator::Depth => self.depth,
            ThresholdDenominator::Length => child.len(),
        };
        if !threshold_allows(flips as usize, self.tau, denom) {
            self.counters.blocked_nodes += 1;
            self.blocked.push(BlockedChild {
                parent: parent.clone(),
                bit,
                flips,
            });
            return;
        }
        let parent_program = match &self.trie[parent].program {
            NodeProgram::Solved(p) => Some(Arc::clone(p)),
            _ => None,
        };
        let program = match parent_program {
            Some(p) if p.eval(x) == bit => {
                // the parent's program already realizes this labeling
                self.counters.propagations += 1;
                NodeProgram::Solved(p)
            }
            _ => self.synthesize(&child),
        };
        // unknown is treated like bottom for expansion (but a later
        // resurrection may re-query it; it is not proof of unrealizability)
        let expandable = matches!(program, NodeProgram::Solved(_));
        self.trie.insert(child.clone(), Node { program, flips });
        if expandable {
            if child.len() < self.depth {
                self.expand_now.push_back(child);
            } else {
                self.next_level.push_back(child);
            }
        }
    }

    fn next_sample(&mut self) -> Option<Vec<f64>> {
        match &mut self.source {
            SampleSource::Draw(s) => Some(s.next_point()),
            SampleSource::Fixed(points) => points.get(self.samples.len()).cloned(),
        }
    }

    fn deepen(&mut self) -> bool {
        if self.config.depth_budget.is_some_and(|b| self.depth >= b) {
            self.flag("depth_budget_reached");
            return false;
        }
        let Some(x) = self.next_sample() else {
            self.flag("sample_list_exhausted");
            return false;
        };
        self.samples.push(x);
        self.depth += 1;
        std::mem::swap(&mut self.expand_now, &mut self.next_level);
        // a growing depth denominator can unblock previously pruned children
        if self.config.denominator == ThresholdDenominator::Depth
            && matches!(self.config.tau, TauMode::Fixed(_))
            && !self.blocked.is_empty()
        {
            let (open, still): (Vec<_>, Vec<_>) = std::mem::take(&mut self.blocked)
                .into_iter()
                .partition(|b| threshold_allows(b.flips as usize, self.tau, self.depth));
            self.blocked = still;
            for b in open {
                let parent_flips = self.trie[&b.parent].flips;
                self.explore_child(&b.parent, b.bit, parent_flips);
            }
        }
        self.record_series();
        true
    }

    /// Runs the search to its budget and produces the report.
    pub fn run(&mut self) -> RunReport {
        self.started = Instant::now();
        // root: the specification program labels everything
        let root = ConstraintString::empty();
        if !self.trie.contains_key(&root) {
            let spec = Arc::clone(&self.problem.spec);
            self.consider(&spec);
            self.trie.insert(
                root.clone(),
                Node {
                    program: NodeProgram::Solved(spec),
                    flips: 0,
                },
            );
            self.next_level.push_back(root);
        }

        loop {
            if self.out_of_time() {
                self.flag("time_budget_exhausted");
                break;
            }
            let Some(sigma) = self.expand_now.pop_front() else {
                if self.next_level.is_empty() && self.blocked.is_empty() {
                    self.flag("frontier_exhausted");
                    break;
                }
                if !self.deepen() {
                    break;
                }
                continue;
            };
            let flips = self.trie[&sigma].flips;
            self.explore_child(&sigma, false, flips);
            if self.out_of_time() {
                self.flag("time_budget_exhausted");
                break;
            }
            self.explore_child(&sigma, true, flips);
        }
        self.record_series();
        self.report()
    }

    fn report(&self) -> RunReport {
        RunReport {
            best: self.best.as_ref().map(|b| BestReport {
                params: b.program.params(),
                class: b.program.class_id(),
                error: b.error.value,
                error_half_width: b.error.half_width,
                found_at_depth: b.depth,
            }),
            depth: self.depth,
            counters: self.counters,
            tau_trace: self.tau_trace.clone(),
            depth_series: self.depth_series.clone(),
            error_series: self.error_series.clone(),
            sample_hash: format!("{:016x}", self.samples.content_hash()),
            flags: self.flags.clone(),
            wall_s: self.started.elapsed().as_secs_f64(),
            seed: self.config.seed,
            tau_mode: match self.config.tau {
                TauMode::Fixed(t) => format!("fixed:{t}"),
                TauMode::Adaptive { initial } => format!("adaptive:{initial}"),
            },
        }
    }
}

/// Convenience wrapper: build, run, report.
pub fn run(problem: Problem, config: EngineConfig) -> Result<RunReport, ConfigError> {
    Ok(Engine::new(problem, config)?.run())
}

/// Exact number of synthesis queries a full unpruned search will issue to
/// reach depth `m`: the dichotomy counts of the sample prefixes,
/// `sum over l in 1..=m of |Pi(x_1..x_{l-1})|`.
pub fn predicted_queries(
    class: &ProgramClass,
    s: &SampleSequence,
    m: usize,
) -> Result<u64, ConfigError> {
    assert!(m <= s.len());
    let mut total = 0;
    let mut prefix = SampleSequence::empty(s.seed());
    for l in 1..=m {
        total += count_dichotomies(class, &prefix)?;
        prefix.push(s.point(l).to_vec());
    }
    Ok(total)
}

/// Result of the reference implementation: enumerate all `2^m` labelings.
pub struct NaiveReport {
    /// Realizable full-length labelings with their programs, sorted.
    pub solved: Vec<(ConstraintString, Arc<Program>)>,
    pub best: Option<(Arc<Program>, Estimate)>,
    pub queries: u64,
}

/// Reference search: one synthesis query per labeling of `m` samples, then
/// verify every consistent program and keep the lowest-error accepted one.
/// Shares its sample stream, verifier seeds, and decision rule with the
/// engine, so at `tau = 1` the two must agree exactly.
pub fn naive_digits(
    problem: &Problem,
    m: usize,
    config: &EngineConfig,
) -> Result<NaiveReport, ConfigError> {
    assert!(m <= 24, "2^m enumeration");
    let SynthesizerKind::Box(class) = &problem.synth else {
        return Err(ConfigError::Parameter(
            "naive enumeration supports box classes only".into(),
        ));
    };
    let s = sample(&problem.dist, config.seed, m)?;
    // like the engine's root initialization, the specification's own
    // labeling is realized by the specification program itself, not by a
    // fresh synthesis query
    let spec_labeling = problem.spec.label_string(&s, m);
    let mut solved = Vec::new();
    let mut best: Option<(Arc<Program>, Estimate)> = None;
    let mut queries = 0;
    for mask in 0u64..(1u64 << m) {
        let labeling = ConstraintString::from_bits((0..m).map(|i| mask >> i & 1 == 1));
        let p = if labeling == spec_labeling {
            Arc::clone(&problem.spec)
        } else {
            let examples: Vec<(&[f64], bool)> = (0..m)
                .map(|i| (s.point(i + 1), labeling.bit(i)))
                .collect();
            queries += 1;
            let SynthesisResult::Program(p) = synth_box(class, &examples) else {
                continue;
            };
            Arc::new(p)
        };
        let report = verify(&p, &problem.dist, &problem.post, &config.verifier);
        if report.accepted {
            let err = error_estimate(&p, &problem.spec, &problem.dist, &config.verifier);
            if best.as_ref().is_none_or(|(_, e)| err.value < e.value) {
                best = Some((Arc::clone(&p), err));
            }
        }
        solved.push((labeling, p));
    }
    solved.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(NaiveReport {
        solved,
        best,
        queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::post::parse_postcondition;

    fn interval_problem(spec_hi: f64, post: &str) -> Problem {
        Problem {
            spec: Arc::new(Program::interval(spec_hi)),
            dist: InputDistribution::uniform_unit(),
            post: parse_postcondition(post).unwrap(),
            synth: SynthesizerKind::Box(ProgramClass::Interval),
        }
    }

    fn quick_verifier() -> VerifierConfig {
        VerifierConfig {
            samples: 2000,
            ..VerifierConfig::default()
        }
    }

    #[test]
    fn two_level_walkthrough() {
        // spec [0, 0.3]; samples 0.4 then 0.6; no pruning
        let problem = interval_problem(0.3, "Pr[true] >= 0");
        let config = EngineConfig {
            depth_budget: Some(2),
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let mut engine =
            Engine::with_samples(problem, config, vec![vec![0.4], vec![0.6]]);
        let report = engine.run();
        assert_eq!(report.depth, 2);
        // depth 1: one query ("1"); depth 2: queries for "01" (bottom) and "11"
        assert_eq!(report.counters.synth_queries, 3);
        assert_eq!(report.counters.propagations, 3); // "0", "00", "10"
        let level2: Vec<String> = engine
            .solved_at_level(2)
            .into_iter()
            .map(|(s, _)| s.to_string())
            .collect();
        // "01" is unrealizable: [0,a] containing 0.6 must contain 0.4
        assert_eq!(level2, vec!["00", "10", "11"]);
    }

    #[test]
    fn threshold_boundary() {
        assert!(threshold_allows(2, 0.2, 10));
        assert!(!threshold_allows(3, 0.2, 10));
        assert!(threshold_allows(10, 1.0, 10));
        assert!(!threshold_allows(1, 0.0, 10));
    }

    #[test]
    fn unpruned_interval_queries_are_triangular() {
        let problem = interval_problem(0.5, "Pr[true] >= 0");
        let config = EngineConfig {
            depth_budget: Some(10),
            seed: 42,
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let mut engine = Engine::new(problem, config).unwrap();
        let report = engine.run();
        // distinct positive samples: sum_{ l=1..10 } l = 55
        assert_eq!(report.counters.synth_queries, 55);
        assert_eq!(
            predicted_queries(&ProgramClass::Interval, engine.samples(), 10).unwrap(),
            55
        );
        // each non-bottom parent propagates exactly one child
        assert_eq!(report.counters.propagations, 55);
        assert!(report.counters.blocked_nodes == 0);
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        let problem = interval_problem(0.4, "Pr[ret == 1] >= 0.05");
        let config = EngineConfig {
            depth_budget: Some(6),
            seed: 7,
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let mut engine = Engine::new(problem.clone(), config.clone()).unwrap();
        let report = engine.run();
        let naive = naive_digits(&problem, 6, &config).unwrap();

        let trie_set: Vec<(String, Vec<f64>)> = engine
            .solved_at_level(6)
            .into_iter()
            .map(|(s, p)| (s.to_string(), p))
            .collect();
        let naive_set: Vec<(String, Vec<f64>)> = naive
            .solved
            .iter()
            .map(|(s, p)| (s.to_string(), p.params()))
            .collect();
        assert_eq!(trie_set, naive_set);

        let trie_best = report.best.as_ref().map(|b| (b.params.clone(), b.error));
        let naive_best = naive.best.as_ref().map(|(p, e)| (p.params(), e.value));
        assert_eq!(trie_best, naive_best);
    }

    #[test]
    fn pruning_blocks_far_labelings() {
        let problem = interval_problem(0.5, "Pr[true] >= 0");
        let loose = EngineConfig {
            depth_budget: Some(8),
            seed: 3,
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let tight = EngineConfig {
            tau: TauMode::Fixed(0.25),
            ..loose.clone()
        };
        let full = Engine::new(problem.clone(), loose).unwrap().run();
        let pruned = Engine::new(problem, tight).unwrap().run();
        assert!(pruned.counters.blocked_nodes > 0);
        assert!(pruned.counters.synth_queries < full.counters.synth_queries);
    }

    #[test]
    fn adaptive_tau_is_monotone_and_recorded() {
        let problem = interval_problem(0.5, "Pr[ret == 1] <= 0.4");
        let config = EngineConfig {
            tau: TauMode::Adaptive { initial: 1.0 },
            depth_budget: Some(12),
            seed: 5,
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let report = Engine::new(problem, config).unwrap().run();
        let taus: Vec<f64> = report.tau_trace.iter().map(|p| p.tau).collect();
        assert!(!taus.is_empty());
        assert!(taus.windows(2).all(|w| w[1] <= w[0]));
        // spec [0,0.5] itself violates the post; the best must differ from it
        let best = report.best.unwrap();
        assert!(best.error > 0.0);
    }

    #[test]
    fn report_serializes() {
        let problem = interval_problem(0.5, "Pr[true] >= 0");
        let config = EngineConfig {
            depth_budget: Some(3),
            verifier: quick_verifier(),
            ..EngineConfig::default()
        };
        let report = Engine::new(problem, config).unwrap().run();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("synth_queries"));
    }
}
