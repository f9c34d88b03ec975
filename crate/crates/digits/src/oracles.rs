//! Synthesis and verification oracles.
//!
//! The synthesis oracle answers "is there a program in the class consistent
//! with these labeled examples?" exactly: a closed-form tightest box for the
//! box classes, an SMT query for sketches. The verification oracle is
//! statistical: it estimates every probability term of the postcondition on
//! one shared sample pool and decides on the point estimates.

use std::sync::Arc;

use crate::dist::InputDistribution;
use crate::post::{EvalCtx, EventExpr, Execution, Postcondition};
use crate::program::{empirical_error, hoeffding_half_width, BoxProgram, Estimate, Program, ProgramClass};
use crate::sample::sample;
use crate::sketch::smt::{emit_constraints, run_solver, SolverConfig, SolverError, SolverOutcome};
use crate::sketch::{HoleAssignment, SketchAst};

/// Outcome of a synthesis query.
#[derive(Debug, Clone)]
pub enum SynthesisResult {
    Program(Program),
    /// No program in the class is consistent with the examples.
    Bottom,
    /// The oracle could not decide (solver timeout / `unknown` / model that
    /// fails to reproduce the examples under f64 evaluation).
    Unknown(String),
}

impl SynthesisResult {
    pub fn is_bottom(&self) -> bool {
        matches!(self, SynthesisResult::Bottom)
    }

    pub fn program(&self) -> Option<&Program> {
        match self {
            SynthesisResult::Program(p) => Some(p),
            _ => None,
        }
    }
}

/// Exact synthesis for the box classes: the canonical (tightest) box around
/// the positive examples, `Bottom` iff some example contradicts it.
///
/// With no positive examples the canonical program is the constant-0 box,
/// which is consistent with any set of negatives. For the interval class the
/// lower bound is pinned at 0.
pub fn synth_box(class: &ProgramClass, examples: &[(&[f64], bool)]) -> SynthesisResult {
    let dim = class.dimension();
    let positives: Vec<&[f64]> = examples.iter().filter(|(_, b)| *b).map(|(x, _)| *x).collect();
    let candidate = if positives.is_empty() {
        BoxProgram::empty(dim)
    } else {
        let mut lo = positives[0].to_vec();
        let mut hi = positives[0].to_vec();
        for x in &positives[1..] {
            for j in 0..dim {
                lo[j] = lo[j].min(x[j]);
                hi[j] = hi[j].max(x[j]);
            }
        }
        match class {
            ProgramClass::Interval => BoxProgram::interval(hi[0]),
            ProgramClass::Rect { .. } => BoxProgram::new(lo, hi),
            ProgramClass::Sketch { .. } => {
                panic!("synth_box called on a sketch class; use synth_sketch")
            }
        }
    };
    // Tightest-box canonicity: any consistent box must contain this one, so
    // a single containment/exclusion pass decides realizability.
    for (x, b) in examples {
        if candidate.contains(x) != *b {
            return SynthesisResult::Bottom;
        }
    }
    SynthesisResult::Program(Program::Box(candidate))
}

/// Synthesis for sketch classes: emit real-arithmetic constraints for the
/// examples and ask the external solver for hole values.
pub fn synth_sketch(
    ast: &Arc<SketchAst>,
    examples: &[(Vec<f64>, bool)],
    solver: &SolverConfig,
) -> Result<SynthesisResult, SolverError> {
    let flat;
    let loop_free: &SketchAst = if ast.is_loop_free() {
        ast
    } else {
        flat = ast.unroll();
        &flat
    };
    let script = emit_constraints(loop_free, examples);
    match run_solver(&script, solver)? {
        SolverOutcome::Unsat => Ok(SynthesisResult::Bottom),
        SolverOutcome::Unknown { reason } => Ok(SynthesisResult::Unknown(reason)),
        SolverOutcome::Sat(values) => {
            // Clamp tiny rational-to-f64 rounding back into the hole ranges.
            let clamped: Vec<f64> = values
                .iter()
                .zip(&ast.holes)
                .map(|(v, h)| v.clamp(h.lo, h.hi))
                .collect();
            let holes = HoleAssignment::new(clamped);
            for (x, b) in examples {
                if ast.evaluate(&holes, x).0 != *b {
                    return Ok(SynthesisResult::Unknown(
                        "model does not reproduce the examples under f64 evaluation".into(),
                    ));
                }
            }
            Ok(SynthesisResult::Program(Program::Sketch {
                ast: Arc::clone(ast),
                holes,
            }))
        }
    }
}

/// Statistical verifier configuration.
#[derive(Debug, Clone, Copy)]
pub struct VerifierConfig {
    /// Joint confidence for the reported interval estimates.
    pub confidence: f64,
    /// Shared sample-pool size per verification call.
    pub samples: usize,
    /// Base seed; per-call seeds are derived from it and the program.
    pub seed: u64,
}

impl Default for VerifierConfig {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            samples: 10_000,
            seed: 0,
        }
    }
}

/// Result of one statistical verification call.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Postcondition holds on the point estimates (and no ratio degenerated).
    pub accepted: bool,
    /// A conditioning event had empirical mass 0.
    pub degenerate: bool,
    /// A conditioning event had empirical mass below 0.01.
    pub thin_conditioning: bool,
    /// One estimate per `Pr` term, in evaluation order, each with a
    /// Hoeffding half-width at confidence `1 - (1 - confidence) / T`.
    pub term_estimates: Vec<Estimate>,
    pub samples: usize,
}

/// Derives a per-program seed so repeated calls on the same program reuse
/// identical sample pools (FNV-1a over the class id and parameter bits).
pub fn program_seed(base: u64, p: &Program) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ base.wrapping_mul(0x100000001b3);
    for byte in p.class_id().bytes() {
        h = (h ^ byte as u64).wrapping_mul(0x100000001b3);
    }
    for v in p.params() {
        for byte in v.to_bits().to_le_bytes() {
            h = (h ^ byte as u64).wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Estimates every probability term of `post` on one shared pool of
/// `cfg.samples` executions of `p` and decides the postcondition on the
/// point estimates. Per-term confidence is union-bounded across terms.
pub fn verify(
    p: &Program,
    dist: &InputDistribution,
    post: &Postcondition,
    cfg: &VerifierConfig,
) -> VerifyReport {
    let n = cfg.samples.max(1);
    let pool = sample(dist, program_seed(cfg.seed, p), n).expect("invalid distribution");
    let execs: Vec<(Vec<f64>, bool, Vec<bool>)> = pool
        .points()
        .iter()
        .map(|x| {
            let (ret, events) = p.eval_with_events(x);
            (x.clone(), ret, events)
        })
        .collect();

    let terms = post.prob_term_count().max(1);
    let per_term_conf = 1.0 - (1.0 - cfg.confidence) / terms as f64;
    let half_width = hoeffding_half_width(n, per_term_conf);

    let mut term_estimates = Vec::new();
    let mut estimate = |e: &EventExpr| -> f64 {
        let hits = execs
            .iter()
            .filter(|(x, ret, events)| {
                e.holds(&Execution {
                    x,
                    ret: *ret,
                    events,
                })
            })
            .count();
        let value = hits as f64 / n as f64;
        term_estimates.push(Estimate {
            value,
            half_width,
            n,
        });
        value
    };
    let verdict = post.decide(&mut EvalCtx {
        estimate: &mut estimate,
    });

    VerifyReport {
        accepted: verdict.holds,
        degenerate: verdict.degenerate,
        thin_conditioning: verdict.thin_conditioning,
        term_estimates,
        samples: n,
    }
}

/// Disagreement mass between `p` and the specification `spec` under `dist`,
/// on a per-program pool derived from `cfg.seed` (so re-estimating the same
/// program is free of re-rolling noise).
pub fn error_estimate(
    p: &Program,
    spec: &Program,
    dist: &InputDistribution,
    cfg: &VerifierConfig,
) -> Estimate {
    empirical_error(
        p,
        spec,
        dist,
        cfg.samples.max(1),
        program_seed(cfg.seed ^ 0x9e3779b97f4a7c15, p),
        cfg.confidence,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::post::parse_postcondition;

    fn exs(pairs: &[(f64, bool)]) -> Vec<(Vec<f64>, bool)> {
        pairs.iter().map(|&(x, b)| (vec![x], b)).collect()
    }

    fn ex_refs(owned: &[(Vec<f64>, bool)]) -> Vec<(&[f64], bool)> {
        owned.iter().map(|(x, b)| (x.as_slice(), *b)).collect()
    }

    #[test]
    fn interval_synthesis_takes_max_positive() {
        let owned = exs(&[(0.2, true), (0.4, true), (0.7, false)]);
        let r = synth_box(&ProgramClass::Interval, &ex_refs(&owned));
        let p = r.program().unwrap();
        assert_eq!(p.params(), vec![0.0, 0.4]);
    }

    #[test]
    fn interval_synthesis_detects_conflict() {
        // a negative strictly between two positives
        let owned = exs(&[(0.2, true), (0.3, false), (0.4, true)]);
        assert!(synth_box(&ProgramClass::Interval, &ex_refs(&owned)).is_bottom());
        // a positive below 0 cannot be covered by [0, a]
        let owned = exs(&[(-0.1, true)]);
        assert!(synth_box(&ProgramClass::Interval, &ex_refs(&owned)).is_bottom());
    }

    #[test]
    fn no_positives_yields_constant_zero() {
        let owned = exs(&[(0.2, false), (0.9, false)]);
        let r = synth_box(&ProgramClass::Interval, &ex_refs(&owned));
        let p = r.program().unwrap();
        assert!(!p.eval(&[0.2]));
        assert!(!p.eval(&[0.0]));
    }

    #[test]
    fn rect_synthesis_is_componentwise_minmax() {
        let owned: Vec<(Vec<f64>, bool)> = vec![
            (vec![0.1, 0.8], true),
            (vec![0.5, 0.2], true),
            (vec![0.9, 0.9], false),
        ];
        let r = synth_box(&ProgramClass::Rect { dim: 2 }, &ex_refs(&owned));
        let p = r.program().unwrap();
        assert_eq!(p.params(), vec![0.1, 0.2, 0.5, 0.8]);
    }

    #[test]
    fn prefix_program_matches_full_labeling_program() {
        // canonical program of a prefix equals the canonical program of its
        // own labeling of the same examples
        let owned = exs(&[(0.2, true), (0.7, false), (0.4, true), (0.5, false)]);
        let r = synth_box(&ProgramClass::Interval, &ex_refs(&owned));
        let p = r.program().unwrap();
        let relabeled: Vec<(Vec<f64>, bool)> = owned
            .iter()
            .map(|(x, _)| (x.clone(), p.eval(x)))
            .collect();
        let r2 = synth_box(&ProgramClass::Interval, &ex_refs(&relabeled));
        assert_eq!(r2.program().unwrap().params(), p.params());
    }

    #[test]
    fn verify_estimates_interval_mass() {
        let p = Program::interval(0.5);
        let dist = InputDistribution::uniform_unit();
        let cfg = VerifierConfig::default();
        let pass = parse_postcondition("Pr[ret == 1] >= 0.45").unwrap();
        let fail = parse_postcondition("Pr[ret == 1] >= 0.55").unwrap();
        let r = verify(&p, &dist, &pass, &cfg);
        assert!(r.accepted);
        assert!((r.term_estimates[0].value - 0.5).abs() < 0.02);
        assert!(!verify(&p, &dist, &fail, &cfg).accepted);
    }

    #[test]
    fn verify_flags_degenerate_conditioning() {
        let p = Program::interval(0.5);
        let dist = InputDistribution::uniform_unit();
        let post = parse_postcondition("Pr[ret == 1] / Pr[x1 > 2] >= 0.1").unwrap();
        let r = verify(&p, &dist, &post, &VerifierConfig::default());
        assert!(!r.accepted);
        assert!(r.degenerate);
    }

    #[test]
    fn verify_is_deterministic_per_program() {
        let p = Program::interval(0.3);
        let dist = InputDistribution::uniform_unit();
        let post = parse_postcondition("Pr[ret == 1] >= 0.1").unwrap();
        let cfg = VerifierConfig::default();
        let a = verify(&p, &dist, &post, &cfg);
        let b = verify(&p, &dist, &post, &cfg);
        assert_eq!(a.term_estimates[0].value, b.term_estimates[0].value);
    }

    #[test]
    fn error_estimate_is_deterministic_and_sane() {
        let dist = InputDistribution::uniform_unit();
        let cfg = VerifierConfig::default();
        let p = Program::interval(0.5);
        let spec = Program::interval(0.3);
        let a = error_estimate(&p, &spec, &dist, &cfg);
        let b = error_estimate(&p, &spec, &dist, &cfg);
        assert_eq!(a.value, b.value);
        assert!((a.value - 0.2).abs() < 0.02);
    }

    #[test]
    fn sketch_synthesis_with_solver_if_available() {
        let Some(solver) = SolverConfig::discover() else {
            eprintln!("skipping: no SMT solver on PATH");
            return;
        };
        let ast = Arc::new(crate::sketch::interval_sketch());
        let examples = exs(&[(0.2, true), (0.4, true), (0.7, false)]);
        let r = synth_sketch(&ast, &examples, &solver).unwrap();
        let p = r.program().unwrap();
        assert!(p.eval(&[0.2]) && p.eval(&[0.4]) && !p.eval(&[0.7]));
    }
}
