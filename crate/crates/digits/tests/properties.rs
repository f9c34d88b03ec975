use std::sync::Arc;

use digits::analysis::{count_dichotomies, tail_bounds, tail_exact, TailParams};
use digits::dist::InputDistribution;
use digits::labels::ConstraintString;
use digits::oracles::{synth_box, verify, SynthesisResult, VerifierConfig};
use digits::post::{parse_postcondition, Postcondition};
use digits::program::{empirical_error, hamming, BoxProgram, Labels, Program, ProgramClass};
use digits::sample::{sample, SampleSequence};
use digits::search::{threshold_allows, Engine, EngineConfig, Problem, SynthesizerKind, TauMode};
use digits::sketch::{interval_sketch, parse, HoleAssignment};
use proptest::prelude::*;

fn seq_of(points: Vec<Vec<f64>>) -> SampleSequence {
    let mut s = SampleSequence::empty(0);
    for p in points {
        s.push(p);
    }
    s
}

fn bits(v: &[bool]) -> ConstraintString {
    ConstraintString::from_bits(v.iter().copied())
}

proptest! {
    #[test]
    fn hamming_is_a_metric(
        a in proptest::collection::vec(any::<bool>(), 8),
        b in proptest::collection::vec(any::<bool>(), 8),
        c in proptest::collection::vec(any::<bool>(), 8),
    ) {
        let s = sample(&InputDistribution::uniform_unit(), 3, 8).unwrap();
        let (a, b, c) = (bits(&a), bits(&b), bits(&c));
        let d = |x: &ConstraintString, y: &ConstraintString| {
            hamming(&s, 8, Labels::Str(x), Labels::Str(y))
        };
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        if d(&a, &b) == 0 {
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn box_synthesis_is_canonical_and_consistent(
        pts in proptest::collection::vec(
            (proptest::collection::vec(-1.0f64..1.0, 2), any::<bool>()), 1..12),
    ) {
        let class = ProgramClass::Rect { dim: 2 };
        let examples: Vec<(&[f64], bool)> =
            pts.iter().map(|(x, l)| (x.as_slice(), *l)).collect();
        match synth_box(&class, &examples) {
            SynthesisResult::Program(p) => {
                // consistent with every example
                for (x, l) in &examples {
                    prop_assert_eq!(p.eval(x), *l);
                }
                // tightest: any consistent box contains it on the positives
                let Program::Box(b) = &p else { panic!("box class") };
                for (x, l) in &examples {
                    if *l {
                        for j in 0..2 {
                            prop_assert!(b.lo[j] <= x[j] && x[j] <= b.hi[j]);
                        }
                    }
                }
                for j in 0..2 {
                    let attained = examples.iter().any(|(x, l)| *l && x[j] == b.lo[j])
                        && examples.iter().any(|(x, l)| *l && x[j] == b.hi[j]);
                    prop_assert!(attained || b.is_degenerate());
                }
            }
            SynthesisResult::Bottom => {
                // the canonical box itself must be contradicted
                let pos: Vec<&[f64]> =
                    examples.iter().filter(|(_, l)| *l).map(|(x, _)| *x).collect();
                prop_assert!(!pos.is_empty());
                let mut lo = pos[0].to_vec();
                let mut hi = pos[0].to_vec();
                for x in &pos[1..] {
                    for j in 0..2 {
                        lo[j] = lo[j].min(x[j]);
                        hi[j] = hi[j].max(x[j]);
                    }
                }
                let tight = BoxProgram::new(lo, hi);
                prop_assert!(examples.iter().any(|(x, l)| !*l && tight.contains(x)));
            }
            SynthesisResult::Unknown(_) => panic!("exact oracle cannot be unknown"),
        }
    }

    #[test]
    fn interval_dichotomy_closed_form_matches_enumeration(
        xs in proptest::collection::vec(-0.5f64..1.0, 0..10),
    ) {
        let s = seq_of(xs.iter().map(|x| vec![*x]).collect());
        let closed = count_dichotomies(&ProgramClass::Interval, &s).unwrap();
        let m = s.len();
        let mut brute = 0u64;
        for mask in 0u64..(1u64 << m) {
            let examples: Vec<(&[f64], bool)> = (0..m)
                .map(|i| (s.point(i + 1), mask >> i & 1 == 1))
                .collect();
            if !synth_box(&ProgramClass::Interval, &examples).is_bottom() {
                brute += 1;
            }
        }
        prop_assert_eq!(closed, brute);
    }

    #[test]
    fn dichotomy_count_is_monotone_in_samples(
        xs in proptest::collection::vec(
            proptest::collection::vec(-1.0f64..1.0, 2), 1..8),
    ) {
        let class = ProgramClass::Rect { dim: 2 };
        let mut prev = 1;
        for n in 1..=xs.len() {
            let s = seq_of(xs[..n].to_vec());
            let count = count_dichotomies(&class, &s).unwrap();
            prop_assert!(count >= prev);
            prop_assert!(count <= 1 << n);
            prev = count;
        }
    }

    #[test]
    fn sample_sequences_are_prefix_consistent(seed in 0u64..1000, m in 1usize..40) {
        let dist = InputDistribution::uniform_cube(2);
        let short = sample(&dist, seed, m).unwrap();
        let long = sample(&dist, seed, m + 7).unwrap();
        prop_assert_eq!(short.points(), &long.points()[..m]);
    }

    #[test]
    fn exact_tail_is_a_probability_bounded_by_both_closed_forms(
        m in 1usize..200,
        k in 0.01f64..0.9,
        frac in 0.05f64..0.95,
    ) {
        let tau = k + frac * (0.99 - k);
        let t = TailParams::new(m, k, tau).unwrap();
        let exact = tail_exact(&t);
        let (hoeffding, kl) = tail_bounds(&t).unwrap();
        prop_assert!((0.0..=1.0).contains(&exact));
        prop_assert!(exact <= hoeffding + 1e-12);
        prop_assert!(exact <= kl + 1e-12);
    }

    #[test]
    fn threshold_is_monotone(flips in 0usize..50, denom in 1usize..50, tau in 0.0f64..1.0) {
        if threshold_allows(flips, tau, denom) {
            prop_assert!(threshold_allows(flips, (tau + 0.1).min(1.0), denom));
            prop_assert!(threshold_allows(flips, tau, denom + 1));
            if flips > 0 {
                prop_assert!(threshold_allows(flips - 1, tau, denom));
            }
        }
    }

    #[test]
    fn error_estimate_is_deterministic_and_bounded(a in 0.0f64..1.0, seed in 0u64..500) {
        let dist = InputDistribution::uniform_unit();
        let p = Program::interval(a);
        let spec = Program::interval(0.5);
        let e1 = empirical_error(&p, &spec, &dist, 400, seed, 0.95);
        let e2 = empirical_error(&p, &spec, &dist, 400, seed, 0.95);
        prop_assert_eq!(e1, e2);
        prop_assert!((0.0..=1.0).contains(&e1.value));
        // estimate is within a few half-widths of the analytic disagreement
        prop_assert!((e1.value - (a - 0.5).abs()).abs() <= 4.0 * e1.half_width);
    }

    #[test]
    fn verifier_is_deterministic(a in 0.05f64..0.95, seed in 0u64..200) {
        let dist = InputDistribution::uniform_unit();
        let post = parse_postcondition("Pr[ret == 1] > 0.5").unwrap();
        let cfg = VerifierConfig { samples: 500, seed, ..VerifierConfig::default() };
        let p = Program::interval(a);
        let r1 = verify(&p, &dist, &post, &cfg);
        let r2 = verify(&p, &dist, &post, &cfg);
        prop_assert_eq!(r1.accepted, r2.accepted);
        prop_assert_eq!(r1.term_estimates, r2.term_estimates);
    }

    #[test]
    fn sketch_holes_round_trip_through_print(a in 0.0f64..1.0, x in -0.5f64..1.5) {
        let ast = interval_sketch();
        let reparsed = parse(&ast.print()).unwrap();
        let holes = HoleAssignment::new(vec![a]);
        prop_assert_eq!(ast.evaluate(&holes, &[x]), reparsed.evaluate(&holes, &[x]));
        prop_assert_eq!(reparsed.print(), ast.print());
    }
}

#[test]
fn unrolling_preserves_semantics_and_removes_loops() {
    let src = "int f(double x) {\n\
                   double acc = x;\n\
                   for (int i = 0; i < 4; i = i + 1) {\n\
                       acc = acc + ??(0, 2);\n\
                       assert(acc > 0; 0.5);\n\
                   }\n\
                   if (acc > 3) { return 1; }\n\
                   return 0;\n\
               }";
    let ast = parse(src).unwrap();
    let unrolled = ast.unroll();
    assert!(unrolled.is_loop_free());
    assert_eq!(unrolled.asserts().len(), 4);
    // a hole is a single program-level constant, so unrolling duplicates its
    // occurrences but not the hole itself
    assert_eq!(unrolled.holes.len(), 1);
    // the printout renders each occurrence separately, so reparsing yields
    // one hole per occurrence; filling them all with the same value must
    // recover the original semantics
    let reparsed = parse(&unrolled.print()).unwrap();
    assert_eq!(reparsed.holes.len(), 4);
    let shared = HoleAssignment::new(vec![1.25]);
    let split = HoleAssignment::new(vec![1.25; 4]);
    for x in [-1.0, 0.0, 0.4, 2.0] {
        assert_eq!(unrolled.evaluate(&shared, &[x]), reparsed.evaluate(&split, &[x]));
    }
}

#[test]
fn engine_depth_series_is_monotone() {
    let problem = Problem {
        spec: Arc::new(Program::interval(0.3)),
        dist: InputDistribution::uniform_unit(),
        post: Postcondition::vacuous(),
        synth: SynthesizerKind::Box(ProgramClass::Interval),
    };
    let config = EngineConfig {
        tau: TauMode::Fixed(0.4),
        depth_budget: Some(40),
        seed: 5,
        verifier: VerifierConfig {
            samples: 100,
            seed: 5,
            ..VerifierConfig::default()
        },
        ..EngineConfig::default()
    };
    let report = Engine::new(problem, config).unwrap().run();
    assert!(report
        .depth_series
        .windows(2)
        .all(|w| w[0].value <= w[1].value && w[0].t_secs <= w[1].t_secs));
    assert!(report.tau_trace.windows(2).all(|w| w[0].tau >= w[1].tau));
    assert_eq!(report.depth, 40);
}
