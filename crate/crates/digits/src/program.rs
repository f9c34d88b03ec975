//! The program abstraction: evaluable total maps from input vectors to {0,1}.

use std::sync::Arc;

use crate::dist::InputDistribution;
use crate::labels::ConstraintString;
use crate::sample::sample;
use crate::sketch::{HoleAssignment, SketchAst};

/// An axis-aligned box program: returns 1 iff the input lies inside
/// `[lo, hi]` componentwise.
///
/// The degenerate sentinel `lo[i] > hi[i]` denotes the empty box, which
/// evaluates to constant 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxProgram {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxProgram {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    /// The interval `[0, a]` in dimension 1.
    pub fn interval(a: f64) -> Self {
        Self::new(vec![0.0], vec![a])
    }

    /// The empty box of dimension `dim` (constant-0 program).
    pub fn empty(dim: usize) -> Self {
        Self::new(vec![1.0; dim], vec![-1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        assert_eq!(x.len(), self.dim(), "input dimension mismatch");
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((l, h), v)| l <= v && v <= h)
    }

    /// Lebesgue volume of the box clipped to the ambient box.
    pub fn volume_clipped(&self, ambient_lo: &[f64], ambient_hi: &[f64]) -> f64 {
        let mut v = 1.0;
        for i in 0..self.dim() {
            let l = self.lo[i].max(ambient_lo[i]);
            let h = self.hi[i].min(ambient_hi[i]);
            if l > h {
                return 0.0;
            }
            v *= h - l;
        }
        v
    }
}

/// A program class: the family the synthesis oracle searches over.
#[derive(Debug, Clone)]
pub enum ProgramClass {
    /// Intervals `[0, a]` with `a` in `[0, 1]`.
    Interval,
    /// Axis-aligned hyperrectangles within `[-1, 1]^dim`.
    Rect { dim: usize },
    /// Completions of a loop-free sketch.
    Sketch { ast: Arc<SketchAst> },
}

impl ProgramClass {
    pub fn dimension(&self) -> usize {
        match self {
            ProgramClass::Interval => 1,
            ProgramClass::Rect { dim } => *dim,
            ProgramClass::Sketch { ast } => ast.inputs.len(),
        }
    }

    /// VC dimension, when known in closed form.
    pub fn vc_dimension(&self) -> Option<usize> {
        match self {
            ProgramClass::Interval => Some(1),
            ProgramClass::Rect { dim } => Some(2 * dim),
            ProgramClass::Sketch { .. } => None,
        }
    }

    pub fn id(&self) -> String {
        match self {
            ProgramClass::Interval => "interval".into(),
            ProgramClass::Rect { dim } => format!("rect{dim}"),
            ProgramClass::Sketch { ast } => format!("sketch:{}", ast.name),
        }
    }
}

/// An evaluable program: a total map from input vectors to {0, 1}.
#[derive(Debug, Clone)]
pub enum Program {
    Box(BoxProgram),
    Sketch {
        ast: Arc<SketchAst>,
        holes: HoleAssignment,
    },
}

impl Program {
    pub fn interval(a: f64) -> Self {
        Program::Box(BoxProgram::interval(a))
    }

    /// The constant-0 program (empty box) of the given input dimension.
    pub fn constant_zero(dim: usize) -> Self {
        Program::Box(BoxProgram::empty(dim))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Program::Box(b) => b.dim(),
            Program::Sketch { ast, .. } => ast.inputs.len(),
        }
    }

    /// Deterministic output bit.
    pub fn eval(&self, x: &[f64]) -> bool {
        match self {
            Program::Box(b) => b.contains(x),
            Program::Sketch { ast, holes } => ast.evaluate(holes, x).0,
        }
    }

    /// Output bit plus the truth value of each instrumented assert event on
    /// this execution. Box programs carry no events.
    pub fn eval_with_events(&self, x: &[f64]) -> (bool, Vec<bool>) {
        match self {
            Program::Box(b) => (b.contains(x), Vec::new()),
            Program::Sketch { ast, holes } => ast.evaluate(holes, x),
        }
    }

    /// Parameter vector (box bounds, or hole values in hole order).
    pub fn params(&self) -> Vec<f64> {
        match self {
            Program::Box(b) => b.lo.iter().chain(&b.hi).copied().collect(),
            Program::Sketch { holes, .. } => holes.values.clone(),
        }
    }

    pub fn class_id(&self) -> String {
        match self {
            Program::Box(b) => format!("box{}", b.dim()),
            Program::Sketch { ast, .. } => format!("sketch:{}", ast.name),
        }
    }

    /// Labels of this program on the first `n` samples of `s`.
    pub fn label_string(&self, s: &crate::sample::SampleSequence, n: usize) -> ConstraintString {
        ConstraintString::from_bits((1..=n).map(|i| self.eval(s.point(i))))
    }
}

/// Either side of a Hamming comparison: a program (read pointwise on the
/// samples) or a constraint string (read positionally).
#[derive(Clone, Copy)]
pub enum Labels<'a> {
    Prog(&'a Program),
    Str(&'a ConstraintString),
}

impl Labels<'_> {
    fn bit(&self, s: &crate::sample::SampleSequence, i: usize) -> bool {
        match self {
            Labels::Prog(p) => p.eval(s.point(i + 1)),
            Labels::Str(c) => {
                assert!(
                    c.len() > i,
                    "constraint string of length {} shorter than prefix index {}",
                    c.len(),
                    i
                );
                c.bit(i)
            }
        }
    }
}

/// Hamming distance over the first `prefix_len` samples:
/// `|{ i < prefix_len : a(x_{i+1}) != b(x_{i+1}) }|`.
pub fn hamming(
    s: &crate::sample::SampleSequence,
    prefix_len: usize,
    a: Labels<'_>,
    b: Labels<'_>,
) -> usize {
    assert!(prefix_len <= s.len(), "prefix longer than sample sequence");
    (0..prefix_len).filter(|&i| a.bit(s, i) != b.bit(s, i)).count()
}

/// A probability estimate with its two-sided Hoeffding half-width.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub n: usize,
}

/// Two-sided Hoeffding half-width at the given confidence:
/// `sqrt(ln(2 / (1 - confidence)) / (2n))`.
pub fn hoeffding_half_width(n: usize, confidence: f64) -> f64 {
    assert!(n >= 1 && confidence > 0.0 && confidence < 1.0);
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Fraction of `n` fresh seeded samples on which `p` and `spec` disagree,
/// with the Hoeffding half-width for the given confidence.
pub fn empirical_error(
    p: &Program,
    spec: &Program,
    dist: &InputDistribution,
    n: usize,
    seed: u64,
    confidence: f64,
) -> Estimate {
    assert!(n >= 1);
    let s = sample(dist, seed, n).expect("invalid distribution");
    let disagreements = s
        .points()
        .iter()
        .filter(|x| p.eval(x) != spec.eval(x))
        .count();
    Estimate {
        value: disagreements as f64 / n as f64,
        half_width: hoeffding_half_width(n, confidence),
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SampleSequence;

    fn seq(points: &[f64]) -> SampleSequence {
        let mut s = SampleSequence::empty(0);
        for &p in points {
            s.push(vec![p]);
        }
        s
    }

    #[test]
    fn interval_evaluation() {
        let p = Program::interval(0.3);
        assert!(p.eval(&[0.2]));
        assert!(!p.eval(&[0.4]));
    }

    #[test]
    fn rect_evaluation() {
        let p = Program::Box(BoxProgram::new(vec![0.0, -1.0], vec![0.2, 1.0]));
        assert!(p.eval(&[0.1, 0.9]));
        assert!(!p.eval(&[0.3, 0.0]));
    }

    #[test]
    fn degenerate_box_is_constant_zero() {
        let p = Program::constant_zero(2);
        assert!(!p.eval(&[0.0, 0.0]));
        assert!(!p.eval(&[100.0, -3.0]));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dimension_mismatch_panics() {
        Program::interval(0.5).eval(&[0.1, 0.2]);
    }

    #[test]
    fn hamming_positional() {
        let s = seq(&[0.4, 0.6]);
        let sigma: ConstraintString = "01".parse().unwrap();
        let p = Program::interval(0.3); // labels "00"
        assert_eq!(hamming(&s, 2, Labels::Str(&sigma), Labels::Prog(&p)), 1);
        assert_eq!(hamming(&s, 2, Labels::Str(&sigma), Labels::Str(&sigma)), 0);
    }

    #[test]
    fn hamming_full_flip() {
        let d = InputDistribution::uniform_unit();
        let s = crate::sample::sample(&d, 3, 100).unwrap();
        let p = Program::interval(0.5);
        let flipped = ConstraintString::from_bits((1..=100).map(|i| !p.eval(s.point(i))));
        assert_eq!(hamming(&s, 100, Labels::Prog(&p), Labels::Str(&flipped)), 100);
    }

    #[test]
    #[should_panic(expected = "shorter than prefix")]
    fn short_string_panics() {
        let s = seq(&[0.1, 0.2, 0.3]);
        let sigma: ConstraintString = "01".parse().unwrap();
        hamming(&s, 3, Labels::Str(&sigma), Labels::Str(&sigma));
    }

    #[test]
    fn empirical_error_identical_is_zero() {
        let d = InputDistribution::uniform_unit();
        let p = Program::interval(0.3);
        let e = empirical_error(&p, &p, &d, 100, 1, 0.95);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn empirical_error_interval_mass() {
        // Exact mass of (0.3, 0.5] under Uniform[0,1] is 0.2.
        let d = InputDistribution::uniform_unit();
        let p = Program::interval(0.5);
        let spec = Program::interval(0.3);
        let e = empirical_error(&p, &spec, &d, 10000, 11, 0.95);
        assert!((e.value - 0.2).abs() < 0.02, "estimate {}", e.value);
    }

    #[test]
    fn empirical_error_disjoint() {
        let d = InputDistribution::uniform_unit();
        let p = Program::interval(1.0);
        let spec = Program::interval(0.0);
        let e = empirical_error(&p, &spec, &d, 1000, 2, 0.95);
        assert!((e.value - 1.0).abs() < 0.05, "estimate {}", e.value);
    }

    #[test]
    fn error_matches_hamming_on_same_samples() {
        let d = InputDistribution::uniform_unit();
        let n = 500;
        let seed = 77;
        let s = crate::sample::sample(&d, seed, n).unwrap();
        let p = Program::interval(0.5);
        let spec = Program::interval(0.3);
        let h = hamming(&s, n, Labels::Prog(&p), Labels::Prog(&spec));
        let e = empirical_error(&p, &spec, &d, n, seed, 0.95);
        assert_eq!(e.value, h as f64 / n as f64);
    }
}
