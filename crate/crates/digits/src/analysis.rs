//! Learning-theoretic utilities: sample-size formulas, dichotomy counting,
//! Sauer-Shelah envelopes, and binomial tail bounds for threshold search.

use statrs::function::gamma::ln_gamma;

use crate::dist::InputDistribution;
use crate::labels::ConstraintString;
use crate::oracles::synth_box;
use crate::program::{BoxProgram, Program, ProgramClass};
use crate::sample::SampleSequence;
use crate::ConfigError;

/// Accuracy/confidence parameters for sample-size formulas.
#[derive(Debug, Clone, Copy)]
pub struct LearningParams {
    pub epsilon: f64,
    pub delta: f64,
    pub vc_dim: usize,
    /// Robustness radius, carried for reporting only; when supplied it must
    /// satisfy `epsilon <= alpha`.
    pub alpha: Option<f64>,
}

impl LearningParams {
    pub fn new(epsilon: f64, delta: f64, vc_dim: usize) -> Result<Self, ConfigError> {
        let p = Self {
            epsilon,
            delta,
            vc_dim,
            alpha: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, ConfigError> {
        self.alpha = Some(alpha);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(ConfigError::Parameter("epsilon must be in (0, 1]".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::Parameter("delta must be in (0, 1)".into()));
        }
        if self.vc_dim == 0 {
            return Err(ConfigError::Parameter("vc_dim must be positive".into()));
        }
        if let Some(a) = self.alpha {
            if !(self.epsilon <= a) {
                return Err(ConfigError::Parameter(
                    "epsilon must not exceed alpha".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Binomial-tail parameters for threshold pruning: `m` samples, true
/// disagreement probability `k`, threshold `tau` with `tau > k`.
#[derive(Debug, Clone, Copy)]
pub struct TailParams {
    pub m: usize,
    pub k: f64,
    pub tau: f64,
}

impl TailParams {
    pub fn new(m: usize, k: f64, tau: f64) -> Result<Self, ConfigError> {
        if !(0.0..1.0).contains(&k) {
            return Err(ConfigError::Parameter("k must be in [0, 1)".into()));
        }
        if !(tau > k && tau <= 1.0) {
            return Err(ConfigError::Parameter("tau must be in (k, 1]".into()));
        }
        Ok(Self { m, k, tau })
    }
}

/// `ceil((1/eps) * (4 log2(2/delta) + 8 d log2(13/eps)))` — the sample count
/// at which a random sample is an eps-net with probability >= 1 - delta.
pub fn vc_cost(p: &LearningParams) -> usize {
    let eps = p.epsilon;
    let inner = 4.0 * (2.0 / p.delta).log2() + 8.0 * p.vc_dim as f64 * (13.0 / eps).log2();
    (inner / eps).ceil() as usize
}

/// `ceil(ln(2/delta) / (2 eps^2))` — two-sided Hoeffding sample count for a
/// half-width `eps` estimate at confidence `1 - delta` (floored at 1).
pub fn hoeffding_n(epsilon: f64, delta: f64) -> usize {
    assert!(epsilon > 0.0 && delta > 0.0 && delta < 1.0);
    (((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as usize).max(1)
}

/// Number of distinct labelings of `s` realizable by the class.
///
/// The `[0,a]` interval class has a closed form: one labeling per distinct
/// nonnegative sample value, plus the all-negative labeling (realized by the
/// empty box, which this class includes — so the count stays `|S| + 1` even
/// when 0 is a sample). Other box classes are counted by enumerating all
/// `2^|s|` labelings against the exact synthesizer, capped at `|s| <= 20`.
pub fn count_dichotomies(class: &ProgramClass, s: &SampleSequence) -> Result<u64, ConfigError> {
    match class {
        ProgramClass::Interval => {
            let mut vals: Vec<f64> = s
                .points()
                .iter()
                .map(|x| x[0])
                .filter(|v| *v >= 0.0)
                .collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            Ok(vals.len() as u64 + 1)
        }
        ProgramClass::Rect { .. } => {
            let m = s.len();
            if m > 20 {
                return Err(ConfigError::Parameter(format!(
                    "dichotomy enumeration needs |s| <= 20, got {m}"
                )));
            }
            let points: Vec<&[f64]> = s.points().iter().map(Vec::as_slice).collect();
            let mut count = 0u64;
            for mask in 0u64..(1u64 << m) {
                let labeled: Vec<(&[f64], bool)> = points
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (*x, mask >> i & 1 == 1))
                    .collect();
                if !synth_box(class, &labeled).is_bottom() {
                    count += 1;
                }
            }
            Ok(count)
        }
        ProgramClass::Sketch { .. } => Err(ConfigError::Parameter(
            "dichotomy counting is unsupported for sketch classes".into(),
        )),
    }
}

/// Sauer-Shelah envelope `(e m / d)^d`, valid for `m >= d >= 1`.
pub fn sauer_bound(d: usize, m: usize) -> Result<f64, ConfigError> {
    if d == 0 {
        return Err(ConfigError::Parameter("vc_dim must be positive".into()));
    }
    if m < d {
        return Err(ConfigError::Parameter(format!(
            "sauer_bound needs m >= d, got m={m}, d={d}"
        )));
    }
    Ok((std::f64::consts::E * m as f64 / d as f64).powi(d as i32))
}

fn ln_choose(m: usize, i: usize) -> f64 {
    ln_gamma(m as f64 + 1.0) - ln_gamma(i as f64 + 1.0) - ln_gamma((m - i) as f64 + 1.0)
}

/// Exact `Pr[X > tau m]` for `X ~ Binomial(m, k)`, summed in log space.
pub fn tail_exact(t: &TailParams) -> f64 {
    let TailParams { m, k, tau } = *t;
    if tau >= 1.0 || k == 0.0 || m == 0 {
        return 0.0;
    }
    let start = (tau * m as f64).floor() as usize + 1;
    if start > m {
        return 0.0;
    }
    let ln_k = k.ln();
    let ln_1k = (1.0 - k).ln();
    let terms: Vec<f64> = (start..=m)
        .map(|i| ln_choose(m, i) + i as f64 * ln_k + (m - i) as f64 * ln_1k)
        .filter(|t| t.is_finite())
        .collect();
    if terms.is_empty() {
        // k == 1 with ln(1-k) = -inf kills every i < m term
        return if k == 1.0 { 1.0 } else { 0.0 };
    }
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(1.0)
}

/// Closed-form upper bounds on the same tail:
/// the Hoeffding form `e^{-2m(tau-k)^2}` and the tighter KL form
/// `e^{-m (tau ln(tau/k) + (1-tau) ln((1-tau)/(1-k)))}`.
pub fn tail_bounds(t: &TailParams) -> Result<(f64, f64), ConfigError> {
    let TailParams { m, k, tau } = *t;
    if !(k > 0.0 && tau < 1.0) {
        return Err(ConfigError::Parameter(
            "tail_bounds needs 0 < k < tau < 1; use tail_exact for the degenerate cases".into(),
        ));
    }
    let mf = m as f64;
    let hoeffding = (-2.0 * mf * (tau - k) * (tau - k)).exp();
    let kl = tau * (tau / k).ln() + (1.0 - tau) * ((1.0 - tau) / (1.0 - k)).ln();
    Ok((hoeffding, (-mf * kl).exp()))
}

/// Composed failure bound for threshold search at rate `tau` after an
/// eps-net of confidence `1 - delta_net`: `delta_net + Pr[X > tau m]`.
pub fn search_failure_bound(delta_net: f64, t: &TailParams) -> f64 {
    delta_net + tail_exact(t)
}

fn intersect_volume(a: &BoxProgram, b: &BoxProgram, amb_lo: &[f64], amb_hi: &[f64]) -> f64 {
    let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect();
    let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect();
    BoxProgram::new(lo, hi).volume_clipped(amb_lo, amb_hi)
}

/// Disagreement mass of two boxes under the uniform distribution on the
/// ambient box: `vol(symdiff) / vol(ambient)`.
fn box_disagreement(a: &BoxProgram, b: &BoxProgram, amb_lo: &[f64], amb_hi: &[f64]) -> f64 {
    let ambient: f64 = amb_lo
        .iter()
        .zip(amb_hi)
        .map(|(l, h)| (h - l).max(0.0))
        .product();
    let va = a.volume_clipped(amb_lo, amb_hi);
    let vb = b.volume_clipped(amb_lo, amb_hi);
    let vab = intersect_volume(a, b, amb_lo, amb_hi);
    (va + vb - 2.0 * vab) / ambient
}

/// Checks whether `s` is an eps-net for `target` over the class: every grid
/// program whose (analytic) disagreement mass with `target` exceeds
/// `epsilon` must disagree with `target` on some witness in `s`.
///
/// Supported: interval and 1-d rectangle classes under a uniform-box
/// distribution; `grid_step` is the parameter grid resolution (1e-3 is the
/// usual choice).
pub fn epsilon_net_check(
    class: &ProgramClass,
    target: &Program,
    dist: &InputDistribution,
    epsilon: f64,
    s: &SampleSequence,
    grid_step: f64,
) -> Result<bool, ConfigError> {
    let InputDistribution::UniformBox { lo: amb_lo, hi: amb_hi } = dist else {
        return Err(ConfigError::Parameter(
            "epsilon_net_check needs a uniform-box distribution".into(),
        ));
    };
    let Program::Box(target_box) = target else {
        return Err(ConfigError::Parameter(
            "epsilon_net_check needs a box target".into(),
        ));
    };
    assert!(grid_step > 0.0);

    let agrees_on_s = |cand: &BoxProgram| {
        s.points()
            .iter()
            .all(|x| cand.contains(x) == target_box.contains(x))
    };
    let is_violation = |cand: &BoxProgram| {
        box_disagreement(cand, target_box, amb_lo, amb_hi) > epsilon && agrees_on_s(cand)
    };

    let grid = |lo: f64, hi: f64| {
        let steps = ((hi - lo) / grid_step).round() as usize;
        (0..=steps).map(move |i| lo + i as f64 * grid_step)
    };

    match class {
        ProgramClass::Interval => {
            let lo = amb_lo[0].max(0.0);
            for a in grid(lo, amb_hi[0]) {
                if is_violation(&BoxProgram::interval(a)) {
                    return Ok(false);
                }
            }
            // the empty program is in the class too
            if is_violation(&BoxProgram::empty(1)) {
                return Ok(false);
            }
            Ok(true)
        }
        ProgramClass::Rect { dim: 1 } => {
            for l in grid(amb_lo[0], amb_hi[0]) {
                for u in grid(l, amb_hi[0]) {
                    if is_violation(&BoxProgram::new(vec![l], vec![u])) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        _ => Err(ConfigError::Parameter(
            "grid enumeration is unsupported for this class".into(),
        )),
    }
}

/// Labels of `s` as a constraint string under an arbitrary labeling mask
/// (test helper for dichotomy work).
pub fn mask_labels(m: usize, mask: u64) -> ConstraintString {
    ConstraintString::from_bits((0..m).map(|i| mask >> i & 1 == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::sample;

    fn seq1(points: &[f64]) -> SampleSequence {
        let mut s = SampleSequence::empty(0);
        for &p in points {
            s.push(vec![p]);
        }
        s
    }

    #[test]
    fn vc_cost_values() {
        let p = LearningParams::new(0.1, 0.05, 1).unwrap();
        assert_eq!(vc_cost(&p), 775);
        let p2 = LearningParams::new(0.1, 0.05, 2).unwrap();
        assert!(vc_cost(&p2) > 775);
        let p3 = LearningParams::new(0.05, 0.05, 1).unwrap();
        assert!(vc_cost(&p3) > vc_cost(&p));
    }

    #[test]
    fn hoeffding_n_values() {
        assert_eq!(hoeffding_n(0.05, 0.05), 738);
        // degenerate corner: the formula itself gives 2 here
        assert_eq!(hoeffding_n(0.5, 1.0 - 1e-9), 2);
        let n1 = hoeffding_n(0.1, 0.05);
        let n2 = hoeffding_n(0.05, 0.05);
        let ratio = n2 as f64 / n1 as f64;
        assert!((ratio - 4.0).abs() < 0.05);
    }

    #[test]
    fn dichotomy_counts() {
        assert_eq!(
            count_dichotomies(&ProgramClass::Interval, &seq1(&[0.4, 0.6])).unwrap(),
            3
        );
        assert_eq!(
            count_dichotomies(&ProgramClass::Interval, &SampleSequence::empty(0)).unwrap(),
            1
        );
        // closed form agrees with brute-force enumeration via the rect oracle
        // restricted to [0,a]-realizable labelings on random points
        let s = sample(&InputDistribution::uniform_unit(), 7, 5).unwrap();
        let m = s.len();
        let points: Vec<&[f64]> = s.points().iter().map(Vec::as_slice).collect();
        let mut brute = 0u64;
        for mask in 0u64..(1 << m) {
            let labeled: Vec<(&[f64], bool)> = points
                .iter()
                .enumerate()
                .map(|(i, x)| (*x, mask >> i & 1 == 1))
                .collect();
            if !synth_box(&ProgramClass::Interval, &labeled).is_bottom() {
                brute += 1;
            }
        }
        assert_eq!(
            count_dichotomies(&ProgramClass::Interval, &s).unwrap(),
            brute
        );
    }

    #[test]
    fn dichotomy_monotone_under_extension() {
        let s = sample(&InputDistribution::uniform_unit(), 11, 8).unwrap();
        let mut prev = 0;
        for l in 0..=s.len() {
            let mut prefix = SampleSequence::empty(s.seed());
            for i in 1..=l {
                prefix.push(s.point(i).to_vec());
            }
            let c = count_dichotomies(&ProgramClass::Interval, &prefix).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn sauer_values() {
        let b = sauer_bound(1, 10).unwrap();
        assert!((b - std::f64::consts::E * 10.0).abs() < 1e-9);
        assert!(11.0 <= b);
        assert!(sauer_bound(1, 0).is_err());
        let e3 = sauer_bound(3, 3).unwrap();
        assert!((e3 - std::f64::consts::E.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn rect_counts_below_sauer() {
        let s = sample(&InputDistribution::uniform_cube(1), 3, 8).unwrap();
        let c = count_dichotomies(&ProgramClass::Rect { dim: 1 }, &s).unwrap();
        assert!((c as f64) <= sauer_bound(2, 8).unwrap());
    }

    #[test]
    fn tail_exact_values() {
        let t = TailParams::new(100, 0.1, 0.2).unwrap();
        let v = tail_exact(&t);
        assert!(v < 0.001);
        assert!(v > 5e-4, "{v}");
        assert_eq!(tail_exact(&TailParams::new(50, 0.3, 1.0).unwrap()), 0.0);
        assert_eq!(tail_exact(&TailParams { m: 50, k: 0.0, tau: 0.5 }), 0.0);
    }

    #[test]
    fn tail_bound_values_and_dominance() {
        let t = TailParams::new(100, 0.1, 0.2).unwrap();
        let (h, kl) = tail_bounds(&t).unwrap();
        assert!((h - (-2.0f64).exp()).abs() < 1e-12);
        assert!((kl - 0.0118).abs() < 5e-4);
        assert!(kl <= h);
        for m in (10..=200).step_by(10) {
            let t = TailParams::new(m, 0.1, 0.25).unwrap();
            let (h, kl) = tail_bounds(&t).unwrap();
            let e = tail_exact(&t);
            assert!(e <= kl + 1e-12 && kl <= h + 1e-12, "m={m} e={e} kl={kl} h={h}");
        }
    }

    #[test]
    fn tail_exact_monotonicity() {
        let base = tail_exact(&TailParams::new(80, 0.1, 0.2).unwrap());
        assert!(tail_exact(&TailParams::new(80, 0.1, 0.3).unwrap()) <= base);
        assert!(tail_exact(&TailParams::new(80, 0.15, 0.2).unwrap()) >= base);
    }

    #[test]
    fn failure_bound_composition() {
        let t = TailParams::new(100, 0.1, 0.2).unwrap();
        let b = search_failure_bound(0.05, &t);
        assert!(b >= 0.05 && b >= tail_exact(&t));
    }

    #[test]
    fn epsilon_net_empty_sample_fails() {
        let dist = InputDistribution::uniform_unit();
        let target = Program::interval(0.5);
        let ok = epsilon_net_check(
            &ProgramClass::Interval,
            &target,
            &dist,
            0.1,
            &SampleSequence::empty(0),
            1e-3,
        )
        .unwrap();
        assert!(!ok);
    }

    #[test]
    fn epsilon_net_straddling_witnesses_pass() {
        let dist = InputDistribution::uniform_unit();
        let target = Program::interval(0.5);
        // witnesses tighter than eps on both sides of every boundary region
        let s = seq1(&[0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95]);
        let ok =
            epsilon_net_check(&ProgramClass::Interval, &target, &dist, 0.2, &s, 1e-3).unwrap();
        assert!(ok);
    }
}
