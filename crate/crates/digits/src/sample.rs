//! Sample sequences: ordered, immutable-once-appended lists of input points.

use crate::dist::{DrawStream, InputDistribution};
use crate::ConfigError;

/// An ordered sequence of sampled input points.
///
/// Index order equals sampling order: the point at (1-based) index `i` was
/// drawn when the search deepened to depth `i`.
#[derive(Debug, Clone)]
pub struct SampleSequence {
    seed: u64,
    points: Vec<Vec<f64>>,
}

impl SampleSequence {
    pub fn empty(seed: u64) -> Self {
        Self {
            seed,
            points: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 1-based access: `point(i)` is the sample added at depth `i`.
    pub fn point(&self, index1: usize) -> &[f64] {
        &self.points[index1 - 1]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn push(&mut self, point: Vec<f64>) {
        self.points.push(point);
    }

    /// FNV-1a hash of the raw coordinate bits, used to audit that two runs
    /// consumed the identical sequence.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for p in &self.points {
            for v in p {
                for b in v.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }
}

/// Incremental sampler: owns the draw stream so the search can extend its
/// sample sequence one point per deepening.
pub struct Sampler {
    dist: InputDistribution,
    stream: DrawStream,
}

impl Sampler {
    pub fn new(dist: InputDistribution, seed: u64) -> Result<Self, ConfigError> {
        dist.validate()?;
        Ok(Self {
            dist,
            stream: DrawStream::new(seed),
        })
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.dist.draw(&mut self.stream)
    }
}

/// Draw `n` i.i.d. points from `dist`, deterministically in `(dist, seed)`.
pub fn sample(
    dist: &InputDistribution,
    seed: u64,
    n: usize,
) -> Result<SampleSequence, ConfigError> {
    let mut sampler = Sampler::new(dist.clone(), seed)?;
    let mut seq = SampleSequence::empty(seed);
    for _ in 0..n {
        seq.push(sampler.next_point());
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::thermostat_pre;

    #[test]
    fn empty_sequence() {
        let d = InputDistribution::uniform_box(vec![-1.0], vec![1.0]);
        let s = sample(&d, 7, 0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn seed_determinism_and_prefix() {
        let d = InputDistribution::uniform_cube(3);
        let a = sample(&d, 42, 100).unwrap();
        let b = sample(&d, 42, 100).unwrap();
        assert_eq!(a.points(), b.points());
        let short = sample(&d, 42, 10).unwrap();
        assert_eq!(short.points(), &a.points()[..10]);
    }

    #[test]
    fn mixture_prefix_property() {
        let d = thermostat_pre();
        let long = sample(&d, 9, 50).unwrap();
        let short = sample(&d, 9, 20).unwrap();
        assert_eq!(short.points(), &long.points()[..20]);
    }

    #[test]
    fn uniform_mean_close_to_zero() {
        // Law-of-large-numbers check at Hoeffding tolerance for n = 10000.
        let d = InputDistribution::uniform_box(vec![-1.0], vec![1.0]);
        let s = sample(&d, 123, 10000).unwrap();
        let mean: f64 = s.points().iter().map(|p| p[0]).sum::<f64>() / 10000.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn thermostat_mixture_mean() {
        // Analytic mean of lin is (30 + 35 + 50) / 3.
        let d = thermostat_pre();
        let s = sample(&d, 5, 10000).unwrap();
        let mean: f64 = s.points().iter().map(|p| p[0]).sum::<f64>() / 10000.0;
        let expected = (30.0 + 35.0 + 50.0) / 3.0;
        assert!((mean - expected).abs() < 0.5, "mean {mean}");
        let tmean: f64 = s.points().iter().map(|p| p[1]).sum::<f64>() / 10000.0;
        assert!((tmean - 75.0).abs() < 0.1, "target mean {tmean}");
    }

    #[test]
    fn rejects_invalid_distribution() {
        let d = InputDistribution::uniform_box(vec![2.0], vec![1.0]);
        assert!(sample(&d, 0, 5).is_err());
    }
}
