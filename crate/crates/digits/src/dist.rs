//! Input distributions with reproducible sampling.
//!
//! Sampling is driven by [`DrawStream`], a ChaCha12 generator seeded from a
//! 64-bit integer. Every point consumes a fixed number of raw draws
//! (uniforms are one draw, Gaussians are two via Box-Muller), so a prefix of
//! a longer run with the same seed equals the shorter run.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

/// Seeded source of raw uniform and normal draws.
///
/// The generator and draw order are fixed so sample sequences replay
/// bit-identically across platforms.
pub struct DrawStream {
    rng: ChaCha12Rng,
}

impl DrawStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller, cosine branch only.
    ///
    /// Always consumes exactly two uniform draws.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// One component of a Gaussian mixture. `variance` is stored as given
/// (the standard deviation is its square root).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

/// A joint distribution over real-vector program inputs.
///
/// Boolean inputs are encoded as `{0, 1}` reals. Only the three kinds below
/// are accepted; anything else is rejected at config parse time.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDistribution {
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    GaussianMixture {
        components: Vec<MixtureComponent>,
    },
    /// Concatenation of independent sub-distributions.
    Product {
        parts: Vec<InputDistribution>,
    },
}

impl InputDistribution {
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        InputDistribution::UniformBox { lo, hi }
    }

    /// Uniform over `[-1, 1]^d`.
    pub fn uniform_cube(dim: usize) -> Self {
        InputDistribution::UniformBox {
            lo: vec![-1.0; dim],
            hi: vec![1.0; dim],
        }
    }

    /// Uniform over `[0, 1]`.
    pub fn uniform_unit() -> Self {
        InputDistribution::UniformBox {
            lo: vec![0.0],
            hi: vec![1.0],
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            InputDistribution::UniformBox { lo, .. } => lo.len(),
            InputDistribution::GaussianMixture { components } => {
                components.first().map_or(0, |c| c.mean.len())
            }
            InputDistribution::Product { parts } => parts.iter().map(|p| p.dimension()).sum(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            InputDistribution::UniformBox { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(ConfigError::Distribution(format!(
                        "uniform_box bounds must be nonempty and equal length (got {} and {})",
                        lo.len(),
                        hi.len()
                    )));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite()) || l > h {
                        return Err(ConfigError::Distribution(format!(
                            "uniform_box requires finite lo <= hi, got [{l}, {h}]"
                        )));
                    }
                }
                Ok(())
            }
            InputDistribution::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(ConfigError::Distribution(
                        "gaussian_mixture needs at least one component".into(),
                    ));
                }
                let dim = components[0].mean.len();
                if dim == 0 {
                    return Err(ConfigError::Distribution(
                        "gaussian_mixture components must have dimension >= 1".into(),
                    ));
                }
                let mut total = 0.0;
                for c in components {
                    if c.mean.len() != dim || c.variance.len() != dim {
                        return Err(ConfigError::Distribution(
                            "gaussian_mixture components must share one dimension".into(),
                        ));
                    }
                    if c.weight < 0.0 {
                        return Err(ConfigError::Distribution(
                            "mixture weights must be nonnegative".into(),
                        ));
                    }
                    if c.variance.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                        return Err(ConfigError::Distribution(
                            "variances must be finite and >= 0".into(),
                        ));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(ConfigError::Distribution(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            InputDistribution::Product { parts } => {
                if parts.is_empty() {
                    return Err(ConfigError::Distribution(
                        "product needs at least one part".into(),
                    ));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
        }
    }

    /// Draw one point, appending its coordinates to `out`.
    pub(crate) fn draw_into(&self, stream: &mut DrawStream, out: &mut Vec<f64>) {
        match self {
            InputDistribution::UniformBox { lo, hi } => {
                for (l, h) in lo.iter().zip(hi) {
                    out.push(l + stream.uniform() * (h - l));
                }
            }
            InputDistribution::GaussianMixture { components } => {
                let pick = stream.uniform();
                let mut acc = 0.0;
                let mut chosen = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if pick < acc {
                        chosen = i;
                        break;
                    }
                }
                // Every point consumes 1 + 2*dim draws regardless of the
                // chosen component, preserving the prefix property.
                let dim = components[0].mean.len();
                for d in 0..dim {
                    let z = stream.normal();
                    let c = &components[chosen];
                    out.push(c.mean[d] + c.variance[d].sqrt() * z);
                }
            }
            InputDistribution::Product { parts } => {
                for p in parts {
                    p.draw_into(stream, out);
                }
            }
        }
    }

    /// Draw one point as a fresh vector.
    pub fn draw(&self, stream: &mut DrawStream) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dimension());
        self.draw_into(stream, &mut out);
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let dist: InputDistribution = serde_json::from_str(text)
            .map_err(|e| ConfigError::Distribution(format!("bad distribution JSON: {e}")))?;
        dist.validate()?;
        Ok(dist)
    }
}

/// The thermostat input distribution: `lin` is a three-way mixture of
/// Gaussians with means 30/35/50 and variance 9, `ltarget` is Gaussian with
/// mean 75 and variance 1.
pub fn thermostat_pre() -> InputDistribution {
    let third = 1.0 / 3.0;
    InputDistribution::Product {
        parts: vec![
            InputDistribution::GaussianMixture {
                components: vec![
                    MixtureComponent {
                        weight: third,
                        mean: vec![30.0],
                        variance: vec![9.0],
                    },
                    MixtureComponent {
                        weight: third,
                        mean: vec![35.0],
                        variance: vec![9.0],
                    },
                    MixtureComponent {
                        weight: third,
                        mean: vec![50.0],
                        variance: vec![9.0],
                    },
                ],
            },
            InputDistribution::GaussianMixture {
                components: vec![MixtureComponent {
                    weight: 1.0,
                    mean: vec![75.0],
                    variance: vec![1.0],
                }],
            },
        ],
    }
}
