//! Seeded synthetic benchmark interactions in which X drives Y.
//!
//! Each model draws from separate sub-streams of its seed (initial
//! conditions, source noise, target noise), so changing a noise gain or a
//! coupling coefficient never shifts the other draws.

use serde::{Deserialize, Serialize};

use crate::embed::SeriesPair;
use crate::rng::Stream;
use crate::{Error, Result};

const STREAM_INIT: u64 = 1;
const STREAM_SOURCE: u64 = 2;
const STREAM_TARGET: u64 = 3;

/// Smallest series length the generators produce.
pub const MIN_LENGTH: usize = 100;

/// Iterations discarded before the Hénon output window when `n = 3000`.
pub const HENON_BURN_IN: usize = 100_000;

const HENON_MIN_BURN_IN: usize = 10_000;
const HENON_ESCAPE: f64 = 10.0;
const HENON_ATTEMPTS: usize = 100;
const SIGMOID_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Model {
    /// `y_t = β1 x_{t-1} + β2 x_{t-2} + z_t`
    Linear { beta1: f64, beta2: f64 },
    /// `y_t = β1 x_{t-1}² + β2 x_{t-2}² + z_t`
    Quadratic { beta1: f64, beta2: f64 },
    /// Unidirectionally coupled Hénon maps observed through Gaussian noise
    /// of standard deviation `gamma`.
    Henon { beta: f64, gamma: f64 },
    /// X drives Y through a squared logistic sigmoid.
    Sigmoid { beta: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Linear { .. } => "linear",
            Model::Quadratic { .. } => "quadratic",
            Model::Henon { .. } => "henon",
            Model::Sigmoid { .. } => "sigmoid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        match *self {
            Model::Linear { beta1, beta2 } | Model::Quadratic { beta1, beta2 } => {
                unit("beta1", beta1)?;
                unit("beta2", beta2)
            }
            Model::Henon { beta, gamma } => {
                unit("beta", beta)?;
                if gamma >= 0.0 && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("gamma must be non-negative, got {gamma}")))
                }
            }
            Model::Sigmoid { beta } => unit("beta", beta),
        }
    }
}

/// A model plus length, seed and optional burn-in override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    pub seed: u64,
    /// Samples discarded before the output window. `None` uses the model
    /// default: zero except for Hénon, see [`henon_burn_in`].
    #[serde(default)]
    pub burn_in: Option<usize>,
}

impl GeneratorSpec {
    pub fn new(model: Model, n: usize, seed: u64) -> Self {
        GeneratorSpec { model, n, seed, burn_in: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.n < MIN_LENGTH {
            return Err(Error::invalid(format!("series length must be at least {MIN_LENGTH}, got {}", self.n)));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<SeriesPair> {
        self.validate()?;
        let burn_in = self.burn_in;
        let pair = match self.model {
            Model::Linear { beta1, beta2 } => lagged(beta1, beta2, self.n, self.seed, burn_in, |x| x),
            Model::Quadratic { beta1, beta2 } => lagged(beta1, beta2, self.n, self.seed, burn_in, |x| x * x),
            Model::Henon { beta, gamma } => {
                henon(beta, gamma, self.n, self.seed, burn_in.unwrap_or_else(|| henon_burn_in(self.n)))?
            }
            Model::Sigmoid { beta } => sigmoid_coupled(beta, self.n, self.seed, burn_in.unwrap_or(0))?,
        };
        Ok(pair.with_seed(self.seed))
    }
}

/// Default Hénon burn-in: 10^5 iterations at `n = 3000`, scaled with `n`,
/// never below 10^4.
pub fn henon_burn_in(n: usize) -> usize {
    ((HENON_BURN_IN as u128 * n as u128 / 3000) as usize).max(HENON_MIN_BURN_IN)
}

pub fn gen_linear(beta1: f64, beta2: f64, n: usize, seed: u64) -> Result<SeriesPair> {
    GeneratorSpec::new(Model::Linear { beta1, beta2 }, n, seed).generate()
}

pub fn gen_quadratic(beta1: f64, beta2: f64, n: usize, seed: u64) -> Result<SeriesPair> {
    GeneratorSpec::new(Model::Quadratic { beta1, beta2 }, n, seed).generate()
}

pub fn gen_henon(beta: f64, gamma: f64, n: usize, seed: u64) -> Result<SeriesPair> {
    GeneratorSpec::new(Model::Henon { beta, gamma }, n, seed).generate()
}

pub fn gen_sigmoid(beta: f64, n: usize, seed: u64) -> Result<SeriesPair> {
    GeneratorSpec::new(Model::Sigmoid { beta }, n, seed).generate()
}

/// `y_t = β1 f(x_{t-1}) + β2 f(x_{t-2}) + z_t`, with `x` history before the
/// first sample taken as zero.
fn lagged(
    beta1: f64,
    beta2: f64,
    n: usize,
    seed: u64,
    burn_in: Option<usize>,
    f: impl Fn(f64) -> f64,
) -> SeriesPair {
    let total = n + burn_in.unwrap_or(0);
    let x = Stream::derived(seed, &[STREAM_SOURCE]).gaussians(total);
    let z = Stream::derived(seed, &[STREAM_TARGET]).gaussians(total);
    let lag = |t: usize, d: usize| if t >= d { f(x[t - d]) } else { 0.0 };
    let y: Vec<f64> = (0..total).map(|t| beta1 * lag(t, 1) + beta2 * lag(t, 2) + z[t]).collect();
    let skip = total - n;
    SeriesPair { x: x[skip..].to_vec(), y: y[skip..].to_vec(), seed: None }
}

/// Noise-free coupled Hénon trajectory; `None` if it escapes.
fn henon_orbit(beta: f64, init: [f64; 4], total: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    x.extend_from_slice(&init[..2]);
    y.extend_from_slice(&init[2..]);
    for t in 2..total {
        let xn = 1.4 - x[t - 1] * x[t - 1] + 0.3 * x[t - 2];
        let yn = 1.4 - (beta * x[t - 1] + (1.0 - beta) * y[t - 1]) * y[t - 1] + 0.3 * y[t - 2];
        if !(xn.abs() <= HENON_ESCAPE && yn.abs() <= HENON_ESCAPE) {
            return None;
        }
        x.push(xn);
        y.push(yn);
    }
    Some((x, y))
}

/// The clean (noise-free) Hénon pair used by [`gen_henon`], before
/// observation noise.
pub fn henon_clean(beta: f64, n: usize, seed: u64, burn_in: usize) -> Result<SeriesPair> {
    let total = burn_in + n;
    let mut init = Stream::derived(seed, &[STREAM_INIT]);
    for _ in 0..HENON_ATTEMPTS {
        let ic = [init.uniform(), init.uniform(), init.uniform(), init.uniform()];
        if let Some((x, y)) = henon_orbit(beta, ic, total.max(2)) {
            let skip = x.len() - n;
            return Ok(SeriesPair { x: x[skip..].to_vec(), y: y[skip..].to_vec(), seed: None });
        }
    }
    Err(Error::Numerical(format!("Hénon orbit escaped in {HENON_ATTEMPTS} consecutive attempts")))
}

fn henon(beta: f64, gamma: f64, n: usize, seed: u64, burn_in: usize) -> Result<SeriesPair> {
    let mut pair = henon_clean(beta, n, seed, burn_in)?;
    let mut zx = Stream::derived(seed, &[STREAM_SOURCE]);
    let mut zy = Stream::derived(seed, &[STREAM_TARGET]);
    for (x, y) in pair.x.iter_mut().zip(pair.y.iter_mut()) {
        *x += gamma * zx.gaussian();
        *y += gamma * zy.gaussian();
    }
    Ok(pair)
}

pub fn sigmoid(theta: f64) -> f64 {
    1.0 / (1.0 + (-theta).exp())
}

/// `x_{i+1} = 0.125 x_i + 25 x_i / (4 (x_i² + 1)) + 2 cos(1.2 i) + z_x`,
/// `y_{i+1} = 0.1 y_i² - β (sigmoid(x_i)² - 0.3) + z_y`, starting from
/// `x_1, y_1 ~ U(0, 1)`; `i` is the 1-based time of the current sample.
fn sigmoid_coupled(beta: f64, n: usize, seed: u64, burn_in: usize) -> Result<SeriesPair> {
    let total = burn_in + n;
    let mut init = Stream::derived(seed, &[STREAM_INIT]);
    let mut zx = Stream::derived(seed, &[STREAM_SOURCE]);
    let mut zy = Stream::derived(seed, &[STREAM_TARGET]);
    let mut x = Vec::with_capacity(total);
    let mut y = Vec::with_capacity(total);
    x.push(init.uniform());
    y.push(init.uniform());
    for i in 1..total {
        let (xi, yi) = (x[i - 1], y[i - 1]);
        let time = i as f64;
        let xn = 0.125 * xi + 25.0 * xi / (4.0 * (xi * xi + 1.0)) + 2.0 * (1.2 * time).cos() + zx.gaussian();
        let s = sigmoid(xi);
        let yn = 0.1 * yi * yi - beta * (s * s - 0.3) + zy.gaussian();
        if !(yn.abs() < SIGMOID_BOUND) {
            return Err(Error::Numerical(format!("sigmoid-coupled target diverged at step {i}")));
        }
        x.push(xn);
        y.push(yn);
    }
    Ok(SeriesPair { x: x[burn_in..].to_vec(), y: y[burn_in..].to_vec(), seed: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>();
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>();
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn linear_uncoupled_is_independent() {
        let n = 5000;
        let p = gen_linear(0.0, 0.0, n, 1).unwrap();
        let bound = 3.0 / (n as f64).sqrt();
        for lag in 1..=2 {
            assert!(corr(&p.y[lag..], &p.x[..n - lag]).abs() < bound);
        }
    }

    #[test]
    fn linear_single_lag_correlation() {
        let p = gen_linear(1.0, 0.0, 10_000, 2).unwrap();
        let c = corr(&p.y[1..], &p.x[..p.len() - 1]);
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.02, "{c}");
    }

    #[test]
    fn linear_first_samples_use_zero_history() {
        let p = gen_linear(0.5, 0.5, 200, 3).unwrap();
        let z = Stream::derived(3, &[STREAM_TARGET]).gaussians(200);
        assert_eq!(p.y[0], z[0]);
        assert_eq!(p.y[1], 0.5 * p.x[0] + z[1]);
        assert_eq!(p.y[2], 0.5 * p.x[1] + 0.5 * p.x[0] + z[2]);
    }

    #[test]
    fn quadratic_moments() {
        let p = gen_quadratic(0.5, 0.5, 10_000, 4).unwrap();
        let n = p.len();
        assert!(corr(&p.y[1..], &p.x[..n - 1]).abs() < 0.03);
        let sq: Vec<f64> = p.x[..n - 1].iter().map(|v| v * v).collect();
        assert!(corr(&p.y[1..], &sq) > 0.3);
        let mean = p.y.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        for model in [
            Model::Linear { beta1: 0.3, beta2: 0.4 },
            Model::Quadratic { beta1: 0.3, beta2: 0.4 },
            Model::Henon { beta: 0.3, gamma: 0.01 },
            Model::Sigmoid { beta: 0.5 },
        ] {
            let mut spec = GeneratorSpec::new(model, 300, 9);
            spec.burn_in = if matches!(model, Model::Henon { .. }) { Some(2000) } else { None };
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a, b);
            spec.seed = 10;
            assert_ne!(a.x, spec.generate().unwrap().x);
        }
    }

    #[test]
    fn henon_uncoupled_stays_on_attractor() {
        let p = gen_henon(0.0, 0.0, 3000, 5).unwrap();
        assert_eq!(p.len(), 3000);
        // the map is the classical Hénon map scaled by 1.4, whose attractor
        // spans roughly [-1.285, 1.273]
        assert!(p.x.iter().chain(&p.y).all(|v| v.abs() <= 1.81));
        assert!(p.x.iter().any(|v| v.abs() > 1.7));
        assert_ne!(p.x, p.y);
    }

    #[test]
    fn henon_full_coupling_synchronizes() {
        let p = gen_henon(1.0, 0.0, 3000, 6).unwrap();
        let gap = p.x.iter().zip(&p.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn henon_noise_has_gamma_squared_variance() {
        let clean = gen_henon(0.4, 0.0, 3000, 7).unwrap();
        let noisy = gen_henon(0.4, 0.3, 3000, 7).unwrap();
        let d: Vec<f64> = noisy.y.iter().zip(&clean.y).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var - 0.09).abs() < 0.01, "{var}");
    }

    #[test]
    fn henon_burn_in_rule() {
        assert_eq!(henon_burn_in(3000), 100_000);
        assert_eq!(henon_burn_in(6000), 200_000);
        assert_eq!(henon_burn_in(100), 10_000);
    }

    #[test]
    fn sigmoid_basics() {
        assert_eq!(sigmoid(0.0), 0.5);
        let decoupled = gen_sigmoid(0.0, 500, 8).unwrap();
        let zy = Stream::derived(8, &[STREAM_TARGET]).gaussians(499);
        // y evolves on its own: y_{i+1} = 0.1 y_i² + 0.3·0 + noise
        for i in 0..499 {
            let expect = 0.1 * decoupled.y[i] * decoupled.y[i] + zy[i];
            assert!((decoupled.y[i + 1] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(gen_linear(1.5, 0.0, 200, 1).is_err());
        assert!(gen_henon(0.5, -1.0, 200, 1).is_err());
        assert!(gen_linear(0.5, 0.5, 50, 1).is_err());
    }
}
