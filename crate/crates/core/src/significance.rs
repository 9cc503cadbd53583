//! Surrogate-data significance tests for DI estimates.
//!
//! The source series is replaced by `L` surrogates that keep its values but
//! break its relation to the target, and the observed estimate is ranked
//! against the surrogate estimates. The target series is never modified.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::di::{estimate_di, DiMethod, DiOptions, Direction};
use crate::embed::SeriesPair;
use crate::rng::Stream;
use crate::{Error, Result};

const STREAM_SURROGATE: u64 = 0x5355_5252;

/// How surrogate source series are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurrogateKind {
    /// Uniform random permutation.
    #[default]
    Permutation,
    /// Rotation by a uniform offset in `1..n`, keeping the series' own
    /// temporal structure.
    CircularShift,
    /// Resampling with replacement.
    Bootstrap,
}

/// A uniformly random permutation of `x`.
pub fn shuffle_surrogate(x: &[f64], stream: &mut Stream) -> Vec<f64> {
    let mut out = x.to_vec();
    out.shuffle(stream.rng_mut());
    out
}

pub fn circular_shift_surrogate(x: &[f64], stream: &mut Stream) -> Vec<f64> {
    if x.len() < 2 {
        return x.to_vec();
    }
    let mut out = x.to_vec();
    out.rotate_left(1 + stream.below(x.len() - 1));
    out
}

pub fn bootstrap_surrogate(x: &[f64], stream: &mut Stream) -> Vec<f64> {
    (0..x.len()).map(|_| x[stream.below(x.len())]).collect()
}

impl SurrogateKind {
    pub fn draw(self, x: &[f64], stream: &mut Stream) -> Vec<f64> {
        match self {
            SurrogateKind::Permutation => shuffle_surrogate(x, stream),
            SurrogateKind::CircularShift => circular_shift_surrogate(x, stream),
            SurrogateKind::Bootstrap => bootstrap_surrogate(x, stream),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    /// Nats.
    pub observed: f64,
    pub surrogates: Vec<f64>,
    pub p_value: f64,
    pub epsilon_p: f64,
    pub significant: bool,
    /// `observed` when significant, zero otherwise.
    pub zeroed_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceOptions {
    pub surrogates: usize,
    pub epsilon_p: f64,
    pub kind: SurrogateKind,
    pub di: DiOptions,
}

impl Default for SignificanceOptions {
    fn default() -> Self {
        SignificanceOptions {
            surrogates: 19,
            epsilon_p: 0.05,
            kind: SurrogateKind::Permutation,
            di: DiOptions::default(),
        }
    }
}

/// Fewest surrogates for which a p-value can reach `epsilon_p`.
pub fn min_surrogates(epsilon_p: f64) -> usize {
    // The slack absorbs rounding in 1/ε for thresholds like 0.05.
    ((1.0 / epsilon_p) - 1e-9).ceil() as usize - 1
}

/// Add-one p-value: `(1 + #{s ≥ observed}) / (L + 1)`.
pub fn p_value(observed: f64, surrogates: &[f64]) -> f64 {
    let exceed = surrogates.iter().filter(|&&s| s >= observed).count();
    (1 + exceed) as f64 / (surrogates.len() + 1) as f64
}

/// Tests the DI estimate of `direction` against `L` surrogates of its
/// source series. Surrogate `l` draws from a stream derived from
/// `(base_seed, l)`, so the report does not depend on scheduling.
pub fn significance_test(
    pair: &SeriesPair,
    direction: Direction,
    method: DiMethod,
    m: usize,
    options: SignificanceOptions,
    base_seed: u64,
) -> Result<SignificanceReport> {
    let eps = options.epsilon_p;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("significance level {eps} outside (0, 1)")));
    }
    let needed = min_surrogates(eps);
    if options.surrogates < needed {
        return Err(Error::invalid(format!(
            "{} surrogates cannot reach p ≤ {eps}; need at least {needed}",
            options.surrogates
        )));
    }
    if pair.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: pair.len() });
    }

    let oriented = direction.orient(pair);
    let observed = estimate_di(&oriented, Direction::XToY, method, m, options.di)?.value;
    let surrogates = (0..options.surrogates as u64)
        .into_par_iter()
        .map(|l| {
            let mut stream = Stream::derived(base_seed, &[STREAM_SURROGATE, l]);
            let surrogate = SeriesPair {
                x: options.kind.draw(&oriented.x, &mut stream),
                y: oriented.y.clone(),
                seed: None,
            };
            estimate_di(&surrogate, Direction::XToY, method, m, options.di).map(|e| e.value)
        })
        .collect::<Result<Vec<f64>>>()?;

    let p = p_value(observed, &surrogates);
    let significant = p <= eps;
    Ok(SignificanceReport {
        observed,
        surrogates,
        p_value: p,
        epsilon_p: eps,
        significant,
        zeroed_value: if significant { observed } else { 0.0 },
    })
}
