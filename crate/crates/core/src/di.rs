//! Directed information rate under an order-m Markov model.
//!
//! With `X⁻ = X_{t-m..t-1}`, `Y⁻ = Y_{t-m..t-1}` the rate reduces to
//! `I(X⁻; Y | Y⁻) = h(Y⁻, Y) - h(Y⁻) - h(Y⁻, X⁻, Y) + h(Y⁻, X⁻)`. Both
//! estimators take the k-NN radius in the full `(X⁻, Y⁻, Y)` space and
//! estimate the three marginal terms from the number of rows inside that
//! radius in each projection.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::embed::{embed, SeriesPair, Subspace};
use crate::knn::{neighbor_stats, Norm, Strictness};
use crate::special::{digamma_int, ln_unit_ball_volume, DigammaTable};
use crate::{Error, Result, DEFAULT_K, MAX_ORDER, NATS_TO_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiMethod {
    #[serde(rename = "ksg", alias = "KSG")]
    Ksg,
    #[serde(rename = "gov", alias = "GOV")]
    Gov,
}

impl DiMethod {
    pub fn norm(self) -> Norm {
        match self {
            DiMethod::Ksg => Norm::Max,
            DiMethod::Gov => Norm::Euclidean,
        }
    }

    /// KSG counts strictly inside the radius: under the max norm the k-th
    /// neighbor sits exactly on the boundary of one projection, and counting
    /// it there as well as in the `+1` of `ψ(n + 1)` biases every marginal
    /// term. Euclidean boundaries are hit with probability zero, so GOV keeps
    /// the inclusive rule.
    pub fn default_strictness(self) -> Strictness {
        match self {
            DiMethod::Ksg => Strictness::Exclusive,
            DiMethod::Gov => Strictness::Inclusive,
        }
    }
}

impl fmt::Display for DiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiMethod::Ksg => "KSG",
            DiMethod::Gov => "GOV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "X->Y")]
    XToY,
    #[serde(rename = "Y->X")]
    YToX,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::XToY, Direction::YToX];

    /// The pair oriented so that the influence runs from `x` to `y`.
    pub fn orient(self, pair: &SeriesPair) -> std::borrow::Cow<'_, SeriesPair> {
        match self {
            Direction::XToY => std::borrow::Cow::Borrowed(pair),
            Direction::YToX => std::borrow::Cow::Owned(pair.swapped()),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::XToY => "X->Y",
            Direction::YToX => "Y->X",
        })
    }
}

/// The four entropy estimates (nats) whose signed sum is the DI rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiTerms {
    /// `ĥ(Y⁻)`
    pub target_past: f64,
    /// `ĥ(Y⁻, Y)`
    pub target_past_present: f64,
    /// `ĥ(Y⁻, X⁻)`
    pub both_pasts: f64,
    /// `ĥ(Y⁻, X⁻, Y)`
    pub joint: f64,
}

impl DiTerms {
    /// `h(Y⁻, Y) - h(Y⁻) - h(Y⁻, X⁻, Y) + h(Y⁻, X⁻)`
    pub fn combine(&self) -> f64 {
        self.target_past_present - self.target_past - self.joint + self.both_pasts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiEstimate {
    /// Nats.
    pub value: f64,
    pub direction: Direction,
    pub method: DiMethod,
    pub m: usize,
    pub k: usize,
    pub n_effective: usize,
    pub terms: DiTerms,
    /// The same estimate evaluated in closed form, where the `log N`,
    /// `log c` and `log ρ` contributions cancel analytically.
    pub closed_form: f64,
}

impl DiEstimate {
    pub fn bits(&self) -> f64 {
        self.value * NATS_TO_BITS
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiOptions {
    pub k: usize,
    /// Boundary rule for the marginal range counts. `None` uses the
    /// method default, see [`DiMethod::default_strictness`].
    pub strictness: Option<Strictness>,
    /// Rescale each series to zero mean and unit variance before embedding.
    pub standardize: bool,
}

impl Default for DiOptions {
    fn default() -> Self {
        DiOptions { k: DEFAULT_K, strictness: None, standardize: true }
    }
}

impl DiOptions {
    pub fn with_k(k: usize) -> Self {
        DiOptions { k, ..DiOptions::default() }
    }
}

/// KSG directed information from `x` to `y` (max norm).
pub fn di_ksg(pair: &SeriesPair, m: usize, k: usize) -> Result<DiEstimate> {
    estimate_di(pair, Direction::XToY, DiMethod::Ksg, m, DiOptions::with_k(k))
}

/// GOV directed information from `x` to `y` (Euclidean norm).
pub fn di_gov(pair: &SeriesPair, m: usize, k: usize) -> Result<DiEstimate> {
    estimate_di(pair, Direction::XToY, DiMethod::Gov, m, DiOptions::with_k(k))
}

/// Closed-form constant of the GOV estimator obtained by combining its four
/// entropy terms: `log(c_{m+1} c_{2m} / (c_{2m+1} c_m))`, Euclidean balls.
pub fn gov_constant(m: usize) -> f64 {
    let c = |d| ln_unit_ball_volume(d, Norm::Euclidean);
    c(m + 1) + c(2 * m) - c(2 * m + 1) - c(m)
}

/// The GOV constant with `c_1` in place of `c_m`. It coincides with
/// [`gov_constant`] only at `m = 1`.
pub fn gov_constant_with_unit_interval(m: usize) -> f64 {
    let c = |d| ln_unit_ball_volume(d, Norm::Euclidean);
    c(m + 1) + c(2 * m) - c(2 * m + 1) - c(1)
}

/// Estimate the DI rate in `direction` with order `m`.
pub fn estimate_di(
    pair: &SeriesPair,
    direction: Direction,
    method: DiMethod,
    m: usize,
    options: DiOptions,
) -> Result<DiEstimate> {
    let k = options.k;
    if !(1..=MAX_ORDER).contains(&m) {
        return Err(Error::invalid(format!("Markov order {m} outside [1, {MAX_ORDER}]")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if pair.len() <= m + k + 1 {
        return Err(Error::InsufficientData { needed: m + k + 1, got: pair.len() });
    }
    let oriented = direction.orient(pair);
    let ds = if options.standardize {
        embed(&standardized(&oriented), m, k)?
    } else {
        embed(&oriented, m, k)?
    };
    let n = ds.n_effective();
    let norm = method.norm();

    let subspaces = [
        Subspace::TargetPast.coords(m),
        Subspace::TargetPastAndPresent.coords(m),
        Subspace::BothPasts.coords(m),
    ];
    let strictness = options.strictness.unwrap_or(method.default_strictness());
    let stats = neighbor_stats(&ds.joint, k, norm, &subspaces, strictness)?;
    let mean_log_rho = stats.rho.iter().map(|r| r.ln()).sum::<f64>() / n as f64;

    let psi = DigammaTable::new(n + 1);
    let count_term = |n_i: usize| match method {
        DiMethod::Ksg => psi.get(n_i + 1),
        DiMethod::Gov => (n_i.max(1) as f64).ln(),
    };
    let mean_count = |s: usize| stats.counts[s].iter().map(|&c| count_term(c)).sum::<f64>() / n as f64;
    let (past, past_present, pasts) = (mean_count(0), mean_count(1), mean_count(2));

    let ln_n = (n as f64).ln();
    let psi_k = digamma_int(k);
    let term = |s: Subspace| ln_n + ln_unit_ball_volume(s.dim(m), norm) + s.dim(m) as f64 * mean_log_rho;
    let terms = DiTerms {
        target_past: term(Subspace::TargetPast) - past,
        target_past_present: term(Subspace::TargetPastAndPresent) - past_present,
        both_pasts: term(Subspace::BothPasts) - pasts,
        joint: term(Subspace::Joint) - psi_k,
    };

    let closed_form = match method {
        DiMethod::Ksg => psi_k + past - past_present - pasts,
        DiMethod::Gov => psi_k + gov_constant(m) + past - past_present - pasts,
    };
    let value = match method {
        DiMethod::Ksg => closed_form,
        DiMethod::Gov => terms.combine(),
    };
    if !value.is_finite() {
        return Err(Error::Numerical(format!("non-finite {method} estimate")));
    }
    Ok(DiEstimate { value, direction, method, m, k, n_effective: n, terms, closed_form })
}

/// Zero-mean, unit-variance copies of both series (constant series are
/// only centered).
pub fn standardized(pair: &SeriesPair) -> SeriesPair {
    fn scale(v: &[f64]) -> Vec<f64> {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
        let sd = if sd > 0.0 { sd } else { 1.0 };
        v.iter().map(|x| (x - mean) / sd).collect()
    }
    SeriesPair { x: scale(&pair.x), y: scale(&pair.y), seed: pair.seed }
}

/// Theoretical DI rate (bits) of `y_t = β1 x_{t-1} + β2 x_{t-2} + z_t` with
/// i.i.d. standard Gaussian `x`, `z`.
pub fn di_rate_linear_theory(beta1: f64, beta2: f64) -> f64 {
    let (b1, b2) = (beta1.abs(), beta2.abs());
    match (b1 == 0.0, b2 == 0.0) {
        (true, true) => 0.0,
        (false, true) => 0.5 * (1.0 + b1 * b1).log2(),
        (true, false) => 0.5 * (1.0 + b2 * b2).log2(),
        (false, false) => {
            let prod = b1 * b2;
            0.5 * NATS_TO_BITS * (prod.ln() + ((b1 * b1 + b2 * b2 + 1.0) / (2.0 * prod)).acosh())
        }
    }
}
