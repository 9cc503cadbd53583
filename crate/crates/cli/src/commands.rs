//! Subcommand implementations, independent of argument parsing.

use std::io::Write;

use diknn_core::generators::{GeneratorSpec, Model};
use diknn_core::order::{estimate_order, OrderMethod, OrderOptions, OrderSelection};
use diknn_core::significance::{significance_test, SignificanceOptions};
use diknn_core::{estimate_di, DiMethod, DiOptions, Direction, SeriesPair, NATS_TO_BITS};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Bits,
    Nats,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Bits => nats * NATS_TO_BITS,
            Units::Nats => nats,
        }
    }
}

/// Markov order for `estimate`: given, or selected per direction.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderChoice {
    Fixed(usize),
    Auto { method: OrderMethod, candidates: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRequest {
    pub methods: Vec<DiMethod>,
    pub directions: Vec<Direction>,
    pub order: OrderChoice,
    pub k: usize,
    pub units: Units,
    /// Surrogate count, epsilon and seed when a significance test is wanted.
    pub significance: Option<(usize, f64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateLine {
    pub direction: Direction,
    pub method: DiMethod,
    pub m: usize,
    pub k: usize,
    pub n_effective: usize,
    pub di: f64,
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_losses: Option<OrderSelection>,
}

pub fn estimate(pair: &SeriesPair, request: &EstimateRequest) -> Result<Vec<EstimateLine>> {
    if request.methods.is_empty() || request.directions.is_empty() {
        return Err(CliError::usage("at least one method and one direction are required"));
    }
    let options = DiOptions::with_k(request.k);
    let mut lines = Vec::new();
    for &direction in &request.directions {
        let (m, selection) = match &request.order {
            OrderChoice::Fixed(m) => (*m, None),
            OrderChoice::Auto { method, candidates } => {
                let order_options = OrderOptions { k: request.k, ..OrderOptions::default() };
                let s = estimate_order(&direction.orient(pair), candidates, *method, order_options)?;
                (s.m_hat, Some(s))
            }
        };
        for &method in &request.methods {
            let estimate = estimate_di(pair, direction, method, m, options)?;
            let (p_value, significant) = match request.significance {
                Some((surrogates, epsilon_p, seed)) => {
                    let sig = SignificanceOptions { surrogates, epsilon_p, di: options, ..Default::default() };
                    let report = significance_test(pair, direction, method, m, sig, seed)?;
                    (Some(report.p_value), Some(report.significant))
                }
                None => (None, None),
            };
            lines.push(EstimateLine {
                direction,
                method,
                m,
                k: request.k,
                n_effective: estimate.n_effective,
                di: request.units.convert(estimate.value),
                units: request.units,
                p_value,
                significant,
                order_losses: selection.clone(),
            });
        }
    }
    Ok(lines)
}

pub fn select_order(
    pair: &SeriesPair,
    direction: Direction,
    candidates: &[usize],
    method: OrderMethod,
    options: OrderOptions,
) -> Result<OrderSelection> {
    if candidates.is_empty() {
        return Err(CliError::usage("candidate list is empty"));
    }
    Ok(estimate_order(&direction.orient(pair), candidates, method, options)?)
}

/// Generator parameters as given on the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModelParams {
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

/// Builds a model of `kind`; absent parameters default to zero and
/// parameters the model does not take are rejected.
pub fn build_model(kind: &str, p: ModelParams) -> Result<Model> {
    let reject = |flags: &[(&str, Option<f64>)]| -> Result<()> {
        match flags.iter().find(|(_, v)| v.is_some()) {
            Some((flag, _)) => Err(CliError::usage(format!("--{flag} does not apply to the {kind} model"))),
            None => Ok(()),
        }
    };
    let or0 = |v: Option<f64>| v.unwrap_or(0.0);
    let model = match kind {
        "linear" | "quadratic" => {
            reject(&[("beta", p.beta), ("gamma", p.gamma)])?;
            let (beta1, beta2) = (or0(p.beta1), or0(p.beta2));
            if kind == "linear" {
                Model::Linear { beta1, beta2 }
            } else {
                Model::Quadratic { beta1, beta2 }
            }
        }
        "henon" => {
            reject(&[("beta1", p.beta1), ("beta2", p.beta2)])?;
            Model::Henon { beta: or0(p.beta), gamma: or0(p.gamma) }
        }
        "sigmoid" => {
            reject(&[("beta1", p.beta1), ("beta2", p.beta2), ("gamma", p.gamma)])?;
            Model::Sigmoid { beta: or0(p.beta) }
        }
        other => return Err(CliError::usage(format!("unknown model kind `{other}`"))),
    };
    model.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(model)
}

/// Writes `x,y` rows with shortest round-trip formatting.
pub fn write_pair(pair: &SeriesPair, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "x,y")?;
    for (x, y) in pair.x.iter().zip(&pair.y) {
        writeln!(out, "{x},{y}")?;
    }
    out.flush()
}

pub fn generate(spec: &GeneratorSpec) -> Result<SeriesPair> {
    spec.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(spec.generate()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::parse_pair;
    use diknn_core::generators::gen_linear;

    #[test]
    fn units_differ_by_log2e() {
        let pair = gen_linear(0.7, 0.7, 600, 2).unwrap();
        let request = |units| EstimateRequest {
            methods: vec![DiMethod::Ksg],
            directions: vec![Direction::XToY],
            order: OrderChoice::Fixed(2),
            k: 8,
            units,
            significance: None,
        };
        let bits = estimate(&pair, &request(Units::Bits)).unwrap()[0].di;
        let nats = estimate(&pair, &request(Units::Nats)).unwrap()[0].di;
        assert!((bits - nats * std::f64::consts::LOG2_E).abs() < 1e-12);
    }

    #[test]
    fn model_flags() {
        let p = ModelParams { beta1: Some(0.5), ..Default::default() };
        assert_eq!(build_model("linear", p).unwrap(), Model::Linear { beta1: 0.5, beta2: 0.0 });
        assert!(build_model("henon", p).is_err());
        assert!(build_model("linear", ModelParams { beta1: Some(2.0), ..Default::default() }).is_err());
        assert!(build_model("cubic", ModelParams::default()).is_err());
        let h = build_model("henon", ModelParams { gamma: Some(0.3), ..Default::default() }).unwrap();
        assert_eq!(h, Model::Henon { beta: 0.0, gamma: 0.3 });
    }

    #[test]
    fn written_pairs_read_back_exactly() {
        let pair = gen_linear(1.0, 1.0, 200, 7).unwrap();
        let mut buf = Vec::new();
        write_pair(&pair, &mut buf).unwrap();
        let back = parse_pair(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.x, pair.x);
        assert_eq!(back.y, pair.y);
    }

    #[test]
    fn empty_candidates_is_usage_error() {
        let pair = gen_linear(1.0, 1.0, 200, 7).unwrap();
        let err = select_order(&pair, Direction::XToY, &[], OrderMethod::Joint, OrderOptions::default());
        assert_eq!(err.unwrap_err().exit_code(), 2);
    }
}
