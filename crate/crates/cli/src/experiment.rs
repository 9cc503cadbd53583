//! Sweep experiments: a generator template, a parameter grid, repeated
//! seeded trials, and CSV/SVG reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use diknn_core::generators::{GeneratorSpec, Model};
use diknn_core::order::{estimate_order, OrderMethod, OrderOptions, DEFAULT_CANDIDATES};
use diknn_core::rng::derive_seed;
use diknn_core::significance::{min_surrogates, significance_test, SignificanceOptions, SurrogateKind};
use diknn_core::{estimate_di, DiMethod, DiOptions, Direction, DEFAULT_K, MAX_ORDER, NATS_TO_BITS};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::plot;
use crate::summary::{summarize, write_summary, SummaryRow};

pub const SPEC_VERSION: u32 = 1;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "plot.svg";

pub const RESULT_COLUMNS: [&str; 10] = [
    "sweep_value",
    "trial",
    "method",
    "direction",
    "di_nats",
    "di_bits",
    "m_used",
    "p_value",
    "significant",
    "runtime_ms",
];

const LABEL_TRIAL: u64 = 0x7472_6961;
const LABEL_SURROGATES: u64 = 0x7375_7272;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub spec_version: u32,
    pub generator: GeneratorTemplate,
    pub sweep: Sweep,
    pub trials: usize,
    /// Samples per trial.
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<DiMethod>,
    #[serde(default = "default_directions")]
    pub directions: Vec<Direction>,
    pub order: OrderPolicy,
    #[serde(default)]
    pub significance: Option<SignificanceSpec>,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub plot: bool,
    /// Fill the `runtime_ms` column. Wall-clock times make the results file
    /// differ between runs.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_methods() -> Vec<DiMethod> {
    vec![DiMethod::Ksg, DiMethod::Gov]
}

fn default_directions() -> Vec<Direction> {
    Direction::BOTH.to_vec()
}

fn default_candidates() -> Vec<usize> {
    DEFAULT_CANDIDATES.to_vec()
}

/// Model parameters for every grid point; the swept ones are overwritten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTemplate {
    #[serde(flatten)]
    pub model: Model,
    #[serde(default)]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub link: Option<Link>,
}

/// A second parameter tied to the swept one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub parameter: String,
    pub rule: LinkRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkRule {
    /// Same value as the swept parameter.
    Equal,
    /// One minus the swept value.
    Complement,
}

impl LinkRule {
    fn apply(self, v: f64) -> f64 {
        match self {
            LinkRule::Equal => v,
            LinkRule::Complement => 1.0 - v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OrderPolicy {
    Fixed {
        m: usize,
    },
    AutoJoint {
        #[serde(default = "default_candidates")]
        candidates: Vec<usize>,
    },
    AutoRagwitz {
        #[serde(default = "default_candidates")]
        candidates: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignificanceSpec {
    #[serde(default = "default_surrogates")]
    pub surrogates: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon_p: f64,
    #[serde(default)]
    pub surrogate: SurrogateKind,
}

fn default_surrogates() -> usize {
    19
}

fn default_epsilon() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Spec(msg));
        if self.spec_version != SPEC_VERSION {
            return bad(format!("unsupported spec_version {}, expected {SPEC_VERSION}", self.spec_version));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sweep.values.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.methods.is_empty() || self.directions.is_empty() {
            return bad("methods and directions must be non-empty".into());
        }
        match &self.order {
            OrderPolicy::Fixed { m } if !(1..=MAX_ORDER).contains(m) => {
                return bad(format!("fixed order {m} outside [1, {MAX_ORDER}]"));
            }
            OrderPolicy::AutoJoint { candidates } | OrderPolicy::AutoRagwitz { candidates } => {
                if candidates.is_empty() || candidates.iter().any(|m| !(1..=MAX_ORDER).contains(m)) {
                    return bad(format!("order candidates must be non-empty and within [1, {MAX_ORDER}]"));
                }
            }
            _ => {}
        }
        if let Some(sig) = &self.significance {
            if !(sig.epsilon_p > 0.0 && sig.epsilon_p < 1.0) {
                return bad(format!("epsilon_p {} outside (0, 1)", sig.epsilon_p));
            }
            let needed = min_surrogates(sig.epsilon_p);
            if sig.surrogates < needed {
                return bad(format!("{} surrogates too few for epsilon_p {}; need {needed}", sig.surrogates, sig.epsilon_p));
            }
        }
        for &v in &self.sweep.values {
            let model = self.model_at(v)?;
            GeneratorSpec { model, n: self.n, seed: 0, burn_in: self.generator.burn_in }
                .validate()
                .map_err(|e| CliError::Spec(e.to_string()))?;
        }
        Ok(())
    }

    /// The generator model with the swept (and linked) parameters set to `value`.
    pub fn model_at(&self, value: f64) -> Result<Model> {
        let mut fields = match serde_json::to_value(self.generator.model) {
            Ok(serde_json::Value::Object(fields)) => fields,
            _ => unreachable!("models serialize to objects"),
        };
        let mut set = |name: &str, v: f64| {
            if name == "kind" || !fields.contains_key(name) {
                return Err(CliError::Spec(format!(
                    "{} model has no parameter `{name}`",
                    self.generator.model.name()
                )));
            }
            fields.insert(name.to_string(), serde_json::json!(v));
            Ok(())
        };
        set(&self.sweep.parameter, value)?;
        if let Some(link) = &self.sweep.link {
            set(&link.parameter, link.rule.apply(value))?;
        }
        serde_json::from_value(serde_json::Value::Object(fields)).map_err(|e| CliError::Spec(e.to_string()))
    }

    /// Seed of trial `t`, shared by every grid point.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.base_seed, &[LABEL_TRIAL, trial as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub trial: usize,
    pub method: DiMethod,
    pub direction: Direction,
    pub di_nats: f64,
    pub di_bits: f64,
    pub m_used: usize,
    pub p_value: Option<f64>,
    pub significant: Option<bool>,
    pub runtime_ms: Option<f64>,
}

impl ResultRow {
    fn record(&self) -> [String; 10] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.sweep_value.to_string(),
            self.trial.to_string(),
            self.method.to_string(),
            self.direction.to_string(),
            self.di_nats.to_string(),
            self.di_bits.to_string(),
            self.m_used.to_string(),
            opt(self.p_value.map(|p| p.to_string())),
            opt(self.significant.map(|s| s.to_string())),
            opt(self.runtime_ms.map(|t| format!("{t:.3}"))),
        ]
    }
}

/// Rows of one trial: every direction and method on one generated pair.
pub fn run_trial(spec: &ExperimentSpec, grid_index: usize, trial: usize) -> Result<Vec<ResultRow>> {
    let value = spec.sweep.values[grid_index];
    let generator = GeneratorSpec {
        model: spec.model_at(value)?,
        n: spec.n,
        seed: spec.trial_seed(trial),
        burn_in: spec.generator.burn_in,
    };
    let pair = generator.generate()?;
    let di_options = DiOptions::with_k(spec.k);

    let mut rows = Vec::with_capacity(spec.directions.len() * spec.methods.len());
    for &direction in &spec.directions {
        let order_options = OrderOptions { k: spec.k, ..OrderOptions::default() };
        let m = match &spec.order {
            OrderPolicy::Fixed { m } => *m,
            OrderPolicy::AutoJoint { candidates } => {
                estimate_order(&direction.orient(&pair), candidates, OrderMethod::Joint, order_options)?.m_hat
            }
            OrderPolicy::AutoRagwitz { candidates } => {
                estimate_order(&direction.orient(&pair), candidates, OrderMethod::Ragwitz, order_options)?.m_hat
            }
        };
        for &method in &spec.methods {
            let started = Instant::now();
            let (di_nats, p_value, significant) = match &spec.significance {
                Some(sig) => {
                    let options = SignificanceOptions {
                        surrogates: sig.surrogates,
                        epsilon_p: sig.epsilon_p,
                        kind: sig.surrogate,
                        di: di_options,
                    };
                    let seed = derive_seed(
                        spec.base_seed,
                        &[LABEL_SURROGATES, grid_index as u64, trial as u64, method as u64, direction as u64],
                    );
                    let report = significance_test(&pair, direction, method, m, options, seed)?;
                    (report.observed, Some(report.p_value), Some(report.significant))
                }
                None => (estimate_di(&pair, direction, method, m, di_options)?.value, None, None),
            };
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            rows.push(ResultRow {
                sweep_value: value,
                trial,
                method,
                direction,
                di_nats,
                di_bits: di_nats * NATS_TO_BITS,
                m_used: m,
                p_value,
                significant,
                runtime_ms: spec.record_runtime.then_some(elapsed),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub results_path: PathBuf,
    pub summary_path: PathBuf,
    pub plot_path: Option<PathBuf>,
}

/// Runs every (grid point, trial) task and writes the reports into the
/// spec's output directory. Results are written grid point by grid point
/// in (grid, trial) order and flushed as each point completes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let dir = &spec.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let results_path = dir.join(RESULTS_FILE);
    let file = File::create(&results_path).map_err(|e| CliError::io(&results_path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let csv_error = |e: csv::Error| CliError::io(&results_path, e.into());
    writer.write_record(RESULT_COLUMNS).map_err(csv_error)?;

    let mut rows = Vec::new();
    for grid_index in 0..spec.sweep.values.len() {
        let per_trial = (0..spec.trials)
            .into_par_iter()
            .map(|trial| run_trial(spec, grid_index, trial))
            .collect::<Result<Vec<_>>>()?;
        for row in per_trial.into_iter().flatten() {
            writer.write_record(row.record()).map_err(csv_error)?;
            rows.push(row);
        }
        writer.flush().map_err(|e| CliError::io(&results_path, e))?;
    }
    drop(writer);

    let summary = summarize(&rows);
    let summary_path = dir.join(SUMMARY_FILE);
    write_summary(&summary_path, &summary)?;

    let plot_path = if spec.plot {
        let path = dir.join(PLOT_FILE);
        let svg = plot::render(&summary, &spec.sweep.parameter, spec.generator.model.name());
        let mut file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        file.write_all(svg.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        Some(path)
    } else {
        None
    };

    Ok(ExperimentOutput { rows, summary, results_path, summary_path, plot_path })
}
