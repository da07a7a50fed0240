//! Experiment configuration and its validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use blurlab::fock::{fock_dim, FockOperator};
use blurlab::free_sets::FreeFamily;
use blurlab::linalg::DenseOperator;

use crate::catalog;

/// Tunable parameters; every experiment reads the subset it needs and fills
/// the rest with its defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Upper end of the averaging interval for `delta`.
    #[serde(default, rename = "Delta", skip_serializing_if = "Option::is_none")]
    pub big_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Number of seeded random instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, rename = "M_grid", skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<f64>>,
    /// Quadrature nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

/// Files referenced by a configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    /// A `FockOperator` (vacuum-support) or `DenseOperator` (stein-estimate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<PathBuf>,
    /// A `FreeFamily`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            seed: 0,
            tol: None,
            params: Params::default(),
            inputs: Inputs::default(),
            out: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, Vec<Diagnostic>> {
        serde_json::from_str(s).map_err(|e| vec![Diagnostic::new("", format!("malformed config: {e}"))])
    }

    pub fn load(path: &Path) -> Result<Self, Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| vec![Diagnostic::new("", format!("cannot read {}: {e}", path.display()))])?;
        Self::from_json(&text)
    }
}

/// One validation problem, located by a dotted field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Loaded input files.
#[derive(Clone, Debug, Default)]
pub struct LoadedInputs {
    pub fock_state: Option<FockOperator>,
    pub dense_state: Option<DenseOperator>,
    pub family: Option<FreeFamily>,
}

fn in_half_open(v: f64, lo: f64, hi: f64) -> bool {
    v > lo && v <= hi
}

/// Checks ranges and input files; empty means valid.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let Some(entry) = catalog::find(&cfg.experiment) else {
        out.push(Diagnostic::new(
            "experiment",
            format!("unknown experiment {:?}; see `list`", cfg.experiment),
        ));
        return out;
    };
    let p = &cfg.params;
    let mut push = |path: &str, msg: String| out.push(Diagnostic::new(format!("params.{path}"), msg));
    if let Some(delta) = p.delta {
        if !in_half_open(delta, 0.0, 0.5) {
            push("delta", format!("delta must be in (0, 1/2], got {delta}"));
        }
    }
    if let Some(v) = p.big_delta {
        if !in_half_open(v, 0.0, 0.5) {
            push("Delta", format!("Delta must be in (0, 1/2], got {v}"));
        }
    }
    if let Some(eps) = p.eps {
        if !(eps > 0.0 && eps < 1.0) {
            push("eps", format!("eps must be in (0, 1), got {eps}"));
        }
    }
    if let Some(eta) = p.eta {
        if !(eta > 0.0 && eta < 1.0) {
            push("eta", format!("eta must be in (0, 1), got {eta}"));
        }
    }
    if let (Some(eps), Some(eta)) = (p.eps, p.eta) {
        if eps + eta >= 1.0 {
            push("eta", format!("eps + eta must be below 1, got {}", eps + eta));
        }
    }
    if let Some(d) = p.d {
        if !(2..=4).contains(&d) {
            push("d", format!("local dimension must be in 2..=4, got {d}"));
        }
    }
    if let Some(n) = p.n {
        if n == 0 {
            push("n", "n must be positive".into());
        }
    }
    if let Some(c) = p.cutoff {
        let modes = p.d.unwrap_or(2).saturating_sub(1).max(1);
        if c == 0 {
            push("cutoff", "cutoff must be positive".into());
        } else if let Err(e) = fock_dim(modes, c) {
            push("cutoff", e.to_string());
        }
    }
    if let Some(grid) = &p.n_grid {
        if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
            push("n_grid", "n grid must be nonempty, positive and strictly ascending".into());
        }
    }
    if let Some(grid) = &p.m_grid {
        if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] > 0.0) {
            push("M_grid", "M grid must be nonempty, positive and strictly ascending".into());
        }
    }
    if p.nodes == Some(0) {
        push("nodes", "quadrature needs at least one node".into());
    }
    if p.instances == Some(0) {
        push("instances", "need at least one instance".into());
    }
    if let (Some(h), Some(k)) = (&p.h, &p.k) {
        if h.len() != k.len() {
            push("k", format!("h has {} modes, k has {}", h.len(), k.len()));
        }
    }
    if let Some(a) = p.alpha {
        if !(a.is_finite() && a >= 0.0) {
            push("alpha", format!("alpha must be a nonnegative number, got {a}"));
        }
    }
    if let Some(t) = cfg.tol {
        if !(t > 0.0 && t < 1.0) {
            out.push(Diagnostic::new("tol", format!("tolerance must be in (0, 1), got {t}")));
        }
    }
    if let Err(e) = load_inputs(cfg, entry.id) {
        out.extend(e);
    }
    out
}

/// Parses the referenced files according to the experiment's expectations.
pub fn load_inputs(cfg: &ExperimentConfig, experiment: &str) -> Result<LoadedInputs, Vec<Diagnostic>> {
    let mut loaded = LoadedInputs::default();
    let mut errs = Vec::new();
    let read = |path: &Path| std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()));
    if let Some(path) = &cfg.inputs.state {
        match read(path) {
            Err(e) => errs.push(Diagnostic::new("inputs.state", e)),
            Ok(text) if experiment == "vacuum-support" => match FockOperator::from_json(&text) {
                Ok(x) => match x.operator().validate_state() {
                    Ok(()) => loaded.fock_state = Some(x),
                    Err(e) => errs.push(Diagnostic::new("inputs.state", e.to_string())),
                },
                Err(e) => errs.push(Diagnostic::new("inputs.state", e.to_string())),
            },
            Ok(text) => match DenseOperator::from_json(&text) {
                Ok(x) => match x.validate_state() {
                    Ok(()) => loaded.dense_state = Some(x),
                    Err(e) => errs.push(Diagnostic::new("inputs.state", e.to_string())),
                },
                Err(e) => errs.push(Diagnostic::new("inputs.state", e.to_string())),
            },
        }
    }
    if let Some(path) = &cfg.inputs.family {
        match read(path).map(|t| FreeFamily::from_json(&t).map_err(|e| e.to_string())) {
            Ok(Ok(f)) => loaded.family = Some(f),
            Ok(Err(e)) | Err(e) => errs.push(Diagnostic::new("inputs.family", e)),
        }
    }
    if errs.is_empty() {
        Ok(loaded)
    } else {
        Err(errs)
    }
}

/// Parameters rendered as `--key value` flags for reproduction commands.
pub fn params_as_flags(p: &Params) -> Vec<String> {
    let value = serde_json::to_value(p).expect("params serialise");
    let map: BTreeMap<String, serde_json::Value> = serde_json::from_value(value).expect("object");
    let mut out = Vec::new();
    for (k, v) in map {
        let flag = match k.as_str() {
            "Delta" => "--Delta".to_string(),
            "M_grid" => "--M".to_string(),
            "n_grid" => "--n".to_string(),
            other => format!("--{}", other.replace('_', "-")),
        };
        let rendered = match v {
            serde_json::Value::Array(items) => items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            other => other.to_string(),
        };
        out.push(flag);
        out.push(rendered);
    }
    out
}
