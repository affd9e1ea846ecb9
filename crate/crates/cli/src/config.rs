//! Experiment configuration: a TOML file with one table per concern and
//! per-axis encoder sections, overridable from the command line.
//!
//! ```toml
//! mode = "complex"
//! solver = "closed"
//! ridge = 1e-4
//!
//! [split]
//! kind = "grid"
//! stride = 2
//!
//! [axis]          # defaults for every axis
//! kind = "gauss"
//! sigma = 0.02
//! features = 64
//!
//! [axis.1]        # overrides for axis 1 only
//! sigma = 0.03
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use coordenc::embedders::EmbedderSpec;
use coordenc::{Boundary, EmbedderKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Per-axis encodings concatenated.
    Simple,
    /// Kronecker product of the per-axis encodings.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Closed,
    Gd,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Gd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SplitSpec {
    /// Train and evaluate on every sample.
    None,
    /// Every `stride`-th sample per axis trains; the rest test.
    Grid { stride: usize },
    /// A seeded uniform fraction trains; the rest test.
    Random { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub kinds: Vec<EmbedderKind>,
    pub sigmas: Vec<f64>,
    /// Numbers of equally spaced inputs `N`.
    pub sizes: Vec<usize>,
    /// Encoding length `d`; `None` uses `d = N`.
    pub features: Option<usize>,
    pub boundary: Boundary,
    pub max_delta: f64,
    pub delta_steps: usize,
    /// Encoding length for the distance sweep.
    pub distance_features: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            kinds: vec![EmbedderKind::Gauss],
            sigmas: vec![0.003, 0.01, 0.07],
            sizes: vec![16, 64, 256, 1024],
            features: None,
            boundary: Boundary::Wrap,
            max_delta: 0.3,
            delta_steps: 60,
            distance_features: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dims: usize,
    /// Grid sizes; each run uses `K = N` on every axis.
    pub sizes: Vec<usize>,
    pub repeats: usize,
    /// The naive Kronecker path only runs while `∏K` stays at or below this.
    pub naive_limit: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: 2,
            sizes: vec![8, 16, 32, 64],
            repeats: 3,
            naive_limit: 1 << 20,
        }
    }
}

/// File layout; every field is optional so that defaults and flags can fill in.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    solver: Option<SolverKind>,
    ridge: Option<f64>,
    lr: Option<f64>,
    epochs: Option<usize>,
    depth: Option<usize>,
    width: Option<usize>,
    optimizer: Option<OptimizerKind>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    pinv: Option<bool>,
    split: Option<SplitSpec>,
    axis: Option<toml::Table>,
    analyze: Option<AnalyzeConfig>,
    bench: Option<BenchConfig>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub pinv: bool,
    pub ridge: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub solver: SolverKind,
    pub ridge: f64,
    /// `None` picks a solver-specific default.
    pub lr: Option<f64>,
    pub epochs: usize,
    pub depth: usize,
    pub width: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub out: PathBuf,
    pub pinv: bool,
    pub split: SplitSpec,
    /// Encoder keys shared by every axis.
    pub axis: toml::Table,
    /// Encoder keys for individual axes.
    pub axis_overrides: BTreeMap<usize, toml::Table>,
    pub analyze: AnalyzeConfig,
    pub bench: BenchConfig,
}

pub const DEFAULT_MLP_LR: f64 = 1e-3;

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn default_axis() -> toml::Table {
    let mut t = toml::Table::new();
    t.insert("kind".into(), "gauss".into());
    t.insert("sigma".into(), 0.02.into());
    t.insert("features".into(), 64.into());
    t.insert("boundary".into(), "clip".into());
    t
}

impl ExperimentConfig {
    pub fn from_file(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| invalid("config", format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_str_with(&text, overrides)
    }

    pub fn from_str_with(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| invalid("config", e.message()))?;

        let mut axis = default_axis();
        let mut axis_overrides = BTreeMap::new();
        for (key, value) in raw.axis.unwrap_or_default() {
            match value {
                toml::Value::Table(t) => {
                    let index: usize = key
                        .parse()
                        .map_err(|_| invalid(format!("axis.{key}"), "per-axis sections are named by axis index"))?;
                    axis_overrides.insert(index, t);
                }
                v => {
                    axis.insert(key, v);
                }
            }
        }

        let cfg = Self {
            mode: raw.mode.unwrap_or(Mode::Complex),
            solver: raw.solver.unwrap_or(SolverKind::Closed),
            ridge: overrides
                .ridge
                .or(raw.ridge)
                .unwrap_or(coordenc::solvers::linear::DEFAULT_RIDGE),
            lr: raw.lr,
            epochs: raw.epochs.unwrap_or(1000),
            depth: raw.depth.unwrap_or(1),
            width: raw.width.unwrap_or(64),
            optimizer: raw.optimizer.unwrap_or(OptimizerKind::Adam),
            seed: overrides.seed.or(raw.seed).unwrap_or(0),
            out: overrides
                .out
                .clone()
                .or(raw.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            pinv: overrides.pinv || raw.pinv.unwrap_or(false),
            split: raw.split.unwrap_or(SplitSpec::Grid { stride: 2 }),
            axis,
            axis_overrides,
            analyze: raw.analyze.unwrap_or_default(),
            bench: raw.bench.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (self.mode, self.solver) {
            (Mode::Simple, SolverKind::Closed) => {
                return Err(invalid("solver", "`closed` requires mode `complex`"));
            }
            (Mode::Complex, SolverKind::Mlp) => return Err(invalid("solver", "`mlp` requires mode `simple`")),
            _ => {}
        }
        if self.solver == SolverKind::Closed && matches!(self.split, SplitSpec::Random { .. }) {
            return Err(invalid(
                "split",
                "the closed-form solver needs a separable grid (`grid` or `none`)",
            ));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(invalid(
                "ridge",
                format!("must be finite and non-negative, got {}", self.ridge),
            ));
        }
        if let Some(lr) = self.lr {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(invalid("lr", format!("must be positive, got {lr}")));
            }
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if self.width == 0 {
            return Err(invalid("width", "must be at least 1"));
        }
        match self.split {
            SplitSpec::Grid { stride } if stride < 2 => {
                return Err(invalid("split.stride", format!("must be at least 2, got {stride}")));
            }
            SplitSpec::Random { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                return Err(invalid("split.fraction", format!("must lie in (0, 1), got {fraction}")));
            }
            _ => {}
        }
        // Surface bad encoder keys before any data is loaded.
        for axis in self.axis_overrides.keys().copied().chain([0]) {
            self.axis_spec(axis)?;
        }
        let a = &self.analyze;
        if a.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(invalid("analyze.sigmas", "must all be positive"));
        }
        if a.sizes.contains(&0) {
            return Err(invalid("analyze.sizes", "must all be at least 1"));
        }
        if a.features == Some(0) || a.distance_features == 0 {
            return Err(invalid("analyze.features", "must be at least 1"));
        }
        if !(a.max_delta >= 0.0 && a.max_delta.is_finite()) || a.delta_steps == 0 {
            return Err(invalid(
                "analyze.max_delta",
                "needs a non-negative range and at least one step",
            ));
        }
        let b = &self.bench;
        if b.dims == 0 || b.repeats == 0 || b.sizes.contains(&0) {
            return Err(invalid("bench", "dims, repeats and sizes must be at least 1"));
        }
        Ok(())
    }

    /// Encoder spec for one axis: built-in defaults, then `[axis]`, then `[axis.N]`.
    pub fn axis_spec(&self, axis: usize) -> Result<EmbedderSpec, CliError> {
        let mut table = self.axis.clone();
        if let Some(over) = self.axis_overrides.get(&axis) {
            table.extend(over.clone());
        }
        if !table.contains_key("seed") {
            let seed = i64::try_from(self.seed.wrapping_add(axis as u64))
                .map_err(|_| invalid("seed", "must stay below 2^63 once the axis index is added"))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        let field = if self.axis_overrides.contains_key(&axis) {
            format!("axis.{axis}")
        } else {
            "axis".to_string()
        };
        toml::Value::Table(table)
            .try_into::<EmbedderSpec>()
            .map_err(|e| invalid(field.clone(), e.message()))
            .and_then(|spec| {
                spec.build().map_err(|e| invalid(field.clone(), e.to_string()))?;
                Ok(spec)
            })
    }

    pub fn axis_specs(&self, ndim: usize) -> Result<Vec<EmbedderSpec>, CliError> {
        if let Some(&extra) = self.axis_overrides.keys().find(|&&a| a >= ndim) {
            return Err(invalid(
                format!("axis.{extra}"),
                format!("the input has only {ndim} axes"),
            ));
        }
        (0..ndim).map(|a| self.axis_spec(a)).collect()
    }
}
