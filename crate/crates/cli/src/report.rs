//! What a `fit` run writes to `report.json`.

use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Serialize)]
pub struct PsnrReport {
    pub train: f64,
    /// Absent without a held-out split.
    pub test: Option<f64>,
    pub full: f64,
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseTimings {
    pub encode: f64,
    pub solve: f64,
    pub evaluate: f64,
}

/// Floats held by the encoding and the model while fitting.
#[derive(Debug, Clone, Serialize)]
pub struct MemoryEstimate {
    pub floats: usize,
    pub bytes: usize,
    pub formula: &'static str,
}

impl MemoryEstimate {
    fn new(floats: usize, formula: &'static str) -> Self {
        Self {
            floats,
            bytes: floats * std::mem::size_of::<f64>(),
            formula,
        }
    }

    /// Separable complex encoding: the weight tensors plus one `N_i × K_i` block per axis.
    pub fn separable(channels: usize, features: &[usize], grid: &[usize]) -> Self {
        let weights: usize = features.iter().product::<usize>() * channels;
        let blocks: usize = features.iter().zip(grid).map(|(k, n)| k * n).sum();
        Self::new(weights + blocks, "c·∏K_i + Σ N_i·K_i")
    }

    /// Scattered queries add a blending matrix with `2^D` entries per query.
    pub fn blended(channels: usize, features: &[usize], grid: &[usize], queries: usize) -> Self {
        let base = Self::separable(channels, features, grid).floats;
        Self::new(base + (1 << features.len()) * queries, "c·∏K_i + Σ N_i·K_i + 2^D·P")
    }

    /// Simple encoding: the `P × ΣK_i` feature matrix plus the model parameters.
    pub fn simple(points: usize, features: &[usize], params: usize) -> Self {
        Self::new(points * features.iter().sum::<usize>() + params, "P·ΣK_i + params")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub input: String,
    pub shape: Vec<usize>,
    pub channels: usize,
    pub train_points: usize,
    pub test_points: usize,
    pub psnr: PsnrReport,
    pub param_count: usize,
    pub memory: MemoryEstimate,
    pub timings: PhaseTimings,
    /// Training loss after the last step (iterative solvers only).
    pub final_loss: Option<f64>,
    /// Step size actually used (iterative solvers only).
    pub lr: Option<f64>,
    /// Grid coordinates outside an encoder's domain.
    pub out_of_domain: usize,
    pub config: ExperimentConfig,
}
