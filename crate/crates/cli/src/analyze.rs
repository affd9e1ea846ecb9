//! `analyze`: stable rank against `N` and distance against `Δ` for a sweep of encoders.

use std::fmt::Write as _;
use std::path::PathBuf;

use coordenc::embedders::cell_centers;
use coordenc::spectral::{analyze, distance_curve, theoretical_stable_rank};
use coordenc::{Embedder, EmbedderKind, EmbedderParams, Error};

use crate::config::{AnalyzeConfig, ExperimentConfig};
use crate::{write_file, CliError};

pub const RANK_HEADER: &str = "kind,sigma,N,d,stable_rank,theoretical_stable_rank,numerical_rank";
pub const DISTANCE_HEADER: &str = "kind,sigma,d,delta,empirical_D,theoretical_D";

fn optional(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn build(cfg: &AnalyzeConfig, kind: EmbedderKind, sigma: f64, d: usize, seed: u64) -> Result<Embedder, Error> {
    // RFF emits a cosine and a sine per frequency.
    let features = if kind == EmbedderKind::Rff { (d / 2).max(1) } else { d };
    Embedder::new(
        kind,
        EmbedderParams::new(sigma, features).with_boundary(cfg.boundary),
        seed,
    )
}

fn unsupported_to_none(r: Result<f64, Error>) -> Result<Option<f64>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UnsupportedKind(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn rank_csv(cfg: &AnalyzeConfig, seed: u64) -> Result<String, CliError> {
    let mut out = format!("{RANK_HEADER}\n");
    for &kind in &cfg.kinds {
        for &sigma in &cfg.sigmas {
            for &n in &cfg.sizes {
                let e = build(cfg, kind, sigma, cfg.features.unwrap_or(n), seed)?;
                let m = e.embed_batch(&cell_centers(n, e.domain_length()))?.into_matrix();
                let report = analyze(&m)?;
                let theory = unsupported_to_none(theoretical_stable_rank(&e, n))?;
                writeln!(
                    out,
                    "{kind},{sigma},{n},{},{},{},{}",
                    e.output_len(),
                    report.stable_rank,
                    optional(theory),
                    report.numerical_rank
                )
                .expect("writing to a string");
            }
        }
    }
    Ok(out)
}

pub fn distance_csv(cfg: &AnalyzeConfig, seed: u64) -> Result<String, CliError> {
    let mut out = format!("{DISTANCE_HEADER}\n");
    let deltas: Vec<f64> = (0..=cfg.delta_steps)
        .map(|i| cfg.max_delta * i as f64 / cfg.delta_steps as f64)
        .collect();
    for &kind in &cfg.kinds {
        for &sigma in &cfg.sigmas {
            let e = build(cfg, kind, sigma, cfg.distance_features, seed)?;
            for s in distance_curve(&e, &deltas)? {
                writeln!(
                    out,
                    "{kind},{sigma},{},{},{},{}",
                    e.output_len(),
                    s.delta,
                    s.empirical,
                    optional(s.theoretical)
                )
                .expect("writing to a string");
            }
        }
    }
    Ok(out)
}

/// Writes `ranks.csv` and `distance.csv` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let ranks = cfg.out.join("ranks.csv");
    let distance = cfg.out.join("distance.csv");
    write_file(&ranks, rank_csv(&cfg.analyze, cfg.seed)?)?;
    write_file(&distance, distance_csv(&cfg.analyze, cfg.seed)?)?;
    Ok(vec![ranks, distance])
}
