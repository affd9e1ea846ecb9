//! `bench`: wall-clock of the mode-product path against the naive Kronecker
//! path, with log-log growth exponents.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use coordenc::encoding::{kron_predict, kron_predict_naive, SeparableEncoding};
use coordenc::signals::unit_axis;
use coordenc::{Boundary, Embedder, EmbedderKind, EmbedderParams, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BenchConfig, ExperimentConfig};
use crate::{write_file, CliError};

pub const TIMING_HEADER: &str = "dims,N,K,path,seconds,max_abs_diff";
pub const EXPONENT_HEADER: &str = "path,exponent,sizes";

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub size: usize,
    pub path: &'static str,
    pub seconds: f64,
    /// Largest deviation from the mode-product output (naive path only).
    pub max_abs_diff: Option<f64>,
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed().as_secs_f64());
        last = Some(v);
    }
    (last.expect("at least one repeat"), best)
}

pub fn measure(cfg: &BenchConfig, seed: u64) -> Result<Vec<Timing>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let params = EmbedderParams::new(1.0 / n as f64, n).with_boundary(Boundary::Wrap);
        let e = Embedder::new(EmbedderKind::Gauss, params, seed)?;
        let enc = SeparableEncoding::new(vec![e; cfg.dims], vec![unit_axis(n); cfg.dims])?;
        let shape = vec![n; cfg.dims];
        let len = shape.iter().product();
        let w = Tensor::from_vec(&shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())?;

        let (fast, secs) = best_of(cfg.repeats, || kron_predict(&w, &enc));
        let fast = fast?;
        rows.push(Timing {
            size: n,
            path: "mode_product",
            seconds: secs,
            max_abs_diff: None,
        });
        if len <= cfg.naive_limit {
            let (slow, secs) = best_of(cfg.repeats, || kron_predict_naive(&w, &enc));
            rows.push(Timing {
                size: n,
                path: "naive",
                seconds: secs,
                max_abs_diff: Some(slow?.max_abs_diff(&fast)),
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln t` against `ln N`; `None` below two distinct sizes.
pub fn growth_exponent(points: &[(usize, f64)]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, t)| ((n as f64).ln(), t.max(1e-12).ln()))
        .collect();
    let m = xy.len() as f64;
    let (mx, my) = xy.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (xy.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

pub fn timing_csv(dims: usize, rows: &[Timing]) -> String {
    let mut out = format!("{TIMING_HEADER}\n");
    for r in rows {
        let diff = r.max_abs_diff.map(|d| format!("{d:e}")).unwrap_or_default();
        writeln!(out, "{dims},{},{},{},{:e},{diff}", r.size, r.size, r.path, r.seconds).expect("writing to a string");
    }
    out
}

pub fn exponent_csv(rows: &[Timing]) -> String {
    let mut out = format!("{EXPONENT_HEADER}\n");
    for path in ["mode_product", "naive"] {
        let points: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| r.path == path)
            .map(|r| (r.size, r.seconds))
            .collect();
        if let Some(k) = growth_exponent(&points) {
            writeln!(out, "{path},{k},{}", points.len()).expect("writing to a string");
        }
    }
    out
}

/// Writes `bench.csv` and `bench_exponents.csv` into the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let rows = measure(&cfg.bench, cfg.seed)?;
    let timings = cfg.out.join("bench.csv");
    let exponents = cfg.out.join("bench_exponents.csv");
    write_file(&timings, timing_csv(cfg.bench.dims, &rows))?;
    write_file(&exponents, exponent_csv(&rows))?;
    Ok(vec![timings, exponents])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_of_a_power_law() {
        let pts: Vec<(usize, f64)> = [8usize, 16, 32]
            .iter()
            .map(|&n| (n, 3e-9 * (n as f64).powi(3)))
            .collect();
        assert!((growth_exponent(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(growth_exponent(&pts[..1]), None);
    }

    #[test]
    fn paths_agree_at_small_sizes() {
        let cfg = BenchConfig {
            dims: 2,
            sizes: vec![4, 6],
            repeats: 1,
            ..BenchConfig::default()
        };
        let rows = measure(&cfg, 0).unwrap();
        assert_eq!(rows.len(), 4);
        for r in rows.iter().filter(|r| r.path == "naive") {
            assert!(r.max_abs_diff.unwrap() <= 1e-10);
        }
    }

    #[test]
    fn naive_path_respects_the_limit() {
        let cfg = BenchConfig {
            dims: 2,
            sizes: vec![4, 8],
            repeats: 1,
            naive_limit: 16,
        };
        let rows = measure(&cfg, 0).unwrap();
        assert_eq!(rows.iter().filter(|r| r.path == "naive").count(), 1);
    }
}
