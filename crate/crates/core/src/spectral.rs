//! Stable rank and distance preservation of embedding matrices.
//!
//! The measured quantities come from a singular value decomposition (or, for
//! wrap-mode shifted embedders, the DFT of a circulant row). The closed forms
//! assume equally spaced inputs, `d` large enough to resolve the basis
//! function, and unit domain length unless `C` is set on the embedder.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::embedders::{Boundary, Embedder, EmbedderKind};
use crate::error::{Error, Result};

/// Singular values below `NUMERICAL_RANK_RTOL · s₁` count as zero.
pub const NUMERICAL_RANK_RTOL: f64 = 1e-8;

/// Base positions averaged by [`empirical_distance`] in wrap mode.
pub const DISTANCE_BASE_POSITIONS: usize = 32;

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub stable_rank: f64,
    pub numerical_rank: usize,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `MᵀM`: inner products of the embedded points (columns of `M`).
    pub gram: DMatrix<f64>,
}

/// Singular values of `m`, sorted descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().map(|s| s.max(0.0)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `Σ sᵢ² / s₁²` for a descending spectrum.
pub fn stable_rank_from_spectrum(sv: &[f64]) -> Result<f64> {
    let top = sv.iter().copied().fold(0.0f64, f64::max);
    if !(top > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    Ok(sv.iter().map(|s| (s / top).powi(2)).sum())
}

/// Count of singular values above `rtol · s₁`.
pub fn numerical_rank_from_spectrum(sv: &[f64], rtol: f64) -> usize {
    let top = sv.iter().copied().fold(0.0f64, f64::max);
    if top <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rtol * top).count()
}

/// `‖M‖_F² / ‖M‖₂²`.
pub fn stable_rank(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    stable_rank_from_spectrum(&singular_values(m))
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    numerical_rank_from_spectrum(&singular_values(m), NUMERICAL_RANK_RTOL)
}

/// Full report of an embedding matrix whose columns are embedded points.
pub fn analyze(m: &DMatrix<f64>) -> Result<SpectralReport> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    let singular_values = singular_values(m);
    let stable_rank = stable_rank_from_spectrum(&singular_values)?;
    let numerical_rank = numerical_rank_from_spectrum(&singular_values, NUMERICAL_RANK_RTOL);
    let gram = m.transpose() * m;
    Ok(SpectralReport {
        stable_rank,
        numerical_rank,
        singular_values,
        gram,
    })
}

/// DFT magnitudes of a circulant matrix's first row, sorted descending.
///
/// These are the singular values of the circulant matrix, so the stable rank
/// of a wrap-mode shifted embedder can be had in `O(N log N)`.
pub fn circulant_spectrum(first_row: &[f64]) -> Result<Vec<f64>> {
    if first_row.is_empty() {
        return Err(Error::Empty("circulant row"));
    }
    let mut buf: Vec<Complex<f64>> = first_row.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let mut mags: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

/// Closed-form stable rank of an embedder over `n` equally spaced points.
pub fn theoretical_stable_rank(e: &Embedder, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    let c = e.domain_length();
    let n = n as f64;
    let bound = match e.kind() {
        EmbedderKind::Gauss => 1.0 / (2.0 * PI.sqrt() * e.width_sigma() / c),
        EmbedderKind::Rff => (2.0 * PI).sqrt() * e.freq_sigma() * c,
        EmbedderKind::Rect => c / e.width_sigma(),
        EmbedderKind::Tri => 4.0 / (3.0 * e.width_sigma() / c),
        EmbedderKind::Impulse => e.num_features() as f64,
        EmbedderKind::Sine => 2.0,
        other => return Err(Error::UnsupportedKind(other.to_string())),
    };
    Ok(n.min(bound))
}

/// Closed-form distance `D(x, x + Δ)`.
///
/// Gauss, rect and tri follow the continuous integrals over one period; RFF is
/// the expectation over the frequency distribution (the measured value is the
/// cosine sum, see [`empirical_distance`]).
pub fn theoretical_distance(e: &Embedder, delta: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::NonFinite("delta"));
    }
    let delta = delta.abs();
    let sigma = e.sigma();
    Ok(match e.kind() {
        EmbedderKind::Gauss => PI.sqrt() * sigma * (-delta * delta / (4.0 * sigma * sigma)).exp(),
        EmbedderKind::Rect | EmbedderKind::Impulse => sigma * (1.0 - delta / sigma).max(0.0),
        EmbedderKind::Tri => 0.25 * sigma * sigma * (1.0 - delta / sigma).max(0.0).powi(2),
        EmbedderKind::Rff => (2.0 * PI).sqrt() * sigma * (-2.0 * PI * PI * sigma * sigma * delta * delta).exp(),
        EmbedderKind::Sine => 0.5 * e.domain_length() * (e.frequency() * delta).cos(),
        other => return Err(Error::UnsupportedKind(other.to_string())),
    })
}

/// Sampled inner product of `Ψ(x)` and `Ψ(x + Δ)`.
///
/// Shifted kinds are scaled by the sampling interval (a Riemann sum of the
/// continuous `D`); Fourier kinds report the raw sum of cosines. Wrap mode
/// averages over [`DISTANCE_BASE_POSITIONS`] base positions whose offsets also
/// sweep one sampling interval; clip mode uses the single centred pair.
pub fn empirical_distance(e: &Embedder, delta: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::NonFinite("delta"));
    }
    let c = e.domain_length();
    let scale = if e.kind().is_fourier() {
        1.0
    } else {
        e.sampling_interval()
    };
    let pair = |x: f64| -> Result<f64> {
        let a = e.embed_scalar(x)?;
        let b = e.embed_scalar(x + delta)?;
        Ok(scale * a.dot(&b))
    };
    match e.boundary() {
        Boundary::Wrap => {
            let m = DISTANCE_BASE_POSITIONS as f64;
            let s = e.sampling_interval();
            let mut acc = 0.0;
            for b in 0..DISTANCE_BASE_POSITIONS {
                let f = b as f64 / m;
                acc += pair(f * c + f * s)?;
            }
            Ok(acc / m)
        }
        Boundary::Clip => pair(0.5 * (c - delta)),
    }
}

/// One row of a distance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSample {
    pub delta: f64,
    pub empirical: f64,
    /// `None` for kinds without a closed form.
    pub theoretical: Option<f64>,
}

pub fn distance_curve(e: &Embedder, deltas: &[f64]) -> Result<Vec<DistanceSample>> {
    deltas
        .iter()
        .map(|&delta| {
            let theoretical = match theoretical_distance(e, delta) {
                Ok(v) => Some(v),
                Err(Error::UnsupportedKind(_)) => None,
                Err(err) => return Err(err),
            };
            Ok(DistanceSample {
                delta,
                empirical: empirical_distance(e, delta)?,
                theoretical,
            })
        })
        .collect()
}
