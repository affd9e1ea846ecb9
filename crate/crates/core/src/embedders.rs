//! One-dimensional positional encoders.
//!
//! Shifted kinds sample a basis function `ψ(t - x)` at the equidistant
//! positions `t_i = i·s`, `s = C/d`, for `i = 0..d`. Fourier kinds (LinF,
//! LogF, RFF) emit cosine/sine pairs at a frozen set of frequencies.
//!
//! In [`Boundary::Wrap`] mode the offset `t - x` of the compactly supported
//! kinds (impulse, rect, tri, Gauss) is taken on the circle of circumference
//! `C`, so equally spaced inputs produce an exactly circulant matrix. Sine and
//! square embedders are periodic already and ignore the boundary mode.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    Impulse,
    Rect,
    Tri,
    Sine,
    Square,
    Gauss,
    LinF,
    LogF,
    Rff,
}

impl EmbedderKind {
    pub const ALL: [EmbedderKind; 9] = [
        EmbedderKind::Impulse,
        EmbedderKind::Rect,
        EmbedderKind::Tri,
        EmbedderKind::Sine,
        EmbedderKind::Square,
        EmbedderKind::Gauss,
        EmbedderKind::LinF,
        EmbedderKind::LogF,
        EmbedderKind::Rff,
    ];

    /// Frequency-based kinds emit `2·K` values.
    pub fn is_fourier(self) -> bool {
        matches!(self, EmbedderKind::LinF | EmbedderKind::LogF | EmbedderKind::Rff)
    }

    /// Kinds whose `sigma` is a width (as opposed to a frequency range).
    pub fn uses_width(self) -> bool {
        matches!(self, EmbedderKind::Rect | EmbedderKind::Tri | EmbedderKind::Gauss)
    }

    fn wraps(self) -> bool {
        matches!(
            self,
            EmbedderKind::Impulse | EmbedderKind::Rect | EmbedderKind::Tri | EmbedderKind::Gauss
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            EmbedderKind::Impulse => "impulse",
            EmbedderKind::Rect => "rect",
            EmbedderKind::Tri => "tri",
            EmbedderKind::Sine => "sine",
            EmbedderKind::Square => "square",
            EmbedderKind::Gauss => "gauss",
            EmbedderKind::LinF => "linf",
            EmbedderKind::LogF => "logf",
            EmbedderKind::Rff => "rff",
        }
    }
}

impl fmt::Display for EmbedderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbedderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        EmbedderKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .or(match lower.as_str() {
                "gau" | "gaussian" => Some(EmbedderKind::Gauss),
                "triangle" => Some(EmbedderKind::Tri),
                "rectangle" => Some(EmbedderKind::Rect),
                _ => None,
            })
            .ok_or_else(|| Error::param("kind", format!("unknown embedder kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Wrap,
    Clip,
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wrap" => Ok(Boundary::Wrap),
            "clip" => Ok(Boundary::Clip),
            other => Err(Error::param(
                "boundary",
                format!("expected wrap or clip, got `{other}`"),
            )),
        }
    }
}

/// Construction parameters. `sigma` is the width for rect/tri/Gauss and the
/// frequency range for LinF/LogF/RFF; it is ignored by impulse, sine and square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedderParams {
    pub sigma: f64,
    pub num_features: usize,
    pub domain_length: f64,
    pub boundary: Boundary,
    /// Angular frequency of the sine and square embedders.
    pub frequency: f64,
}

impl EmbedderParams {
    pub fn new(sigma: f64, num_features: usize) -> Self {
        Self {
            sigma,
            num_features,
            ..Self::default()
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }
}

impl Default for EmbedderParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            num_features: 1,
            domain_length: 1.0,
            boundary: Boundary::Wrap,
            frequency: TAU,
        }
    }
}

/// A frozen 1D encoder. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedder {
    kind: EmbedderKind,
    width_sigma: f64,
    freq_sigma: f64,
    num_features: usize,
    domain_length: f64,
    boundary: Boundary,
    frequency: f64,
    /// Cosine/sine frequencies (cycles per unit) of the Fourier kinds.
    frequencies: Vec<f64>,
    rng_seed: u64,
}

impl Embedder {
    pub fn new(kind: EmbedderKind, params: EmbedderParams, seed: u64) -> Result<Self> {
        let EmbedderParams {
            sigma,
            num_features,
            domain_length,
            boundary,
            frequency,
        } = params;
        if num_features == 0 {
            return Err(Error::param("num_features", "must be at least 1"));
        }
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(Error::param(
                "domain_length",
                format!("must be positive, got {domain_length}"),
            ));
        }
        let needs_sigma = kind.uses_width() || kind.is_fourier();
        if needs_sigma && !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(
                "sigma",
                format!("must be positive for {kind}, got {sigma}"),
            ));
        }
        if matches!(kind, EmbedderKind::Sine | EmbedderKind::Square) && !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::param("frequency", format!("must be positive, got {frequency}")));
        }

        let k = num_features;
        let frequencies = match kind {
            EmbedderKind::LinF => {
                let top = sigma.exp2();
                (0..k)
                    .map(|i| (k - i) as f64 / k as f64 + i as f64 / k as f64 * top)
                    .collect()
            }
            EmbedderKind::LogF => (0..k).map(|i| (sigma * i as f64 / k as f64).exp2()).collect(),
            EmbedderKind::Rff => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let normal = Normal::new(0.0, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
                let mut b: Vec<f64> = (0..k).map(|_| normal.sample(&mut rng)).collect();
                b.sort_by(f64::total_cmp);
                b
            }
            _ => Vec::new(),
        };

        let (width_sigma, freq_sigma) = match kind {
            EmbedderKind::Impulse => (domain_length / k as f64, 0.0),
            k if k.uses_width() => (sigma, 0.0),
            k if k.is_fourier() => (0.0, sigma),
            _ => (0.0, 0.0),
        };

        Ok(Self {
            kind,
            width_sigma,
            freq_sigma,
            num_features,
            domain_length,
            boundary,
            frequency,
            frequencies,
            rng_seed: seed,
        })
    }

    pub fn kind(&self) -> EmbedderKind {
        self.kind
    }

    /// Width parameter of the shifted kinds (one sampling interval for impulse).
    pub fn width_sigma(&self) -> f64 {
        self.width_sigma
    }

    pub fn freq_sigma(&self) -> f64 {
        self.freq_sigma
    }

    /// The σ the embedder was built from, whichever role it plays.
    pub fn sigma(&self) -> f64 {
        if self.kind.is_fourier() {
            self.freq_sigma
        } else {
            self.width_sigma
        }
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn seed(&self) -> u64 {
        self.rng_seed
    }

    /// The sampled RFF frequencies, sorted ascending.
    pub fn rff_frequencies(&self) -> Option<&[f64]> {
        (self.kind == EmbedderKind::Rff).then_some(&self.frequencies[..])
    }

    /// Frequency ladder of any Fourier kind (cycles per unit length).
    pub fn fourier_frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Spacing of the sample positions `t_i`.
    pub fn sampling_interval(&self) -> f64 {
        self.domain_length / self.num_features as f64
    }

    pub fn output_len(&self) -> usize {
        if self.kind.is_fourier() {
            2 * self.num_features
        } else {
            self.num_features
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        (0.0..=self.domain_length).contains(&x)
    }

    /// The same embedder evaluated with the other boundary mode.
    pub fn with_boundary(&self, boundary: Boundary) -> Embedder {
        Embedder {
            boundary,
            ..self.clone()
        }
    }

    fn wrap(&self, u: f64) -> f64 {
        let c = self.domain_length;
        (u + 0.5 * c).rem_euclid(c) - 0.5 * c
    }

    /// The basis function at offset `u = t - x` (shifted kinds only).
    pub fn profile(&self, u: f64) -> f64 {
        let u = if self.boundary == Boundary::Wrap && self.kind.wraps() {
            self.wrap(u)
        } else {
            u
        };
        match self.kind {
            EmbedderKind::Gauss => (-u * u / (2.0 * self.width_sigma * self.width_sigma)).exp(),
            EmbedderKind::Rect | EmbedderKind::Impulse => {
                let half = 0.5 * self.width_sigma;
                if (-half..half).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            EmbedderKind::Tri => (1.0 - u.abs() / (0.5 * self.width_sigma)).max(0.0),
            EmbedderKind::Sine => (self.frequency * u).sin(),
            EmbedderKind::Square => {
                // sgn(sin(f·u)) written on the phase so that a half-period
                // shift negates the output exactly.
                let phase = (u * (self.frequency / TAU)).rem_euclid(1.0);
                if phase < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            EmbedderKind::LinF | EmbedderKind::LogF | EmbedderKind::Rff => {
                unreachable!("Fourier kinds have no shifted profile")
            }
        }
    }

    fn embed_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.output_len());
        match self.kind {
            EmbedderKind::LinF | EmbedderKind::LogF => {
                for (pair, f) in out.chunks_exact_mut(2).zip(&self.frequencies) {
                    let (s, c) = (TAU * f * x).sin_cos();
                    pair[0] = c;
                    pair[1] = s;
                }
            }
            EmbedderKind::Rff => {
                let (cos, sin) = out.split_at_mut(self.num_features);
                for ((c, s), b) in cos.iter_mut().zip(sin.iter_mut()).zip(&self.frequencies) {
                    let (sv, cv) = (TAU * b * x).sin_cos();
                    *c = cv;
                    *s = sv;
                }
            }
            _ => {
                let s = self.sampling_interval();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = self.profile(i as f64 * s - x);
                }
            }
        }
    }

    /// Encodes a single coordinate.
    pub fn embed_scalar(&self, x: f64) -> Result<DVector<f64>> {
        if !x.is_finite() {
            return Err(Error::NonFinite("coordinate"));
        }
        let mut v = DVector::zeros(self.output_len());
        self.embed_into(x, v.as_mut_slice());
        Ok(v)
    }

    /// Encodes a batch of coordinates, one column per coordinate.
    pub fn embed_batch(&self, xs: &[f64]) -> Result<EmbeddingMatrix> {
        if xs.is_empty() {
            return Err(Error::Empty("coordinate batch"));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("coordinate batch"));
        }
        let rows = self.output_len();
        let mut m = DMatrix::zeros(rows, xs.len());
        for (j, &x) in xs.iter().enumerate() {
            self.embed_into(x, m.column_mut(j).as_mut_slice());
        }
        let out_of_domain = xs
            .iter()
            .enumerate()
            .filter(|(_, &x)| !self.in_domain(x))
            .map(|(j, _)| j)
            .collect();
        Ok(EmbeddingMatrix {
            matrix: m,
            out_of_domain,
        })
    }

    pub fn to_spec(&self) -> EmbedderSpec {
        EmbedderSpec {
            kind: self.kind,
            sigma: match self.kind {
                EmbedderKind::Impulse | EmbedderKind::Sine | EmbedderKind::Square => None,
                _ => Some(self.sigma()),
            },
            features: self.num_features,
            seed: self.rng_seed,
            boundary: self.boundary,
            domain: self.domain_length,
            frequency: matches!(self.kind, EmbedderKind::Sine | EmbedderKind::Square).then_some(self.frequency),
        }
    }
}

/// Embedded coordinates as a dense `d × N` matrix (column `j` encodes `x_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    matrix: DMatrix<f64>,
    /// Columns whose coordinate fell outside `[0, C]`.
    out_of_domain: Vec<usize>,
}

impl EmbeddingMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix,
            out_of_domain: Vec::new(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn out_of_domain(&self) -> &[usize] {
        &self.out_of_domain
    }

    pub fn num_features(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_points(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Evenly spaced cell centres `(j + ½)·C/n`, `j = 0..n`.
///
/// With `n = d` these sit half a sample away from every `t_i`, so a wrap-mode
/// embedding matrix is exactly circulant and no input lands on a rect edge.
pub fn cell_centers(n: usize, domain_length: f64) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * domain_length / n as f64).collect()
}

fn default_domain() -> f64 {
    1.0
}

/// Plain-text key-value form of an embedder, e.g.
///
/// ```text
/// kind = "gauss"
/// sigma = 0.01
/// features = 256
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedderSpec {
    pub kind: EmbedderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub features: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_domain")]
    pub domain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
}

impl EmbedderSpec {
    pub fn build(&self) -> Result<Embedder> {
        let sigma = match self.sigma {
            Some(s) => s,
            None if self.kind.uses_width() || self.kind.is_fourier() => {
                return Err(Error::param("sigma", format!("required for {}", self.kind)))
            }
            None => 1.0,
        };
        let params = EmbedderParams {
            sigma,
            num_features: self.features,
            domain_length: self.domain,
            boundary: self.boundary,
            frequency: self.frequency.unwrap_or(TAU),
        };
        Embedder::new(self.kind, params, self.seed)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::param("embedder config", e.message().to_string()))
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("embedder spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gauss(sigma: f64, d: usize) -> Embedder {
        Embedder::new(EmbedderKind::Gauss, EmbedderParams::new(sigma, d), 0).unwrap()
    }

    #[test]
    fn gauss_samples_four_shifts() {
        let e = gauss(0.1, 4);
        let v = e.embed_scalar(0.0).unwrap();
        let want = [
            1.0,
            (-0.25f64.powi(2) / 0.02).exp(),
            (-0.5f64.powi(2) / 0.02).exp(),
            // 0.75 wraps to -0.25 on the unit circle
            (-0.25f64.powi(2) / 0.02).exp(),
        ];
        for (a, b) in v.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let clip = e.with_boundary(Boundary::Clip).embed_scalar(0.0).unwrap();
        assert_abs_diff_eq!(clip[3], (-0.75f64.powi(2) / 0.02).exp(), epsilon = 1e-15);
    }

    #[test]
    fn gauss_grid_positions() {
        let e = gauss(0.01, 256);
        assert_eq!(e.sampling_interval(), 1.0 / 256.0);
        let v = e.embed_scalar(0.5).unwrap();
        assert_eq!(v[128], 1.0);
        assert_abs_diff_eq!(
            v[129],
            (-(1.0f64 / 256.0).powi(2) / (2.0 * 1e-4)).exp(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let tri = Embedder::new(EmbedderKind::Tri, EmbedderParams::new(0.0, 16), 0);
        assert!(matches!(tri, Err(Error::InvalidParameter { name: "sigma", .. })));
        let empty = Embedder::new(EmbedderKind::Gauss, EmbedderParams::new(0.1, 0), 0);
        assert!(matches!(
            empty,
            Err(Error::InvalidParameter {
                name: "num_features",
                ..
            })
        ));
        assert!(Embedder::new(EmbedderKind::Rff, EmbedderParams::new(-1.0, 4), 0).is_err());
        // sine has no width, so sigma is not checked
        assert!(Embedder::new(EmbedderKind::Sine, EmbedderParams::new(0.0, 4), 0).is_ok());
    }

    #[test]
    fn rff_is_frozen_by_seed() {
        let p = EmbedderParams::new(0.1, 128);
        let a = Embedder::new(EmbedderKind::Rff, p, 7).unwrap();
        let b = Embedder::new(EmbedderKind::Rff, p, 7).unwrap();
        assert_eq!(a.rff_frequencies(), b.rff_frequencies());
        let c = Embedder::new(EmbedderKind::Rff, p, 8).unwrap();
        assert_ne!(a.rff_frequencies(), c.rff_frequencies());
        let f = a.rff_frequencies().unwrap();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(a.embed_scalar(0.3).unwrap(), a.embed_scalar(0.3).unwrap());
    }

    #[test]
    fn rff_layout_is_cos_then_sin() {
        let e = Embedder::new(EmbedderKind::Rff, EmbedderParams::new(3.0, 5), 1).unwrap();
        let x = 0.37;
        let v = e.embed_scalar(x).unwrap();
        assert_eq!(v.len(), 10);
        for (j, b) in e.rff_frequencies().unwrap().iter().enumerate() {
            assert_eq!(v[j], (TAU * b * x).cos());
            assert_eq!(v[5 + j], (TAU * b * x).sin());
        }
    }

    #[test]
    fn frequency_ladders() {
        let p = EmbedderParams::new(4.0, 8);
        let lin = Embedder::new(EmbedderKind::LinF, p, 0).unwrap();
        let f = lin.fourier_frequencies();
        assert_eq!(f[0], 1.0);
        let step = f[1] - f[0];
        assert_abs_diff_eq!(step, 15.0 / 8.0, epsilon = 1e-12);
        assert!(f.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < 1e-12));

        let log = Embedder::new(EmbedderKind::LogF, p, 0).unwrap();
        let g = log.fourier_frequencies();
        assert_eq!(g[0], 1.0);
        let ratio = g[1] / g[0];
        assert_abs_diff_eq!(ratio, 0.5f64.exp2(), epsilon = 1e-12);
        assert!(g.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));

        let v = log.embed_scalar(0.25).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v[2], (TAU * g[1] * 0.25).cos());
        assert_eq!(v[3], (TAU * g[1] * 0.25).sin());
    }

    #[test]
    fn impulse_on_grid_is_one_hot() {
        let e = Embedder::new(EmbedderKind::Impulse, EmbedderParams::new(1.0, 16), 0).unwrap();
        for i in [0usize, 3, 15] {
            let v = e.embed_scalar(i as f64 / 16.0).unwrap();
            for (k, val) in v.iter().enumerate() {
                assert_eq!(*val, if k == i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn square_half_period_negates() {
        let e = Embedder::new(EmbedderKind::Square, EmbedderParams::new(1.0, 64), 0).unwrap();
        let m = e.embed_batch(&[0.0, 0.5]).unwrap().into_matrix();
        for i in 0..64 {
            assert_eq!(m[(i, 0)], -m[(i, 1)]);
        }
    }

    #[test]
    fn outputs_stay_in_range() {
        let xs: Vec<f64> = (0..97).map(|i| i as f64 / 96.0).collect();
        for kind in [
            EmbedderKind::Gauss,
            EmbedderKind::Tri,
            EmbedderKind::Rect,
            EmbedderKind::Square,
        ] {
            let e = Embedder::new(kind, EmbedderParams::new(0.07, 50), 0).unwrap();
            let m = e.embed_batch(&xs).unwrap();
            for &v in m.matrix().iter() {
                match kind {
                    EmbedderKind::Gauss => assert!(v > 0.0 && v <= 1.0),
                    EmbedderKind::Tri => assert!((0.0..=1.0).contains(&v)),
                    EmbedderKind::Rect => assert!(v == 0.0 || v == 1.0),
                    _ => assert!(v == 1.0 || v == -1.0),
                }
            }
        }
    }

    #[test]
    fn batch_flags_out_of_domain_and_rejects_bad_input() {
        let e = gauss(0.1, 8);
        let m = e.embed_batch(&[0.2, -0.1, 1.0, 1.5]).unwrap();
        assert_eq!(m.out_of_domain(), &[1, 3]);
        assert!(matches!(e.embed_batch(&[]), Err(Error::Empty(_))));
        assert!(matches!(e.embed_scalar(f64::NAN), Err(Error::NonFinite(_))));
        assert!(matches!(e.embed_batch(&[0.1, f64::INFINITY]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn wrap_mode_gauss_matrix_is_circulant() {
        let n = 64;
        let e = gauss(0.05, n);
        let xs: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
        let m = e.embed_batch(&xs).unwrap().into_matrix();
        for j in 1..n {
            for i in 0..n {
                assert!((m[(i, j)] - m[((i + n - 1) % n, j - 1)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sine_rows_lie_in_two_dimensional_span() {
        let e = Embedder::new(EmbedderKind::Sine, EmbedderParams::new(1.0, 9), 0).unwrap();
        let s = e.sampling_interval();
        for &x in &[0.0, 0.13, 0.71] {
            let v = e.embed_scalar(x).unwrap();
            for i in 0..9 {
                let t = i as f64 * s;
                // sin(f(t-x)) = sin(ft)cos(fx) - cos(ft)sin(fx)
                let want = (TAU * t).sin() * (TAU * x).cos() - (TAU * t).cos() * (TAU * x).sin();
                assert_abs_diff_eq!(v[i], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spec_round_trips_through_text() {
        let text = "kind = \"rff\"\nsigma = 0.1\nfeatures = 128\nseed = 7\n";
        let spec = EmbedderSpec::from_config_str(text).unwrap();
        let e = spec.build().unwrap();
        assert_eq!(e.kind(), EmbedderKind::Rff);
        assert_eq!(e.seed(), 7);
        let again = EmbedderSpec::from_config_str(&e.to_spec().to_config_string()).unwrap();
        assert_eq!(again.build().unwrap(), e);
        assert!(EmbedderSpec::from_config_str("kind = \"gauss\"\nfeatures = 4\n")
            .unwrap()
            .build()
            .is_err());
        assert!(EmbedderSpec::from_config_str("kind = \"gauss\"\nfeatures = 4\nbogus = 1\n").is_err());
    }
}
