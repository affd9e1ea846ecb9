//! Linear model on complex encodings: closed-form ridge fit and full-batch GD.

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::encoding::{kron_adjoint, kron_predict, BlendingMatrix, SeparableEncoding};
use crate::error::{Error, Result};
use crate::signals::GridSignal;
use crate::solvers::WeightTensor;
use crate::tensor::Tensor;

/// Ridge used when none is given.
pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Relative singular-value cutoff of the pseudo-inverse path.
pub const PINV_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormOptions {
    pub ridge: f64,
    /// Truncate small singular values instead of reporting rank deficiency.
    pub pinv: bool,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self {
            ridge: DEFAULT_RIDGE,
            pinv: false,
        }
    }
}

/// `(Ψ Ψᵀ + λI)⁻¹ Ψ` with rank-deficiency detection.
///
/// Built from the SVD `Ψ = U Σ Vᵀ` as `U diag(σ/(σ²+λ)) Vᵀ`, which avoids
/// squaring the condition number by forming the Gram matrix.
fn axis_solve(psi: &DMatrix<f64>, ridge: f64, axis: usize) -> Result<DMatrix<f64>> {
    let k = psi.nrows();
    let svd = SVD::new(psi.clone(), true, true);
    let top = svd.singular_values.max();
    let bottom = if k > psi.ncols() {
        0.0
    } else {
        svd.singular_values.min()
    };
    let (hi, lo) = (top * top + ridge, bottom * bottom + ridge);
    let rcond = if hi > 0.0 { (lo / hi).max(0.0) } else { 0.0 };
    if !(hi > 0.0) || lo <= k as f64 * f64::EPSILON * hi {
        return Err(Error::RankDeficient { axis, rcond });
    }
    Ok(svd_filter(svd, |s| s / (s * s + ridge)))
}

/// `U diag(σ/(σ²+λ)) Vᵀ` for `Ψ = U Σ Vᵀ`, dropping `σ ≤ PINV_RTOL·σ₁`.
fn axis_pinv(psi: &DMatrix<f64>, ridge: f64) -> DMatrix<f64> {
    let svd = SVD::new(psi.clone(), true, true);
    let top = svd.singular_values.max();
    svd_filter(svd, |s| if s > PINV_RTOL * top { s / (s * s + ridge) } else { 0.0 })
}

fn svd_filter(svd: SVD<f64, Dyn, Dyn>, filter: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (u, mut vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    for (i, mut row) in vt.row_iter_mut().enumerate() {
        row *= filter(svd.singular_values[i]);
    }
    u * vt
}

/// Closed-form fit with default options and the given ridge.
pub fn closed_form_fit(enc: &SeparableEncoding, sig: &GridSignal, ridge: f64) -> Result<WeightTensor> {
    closed_form_fit_with(enc, sig, &ClosedFormOptions { ridge, pinv: false })
}

/// `W = S ×₁ (G₁⁻¹Ψ₁) ⋯ ×_D (G_D⁻¹Ψ_D)` with `G_i = Ψ_iΨ_iᵀ + λI`.
///
/// For one axis this is ordinary ridge regression. For `D > 1` it is the exact
/// minimiser of `‖S − AW‖² + vec(W)ᵀ R vec(W)` with
/// `R = ⊗G_i − ⊗Ψ_iΨ_iᵀ`, which vanishes as `λ → 0`. The bias is zero.
pub fn closed_form_fit_with(
    enc: &SeparableEncoding,
    sig: &GridSignal,
    opts: &ClosedFormOptions,
) -> Result<WeightTensor> {
    if !(opts.ridge >= 0.0 && opts.ridge.is_finite()) {
        return Err(Error::param(
            "ridge",
            format!("must be finite and non-negative, got {}", opts.ridge),
        ));
    }
    if sig.shape() != enc.grid_shape().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "signal grid {:?} does not match encoding grid {:?}",
            sig.shape(),
            enc.grid_shape()
        )));
    }
    let ops = (0..enc.ndim())
        .map(|axis| {
            let psi = enc.axis_matrix(axis);
            if opts.pinv {
                Ok(axis_pinv(psi, opts.ridge))
            } else {
                axis_solve(psi, opts.ridge, axis)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let channels = sig
        .channels()
        .iter()
        .map(|s| {
            let mut t = s.clone();
            for (axis, op) in ops.iter().enumerate() {
                t = t.mode_product(axis, op)?;
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let bias = vec![0.0; channels.len()];
    WeightTensor::new(channels, bias)
}

/// A linear map `A` from a weight tensor to `P` outputs.
pub trait LinearDesign: Sync {
    fn weight_shape(&self) -> Vec<usize>;
    fn num_outputs(&self) -> usize;
    fn forward(&self, w: &Tensor) -> Result<Vec<f64>>;
    fn adjoint(&self, r: &[f64]) -> Result<Tensor>;
    /// Upper bound on the largest eigenvalue of `AᵀA`.
    fn curvature_bound(&self) -> f64;
}

fn gram_lambda_max(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m * m.transpose()).eigenvalues.max().max(0.0)
}

/// Full-grid predictions `vec(kron_predict(W))`.
pub struct SeparableDesign<'a> {
    pub enc: &'a SeparableEncoding,
}

impl LinearDesign for SeparableDesign<'_> {
    fn weight_shape(&self) -> Vec<usize> {
        self.enc.feature_shape()
    }

    fn num_outputs(&self) -> usize {
        self.enc.grid_shape().iter().product()
    }

    fn forward(&self, w: &Tensor) -> Result<Vec<f64>> {
        Ok(kron_predict(w, self.enc)?.into_data())
    }

    fn adjoint(&self, r: &[f64]) -> Result<Tensor> {
        kron_adjoint(&Tensor::from_vec(&self.enc.grid_shape(), r.to_vec())?, self.enc)
    }

    fn curvature_bound(&self) -> f64 {
        (0..self.enc.ndim())
            .map(|a| gram_lambda_max(self.enc.axis_matrix(a)))
            .product()
    }
}

/// Scattered-query predictions `B · vec(kron_predict(W))`.
pub struct BlendedDesign<'a> {
    pub enc: &'a SeparableEncoding,
    pub blend: &'a BlendingMatrix,
}

impl LinearDesign for BlendedDesign<'_> {
    fn weight_shape(&self) -> Vec<usize> {
        self.enc.feature_shape()
    }

    fn num_outputs(&self) -> usize {
        self.blend.rows()
    }

    fn forward(&self, w: &Tensor) -> Result<Vec<f64>> {
        self.blend.apply(kron_predict(w, self.enc)?.data())
    }

    fn adjoint(&self, r: &[f64]) -> Result<Tensor> {
        let grid = self.blend.apply_transpose(r)?;
        kron_adjoint(&Tensor::from_vec(&self.enc.grid_shape(), grid)?, self.enc)
    }

    fn curvature_bound(&self) -> f64 {
        // ‖B‖₂² ≤ ‖B‖₁·‖B‖∞
        let mut col_sums = vec![0.0; self.blend.cols()];
        let mut row_max: f64 = 0.0;
        for r in 0..self.blend.rows() {
            let mut s = 0.0;
            for (c, w) in self.blend.row(r) {
                s += w.abs();
                col_sums[c] += w.abs();
            }
            row_max = row_max.max(s);
        }
        let col_max = col_sums.into_iter().fold(0.0, f64::max);
        let sep = SeparableDesign { enc: self.enc }.curvature_bound();
        row_max * col_max * sep
    }
}

/// A dense feature matrix (`P × F`, one row per sample).
pub struct DenseDesign {
    pub features: DMatrix<f64>,
}

impl LinearDesign for DenseDesign {
    fn weight_shape(&self) -> Vec<usize> {
        vec![self.features.ncols()]
    }

    fn num_outputs(&self) -> usize {
        self.features.nrows()
    }

    fn forward(&self, w: &Tensor) -> Result<Vec<f64>> {
        if w.len() != self.features.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} features",
                w.len(),
                self.features.ncols()
            )));
        }
        Ok((&self.features * DVector::from_column_slice(w.data()))
            .data
            .as_vec()
            .clone())
    }

    fn adjoint(&self, r: &[f64]) -> Result<Tensor> {
        if r.len() != self.features.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "{} residuals for {} rows",
                r.len(),
                self.features.nrows()
            )));
        }
        let g = self.features.tr_mul(&DVector::from_column_slice(r));
        Tensor::from_vec(&[g.len()], g.data.as_vec().clone())
    }

    fn curvature_bound(&self) -> f64 {
        SymmetricEigen::new(self.features.tr_mul(&self.features))
            .eigenvalues
            .max()
            .max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdOptions {
    /// Step size; `None` uses `1/L` for the smoothness constant `L` of the loss.
    pub lr: Option<f64>,
    pub epochs: usize,
    pub seed: u64,
    /// Uniform initialisation half-width; 0 starts from zero weights.
    pub init_scale: f64,
    pub fit_bias: bool,
}

impl Default for GdOptions {
    fn default() -> Self {
        Self {
            lr: None,
            epochs: 1000,
            seed: 0,
            init_scale: 0.0,
            fit_bias: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GdFit {
    pub weights: WeightTensor,
    /// Mean-squared error before the first step and after every epoch
    /// (`epochs + 1` entries), averaged over channels.
    pub loss_curve: Vec<f64>,
    pub lr: f64,
}

/// Relative loss increase tolerated before a run is declared divergent.
const INCREASE_RTOL: f64 = 1e-9;

fn gd_channel(
    design: &dyn LinearDesign,
    target: &[f64],
    opts: &GdOptions,
    lr: f64,
    seed: u64,
) -> Result<(Tensor, f64, Vec<f64>)> {
    let p = target.len() as f64;
    let shape = design.weight_shape();
    let mut w = Tensor::zeros(&shape);
    if opts.init_scale > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        w.data_mut()
            .iter_mut()
            .for_each(|v| *v = rng.random_range(-opts.init_scale..=opts.init_scale));
    }
    let mut bias = 0.0;
    let residual = |w: &Tensor, bias: f64| -> Result<(Vec<f64>, f64)> {
        let mut r = design.forward(w)?;
        for (ri, t) in r.iter_mut().zip(target) {
            *ri += bias - t;
        }
        let loss = r.iter().map(|v| v * v).sum::<f64>() / p;
        Ok((r, loss))
    };
    let (mut r, mut loss) = residual(&w, bias)?;
    let floor = loss * 1e-15;
    let mut curve = Vec::with_capacity(opts.epochs + 1);
    curve.push(loss);
    for epoch in 1..=opts.epochs {
        let g = design.adjoint(&r)?;
        let step = 2.0 * lr / p;
        for (wi, gi) in w.data_mut().iter_mut().zip(g.data()) {
            *wi -= step * gi;
        }
        if opts.fit_bias {
            bias -= step * r.iter().sum::<f64>();
        }
        let prev = loss;
        (r, loss) = residual(&w, bias)?;
        if !loss.is_finite() || loss > prev * (1.0 + INCREASE_RTOL) + floor {
            return Err(Error::Divergence { epoch, loss });
        }
        curve.push(loss);
    }
    Ok((w, bias, curve))
}

/// Full-batch gradient descent on `(1/P)‖A vec(W) + b − y‖²`, one run per channel.
pub fn gd_fit_linear(design: &dyn LinearDesign, targets: &[Vec<f64>], opts: &GdOptions) -> Result<GdFit> {
    if opts.epochs == 0 {
        return Err(Error::param("epochs", "must be at least 1"));
    }
    if targets.is_empty() {
        return Err(Error::Empty("targets"));
    }
    let p = design.num_outputs();
    if let Some(t) = targets.iter().find(|t| t.len() != p) {
        return Err(Error::ShapeMismatch(format!("{} targets for {p} outputs", t.len())));
    }
    let lr = match opts.lr {
        Some(lr) if lr > 0.0 && lr.is_finite() => lr,
        Some(lr) => return Err(Error::param("lr", format!("must be positive, got {lr}"))),
        None => {
            let l = 2.0 / p as f64 * (design.curvature_bound() + if opts.fit_bias { p as f64 } else { 0.0 });
            if !(l > 0.0) {
                return Err(Error::ZeroMatrix);
            }
            1.0 / l
        }
    };
    let runs = targets
        .par_iter()
        .enumerate()
        .map(|(c, t)| gd_channel(design, t, opts, lr, opts.seed.wrapping_add(c as u64)))
        .collect::<Result<Vec<_>>>()?;
    let n = runs.len() as f64;
    let loss_curve = (0..=opts.epochs)
        .map(|e| runs.iter().map(|(_, _, c)| c[e]).sum::<f64>() / n)
        .collect();
    let (channels, bias): (Vec<_>, Vec<_>) = runs.into_iter().map(|(w, b, _)| (w, b)).unzip();
    Ok(GdFit {
        weights: WeightTensor::new(channels, bias)?,
        loss_curve,
        lr,
    })
}
