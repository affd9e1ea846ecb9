//! Multi-dimensional encodings built from per-axis 1D embedders.
//!
//! ## Vec ordering
//!
//! Grids and weight tensors are stored column-major with axis 1 varying
//! fastest. The complex encoding of a point is therefore
//! `ψ_D(x_D) ⊗ … ⊗ ψ_1(x_1)`, entry `k₁ + K₁·k₂ + K₁K₂·k₃ + …`, and for
//! `D = 2` the linear model satisfies
//! `vec(Ψ₁ᵀ W Ψ₂) = (Ψ₂ ⊗ Ψ₁)ᵀ vec(W)`. [`kron_predict`] evaluates that
//! product as a chain of mode products without forming the Kronecker matrix.
//!
//! For images, axis 1 is the row (y) coordinate and axis 2 the column (x).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::Write;

use crate::embedders::{Embedder, EmbedderKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::spectral::theoretical_distance;
use crate::tensor::Tensor;

/// Largest complex-encoding vector [`complex_encode`] will materialise.
pub const MAX_COMPLEX_LEN: usize = 1 << 26;

/// Per-axis embedding matrices of a full Cartesian grid.
#[derive(Debug, Clone)]
pub struct SeparableEncoding {
    embedders: Vec<Embedder>,
    axis_grids: Vec<Vec<f64>>,
    per_axis: Vec<EmbeddingMatrix>,
}

impl SeparableEncoding {
    pub fn new(embedders: Vec<Embedder>, axis_grids: Vec<Vec<f64>>) -> Result<Self> {
        if embedders.is_empty() {
            return Err(Error::Empty("embedder list"));
        }
        if embedders.len() != axis_grids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} embedders for {} axes",
                embedders.len(),
                axis_grids.len()
            )));
        }
        for (axis, g) in axis_grids.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Empty("axis grid"));
            }
            if g.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::param(
                    "axis_grids",
                    format!("coordinates of axis {axis} must be strictly increasing"),
                ));
            }
        }
        let per_axis = embedders
            .iter()
            .zip(&axis_grids)
            .map(|(e, g)| e.embed_batch(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            embedders,
            axis_grids,
            per_axis,
        })
    }

    pub fn ndim(&self) -> usize {
        self.embedders.len()
    }

    pub fn embedders(&self) -> &[Embedder] {
        &self.embedders
    }

    pub fn axis_grids(&self) -> &[Vec<f64>] {
        &self.axis_grids
    }

    pub fn per_axis(&self) -> &[EmbeddingMatrix] {
        &self.per_axis
    }

    /// `Ψ_i`, `K_i × N_i`.
    pub fn axis_matrix(&self, axis: usize) -> &DMatrix<f64> {
        self.per_axis[axis].matrix()
    }

    /// `(K₁, …, K_D)`.
    pub fn feature_shape(&self) -> Vec<usize> {
        self.per_axis.iter().map(|m| m.num_features()).collect()
    }

    /// `(N₁, …, N_D)`.
    pub fn grid_shape(&self) -> Vec<usize> {
        self.axis_grids.iter().map(Vec::len).collect()
    }
}

fn check_dims(embedders: &[Embedder], point: &[f64]) -> Result<()> {
    if embedders.is_empty() {
        return Err(Error::Empty("embedder list"));
    }
    if embedders.len() != point.len() {
        return Err(Error::ShapeMismatch(format!(
            "point has {} coordinates for {} embedders",
            point.len(),
            embedders.len()
        )));
    }
    Ok(())
}

/// Concatenation `[ψ₁(x₁); …; ψ_D(x_D)]`.
pub fn simple_encode(embedders: &[Embedder], point: &[f64]) -> Result<DVector<f64>> {
    check_dims(embedders, point)?;
    let parts = embedders
        .iter()
        .zip(point)
        .map(|(e, &x)| e.embed_scalar(x))
        .collect::<Result<Vec<_>>>()?;
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = DVector::zeros(len);
    let mut at = 0;
    for p in parts {
        out.rows_mut(at, p.len()).copy_from(&p);
        at += p.len();
    }
    Ok(out)
}

/// Simple encodings of many points, one row per point (`P × ΣK_i`).
pub fn simple_features(embedders: &[Embedder], points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if points.ncols() != embedders.len() {
        return Err(Error::ShapeMismatch(format!(
            "points have {} columns for {} embedders",
            points.ncols(),
            embedders.len()
        )));
    }
    let width: usize = embedders.iter().map(Embedder::output_len).sum();
    let mut out = DMatrix::zeros(points.nrows(), width);
    let mut at = 0;
    for (axis, e) in embedders.iter().enumerate() {
        let xs: Vec<f64> = points.column(axis).iter().copied().collect();
        let m = e.embed_batch(&xs)?.into_matrix();
        out.columns_mut(at, m.nrows()).copy_from(&m.transpose());
        at += m.nrows();
    }
    Ok(out)
}

/// Outer product of `parts` flattened with the first factor fastest.
pub fn kron_vectors(parts: &[DVector<f64>]) -> Result<DVector<f64>> {
    let len = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
        .unwrap_or(usize::MAX);
    if len > MAX_COMPLEX_LEN {
        return Err(Error::TooLarge { len });
    }
    let mut out = vec![1.0];
    for p in parts {
        let mut next = Vec::with_capacity(out.len() * p.len());
        for &v in p.iter() {
            next.extend(out.iter().map(|o| o * v));
        }
        out = next;
    }
    Ok(DVector::from_vec(out))
}

/// Complex encoding `ψ_D(x_D) ⊗ … ⊗ ψ₁(x₁)` of one point.
pub fn complex_encode(embedders: &[Embedder], point: &[f64]) -> Result<DVector<f64>> {
    check_dims(embedders, point)?;
    let len = embedders
        .iter()
        .try_fold(1usize, |acc, e| acc.checked_mul(e.output_len()))
        .unwrap_or(usize::MAX);
    if len > MAX_COMPLEX_LEN {
        return Err(Error::TooLarge { len });
    }
    let parts = embedders
        .iter()
        .zip(point)
        .map(|(e, &x)| e.embed_scalar(x))
        .collect::<Result<Vec<_>>>()?;
    kron_vectors(&parts)
}

fn check_weight_shape(w: &Tensor, enc: &SeparableEncoding) -> Result<()> {
    let want = enc.feature_shape();
    if w.shape() != want.as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "weight tensor {:?} does not match encoding features {:?}",
            w.shape(),
            want
        )));
    }
    Ok(())
}

/// `W ×₁ Ψ₁ᵀ ×₂ Ψ₂ᵀ ⋯ ×_D Ψ_Dᵀ`: predictions on the full grid, shape `(N₁, …, N_D)`.
pub fn kron_predict(w: &Tensor, enc: &SeparableEncoding) -> Result<Tensor> {
    check_weight_shape(w, enc)?;
    let mut t = w.clone();
    for axis in 0..enc.ndim() {
        t = t.mode_product(axis, &enc.axis_matrix(axis).transpose())?;
    }
    Ok(t)
}

/// Same contraction, processing the axes in the given order.
pub fn kron_predict_ordered(w: &Tensor, enc: &SeparableEncoding, order: &[usize]) -> Result<Tensor> {
    check_weight_shape(w, enc)?;
    let mut seen = vec![false; enc.ndim()];
    if order.len() != enc.ndim()
        || order
            .iter()
            .any(|&a| a >= enc.ndim() || std::mem::replace(&mut seen[a], true))
    {
        return Err(Error::param("order", "must be a permutation of the axes"));
    }
    let mut t = w.clone();
    for &axis in order {
        t = t.mode_product(axis, &enc.axis_matrix(axis).transpose())?;
    }
    Ok(t)
}

/// Adjoint of [`kron_predict`]: `G ×₁ Ψ₁ ⋯ ×_D Ψ_D`, shape `(K₁, …, K_D)`.
pub fn kron_adjoint(grid: &Tensor, enc: &SeparableEncoding) -> Result<Tensor> {
    if grid.shape() != enc.grid_shape().as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "grid {:?} does not match encoding grid {:?}",
            grid.shape(),
            enc.grid_shape()
        )));
    }
    let mut t = grid.clone();
    for axis in 0..enc.ndim() {
        t = t.mode_product(axis, enc.axis_matrix(axis))?;
    }
    Ok(t)
}

/// Reference evaluation: one `∏K`-long complex encoding per grid point.
///
/// Costs `O(∏N · ∏K)`; kept as the oracle for [`kron_predict`] and as the
/// baseline in benchmarks.
pub fn kron_predict_naive(w: &Tensor, enc: &SeparableEncoding) -> Result<Tensor> {
    check_weight_shape(w, enc)?;
    let len = w.len();
    if len > MAX_COMPLEX_LEN {
        return Err(Error::TooLarge { len });
    }
    let grid_shape = enc.grid_shape();
    let mut out = Tensor::zeros(&grid_shape);
    let mut index = vec![0usize; grid_shape.len()];
    let weights = DVector::from_column_slice(w.data());
    for flat in 0..out.len() {
        let parts: Vec<DVector<f64>> = index
            .iter()
            .enumerate()
            .map(|(axis, &n)| enc.axis_matrix(axis).column(n).into_owned())
            .collect();
        out.data_mut()[flat] = kron_vectors(&parts)?.dot(&weights);
        for (axis, i) in index.iter_mut().enumerate() {
            *i += 1;
            if *i < grid_shape[axis] {
                break;
            }
            *i = 0;
        }
    }
    Ok(out)
}

/// Which inner products feed the two-point interpolation weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceSource {
    /// Continuous closed-form `D(Δ)`; depends only on the spacing and `β`.
    ClosedForm,
    /// Inner products of the sampled encodings: the exact least-squares weights.
    Sampled,
}

impl DistanceSource {
    /// Closed form where one exists, sampled otherwise.
    pub fn default_for(kind: EmbedderKind) -> Self {
        match kind {
            EmbedderKind::Gauss
            | EmbedderKind::Rect
            | EmbedderKind::Impulse
            | EmbedderKind::Tri
            | EmbedderKind::Sine => DistanceSource::ClosedForm,
            EmbedderKind::Square | EmbedderKind::LinF | EmbedderKind::LogF | EmbedderKind::Rff => {
                DistanceSource::Sampled
            }
        }
    }
}

/// Weights `(α₀, α₁)` with `Ψ(x) ≈ α₀Ψ(x₀) + α₁Ψ(x₁)`, using the default source.
pub fn interp_weights(e: &Embedder, x0: f64, x1: f64, x: f64) -> Result<(f64, f64)> {
    interp_weights_with(e, x0, x1, x, DistanceSource::default_for(e.kind()))
}

const DEGENERATE_RTOL: f64 = 1e-12;

pub fn interp_weights_with(e: &Embedder, x0: f64, x1: f64, x: f64, source: DistanceSource) -> Result<(f64, f64)> {
    if !(x0.is_finite() && x1.is_finite() && x.is_finite()) {
        return Err(Error::NonFinite("interpolation nodes"));
    }
    if !(x0 < x1) {
        return Err(Error::param("x1", format!("must exceed x0 ({x0} >= {x1})")));
    }
    if x < x0 || x > x1 {
        return Err(Error::param("x", format!("{x} lies outside [{x0}, {x1}]")));
    }
    let spacing = x1 - x0;
    match source {
        DistanceSource::ClosedForm => {
            let beta = (x - x0) / spacing;
            let d0 = theoretical_distance(e, 0.0)?;
            let dd = theoretical_distance(e, spacing)?;
            let a = theoretical_distance(e, beta * spacing)?;
            let b = theoretical_distance(e, (1.0 - beta) * spacing)?;
            let det = d0 * d0 - dd * dd;
            if det.abs() <= DEGENERATE_RTOL * d0 * d0 {
                return Err(Error::DegenerateSpacing { spacing });
            }
            Ok(((d0 * a - dd * b) / det, (d0 * b - dd * a) / det))
        }
        DistanceSource::Sampled => {
            let p0 = e.embed_scalar(x0)?;
            let p1 = e.embed_scalar(x1)?;
            let p = e.embed_scalar(x)?;
            let g00 = p0.dot(&p0);
            let g11 = p1.dot(&p1);
            let g01 = p0.dot(&p1);
            let r0 = p0.dot(&p);
            let r1 = p1.dot(&p);
            let det = g00 * g11 - g01 * g01;
            if det.abs() <= DEGENERATE_RTOL * g00 * g11 {
                return Err(Error::DegenerateSpacing { spacing });
            }
            Ok(((g11 * r0 - g01 * r1) / det, (g00 * r1 - g01 * r0) / det))
        }
    }
}

/// `‖Ψ(x) − α₀Ψ(x₀) − α₁Ψ(x₁)‖`.
pub fn interp_residual(e: &Embedder, x0: f64, x1: f64, x: f64, alpha: (f64, f64)) -> Result<f64> {
    let r = e.embed_scalar(x)? - e.embed_scalar(x0)? * alpha.0 - e.embed_scalar(x1)? * alpha.1;
    Ok(r.norm())
}

/// Sparse `P × ∏N_i` operator mapping grid predictions to query predictions (CSR).
#[derive(Debug, Clone, PartialEq)]
pub struct BlendingMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
}

impl BlendingMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// `(column, weight)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, w)| (r, c, w)))
    }

    /// `B·v` for a vectorised grid `v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).map(|(c, w)| w * v[c]).sum())
            .collect())
    }

    /// `Bᵀ·u` for a per-query vector `u`.
    pub fn apply_transpose(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.rows {
            return Err(Error::ShapeMismatch(format!(
                "vector of {} for {} rows",
                u.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, &ur) in u.iter().enumerate() {
            for (c, w) in self.row(r) {
                out[c] += w * ur;
            }
        }
        Ok(out)
    }

    /// `row,col,weight` lines with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,weight")?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r},{c},{v:e}")?;
        }
        Ok(())
    }
}

/// Enclosing cell `(i, β)` of `x` on a strictly increasing grid.
fn locate(grid: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = grid.len();
    if !(x >= grid[0] && x <= grid[n - 1]) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let i = grid.partition_point(|&g| g <= x).saturating_sub(1).min(n - 2);
    Some((i, (x - grid[i]) / (grid[i + 1] - grid[i])))
}

/// Per-axis `(grid index, weight)` pairs of one query, zeros dropped.
fn axis_weights(
    enc: &SeparableEncoding,
    axis: usize,
    x: f64,
    source: Option<DistanceSource>,
) -> Option<Result<Vec<(usize, f64)>>> {
    let grid = &enc.axis_grids()[axis];
    let (i, _) = locate(grid, x)?;
    if grid.len() == 1 {
        return Some(Ok(vec![(0, 1.0)]));
    }
    let e = &enc.embedders()[axis];
    let source = source.unwrap_or_else(|| DistanceSource::default_for(e.kind()));
    Some(
        interp_weights_with(e, grid[i], grid[i + 1], x, source)
            .map(|(a0, a1)| [(i, a0), (i + 1, a1)].into_iter().filter(|&(_, w)| w != 0.0).collect()),
    )
}

/// Blending operator for scattered `queries` (`P × D`) against the grid of `enc`.
pub fn build_blending(enc: &SeparableEncoding, queries: &DMatrix<f64>) -> Result<BlendingMatrix> {
    build_blending_with(enc, queries, None)
}

/// As [`build_blending`], forcing the distance source on every axis.
pub fn build_blending_with(
    enc: &SeparableEncoding,
    queries: &DMatrix<f64>,
    source: Option<DistanceSource>,
) -> Result<BlendingMatrix> {
    let dims = enc.ndim();
    if queries.ncols() != dims {
        return Err(Error::ShapeMismatch(format!(
            "queries have {} columns for a {dims}-D grid",
            queries.ncols()
        )));
    }
    let grid_shape = enc.grid_shape();
    let mut strides = vec![1usize; dims];
    for a in 1..dims {
        strides[a] = strides[a - 1] * grid_shape[a - 1];
    }
    let cols = strides[dims - 1] * grid_shape[dims - 1];

    let rows: Vec<Vec<(usize, f64)>> = (0..queries.nrows())
        .into_par_iter()
        .map(|r| {
            let mut entries = vec![(0usize, 1.0f64)];
            for axis in 0..dims {
                let x = queries[(r, axis)];
                let pairs = axis_weights(enc, axis, x, source).ok_or_else(|| Error::OutOfDomain {
                    index: r,
                    axis,
                    coord: queries.row(r).iter().copied().collect(),
                })??;
                let stride = strides[axis];
                entries = entries
                    .iter()
                    .flat_map(|&(c, w)| pairs.iter().map(move |&(i, a)| (c + i * stride, w * a)))
                    .collect();
            }
            entries.sort_by_key(|&(c, _)| c);
            Ok(entries)
        })
        .collect::<Result<_>>()?;

    let mut row_ptr = Vec::with_capacity(rows.len() + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut weights = Vec::new();
    for entries in &rows {
        for &(c, w) in entries {
            col_idx.push(c);
            weights.push(w);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(BlendingMatrix {
        rows: rows.len(),
        cols,
        row_ptr,
        col_idx,
        weights,
    })
}

/// `B(q)·(Ψ_D ⊗ … ⊗ Ψ₁)ᵀ` for one row: the complex encoding the blending
/// operator assigns to query `row`.
pub fn blended_encoding(enc: &SeparableEncoding, b: &BlendingMatrix, row: usize) -> Result<DVector<f64>> {
    let grid_shape = enc.grid_shape();
    let mut acc: Option<DVector<f64>> = None;
    for (mut c, w) in b.row(row) {
        let parts: Vec<DVector<f64>> = grid_shape
            .iter()
            .enumerate()
            .map(|(axis, &n)| {
                let i = c % n;
                c /= n;
                enc.axis_matrix(axis).column(i).into_owned()
            })
            .collect();
        let v = kron_vectors(&parts)? * w;
        acc = Some(match acc {
            Some(a) => a + v,
            None => v,
        });
    }
    let len = enc.feature_shape().iter().product();
    Ok(acc.unwrap_or_else(|| DVector::zeros(len)))
}

/// Query predictions `B · vec(kron_predict(W))`.
pub fn blended_predict(w: &Tensor, enc: &SeparableEncoding, b: &BlendingMatrix) -> Result<Vec<f64>> {
    b.apply(kron_predict(w, enc)?.data())
}
