//! Fitting the linear model on complex encodings, and the MLP baseline.

pub mod linear;
pub mod mlp;

use std::path::Path;

use crate::encoding::{kron_predict, SeparableEncoding};
use crate::error::{Error, Result};
use crate::tensor::{load_tensor, save_tensor, Tensor, MAX_AXES};

pub use linear::{
    closed_form_fit, closed_form_fit_with, gd_fit_linear, BlendedDesign, ClosedFormOptions, DenseDesign, GdFit,
    GdOptions, LinearDesign, SeparableDesign,
};
pub use mlp::{mlp_train, DenseLayer, Mlp, MlpFit, MlpOptions, Optimizer};

/// Weights of the complex-encoding linear model: one `(K₁, …, K_D)` tensor and
/// one bias per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    channels: Vec<Tensor>,
    bias: Vec<f64>,
}

impl WeightTensor {
    pub fn new(channels: Vec<Tensor>, bias: Vec<f64>) -> Result<Self> {
        let first = channels.first().ok_or(Error::Empty("weight channels"))?;
        if channels.iter().any(|c| c.shape() != first.shape()) {
            return Err(Error::ShapeMismatch("weight channels differ in shape".into()));
        }
        if bias.len() != channels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} biases for {} channels",
                bias.len(),
                channels.len()
            )));
        }
        if channels
            .iter()
            .flat_map(|c| c.data())
            .chain(&bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("weights"));
        }
        Ok(Self { channels, bias })
    }

    pub fn zeros(shape: &[usize], channels: usize) -> Self {
        Self {
            channels: (0..channels).map(|_| Tensor::zeros(shape)).collect(),
            bias: vec![0.0; channels],
        }
    }

    pub fn shape(&self) -> &[usize] {
        self.channels[0].shape()
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, c: usize) -> &Tensor {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Tensor] {
        &self.channels
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// `c · ∏K_i` weights; biases are not counted.
    pub fn param_count(&self) -> usize {
        self.channels.iter().map(Tensor::len).sum()
    }

    /// Grid predictions per channel, bias included.
    pub fn predict_grid(&self, enc: &SeparableEncoding) -> Result<Vec<Tensor>> {
        self.channels
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| {
                let mut t = kron_predict(w, enc)?;
                t.data_mut().iter_mut().for_each(|v| *v += b);
                Ok(t)
            })
            .collect()
    }

    /// Raw tensor file of shape `(K₁, …, K_D, c)` followed by the `c` biases.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut shape = self.shape().to_vec();
        shape.push(self.num_channels());
        if shape.len() > MAX_AXES {
            return Err(Error::TensorFormat(format!(
                "{} axes exceed the file limit of {MAX_AXES}",
                shape.len()
            )));
        }
        let data = self.channels.iter().flat_map(|c| c.data().iter().copied()).collect();
        save_tensor(path, &Tensor::from_vec(&shape, data)?, &self.bias)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (t, bias) = load_tensor(path)?;
        let (&c, k) = t
            .shape()
            .split_last()
            .filter(|(_, k)| !k.is_empty())
            .ok_or_else(|| Error::TensorFormat("weight file needs a channel axis".into()))?;
        if bias.len() != c {
            return Err(Error::TensorFormat(format!("{} biases for {c} channels", bias.len())));
        }
        let per: usize = k.iter().product();
        let channels = t
            .data()
            .chunks(per)
            .map(|chunk| Tensor::from_vec(k, chunk.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels, bias)
    }
}
