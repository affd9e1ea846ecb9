//! A small fully connected ReLU network trained full-batch with hand-written
//! backpropagation.
//!
//! Activations are stored one sample per row: a layer maps `H` (`P × in`) to
//! `H Wᵀ + 1bᵀ` (`P × out`), with `W` stored `out × in`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Name of the initialisation scheme, echoed in reports.
pub const INIT_SCHEME: &str = "he-uniform U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias";

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`.
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub relu: bool,
}

impl DenseLayer {
    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }

    fn apply(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = h * self.weight.transpose();
        for (j, mut col) in z.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.bias[j]);
        }
        if self.relu {
            z.apply(|v| *v = v.max(0.0));
        }
        z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

impl Mlp {
    /// `depth` hidden ReLU layers of `width` units, then a linear output layer.
    pub fn new(inputs: usize, width: usize, depth: usize, outputs: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || outputs == 0 || (depth > 0 && width == 0) {
            return Err(Error::param("width", "layer sizes must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![inputs];
        dims.extend(std::iter::repeat_n(width, depth));
        dims.push(outputs);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / fan_in as f64).sqrt();
                DenseLayer {
                    weight: DMatrix::from_fn(fan_out, fan_in, |_, _| rng.random_range(-limit..limit)),
                    bias: DVector::zeros(fan_out),
                    relu: i < depth,
                }
            })
            .collect();
        Ok(Self { layers })
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        let last = layers.last().ok_or(Error::Empty("layer list"))?;
        if last.relu {
            return Err(Error::param("layers", "the output layer must be linear"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {i} emits {} values, layer {} expects {}",
                    pair[0].outputs(),
                    i + 1,
                    pair[1].inputs()
                )));
            }
        }
        if let Some(l) = layers.iter().find(|l| l.bias.len() != l.outputs()) {
            return Err(Error::ShapeMismatch(format!(
                "bias of {} for {} outputs",
                l.bias.len(),
                l.outputs()
            )));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// `Σ (in·out + out)` over layers.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    fn check_inputs(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.inputs() {
            return Err(Error::ShapeMismatch(format!(
                "{} features for a network with {} inputs",
                x.ncols(),
                self.inputs()
            )));
        }
        Ok(())
    }

    /// Outputs for a batch of rows.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_inputs(x)?;
        let mut h = x.clone();
        for l in &self.layers {
            h = l.apply(&h);
        }
        Ok(h)
    }

    /// Mean squared error over all outputs.
    pub fn loss(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        let p = self.predict(x)?;
        check_targets(&p, y)?;
        Ok((p - y).norm_squared() / y.len() as f64)
    }

    /// Loss and its gradient, flattened in [`Mlp::params`] order.
    pub fn loss_and_gradient(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
        self.check_inputs(x)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for l in &self.layers {
            let next = l.apply(acts.last().expect("input pushed"));
            acts.push(next);
        }
        let out = acts.pop().expect("output layer");
        check_targets(&out, y)?;
        let diff = out - y;
        let loss = diff.norm_squared() / y.len() as f64;
        let mut g = diff * (2.0 / y.len() as f64);

        let mut grads: Vec<(DMatrix<f64>, DVector<f64>)> = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate().rev() {
            let h = &acts[i];
            let dw = g.tr_mul(h);
            let db = DVector::from_iterator(g.ncols(), g.column_iter().map(|c| c.sum()));
            if i > 0 {
                let mut next = &g * &l.weight;
                next.zip_apply(h, |gv, hv| {
                    if hv <= 0.0 {
                        *gv = 0.0
                    }
                });
                g = next;
            }
            grads.push((dw, db));
        }
        grads.reverse();
        let flat = grads
            .iter()
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
            .collect();
        Ok((loss, flat))
    }

    /// All parameters: per layer, the weight (column-major) then the bias.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weight.len();
            l.weight.as_mut_slice().copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.as_mut_slice().copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        Ok(())
    }
}

fn check_targets(out: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if out.shape() != y.shape() {
        return Err(Error::ShapeMismatch(format!(
            "targets {:?} for outputs {:?}",
            y.shape(),
            out.shape()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    /// Plain gradient descent.
    Gd,
    Adam {
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpOptions {
    pub depth: usize,
    pub width: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for MlpOptions {
    fn default() -> Self {
        Self {
            depth: 1,
            width: 64,
            lr: 1e-3,
            epochs: 1000,
            seed: 0,
            optimizer: Optimizer::Gd,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpFit {
    pub model: Mlp,
    /// Loss before every step plus the final loss (`epochs + 1` entries).
    pub loss_curve: Vec<f64>,
}

/// Trains an MLP on `features` (`P × F`) against `targets` (`P × c`).
pub fn mlp_train(features: &DMatrix<f64>, targets: &DMatrix<f64>, opts: &MlpOptions) -> Result<MlpFit> {
    if !(opts.lr > 0.0 && opts.lr.is_finite()) {
        return Err(Error::param("lr", format!("must be positive, got {}", opts.lr)));
    }
    if opts.epochs == 0 {
        return Err(Error::param("epochs", "must be at least 1"));
    }
    if features.nrows() == 0 {
        return Err(Error::Empty("training set"));
    }
    if features.nrows() != targets.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows for {} targets",
            features.nrows(),
            targets.nrows()
        )));
    }
    let mut model = Mlp::new(features.ncols(), opts.width, opts.depth, targets.ncols(), opts.seed)?;
    let mut params = model.params();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut curve = Vec::with_capacity(opts.epochs + 1);
    for epoch in 1..=opts.epochs {
        let (loss, grad) = model.loss_and_gradient(features, targets)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { epoch, loss });
        }
        curve.push(loss);
        match opts.optimizer {
            Optimizer::Gd => {
                for (p, g) in params.iter_mut().zip(&grad) {
                    *p -= opts.lr * g;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(epoch as i32);
                let c2 = 1.0 - beta2.powi(epoch as i32);
                for i in 0..params.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    params[i] -= opts.lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
        model.set_params(&params)?;
    }
    let last = model.loss(features, targets)?;
    if !last.is_finite() {
        return Err(Error::Divergence {
            epoch: opts.epochs,
            loss: last,
        });
    }
    curve.push(last);
    Ok(MlpFit {
        model,
        loss_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::linear::{gd_fit_linear, DenseDesign, GdOptions};

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn parameter_count_of_reference_network() {
        let m = Mlp::new(512, 256, 4, 3, 0).unwrap();
        assert_eq!(m.param_count(), 329_475);
        assert_eq!(m.depth(), 4);
        assert_eq!(m.params().len(), 329_475);
    }

    #[test]
    fn identity_layer_is_affine() {
        let layer = DenseLayer {
            weight: DMatrix::identity(3, 3),
            bias: DVector::from_vec(vec![0.5, -1.0, 2.0]),
            relu: false,
        };
        let m = Mlp::from_layers(vec![layer]).unwrap();
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -4.0, 5.0, -6.0]);
        let y = m.predict(&x).unwrap();
        assert_eq!(y, DMatrix::from_row_slice(2, 3, &[1.5, 1.0, 5.0, -3.5, 4.0, -4.0]));
        let zero = Mlp::from_layers(vec![DenseLayer {
            weight: DMatrix::zeros(1, 3),
            bias: DVector::from_element(1, 0.7),
            relu: false,
        }])
        .unwrap();
        assert!(zero.predict(&x).unwrap().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn rejects_bad_layers() {
        let relu_out = DenseLayer {
            weight: DMatrix::zeros(1, 2),
            bias: DVector::zeros(1),
            relu: true,
        };
        assert!(Mlp::from_layers(vec![relu_out]).is_err());
        let a = DenseLayer {
            weight: DMatrix::zeros(3, 2),
            bias: DVector::zeros(3),
            relu: true,
        };
        let b = DenseLayer {
            weight: DMatrix::zeros(1, 4),
            bias: DVector::zeros(1),
            relu: false,
        };
        assert!(Mlp::from_layers(vec![a, b]).is_err());
        let m = Mlp::new(2, 4, 1, 1, 0).unwrap();
        assert!(m.predict(&DMatrix::zeros(3, 5)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random(12, 5, &mut rng);
        let y = random(12, 2, &mut rng);
        let mut m = Mlp::new(5, 8, 3, 2, 7).unwrap();
        let mut p = m.params();
        p.iter_mut().for_each(|v| *v += 0.1 * rng.random_range(-1.0..1.0));
        m.set_params(&p).unwrap();
        let (_, g) = m.loss_and_gradient(&x, &y).unwrap();
        let h = 1e-5;
        let mut fd = vec![0.0; p.len()];
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i] = p[i] + h;
            m.set_params(&q).unwrap();
            let up = m.loss(&x, &y).unwrap();
            q[i] = p[i] - h;
            m.set_params(&q).unwrap();
            let down = m.loss(&x, &y).unwrap();
            fd[i] = (up - down) / (2.0 * h);
        }
        let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = g
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
            .max(fd.iter().map(|a| a * a).sum::<f64>().sqrt());
        assert!(num / den < 1e-4, "relative error {}", num / den);
    }

    #[test]
    fn training_is_bit_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random(40, 6, &mut rng);
        let y = random(40, 1, &mut rng);
        let opts = MlpOptions {
            depth: 2,
            width: 16,
            lr: 1e-2,
            epochs: 50,
            seed: 3,
            optimizer: Optimizer::adam(),
        };
        let a = mlp_train(&x, &y, &opts).unwrap();
        let b = mlp_train(&x, &y, &opts).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.loss_curve, b.loss_curve);
        assert!(a.loss_curve.last().unwrap() < &a.loss_curve[0]);
        let c = mlp_train(&x, &y, &MlpOptions { seed: 4, ..opts }).unwrap();
        assert_ne!(a.model, c.model);
    }

    #[test]
    fn depth_zero_matches_linear_gd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // orthogonal-ish features so both runs converge to the least-squares optimum
        let x = random(64, 6, &mut rng);
        let y = DMatrix::from_fn(64, 1, |_, _| rng.random_range(0.0..1.0));
        let mlp = mlp_train(
            &x,
            &y,
            &MlpOptions {
                depth: 0,
                lr: 0.05,
                epochs: 4000,
                ..MlpOptions::default()
            },
        )
        .unwrap();
        let lin = gd_fit_linear(
            &DenseDesign { features: x.clone() },
            &[y.column(0).iter().copied().collect()],
            &GdOptions {
                epochs: 4000,
                fit_bias: true,
                ..GdOptions::default()
            },
        )
        .unwrap();
        let a = *mlp.loss_curve.last().unwrap();
        let b = *lin.loss_curve.last().unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn divergence_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(20, 4, &mut rng) * 100.0;
        let y = random(20, 1, &mut rng);
        let opts = MlpOptions {
            depth: 1,
            width: 8,
            lr: 10.0,
            epochs: 200,
            ..MlpOptions::default()
        };
        assert!(matches!(mlp_train(&x, &y, &opts), Err(Error::Divergence { .. })));
        assert!(mlp_train(&x, &y, &MlpOptions { lr: 0.0, ..opts }).is_err());
    }
}
