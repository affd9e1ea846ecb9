//! Target signals on separable grids, train/test splits, I/O and scoring.
//!
//! Axis `i` of an `N`-point grid sits at coordinate `i/(N−1)` (a single point
//! sits at 0), so every axis spans `[0, 1]` inclusive. Images are stored with
//! axis 1 = row (y) and axis 2 = column (x), i.e. shape `(H, W)`.

use std::f64::consts::TAU;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::tensor::{load_tensor, save_tensor, Tensor};

/// PSNR reported for a perfect reconstruction.
pub const PSNR_CAP_DB: f64 = 99.0;

/// `i/(N−1)` for `i = 0..N`.
pub fn unit_axis(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// A multi-channel signal sampled on a full Cartesian grid, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    channels: Vec<Tensor>,
    axes: Vec<Vec<f64>>,
}

impl GridSignal {
    /// Signal on the unit grid; every channel must share one shape.
    pub fn new(channels: Vec<Tensor>) -> Result<Self> {
        let first = channels.first().ok_or(Error::Empty("channel list"))?;
        let axes = first.shape().iter().map(|&n| unit_axis(n)).collect();
        Self::with_axes(channels, axes)
    }

    /// Signal on an explicit grid (for example the sub-grid kept by [`grid_split`]).
    pub fn with_axes(channels: Vec<Tensor>, axes: Vec<Vec<f64>>) -> Result<Self> {
        let first = channels.first().ok_or(Error::Empty("channel list"))?;
        let shape = first.shape().to_vec();
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Empty("grid"));
        }
        if channels.iter().any(|c| c.shape() != shape.as_slice()) {
            return Err(Error::ShapeMismatch("channels differ in shape".into()));
        }
        if axes.len() != shape.len() || axes.iter().zip(&shape).any(|(a, &n)| a.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "axis coordinates do not match grid shape {shape:?}"
            )));
        }
        for a in &axes {
            if a.windows(2).any(|w| !(w[0] < w[1])) || a.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::param(
                    "axes",
                    "coordinates must be strictly increasing within [0, 1]",
                ));
            }
        }
        for c in &channels {
            if let Some(v) = c.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::param("values", format!("{v} lies outside [0, 1]")));
            }
        }
        Ok(Self { channels, axes })
    }

    pub fn shape(&self) -> &[usize] {
        self.channels[0].shape()
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_points(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channels(&self) -> &[Tensor] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &Tensor {
        &self.channels[c]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Grid index of a column-major flat offset.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        self.shape()
            .iter()
            .map(|&n| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }

    /// Coordinates of every grid point in flat order (`P × D`).
    pub fn coordinates(&self) -> DMatrix<f64> {
        let p = self.num_points();
        let mut m = DMatrix::zeros(p, self.ndim());
        for flat in 0..p {
            for (axis, i) in self.unravel(flat).into_iter().enumerate() {
                m[(flat, axis)] = self.axes[axis][i];
            }
        }
        m
    }

    /// Values in flat order (`P × c`).
    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.num_points(), self.num_channels(), |p, c| {
            self.channels[c].data()[p]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Scattered samples of a grid signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    /// `P × D`, within `[0, 1]^D`.
    pub coords: DMatrix<f64>,
    /// `P × c`.
    pub values: DMatrix<f64>,
    pub split: Split,
    /// Column-major flat grid index of each sample in the source signal.
    pub indices: Vec<usize>,
}

impl SampleSet {
    fn gather(sig: &GridSignal, indices: Vec<usize>, split: Split) -> Self {
        let d = sig.ndim();
        let mut coords = DMatrix::zeros(indices.len(), d);
        let mut values = DMatrix::zeros(indices.len(), sig.num_channels());
        for (row, &flat) in indices.iter().enumerate() {
            for (axis, i) in sig.unravel(flat).into_iter().enumerate() {
                coords[(row, axis)] = sig.axes()[axis][i];
            }
            for c in 0..sig.num_channels() {
                values[(row, c)] = sig.channel(c).data()[flat];
            }
        }
        Self {
            coords,
            values,
            split,
            indices,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Keeps every `stride`-th point per axis (starting at 0) as a training grid;
/// all other points form the test set.
pub fn grid_split(sig: &GridSignal, stride: usize) -> Result<(GridSignal, SampleSet)> {
    if stride < 2 {
        return Err(Error::param("stride", format!("must be at least 2, got {stride}")));
    }
    for (axis, &n) in sig.shape().iter().enumerate() {
        if stride >= n || n % stride != 0 {
            return Err(Error::param(
                "stride",
                format!("{stride} does not divide axis {axis} of size {n} into a proper sub-grid"),
            ));
        }
    }
    let sub_shape: Vec<usize> = sig.shape().iter().map(|n| n / stride).collect();
    let sub_axes: Vec<Vec<f64>> = sig
        .axes()
        .iter()
        .map(|a| a.iter().copied().step_by(stride).collect())
        .collect();
    let mut keep = vec![false; sig.num_points()];
    let mut channels: Vec<Tensor> = (0..sig.num_channels()).map(|_| Tensor::zeros(&sub_shape)).collect();
    let sub_len: usize = sub_shape.iter().product();
    let mut idx = vec![0usize; sub_shape.len()];
    for sub_flat in 0..sub_len {
        let full: Vec<usize> = idx.iter().map(|i| i * stride).collect();
        let flat = sig.channel(0).offset(&full);
        keep[flat] = true;
        for (c, ch) in channels.iter_mut().enumerate() {
            ch.data_mut()[sub_flat] = sig.channel(c).data()[flat];
        }
        for (axis, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < sub_shape[axis] {
                break;
            }
            *i = 0;
        }
    }
    let test: Vec<usize> = (0..sig.num_points()).filter(|&p| !keep[p]).collect();
    let train = GridSignal::with_axes(channels, sub_axes)?;
    Ok((train, SampleSet::gather(sig, test, Split::Test)))
}

/// Seeded uniform split without replacement; `round(fraction · P)` training points.
pub fn random_split(sig: &GridSignal, fraction: f64, seed: u64) -> Result<(SampleSet, SampleSet)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param("fraction", format!("must lie in (0, 1), got {fraction}")));
    }
    let total = sig.num_points();
    let n_train = (fraction * total as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = sample(&mut rng, total, n_train).into_vec();
    train.sort_unstable();
    let mut is_train = vec![false; total];
    for &i in &train {
        is_train[i] = true;
    }
    let test = (0..total).filter(|&i| !is_train[i]).collect();
    Ok((
        SampleSet::gather(sig, train, Split::Train),
        SampleSet::gather(sig, test, Split::Test),
    ))
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} targets",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Empty("prediction"));
    }
    Ok(pred.iter().zip(target).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / pred.len() as f64)
}

/// `10·log₁₀(1/MSE)` for peak 1, capped at [`PSNR_CAP_DB`].
pub fn psnr(pred: &[f64], target: &[f64]) -> Result<f64> {
    Ok(psnr_from_mse(mse(pred, target)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        return PSNR_CAP_DB;
    }
    (-10.0 * mse.log10()).min(PSNR_CAP_DB)
}

fn image_channels(img: &DynamicImage) -> Result<Vec<Tensor>> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, scale, raw): (usize, f64, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (1, 255.0, b.as_raw().iter().map(|&v| v as f64).collect()),
        DynamicImage::ImageLuma16(b) => (1, 65535.0, b.as_raw().iter().map(|&v| v as f64).collect()),
        DynamicImage::ImageRgb8(b) => (3, 255.0, b.as_raw().iter().map(|&v| v as f64).collect()),
        DynamicImage::ImageRgb16(b) => (3, 65535.0, b.as_raw().iter().map(|&v| v as f64).collect()),
        other => {
            return Err(Error::UnsupportedImage(format!(
                "{:?}; expected 8- or 16-bit grayscale or RGB",
                other.color()
            )))
        }
    };
    Ok((0..channels)
        .map(|c| {
            let mut t = Tensor::zeros(&[h, w]);
            for y in 0..h {
                for x in 0..w {
                    t.set(&[y, x], raw[(y * w + x) * channels + c] / scale);
                }
            }
            t
        })
        .collect())
}

/// Reads an 8- or 16-bit grayscale or RGB PNG as a `(H, W)` signal.
pub fn load_image(path: impl AsRef<Path>) -> Result<GridSignal> {
    let img = image::open(path)?;
    GridSignal::new(image_channels(&img)?)
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes one or three `(H, W)` channels as an 8-bit PNG, clipped to `[0, 1]`.
pub fn save_image(path: impl AsRef<Path>, channels: &[Tensor]) -> Result<()> {
    let first = channels.first().ok_or(Error::Empty("channel list"))?;
    if first.ndim() != 2 || channels.iter().any(|c| c.shape() != first.shape()) {
        return Err(Error::ShapeMismatch("images need equal-shaped 2-D channels".into()));
    }
    let (h, w) = (first.shape()[0], first.shape()[1]);
    let (wu, hu) = (w as u32, h as u32);
    match channels.len() {
        1 => {
            let buf = ImageBuffer::from_fn(wu, hu, |x, y| Luma([to_u8(first.get(&[y as usize, x as usize]))]));
            buf.save(path)?;
        }
        3 => {
            let buf = ImageBuffer::from_fn(wu, hu, |x, y| {
                let at = [y as usize, x as usize];
                Rgb([
                    to_u8(channels[0].get(&at)),
                    to_u8(channels[1].get(&at)),
                    to_u8(channels[2].get(&at)),
                ])
            });
            buf.save(path)?;
        }
        n => return Err(Error::UnsupportedImage(format!("{n} channels; expected 1 or 3"))),
    }
    Ok(())
}

/// Loads a 3-D `(H, W, T)` signal from a directory of equally sized PNG
/// frames (sorted by file name) or from a raw tensor file.
///
/// A tensor file is read as a single channel whose shape is the grid shape.
pub fn load_volume(path: impl AsRef<Path>) -> Result<GridSignal> {
    let path = path.as_ref();
    if !path.is_dir() {
        let (t, _) = load_tensor(path)?;
        return GridSignal::new(vec![t]);
    }
    let mut frames: Vec<_> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(Error::Empty("frame directory"));
    }
    let per_frame = frames
        .iter()
        .map(|f| image_channels(&image::open(f)?))
        .collect::<Result<Vec<_>>>()?;
    let first = &per_frame[0];
    if per_frame
        .iter()
        .any(|f| f.len() != first.len() || f[0].shape() != first[0].shape())
    {
        return Err(Error::ShapeMismatch("frames differ in size or channel count".into()));
    }
    let (h, w, t) = (first[0].shape()[0], first[0].shape()[1], per_frame.len());
    let channels = (0..first.len())
        .map(|c| {
            let mut data = Vec::with_capacity(h * w * t);
            for f in &per_frame {
                data.extend_from_slice(f[c].data());
            }
            Tensor::from_vec(&[h, w, t], data)
        })
        .collect::<Result<Vec<_>>>()?;
    GridSignal::new(channels)
}

/// Writes channels to a raw tensor file; multi-channel data gains a trailing
/// channel axis.
pub fn save_volume(path: impl AsRef<Path>, channels: &[Tensor]) -> Result<()> {
    let first = channels.first().ok_or(Error::Empty("channel list"))?;
    if channels.len() == 1 {
        return save_tensor(path, first, &[]);
    }
    let mut shape = first.shape().to_vec();
    shape.push(channels.len());
    let data = channels.iter().flat_map(|c| c.data().iter().copied()).collect();
    save_tensor(path, &Tensor::from_vec(&shape, data)?, &[])
}

fn fft_axis(buf: &mut [Complex<f64>], shape: &[usize], axis: usize, planner: &mut FftPlanner<f64>) {
    let n = shape[axis];
    let stride: usize = shape[..axis].iter().product();
    let fft = planner.plan_fft_inverse(n);
    let mut line = vec![Complex::new(0.0, 0.0); n];
    let block = stride * n;
    for start in (0..buf.len()).step_by(block) {
        for offset in 0..stride {
            for (k, l) in line.iter_mut().enumerate() {
                *l = buf[start + offset + k * stride];
            }
            fft.process(&mut line);
            for (k, l) in line.iter().enumerate() {
                buf[start + offset + k * stride] = *l;
            }
        }
    }
}

/// Random-phase noise with a `1/|f|` amplitude spectrum, rescaled to `[0, 1]`.
pub fn pink_noise(shape: &[usize], seed: u64) -> Result<Tensor> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Empty("noise shape"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len: usize = shape.iter().product();
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    let mut index = vec![0usize; shape.len()];
    for v in buf.iter_mut() {
        let f2: f64 = index
            .iter()
            .zip(shape)
            .map(|(&k, &n)| (k.min(n - k) as f64).powi(2))
            .sum();
        let phase = rng.random_range(0.0..TAU);
        if f2 > 0.0 {
            *v = Complex::from_polar(1.0 / f2.sqrt(), phase);
        }
        for (axis, i) in index.iter_mut().enumerate() {
            *i += 1;
            if *i < shape[axis] {
                break;
            }
            *i = 0;
        }
    }
    let mut planner = FftPlanner::new();
    for axis in 0..shape.len() {
        fft_axis(&mut buf, shape, axis, &mut planner);
    }
    let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let (lo, hi) = re
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    Tensor::from_vec(shape, re.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect())
}

/// A natural-looking 1-D scanline: pink noise on `n` points.
pub fn synthetic_scanline(n: usize, seed: u64) -> Result<GridSignal> {
    GridSignal::new(vec![pink_noise(&[n], seed)?])
}

/// A grayscale `n × n` test image: pink noise with six soft-edged discs blended in.
pub fn synthetic_image(n: usize, seed: u64) -> Result<GridSignal> {
    let mut img = pink_noise(&[n, n], seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let axis = unit_axis(n);
    for _ in 0..6 {
        let (cy, cx) = (rng.random::<f64>(), rng.random::<f64>());
        let r = 0.05 + 0.2 * rng.random::<f64>();
        let value = rng.random::<f64>();
        for x in 0..n {
            for y in 0..n {
                if (axis[x] - cx).powi(2) + (axis[y] - cy).powi(2) < r * r {
                    let v = img.get(&[y, x]);
                    img.set(&[y, x], 0.5 * v + 0.5 * value);
                }
            }
        }
    }
    GridSignal::new(vec![img])
}

/// A single-channel `(n, n, frames)` volume of 3-D pink noise.
pub fn synthetic_volume(n: usize, frames: usize, seed: u64) -> Result<GridSignal> {
    GridSignal::new(vec![pink_noise(&[n, n, frames], seed)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_assume, proptest, ProptestConfig};

    fn ramp(shape: &[usize]) -> GridSignal {
        let len: usize = shape.iter().product();
        let t = Tensor::from_vec(shape, (0..len).map(|i| i as f64 / len as f64).collect()).unwrap();
        GridSignal::new(vec![t]).unwrap()
    }

    #[test]
    fn rejects_out_of_range_values() {
        let t = Tensor::from_vec(&[2], vec![0.5, 1.5]).unwrap();
        assert!(GridSignal::new(vec![t]).is_err());
        assert_eq!(unit_axis(5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn psnr_examples() {
        let a = vec![0.2, 0.4, 0.6];
        assert_eq!(psnr(&a, &a).unwrap(), PSNR_CAP_DB);
        let b: Vec<f64> = a.iter().map(|v| v + 0.1).collect();
        assert!((psnr(&b, &a).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &b[..2]).is_err());
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn psnr_decreases_with_noise_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let target: Vec<f64> = (0..500).map(|_| rng.random()).collect();
        let noise: Vec<f64> = (0..500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut prev = f64::INFINITY;
        for a in [0.001, 0.01, 0.05, 0.1, 0.3] {
            let pred: Vec<f64> = target.iter().zip(&noise).map(|(t, n)| t + a * n).collect();
            let p = psnr(&pred, &target).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn grid_split_halves_axes() {
        let sig = synthetic_image(64, 1).unwrap();
        let (train, test) = grid_split(&sig, 2).unwrap();
        assert_eq!(train.shape(), &[32, 32]);
        assert_eq!(train.axes()[0][1], sig.axes()[0][2]);
        assert_eq!(train.num_points() + test.len(), sig.num_points());
        assert_eq!(train.channel(0).get(&[3, 5]), sig.channel(0).get(&[6, 10]));
        assert!(grid_split(&sig, 64).is_err());
        assert!(grid_split(&sig, 1).is_err());
        assert!(grid_split(&ramp(&[10]), 3).is_err());
    }

    #[test]
    fn grid_split_partitions_3d() {
        let sig = ramp(&[4, 6, 4]);
        let (train, test) = grid_split(&sig, 2).unwrap();
        assert_eq!(train.shape(), &[2, 3, 2]);
        let mut seen = vec![0u8; sig.num_points()];
        for &i in &test.indices {
            seen[i] += 1;
        }
        for v in train.channel(0).data() {
            let flat = sig.channel(0).data().iter().position(|x| x == v).unwrap();
            seen[flat] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn random_split_examples() {
        let sig = ramp(&[64, 64]);
        let (train, test) = random_split(&sig, 0.25, 7).unwrap();
        assert_eq!(train.len(), 1024);
        assert_eq!(test.len(), 3072);
        let (again, _) = random_split(&sig, 0.25, 7).unwrap();
        assert_eq!(train, again);
        assert!(train.indices.iter().all(|i| test.indices.binary_search(i).is_err()));
        assert!(train.coords.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(random_split(&sig, 1.0, 0).is_err());
    }

    #[test]
    fn image_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("px.png");
        let buf = ImageBuffer::from_raw(2, 2, vec![0u8, 255, 255, 0])
            .map(|b: ImageBuffer<Luma<u8>, _>| b)
            .unwrap();
        buf.save(&path).unwrap();
        let sig = load_image(&path).unwrap();
        assert_eq!(sig.shape(), &[2, 2]);
        assert_eq!(sig.channel(0).to_row_major(), vec![0.0, 1.0, 1.0, 0.0]);

        let img = synthetic_image(16, 3).unwrap();
        let a = dir.path().join("a.png");
        save_image(&a, img.channels()).unwrap();
        let first = load_image(&a).unwrap();
        let b = dir.path().join("b.png");
        save_image(&b, first.channels()).unwrap();
        assert_eq!(load_image(&b).unwrap(), first);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

        let deep = dir.path().join("deep.png");
        let buf16: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(2, 1, vec![0u16, 65535]).unwrap();
        buf16.save(&deep).unwrap();
        assert_eq!(load_image(&deep).unwrap().channel(0).data(), &[0.0, 1.0]);

        let rgba = dir.path().join("rgba.png");
        image::RgbaImage::new(2, 2).save(&rgba).unwrap();
        assert!(matches!(load_image(&rgba), Err(Error::UnsupportedImage(_))));
    }

    #[test]
    fn volume_from_frames_and_tensor() {
        let dir = tempfile::tempdir().unwrap();
        for (i, v) in [10u8, 20, 30].iter().enumerate() {
            image::GrayImage::from_pixel(4, 3, Luma([*v]))
                .save(dir.path().join(format!("f{i}.png")))
                .unwrap();
        }
        let vol = load_volume(dir.path()).unwrap();
        assert_eq!(vol.shape(), &[3, 4, 3]);
        assert_eq!(vol.channel(0).get(&[2, 3, 1]), 20.0 / 255.0);

        let raw = dir.path().join("vol.kft");
        save_volume(&raw, vol.channels()).unwrap();
        assert_eq!(load_volume(&raw).unwrap(), vol);
    }

    #[test]
    fn synthetic_signals_are_normalised_and_seeded() {
        let a = synthetic_scanline(512, 4).unwrap();
        let v = a.channel(0).data();
        assert_eq!(v.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        assert_eq!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        assert_eq!(a, synthetic_scanline(512, 4).unwrap());
        assert_ne!(a, synthetic_scanline(512, 5).unwrap());
        assert_eq!(synthetic_volume(8, 4, 0).unwrap().shape(), &[8, 8, 4]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn grid_split_is_a_partition(n1 in 1usize..5, n2 in 1usize..5, stride in 2usize..4) {
            let sig = ramp(&[n1 * stride, n2 * stride]);
            prop_assume!(n1 * stride > stride && n2 * stride > stride);
            let (train, test) = grid_split(&sig, stride).unwrap();
            prop_assert_eq!(train.num_points() + test.len(), sig.num_points());
            let mut all: Vec<f64> = test.values.iter().copied().chain(train.channel(0).data().iter().copied()).collect();
            all.sort_by(f64::total_cmp);
            let mut want = sig.channel(0).data().to_vec();
            want.sort_by(f64::total_cmp);
            prop_assert_eq!(all, want);
        }

        #[test]
        fn psnr_ignores_channel_order(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<f64> = (0..30).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..30).map(|_| rng.random()).collect();
            let swap = |v: &[f64]| [&v[10..20], &v[..10], &v[20..]].concat();
            let p = psnr(&a, &b).unwrap();
            prop_assert!((p - psnr(&swap(&a), &swap(&b)).unwrap()).abs() < 1e-12);
            prop_assert!((p - psnr(&b, &a).unwrap()).abs() < 1e-12);
        }
    }
}
