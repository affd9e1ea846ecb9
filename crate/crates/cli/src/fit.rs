//! `fit`: split → encode → solve → evaluate on one signal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use coordenc::encoding::{build_blending, simple_features, SeparableEncoding};
use coordenc::signals::{grid_split, load_image, load_volume, psnr, random_split, save_image, save_volume, GridSignal};
use coordenc::solvers::{
    closed_form_fit_with, gd_fit_linear, mlp_train, BlendedDesign, ClosedFormOptions, DenseDesign, GdOptions,
    LinearDesign, MlpOptions, Optimizer, SeparableDesign, WeightTensor,
};
use coordenc::tensor::save_tensor;
use coordenc::{Embedder, Tensor};
use nalgebra::DMatrix;

use crate::config::{ExperimentConfig, Mode, OptimizerKind, SolverKind, SplitSpec, DEFAULT_MLP_LR};
use crate::report::{MemoryEstimate, PhaseTimings, PsnrReport, ReconstructionReport};
use crate::{write_file, CliError};

/// PNG files and directories of frames load as images or volumes; anything
/// else is read as a raw tensor file.
pub fn load_input(path: &Path) -> Result<GridSignal, CliError> {
    let is_png = path.extension().is_some_and(|x| x.eq_ignore_ascii_case("png"));
    Ok(if is_png { load_image(path)? } else { load_volume(path)? })
}

enum Model {
    Linear(WeightTensor),
    /// Linear map on simple features.
    Dense(WeightTensor),
    Mlp(coordenc::solvers::Mlp),
}

struct Trained {
    model: Model,
    loss_curve: Vec<f64>,
    lr: Option<f64>,
    memory: MemoryEstimate,
}

/// Training data plus the flat indices of the training and held-out samples.
fn split(cfg: &ExperimentConfig, sig: &GridSignal) -> Result<(Training, Vec<usize>, Vec<usize>), CliError> {
    let all = sig.num_points();
    Ok(match cfg.split {
        SplitSpec::None => (Training::Grid(sig.clone()), (0..all).collect(), Vec::new()),
        SplitSpec::Grid { stride } => {
            let (train, test) = grid_split(sig, stride)?;
            let mut held = vec![false; all];
            test.indices.iter().for_each(|&i| held[i] = true);
            let train_idx = (0..all).filter(|&i| !held[i]).collect();
            (Training::Grid(train), train_idx, test.indices)
        }
        SplitSpec::Random { fraction } => {
            let (train, test) = random_split(sig, fraction, cfg.seed)?;
            let idx = train.indices.clone();
            (Training::Scattered(train), idx, test.indices)
        }
    })
}

enum Training {
    Grid(GridSignal),
    Scattered(coordenc::signals::SampleSet),
}

impl Training {
    fn coords(&self) -> DMatrix<f64> {
        match self {
            Training::Grid(g) => g.coordinates(),
            Training::Scattered(s) => s.coords.clone(),
        }
    }

    fn values(&self) -> DMatrix<f64> {
        match self {
            Training::Grid(g) => g.values(),
            Training::Scattered(s) => s.values.clone(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Training::Grid(g) => g.num_points(),
            Training::Scattered(s) => s.len(),
        }
    }
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn gd_options(cfg: &ExperimentConfig, fit_bias: bool) -> GdOptions {
    GdOptions {
        lr: cfg.lr,
        epochs: cfg.epochs,
        seed: cfg.seed,
        init_scale: 0.0,
        fit_bias,
    }
}

fn train(
    cfg: &ExperimentConfig,
    sig: &GridSignal,
    data: &Training,
    embedders: &[Embedder],
    timings: &mut PhaseTimings,
) -> Result<Trained, CliError> {
    let features: Vec<usize> = embedders.iter().map(Embedder::output_len).collect();
    let c = sig.num_channels();
    match (cfg.mode, cfg.solver, data) {
        (Mode::Complex, SolverKind::Closed, Training::Grid(grid)) => {
            let t = Instant::now();
            let enc = SeparableEncoding::new(embedders.to_vec(), grid.axes().to_vec())?;
            timings.encode = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let opts = ClosedFormOptions {
                ridge: cfg.ridge,
                pinv: cfg.pinv,
            };
            let w = closed_form_fit_with(&enc, grid, &opts)?;
            timings.solve = t.elapsed().as_secs_f64();
            Ok(Trained {
                model: Model::Linear(w),
                loss_curve: Vec::new(),
                lr: None,
                memory: MemoryEstimate::separable(c, &features, grid.shape()),
            })
        }
        (Mode::Complex, SolverKind::Gd, _) => {
            let t = Instant::now();
            let (enc, blend) = match data {
                Training::Grid(grid) => (SeparableEncoding::new(embedders.to_vec(), grid.axes().to_vec())?, None),
                Training::Scattered(samples) => {
                    let enc = SeparableEncoding::new(embedders.to_vec(), sig.axes().to_vec())?;
                    let blend = build_blending(&enc, &samples.coords)?;
                    (enc, Some(blend))
                }
            };
            timings.encode = t.elapsed().as_secs_f64();
            let design: Box<dyn LinearDesign + '_> = match &blend {
                None => Box::new(SeparableDesign { enc: &enc }),
                Some(b) => Box::new(BlendedDesign { enc: &enc, blend: b }),
            };
            let t = Instant::now();
            let fit = gd_fit_linear(design.as_ref(), &columns(&data.values()), &gd_options(cfg, false))?;
            timings.solve = t.elapsed().as_secs_f64();
            let grid = enc.grid_shape();
            let memory = match &blend {
                None => MemoryEstimate::separable(c, &features, &grid),
                Some(b) => MemoryEstimate::blended(c, &features, &grid, b.rows()),
            };
            Ok(Trained {
                model: Model::Linear(fit.weights),
                loss_curve: fit.loss_curve,
                lr: Some(fit.lr),
                memory,
            })
        }
        (Mode::Simple, SolverKind::Gd, _) => {
            let t = Instant::now();
            let x = simple_features(embedders, &data.coords())?;
            timings.encode = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let design = DenseDesign { features: x };
            let fit = gd_fit_linear(&design, &columns(&data.values()), &gd_options(cfg, true))?;
            timings.solve = t.elapsed().as_secs_f64();
            let params = fit.weights.param_count() + c;
            Ok(Trained {
                memory: MemoryEstimate::simple(data.len(), &features, params),
                model: Model::Dense(fit.weights),
                loss_curve: fit.loss_curve,
                lr: Some(fit.lr),
            })
        }
        (Mode::Simple, SolverKind::Mlp, _) => {
            let t = Instant::now();
            let x = simple_features(embedders, &data.coords())?;
            timings.encode = t.elapsed().as_secs_f64();
            let opts = MlpOptions {
                depth: cfg.depth,
                width: cfg.width,
                lr: cfg.lr.unwrap_or(DEFAULT_MLP_LR),
                epochs: cfg.epochs,
                seed: cfg.seed,
                optimizer: match cfg.optimizer {
                    OptimizerKind::Gd => Optimizer::Gd,
                    OptimizerKind::Adam => Optimizer::adam(),
                },
            };
            let t = Instant::now();
            let fit = mlp_train(&x, &data.values(), &opts)?;
            timings.solve = t.elapsed().as_secs_f64();
            Ok(Trained {
                memory: MemoryEstimate::simple(data.len(), &features, fit.model.param_count()),
                lr: Some(opts.lr),
                model: Model::Mlp(fit.model),
                loss_curve: fit.loss_curve,
            })
        }
        _ => unreachable!("configuration validation rules out this mode, solver and split combination"),
    }
}

/// Full-grid predictions, one tensor per channel.
fn predict(model: &Model, sig: &GridSignal, embedders: &[Embedder]) -> Result<Vec<Tensor>, CliError> {
    let from_rows = |m: DMatrix<f64>| -> Result<Vec<Tensor>, CliError> {
        m.column_iter()
            .map(|col| Ok(Tensor::from_vec(sig.shape(), col.iter().copied().collect())?))
            .collect()
    };
    match model {
        Model::Linear(w) => {
            let enc = SeparableEncoding::new(embedders.to_vec(), sig.axes().to_vec())?;
            Ok(w.predict_grid(&enc)?)
        }
        Model::Dense(w) => {
            let x = simple_features(embedders, &sig.coordinates())?;
            let cols: Vec<f64> = w.channels().iter().flat_map(|t| t.data().iter().copied()).collect();
            let weights = DMatrix::from_vec(x.ncols(), w.num_channels(), cols);
            let mut out = x * weights;
            for (mut col, b) in out.column_iter_mut().zip(w.bias()) {
                col.add_scalar_mut(*b);
            }
            from_rows(out)
        }
        Model::Mlp(net) => from_rows(net.predict(&simple_features(embedders, &sig.coordinates())?)?),
    }
}

fn gather(channels: &[Tensor], indices: &[usize]) -> Vec<f64> {
    channels
        .iter()
        .flat_map(|t| indices.iter().map(|&i| t.data()[i]))
        .collect()
}

pub struct FitOutcome {
    pub report: ReconstructionReport,
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &ExperimentConfig, input: &Path) -> Result<FitOutcome, CliError> {
    let sig = load_input(input)?;
    let specs = cfg.axis_specs(sig.ndim())?;
    let embedders = specs.iter().map(|s| s.build()).collect::<Result<Vec<_>, _>>()?;
    let out_of_domain = embedders
        .iter()
        .zip(sig.axes())
        .map(|(e, axis)| Ok(e.embed_batch(axis)?.out_of_domain().len()))
        .sum::<Result<usize, CliError>>()?;

    let (data, train_idx, test_idx) = split(cfg, &sig)?;
    let mut timings = PhaseTimings::default();
    let trained = train(cfg, &sig, &data, &embedders, &mut timings)?;

    let t = Instant::now();
    let pred = predict(&trained.model, &sig, &embedders)?;
    let all: Vec<usize> = (0..sig.num_points()).collect();
    let score = |idx: &[usize]| psnr(&gather(&pred, idx), &gather(sig.channels(), idx));
    let psnr_report = PsnrReport {
        train: score(&train_idx)?,
        test: if test_idx.is_empty() {
            None
        } else {
            Some(score(&test_idx)?)
        },
        full: score(&all)?,
    };
    timings.evaluate = t.elapsed().as_secs_f64();

    let param_count = match &trained.model {
        Model::Linear(w) => w.param_count(),
        Model::Dense(w) => w.param_count() + w.num_channels(),
        Model::Mlp(net) => net.param_count(),
    };
    let report = ReconstructionReport {
        input: input.display().to_string(),
        shape: sig.shape().to_vec(),
        channels: sig.num_channels(),
        train_points: train_idx.len(),
        test_points: test_idx.len(),
        psnr: psnr_report,
        param_count,
        memory: trained.memory,
        timings,
        final_loss: trained.loss_curve.last().copied(),
        lr: trained.lr,
        out_of_domain,
        config: cfg.clone(),
    };

    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut files = Vec::new();
    let report_path = cfg.out.join("report.json");
    write_file(
        &report_path,
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    files.push(report_path);

    let recon = cfg.out.join("reconstruction.kft");
    save_volume(&recon, &pred)?;
    files.push(recon);
    if sig.ndim() == 2 && matches!(sig.num_channels(), 1 | 3) {
        let png = cfg.out.join("reconstruction.png");
        save_image(&png, &pred)?;
        files.push(png);
    }

    let weights = cfg.out.join("weights.kft");
    match &trained.model {
        Model::Linear(w) | Model::Dense(w) => w.save(&weights)?,
        Model::Mlp(net) => {
            let p = net.params();
            save_tensor(&weights, &Tensor::from_vec(&[p.len()], p)?, &[])?;
        }
    }
    files.push(weights);

    if !trained.loss_curve.is_empty() {
        let path = cfg.out.join("loss.csv");
        let mut csv = String::from("epoch,loss\n");
        for (epoch, loss) in trained.loss_curve.iter().enumerate() {
            writeln!(csv, "{epoch},{loss}").expect("writing to a string");
        }
        write_file(&path, csv)?;
        files.push(path);
    }
    Ok(FitOutcome { report, files })
}
