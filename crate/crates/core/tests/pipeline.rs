//! End-to-end runs: synthetic signal, split, encode, fit, save, predict, score.

use coordenc::encoding::{blended_predict, build_blending_with, kron_predict, DistanceSource, SeparableEncoding};
use coordenc::signals::{grid_split, load_volume, mse, psnr, save_volume, synthetic_image, synthetic_volume};
use coordenc::solvers::{closed_form_fit, WeightTensor};
use coordenc::{Boundary, Embedder, EmbedderKind, EmbedderParams};
use nalgebra::DMatrix;

fn gauss(sigma: f64, k: usize, seed: u64) -> Embedder {
    let params = EmbedderParams::new(sigma, k).with_boundary(Boundary::Clip);
    Embedder::new(EmbedderKind::Gauss, params, seed).unwrap()
}

#[test]
fn image_fit_generalises_to_held_out_pixels() {
    let sig = synthetic_image(64, 3).unwrap();
    let (train, test) = grid_split(&sig, 2).unwrap();
    let embedders = vec![gauss(0.04, 32, 0), gauss(0.04, 32, 1)];

    let enc = SeparableEncoding::new(embedders.clone(), train.axes().to_vec()).unwrap();
    let w = closed_form_fit(&enc, &train, 1e-4).unwrap();
    assert_eq!(w.param_count(), 32 * 32);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weights.kft");
    w.save(&path).unwrap();
    let w = WeightTensor::load(&path).unwrap();

    let fitted = w.predict_grid(&enc).unwrap();
    let train_psnr = psnr(fitted[0].data(), train.channel(0).data()).unwrap();

    let full = SeparableEncoding::new(embedders, sig.axes().to_vec()).unwrap();
    let pred = w.predict_grid(&full).unwrap();
    let held_out: Vec<f64> = test.indices.iter().map(|&i| pred[0].data()[i]).collect();
    let truth: Vec<f64> = test.values.column(0).iter().copied().collect();
    let test_psnr = psnr(&held_out, &truth).unwrap();

    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let baseline = psnr(&vec![mean; truth.len()], &truth).unwrap();
    assert!(
        test_psnr > baseline + 3.0,
        "test {test_psnr:.2} dB vs mean-predictor {baseline:.2} dB"
    );
    assert!(
        train_psnr >= test_psnr,
        "train {train_psnr:.2} dB, test {test_psnr:.2} dB"
    );
}

#[test]
fn blended_queries_on_grid_nodes_reproduce_the_grid() {
    let sig = synthetic_image(16, 5).unwrap();
    let enc = SeparableEncoding::new(vec![gauss(0.05, 12, 0), gauss(0.05, 12, 1)], sig.axes().to_vec()).unwrap();
    let w = closed_form_fit(&enc, &sig, 1e-6).unwrap();
    let grid = kron_predict(w.channel(0), &enc).unwrap();

    let nodes = [0usize, 3, 7, 15];
    let queries = DMatrix::from_fn(nodes.len() * nodes.len(), 2, |r, axis| {
        let i = if axis == 0 {
            nodes[r % nodes.len()]
        } else {
            nodes[r / nodes.len()]
        };
        sig.axes()[axis][i]
    });
    let b = build_blending_with(&enc, &queries, Some(DistanceSource::Sampled)).unwrap();
    let blended = blended_predict(w.channel(0), &enc, &b).unwrap();
    for (r, v) in blended.iter().enumerate() {
        let want = grid.get(&[nodes[r % nodes.len()], nodes[r / nodes.len()]]);
        assert!((v - want).abs() < 1e-9, "query {r}: {v} vs {want}");
    }
}

#[test]
fn volume_round_trips_and_is_memorised() {
    let sig = synthetic_volume(8, 4, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("volume.kft");
    save_volume(&path, sig.channels()).unwrap();
    let loaded = load_volume(&path).unwrap();
    assert_eq!(loaded.channels(), sig.channels());

    // One feature per sample on every axis: a full-rank design fits exactly.
    let embedders = (0..3)
        .map(|a| gauss(0.5 / sig.shape()[a] as f64, sig.shape()[a], a as u64))
        .collect();
    let enc = SeparableEncoding::new(embedders, loaded.axes().to_vec()).unwrap();
    let w = closed_form_fit(&enc, &loaded, 0.0).unwrap();
    let pred = w.predict_grid(&enc).unwrap();
    let err = mse(pred[0].data(), loaded.channel(0).data()).unwrap();
    assert!(err <= 1e-6, "training MSE {err:e}");
}
