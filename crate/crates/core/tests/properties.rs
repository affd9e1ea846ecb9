//! Property tests for the embedder and spectral invariants.

use std::f64::consts::PI;

use coordenc::embedders::cell_centers;
use coordenc::spectral::analyze;
use coordenc::{Boundary, Embedder, EmbedderKind, EmbedderParams};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::sample::select;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn boundary() -> impl Strategy<Value = Boundary> {
    select(vec![Boundary::Wrap, Boundary::Clip])
}

fn build(kind: EmbedderKind, sigma: f64, k: usize, b: Boundary, seed: u64) -> Embedder {
    Embedder::new(kind, EmbedderParams::new(sigma, k).with_boundary(b), seed).unwrap()
}

/// Width for the shifted kinds, frequency range for the Fourier ones.
fn sigma_for(kind: EmbedderKind, unit: f64) -> f64 {
    if kind.is_fourier() {
        0.5 + 7.5 * unit
    } else {
        0.01 + 0.49 * unit
    }
}

proptest! {
    // Integration tests have no lib.rs to persist regressions beside.
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn batch_columns_equal_scalar_outputs(
        kind in select(EmbedderKind::ALL.to_vec()),
        unit in 0.0..1.0f64,
        k in 1usize..40,
        b in boundary(),
        seed in any::<u64>(),
        xs in prop::collection::vec(-0.2..1.2f64, 1..12),
    ) {
        let e = build(kind, sigma_for(kind, unit), k, b, seed);
        let m = e.embed_batch(&xs).unwrap();
        prop_assert_eq!(m.num_points(), xs.len());
        for (j, &x) in xs.iter().enumerate() {
            let col: Vec<f64> = m.matrix().column(j).iter().copied().collect();
            let v: Vec<f64> = e.embed_scalar(x).unwrap().iter().copied().collect();
            prop_assert_eq!(col, v);
        }
        let outside: Vec<usize> = (0..xs.len()).filter(|&j| !(0.0..=1.0).contains(&xs[j])).collect();
        prop_assert_eq!(m.out_of_domain(), outside.as_slice());
    }

    #[test]
    fn output_length_and_sampling_interval(
        kind in select(EmbedderKind::ALL.to_vec()),
        unit in 0.0..1.0f64,
        k in 1usize..200,
    ) {
        let e = build(kind, sigma_for(kind, unit), k, Boundary::Wrap, 0);
        let want = if kind.is_fourier() { 2 * k } else { k };
        prop_assert_eq!(e.output_len(), want);
        prop_assert_eq!(e.embed_scalar(0.3).unwrap().len(), want);
        if !kind.is_fourier() {
            prop_assert_eq!(e.sampling_interval(), 1.0 / k as f64);
        }
    }

    #[test]
    fn shifted_outputs_stay_in_their_ranges(
        kind in select(vec![
            EmbedderKind::Gauss,
            EmbedderKind::Tri,
            EmbedderKind::Rect,
            EmbedderKind::Impulse,
            EmbedderKind::Square,
        ]),
        sigma in 0.05..0.5f64,
        k in 1usize..64,
        b in boundary(),
        x in 0.0..=1.0f64,
    ) {
        let e = build(kind, sigma, k, b, 0);
        for v in e.embed_scalar(x).unwrap().iter().copied() {
            let ok = match kind {
                // σ ≥ 0.05 keeps every sample above underflow on the unit domain.
                EmbedderKind::Gauss => v > 0.0 && v <= 1.0,
                EmbedderKind::Tri => (0.0..=1.0).contains(&v),
                EmbedderKind::Rect | EmbedderKind::Impulse => v == 0.0 || v == 1.0,
                EmbedderKind::Square => v == -1.0 || v == 1.0,
                _ => unreachable!(),
            };
            prop_assert!(ok, "{kind} produced {v} at x = {x}");
        }
    }

    #[test]
    fn rff_is_frozen_and_matches_its_formula(
        sigma in 0.1..20.0f64,
        k in 1usize..32,
        seed in any::<u64>(),
        x in -1.0..2.0f64,
    ) {
        let e = build(EmbedderKind::Rff, sigma, k, Boundary::Wrap, seed);
        let first = e.embed_scalar(x).unwrap();
        prop_assert_eq!(&first, &e.embed_scalar(x).unwrap());
        prop_assert_eq!(&first, &build(EmbedderKind::Rff, sigma, k, Boundary::Wrap, seed).embed_scalar(x).unwrap());
        let b = e.rff_frequencies().unwrap();
        prop_assert!(b.windows(2).all(|w| w[0] <= w[1]));
        for (i, &bi) in b.iter().enumerate() {
            let arg = 2.0 * PI * bi * x;
            prop_assert!((first[i] - arg.cos()).abs() < 1e-12);
            prop_assert!((first[k + i] - arg.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_report_is_consistent(
        rows in 1usize..24,
        cols in 1usize..24,
        rank in 1usize..6,
        seed in any::<u64>(),
    ) {
        // Low-rank products exercise the gap between stable and numerical rank.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.random_range(-0.5..0.5);
        let a = DMatrix::from_fn(rows, rank, |_, _| next());
        let b = DMatrix::from_fn(rank, cols, |_, _| next());
        let r = analyze(&(a * b)).unwrap();
        prop_assert!(r.stable_rank >= 1.0 - 1e-12);
        prop_assert!(r.stable_rank <= r.numerical_rank as f64 + 1e-9);
        prop_assert!(r.numerical_rank <= rank.min(rows).min(cols));
        prop_assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(r.singular_values.iter().all(|&s| s >= 0.0));
        prop_assert!((&r.gram - r.gram.transpose()).amax() <= 1e-10);
    }

    #[test]
    fn sine_rank_never_exceeds_two(n in 1usize..160, d in 1usize..160) {
        let e = build(EmbedderKind::Sine, 1.0, d, Boundary::Wrap, 0);
        let m = e.embed_batch(&cell_centers(n, 1.0)).unwrap().into_matrix();
        prop_assert!(analyze(&m).unwrap().numerical_rank <= 2);
    }
}
