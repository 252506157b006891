use proptest::prelude::*;

use rgbdt_core::eval::{synth_sequence, SynthParams};
use rgbdt_core::{kde_density, BandwidthVector, ObservationVector, PipelineConfig, PixelModel, SceneModel};

fn sample() -> impl Strategy<Value = ObservationVector> {
    // f32-representable so stored and original samples coincide.
    (
        0f32..1.0,
        0f32..1.0,
        proptest::option::weighted(0.8, 0f32..1.0),
        0f32..1.0,
    )
        .prop_map(|(r, g, d, t)| ObservationVector::new(r as f64, g as f64, d.map(f64::from), t as f64))
}

proptest! {
    #[test]
    fn density_ignores_sample_order(
        mut samples in proptest::collection::vec(sample(), 1..32),
        obs in sample(),
        sigma in 0.01f64..1.0,
        seed in any::<u64>(),
    ) {
        let bw = BandwidthVector::new(sigma, sigma * 1.3, sigma * 0.7, sigma * 2.0).unwrap();
        let a = kde_density(&obs, &PixelModel::from_samples(32, &samples), &bw).unwrap();
        // Deterministic shuffle.
        let mut state = seed | 1;
        for i in (1..samples.len()).rev() {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            samples.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let b = kde_density(&obs, &PixelModel::from_samples(32, &samples), &bw).unwrap();
        let scale = a.abs().max(b.abs());
        prop_assert!(scale < f64::MIN_POSITIVE || (a - b).abs() <= 1e-15 * scale.max(1.0) || (a - b).abs() / scale <= 1e-15);
    }

    #[test]
    fn density_is_non_negative(samples in proptest::collection::vec(sample(), 1..16), obs in sample()) {
        let bw = BandwidthVector::uniform(0.1).unwrap();
        prop_assert!(kde_density(&obs, &PixelModel::from_samples(16, &samples), &bw).unwrap() >= 0.0);
    }
}

/// Under blind update, a value repeated `n` times fills the window and
/// becomes the density's mode.
#[test]
fn repeated_observation_becomes_mode() {
    let n = 20;
    let mut model = PixelModel::new(n);
    for i in 0..n {
        let v = 0.1 + 0.04 * i as f64;
        model.update(&ObservationVector::new(0.25, 0.25, Some(0.5), v));
    }
    let repeated = ObservationVector::new(0.25, 0.25, Some(0.5), 0.8125);
    for _ in 0..n {
        model.update(&repeated);
    }
    let bw = BandwidthVector::uniform(0.05).unwrap();
    let at_mode = kde_density(&repeated, &model, &bw).unwrap();
    for k in 0..=1000 {
        let t = k as f64 / 1000.0;
        let q = ObservationVector { thermal: t, ..repeated };
        assert!(kde_density(&q, &model, &bw).unwrap() <= at_mode, "t = {t}");
    }
}

#[test]
fn static_scene_settles_to_background() {
    let mut params = SynthParams::preset("static").unwrap();
    params.frame_count = 60;
    params.ado_speckle_rate = 0.0;
    let seq = synth_sequence(&params, 13).unwrap();
    let config = PipelineConfig {
        window_n: 30,
        ..PipelineConfig::default()
    };
    let bw = rgbdt_core::estimate_bandwidths(&seq.frames[..15], &config).unwrap();
    let mut scene = SceneModel::new(64, 64, bw, config).unwrap();
    for (i, frame) in seq.frames.iter().enumerate() {
        let mask = scene.process_frame(frame).unwrap();
        if i >= 30 {
            assert!(mask.is_empty(), "frame {i}: {} foreground pixels", mask.count());
        }
    }
}
