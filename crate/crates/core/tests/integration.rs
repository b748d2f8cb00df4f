// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use srcrqa::generators::{
    generate_ar1_ramp, generate_gamma_axis, generate_model, generate_rate_shift_axis,
    GammaAxisConfig, ModelSystem, RateShiftAxisConfig,
};
use srcrqa::io;
use srcrqa::pipeline::{analyze_series, ensemble_det, CorrectionConfig, PipelineParams};
use srcrqa::preprocess::downsample_uniform;
use srcrqa::presets::reference_ramp;
use srcrqa::recurrence::WindowSpec;
use srcrqa::series::segment;
use srcrqa::stats::{mean, pearson};
use srcrqa::surrogates::{
    generate_ensemble, generate_src_surrogate, PairPopulation, PairSampler, SurrogateConfig,
    WeightConfig,
};
use srcrqa::{IrregularSeries, SegmentationConfig};

fn rate_shift_axis(seed: u64) -> RateShiftAxisConfig {
    RateShiftAxisConfig {
        before: GammaAxisConfig::with_mean_interval(1.0, 0.4, 400.0, seed),
        after: GammaAxisConfig::with_mean_interval(1.0, 0.1, 400.0, seed),
        change_time: 200.0,
        period: 400.0,
        seed,
    }
}

fn mean_interval(times: &[f64]) -> f64 {
    (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64
}

#[test]
fn generators_are_reproducible() {
    let cfg = GammaAxisConfig::new(3.0, 0.2, 500.0, 9);
    assert_eq!(
        generate_gamma_axis(&cfg).unwrap(),
        generate_gamma_axis(&cfg).unwrap()
    );
    let axis = generate_gamma_axis(&cfg).unwrap();
    for sys in [
        ModelSystem::Uniform,
        ModelSystem::ar1(),
        ModelSystem::sinusoid(),
    ] {
        assert_eq!(
            generate_model(sys, &axis, 3).unwrap(),
            generate_model(sys, &axis, 3).unwrap()
        );
    }
    let ramp = reference_ramp(2);
    assert_eq!(
        generate_ar1_ramp(&ramp).unwrap(),
        generate_ar1_ramp(&ramp).unwrap()
    );
}

#[test]
fn downsampling_preserves_rate_ratio() {
    let cfg = rate_shift_axis(5);
    let axis = generate_rate_shift_axis(&cfg).unwrap();
    let s = generate_model(ModelSystem::Uniform, &axis, 1).unwrap();
    let ratio = |s: &IrregularSeries| {
        let t = s.times();
        let k = t.partition_point(|&x| x < cfg.change_time);
        mean_interval(&t[..k]) / mean_interval(&t[k..])
    };
    let before = ratio(&s);
    let after = ratio(&downsample_uniform(&s, 3).unwrap());
    assert!((after / before - 1.0).abs() < 0.05, "{before} vs {after}");
}

#[test]
fn level_zero_draws_are_uniform() {
    let axis =
        generate_gamma_axis(&GammaAxisConfig::with_mean_interval(2.0, 0.2, 100.0, 4)).unwrap();
    let s = generate_model(ModelSystem::Uniform, &axis, 4).unwrap();
    let sampler =
        PairSampler::new(PairPopulation::from_series(&s), WeightConfig::default()).unwrap();
    let m = sampler.population().len();
    let bins = 10;
    let draws = 200_000;
    let mut counts = vec![0usize; bins];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..draws {
        counts[sampler.draw(0, &mut rng) * bins / m] += 1;
    }
    let chi2: f64 = (0..bins)
        .map(|b| {
            let lo = (b * m).div_ceil(bins);
            let hi = ((b + 1) * m).div_ceil(bins);
            let e = draws as f64 * (hi - lo) as f64 / m as f64;
            (counts[b] as f64 - e).powi(2) / e
        })
        .sum();
    // 0.999 quantile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 27.877, "chi2 = {chi2}");
}

#[test]
fn surrogates_reproduce_rate_volatility_coupling() {
    // Short intervals carry large amplitude steps.
    let axis = generate_rate_shift_axis(&rate_shift_axis(8)).unwrap();
    let mut values = vec![0.0];
    for (i, w) in axis.windows(2).enumerate() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let step = if w[1] - w[0] < 0.15 { 1.0 } else { 0.1 };
        values.push(values[values.len() - 1] + sign * step);
    }
    let s = IrregularSeries::new(axis, values).unwrap();
    let cfg = SegmentationConfig::new(1.0, 0.0);
    let coupling = |s: &IrregularSeries| {
        let segs = segment(s, &cfg).unwrap();
        let (mut size, mut vol) = (Vec::new(), Vec::new());
        for g in segs.iter().filter(|g| g.size() >= 2) {
            let d: Vec<f64> = g
                .amplitudes()
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .collect();
            size.push(g.size() as f64);
            vol.push(mean(&d));
        }
        pearson(&size, &vol)
    };
    let real = coupling(&s);
    assert!(real > 0.3, "source coupling {real}");
    let ens = generate_ensemble(&s, &cfg, &SurrogateConfig::default(), 3, 21).unwrap();
    for r in &ens.realizations {
        let c = coupling(&r.series);
        assert!(c > 0.0, "surrogate coupling {c}");
    }
}

#[test]
fn surrogate_seeds_are_reproducible() {
    let axis =
        generate_gamma_axis(&GammaAxisConfig::with_mean_interval(2.0, 0.25, 80.0, 1)).unwrap();
    let s = generate_model(ModelSystem::ar1(), &axis, 2).unwrap();
    let cfg = SegmentationConfig::new(1.0, 0.0);
    let a = generate_src_surrogate(&s, &cfg, &SurrogateConfig::default(), 77).unwrap();
    let b = generate_src_surrogate(&s, &cfg, &SurrogateConfig::default(), 77).unwrap();
    let c = generate_src_surrogate(&s, &cfg, &SurrogateConfig::default(), 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.series, c.series);
}

#[test]
fn pipeline_outputs_round_trip_through_csv() {
    let axis =
        generate_gamma_axis(&GammaAxisConfig::with_mean_interval(2.0, 0.25, 90.0, 3)).unwrap();
    let s = generate_model(ModelSystem::sinusoid(), &axis, 3).unwrap();
    let params = PipelineParams {
        window: WindowSpec::new(30, 0.5),
        lambda_s: Some(1.5),
        ..PipelineParams::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("series.csv");
    io::write_series_file(&s, &p).unwrap();
    let back = io::read_series_file(&p).unwrap();
    assert_eq!(back, s);

    let a = analyze_series(&back, &params, None).unwrap();
    let b = analyze_series(&s, &params, None).unwrap();
    assert_eq!(a, b);

    let corr = CorrectionConfig {
        realizations: 2,
        ..CorrectionConfig::default()
    };
    let e = ensemble_det(&s, &params, &corr, 4).unwrap();
    let mut buf = Vec::new();
    io::write_corrected_csv(&e.corrected, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), e.corrected.len() + 1);
    assert!(text.starts_with("window_center,det_real,det_q95,ratio\n"));

    let ens = generate_ensemble(&s, &params.segmentation, &corr.surrogates, 2, 4).unwrap();
    let series: Vec<IrregularSeries> = ens.realizations.iter().map(|r| r.series.clone()).collect();
    let paths = io::write_ensemble_dir(&dir.path().join("ens"), &series).unwrap();
    assert_eq!(paths.len(), 2);
    assert_eq!(io::read_series_file(&paths[1]).unwrap(), series[1]);
}
