// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use srcrqa::generators::{
    generate_ar1_ramp, generate_gamma_axis, generate_model, GammaAxisConfig, ModelSystem,
};
use srcrqa::medit::{edit_distance, CostParams, DistanceMatrix};
use srcrqa::oracles::{size_shifting_experiment, skellam_check, SizeExperiment};
use srcrqa::pipeline::{choose_lambda_s, ensemble_det, CorrectionConfig, PipelineParams};
use srcrqa::presets::{reference_pipeline, reference_ramp, REFERENCE_CHANGE_TIME};
use srcrqa::recurrence::{det, diagonal_histogram, threshold_by_rate};
use srcrqa::series::{segment, segment_sizes};
use srcrqa::stats::{ks_two_sample, sorted_copy, spearman, std_dev};
use srcrqa::surrogates::{generate_src_surrogate, SurrogateConfig};
use srcrqa::{Segment, SegmentationConfig};

const PAIR_TOL: f64 = 1e-12;
const TRIANGLE_SLACK: f64 = 1e-9;
const DIRECT_SUM_TOL: f64 = 1e-8;
const MONTE_CARLO_TOL: f64 = 1e-2;
const MONTE_CARLO_DRAWS: usize = 1_000_000;
const SPEARMAN_MIN: f64 = 0.8;
const ARGMAX_OFFSET: i64 = 1;
const JUMP_FACTOR_DET: f64 = 3.0;
const JUMP_FACTOR_RATIO: f64 = 1.0;
const RATIO_TREND_MIN: f64 = 0.5;
const REFERENCE_REALIZATIONS: usize = 50;
const MIN_SEGMENTS: usize = 10_000;
const KS_P_MIN: f64 = 0.01;
const TARGET_RATE: f64 = 0.15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let pass = o.pass && took <= limit;
    let tag = if pass { "PASS" } else { "FAIL" };
    let over = if took > limit {
        " [over time limit]"
    } else {
        ""
    };
    println!(
        "criterion {id} {tag}: {name} ({:.1} s){over}; {}",
        took.as_secs_f64(),
        o.detail
    );
    pass
}

fn random_segment(rng: &mut StdRng, max: usize) -> Segment {
    let n = rng.random_range(0..=max);
    let mut rel: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    rel.sort_by(f64::total_cmp);
    let amps = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    Segment::from_relative(0, 0.0, 1.0, rel, amps).unwrap()
}

fn random_costs(rng: &mut StdRng) -> CostParams {
    CostParams {
        max_shift_cost: rng.random_range(0.2..3.0),
        amplitude_cost: rng.random_range(0.2..3.0),
        indel_cost: rng.random_range(0.1..4.0),
        tau: rng.random_range(0.05..0.5),
    }
}

/// Exhaustive minimum over order-preserving matchings.
fn enumerate(a: &Segment, b: &Segment, p: &CostParams) -> f64 {
    fn go(
        a: &Segment,
        b: &Segment,
        p: &CostParams,
        i: usize,
        j0: usize,
        acc: f64,
        m: usize,
    ) -> f64 {
        if i == a.size() {
            return acc + p.indel_cost * (a.size() + b.size() - 2 * m) as f64;
        }
        let mut best = go(a, b, p, i + 1, j0, acc, m);
        for j in j0..b.size() {
            let c = p.pair_cost(
                a.rel_times()[i],
                a.amplitudes()[i],
                b.rel_times()[j],
                b.amplitudes()[j],
            );
            best = best.min(go(a, b, p, i + 1, j + 1, acc + c, m + 1));
        }
        best
    }
    go(a, b, p, 0, 0, 0.0, 0)
}

fn dp_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let p = random_costs(&mut rng);
        let a = random_segment(&mut rng, 4);
        let b = random_segment(&mut rng, 4);
        worst = worst.max((edit_distance(&a, &b, &p) - enumerate(&a, &b, &p)).abs());
    }
    Outcome {
        pass: worst <= PAIR_TOL,
        detail: format!("max |dp - enumeration| = {worst:.2e} over 500 pairs"),
    }
}

fn metric_axioms() -> Outcome {
    let mut rng = StdRng::seed_from_u64(202);
    let mut failures = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let p = random_costs(&mut rng);
        let s: Vec<Segment> = (0..3).map(|_| random_segment(&mut rng, 6)).collect();
        let d = |i: usize, j: usize| edit_distance(&s[i], &s[j], &p);
        let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        let excess = ac - ab - bc;
        worst_excess = worst_excess.max(excess);
        if ab < 0.0 || ab != ba || excess > TRIANGLE_SLACK {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{failures} violations; max d(a,c) - d(a,b) - d(b,c) = {worst_excess:.2e}"),
    }
}

fn deletion_expectation() -> Outcome {
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let (mut direct, mut mc) = (0.0f64, 0.0f64);
    let mut idx = 0;
    for &l1 in &grid {
        for &l2 in &grid {
            let c = skellam_check(l1, l2, MONTE_CARLO_DRAWS, 3000 + idx).unwrap();
            direct = direct.max((c.expected_direct - c.expected_closed).abs());
            mc = mc.max((c.expected_monte_carlo - c.expected_closed).abs());
            idx += 1;
        }
    }
    Outcome {
        pass: direct <= DIRECT_SUM_TOL && mc <= MONTE_CARLO_TOL,
        detail: format!("max direct-sum error {direct:.2e}, max Monte Carlo error {mc:.2e}"),
    }
}

fn size_tendency() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, system) in [
        ModelSystem::Uniform,
        ModelSystem::ar1(),
        ModelSystem::sinusoid(),
    ]
    .into_iter()
    .enumerate()
    {
        let r = size_shifting_experiment(&SizeExperiment {
            seed: 400 + i as u64,
            ..SizeExperiment::new(system)
        })
        .unwrap();
        let m = r.matrices;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (a, row) in m.total.cells.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    xs.push((a + b) as f64);
                    ys.push(*v);
                }
            }
        }
        let rho = spearman(&xs, &ys);
        let mut worst_offset = 0i64;
        for (a, row) in m.per_operation.cells.iter().enumerate() {
            let best = row
                .iter()
                .enumerate()
                .filter_map(|(b, v)| v.map(|v| (b, v)))
                .max_by(|x, y| x.1.total_cmp(&y.1));
            if let Some((b, _)) = best {
                let off = b as i64 - a as i64;
                if off.abs() > worst_offset.abs() {
                    worst_offset = off;
                }
            }
        }
        let ok = rho > SPEARMAN_MIN && worst_offset.abs() <= ARGMAX_OFFSET;
        pass &= ok;
        parts.push(format!(
            "{} rho={rho:.3} argmax offset={worst_offset} Λ_k={:.2}",
            system.name(),
            r.costs.amplitude_cost
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

/// Step coefficient of `y = a + b t + c [t > t0]` over the given points.
fn step_fit(t: &[f64], y: &[f64], t0: f64) -> f64 {
    // Normal equations of the three-column design, solved by Cramer's rule.
    let cols = |k: usize, ti: f64| match k {
        0 => 1.0,
        1 => ti,
        _ => f64::from(u8::from(ti > t0)),
    };
    let mut a = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        for i in 0..3 {
            r[i] += cols(i, ti) * yi;
            for j in 0..3 {
                a[i][j] += cols(i, ti) * cols(j, ti);
            }
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut m = a;
    for i in 0..3 {
        m[i][2] = r[i];
    }
    det3(&m) / det3(&a)
}

struct Shift {
    step: f64,
    pre_sd: f64,
}

/// Level shift over windows lying wholly on one side of the jump.
fn level_shift(centers: &[f64], y: &[Option<f64>], half_width: f64) -> Shift {
    let (mut t, mut v, mut pre) = (Vec::new(), Vec::new(), Vec::new());
    for (&c, &y) in centers.iter().zip(y) {
        let Some(y) = y else { continue };
        let before = c + half_width <= REFERENCE_CHANGE_TIME;
        let after = c - half_width >= REFERENCE_CHANGE_TIME;
        if before {
            pre.push(y);
        }
        if before || after {
            t.push(c);
            v.push(y);
        }
    }
    Shift {
        step: step_fit(&t, &v, REFERENCE_CHANGE_TIME),
        pre_sd: std_dev(&pre),
    }
}

fn reference_correction() -> Outcome {
    let series = generate_ar1_ramp(&reference_ramp(500)).unwrap();
    let params = reference_pipeline();
    let corr = CorrectionConfig {
        realizations: REFERENCE_REALIZATIONS,
        ..CorrectionConfig::default()
    };
    let e = ensemble_det(&series, &params, &corr, 501).unwrap();
    let half = params.window.size as f64 * params.segmentation.window / 2.0;
    let centers: Vec<f64> = e.corrected.iter().map(|p| p.center).collect();
    let real = level_shift(
        &centers,
        &e.corrected.iter().map(|p| p.det_real).collect::<Vec<_>>(),
        half,
    );
    let q = level_shift(
        &centers,
        &e.corrected.iter().map(|p| p.det_q95).collect::<Vec<_>>(),
        half,
    );
    let ratios: Vec<Option<f64>> = e.corrected.iter().map(|p| p.ratio).collect();
    let ratio = level_shift(&centers, &ratios, half);
    let (rt, rv): (Vec<f64>, Vec<f64>) = centers
        .iter()
        .zip(&ratios)
        .filter_map(|(&c, r)| r.map(|r| (c, r)))
        .unzip();
    let trend = spearman(&rt, &rv);
    let a = real.step.abs() > JUMP_FACTOR_DET * real.pre_sd;
    let b = q.step * real.step > 0.0;
    let c = ratio.step.abs() <= JUMP_FACTOR_RATIO * ratio.pre_sd && trend > RATIO_TREND_MIN;
    Outcome {
        pass: a && b && c,
        detail: format!(
            "(a) DET step {:.3} = {:.1} pre-SD [{}]; (b) quantile step {:.3} [{}]; (c) ratio step {:.1} pre-SD, rho(ratio, t) = {trend:.2} [{}]",
            real.step,
            real.step / real.pre_sd,
            if a { "ok" } else { "fail" },
            q.step,
            if b { "ok" } else { "fail" },
            ratio.step / ratio.pre_sd,
            if c { "ok" } else { "fail" },
        ),
    }
}

fn median(xs: &[f64]) -> f64 {
    let s = sorted_copy(xs);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn surrogate_constraints() -> Outcome {
    let series = generate_ar1_ramp(&reference_ramp(600)).unwrap();
    let cfg = SegmentationConfig::new(1.0, 0.0);
    let real = segment(&series, &cfg).unwrap();
    let sizes = segment_sizes(&real);
    let (mut checked, mut bad) = (0usize, 0usize);
    let (mut p_int, mut p_diff) = (Vec::new(), Vec::new());
    let mut k = 0u64;
    while checked < MIN_SEGMENTS {
        let s =
            generate_src_surrogate(&series, &cfg, &SurrogateConfig::default(), 6000 + k).unwrap();
        let segs = segment(&s.series, &cfg).unwrap();
        if segment_sizes(&segs) != sizes {
            bad += segs.len();
        }
        for g in &segs {
            let end = cfg.window_start(g.index + 1);
            if g.abs_times().iter().any(|&t| t < g.start_time || t >= end) {
                bad += 1;
            }
        }
        checked += segs.len();
        p_int.push(ks_two_sample(&series.intervals(), &s.series.intervals()).p_value);
        p_diff.push(ks_two_sample(&series.differences(), &s.series.differences()).p_value);
        k += 1;
    }
    let (mi, md) = (median(&p_int), median(&p_diff));
    Outcome {
        pass: bad == 0 && mi > KS_P_MIN && md > KS_P_MIN,
        detail: format!(
            "{bad} of {checked} segments violate size or window; median KS p: intervals {mi:.3e}, differences {md:.3e}"
        ),
    }
}

fn optimizer_minimum() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let reference = [1.5, 1.5, 3.5];
    for (i, system) in [
        ModelSystem::Uniform,
        ModelSystem::ar1(),
        ModelSystem::sinusoid(),
    ]
    .into_iter()
    .enumerate()
    {
        let axis =
            generate_gamma_axis(&GammaAxisConfig::new(2.0, 0.2, 10_000.0, 700 + i as u64)).unwrap();
        let s = generate_model(system, &axis, 710 + i as u64).unwrap();
        let params = PipelineParams::default();
        let segs = segment(&s, &params.segmentation).unwrap();
        let base = params.base_costs(&s).unwrap();
        let opt = choose_lambda_s(&segs, &base, &params).unwrap();
        let interior = opt.has_interior_minimum();
        pass &= interior;
        parts.push(format!(
            "{} Λ_S*={:.1} (reference {}) interior={interior}",
            system.name(),
            opt.lambda_s,
            reference[i]
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn recurrence_mechanics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(800);
    let (mut rate_fail, mut det1_fail, mut mono_fail) = (0, 0, 0);
    for _ in 0..100 {
        let n = rng.random_range(20..80);
        let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random::<f64>()).collect();
        let m = DistanceMatrix::from_upper((0..n).map(|i| i as f64).collect(), upper).unwrap();
        let rp = threshold_by_rate(&m, TARGET_RATE, 1).unwrap();
        let counted = (n * (n - 1) / 2) as f64;
        if (rp.realized_rate - TARGET_RATE).abs() > 1.0 / counted {
            rate_fail += 1;
        }
        let h = diagonal_histogram(&rp);
        if det(&h, 1).unwrap() != 1.0 {
            det1_fail += 1;
        }
        let dets: Vec<f64> = (1..=6).map(|l| det(&h, l).unwrap()).collect();
        if dets.windows(2).any(|w| w[1] > w[0]) {
            mono_fail += 1;
        }
    }
    Outcome {
        pass: rate_fail + det1_fail + mono_fail == 0,
        detail: format!(
            "rate misses {rate_fail}, DET(1) != 1 {det1_fail}, non-monotone {mono_fail} of 100"
        ),
    }
}

fn cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_srcrqa"))
        .args(args)
        .arg("--quiet")
        .status()
        .unwrap();
    assert!(status.success(), "srcrqa {args:?} failed");
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|x| x == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = |s: &str| tmp.path().join(s).display().to_string();
    cli(&[
        "generate",
        "--system",
        "sinusoid",
        "--T",
        "400",
        "--seed",
        "9",
        "--output",
        &d("gen"),
    ]);
    let input = d("gen/series.csv");
    let runs: [(&str, Vec<&str>); 4] = [
        (
            "rqa",
            vec![
                "rqa",
                "--input",
                &input,
                "--window-size",
                "80",
                "--recurrence-plot",
                "true",
            ],
        ),
        (
            "sur",
            vec!["surrogate", "--input", &input, "--realizations", "3"],
        ),
        (
            "cor",
            vec![
                "correct",
                "--input",
                &input,
                "--window-size",
                "80",
                "--realizations",
                "4",
            ],
        ),
        (
            "ora",
            vec![
                "oracle",
                "--deletion",
                "true",
                "--skellam-check",
                "true",
                "--draws",
                "20000",
            ],
        ),
    ];
    let (mut compared, mut differing) = (0, Vec::new());
    for (tag, args) in runs {
        let first = d(&format!("{tag}1"));
        let second = d(&format!("{tag}2"));
        let mut a = args.clone();
        a.extend(["--output", &first]);
        cli(&a);
        let manifest = format!("{first}/manifest.json");
        cli(&[args[0], "--config", &manifest, "--output", &second]);
        for f in csv_files(Path::new(&first)) {
            let rel = f.strip_prefix(&first).unwrap();
            let g = Path::new(&second).join(rel);
            compared += 1;
            if std::fs::read(&f).unwrap() != std::fs::read(&g).unwrap_or_default() {
                differing.push(format!("{tag}/{}", rel.display()));
            }
        }
    }
    Outcome {
        pass: differing.is_empty() && compared > 0,
        detail: format!("{compared} CSV files compared, differing: {differing:?}"),
    }
}

fn main() {
    let results = [
        report(
            1,
            "edit distance matches enumeration",
            Duration::from_secs(10),
            dp_oracle,
        ),
        report(2, "metric axioms", Duration::from_secs(30), metric_axioms),
        report(
            3,
            "expected deletion cost",
            Duration::from_secs(60),
            deletion_expectation,
        ),
        report(
            4,
            "cost grows with segment size",
            Duration::from_secs(15 * 60),
            size_tendency,
        ),
        report(
            5,
            "surrogate correction removes the rate jump",
            Duration::from_secs(30 * 60),
            reference_correction,
        ),
        report(
            6,
            "surrogate hard constraints and distributions",
            Duration::from_secs(5 * 60),
            surrogate_constraints,
        ),
        report(
            7,
            "deletion cost optimizer has an interior minimum",
            Duration::from_secs(10 * 60),
            optimizer_minimum,
        ),
        report(
            8,
            "recurrence mechanics",
            Duration::from_secs(10),
            recurrence_mechanics,
        ),
        report(
            9,
            "manifest re-run is byte-identical",
            Duration::from_secs(10 * 60),
            reproducibility,
        ),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
