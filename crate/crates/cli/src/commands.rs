// SPDX-License-Identifier: MIT OR Apache-2.0

//! Subcommand bodies. Seeds: `generate` feeds the root seed to the axis and
//! `derive_seed(root, 1, 0)` to the amplitudes (the reference preset uses the
//! root seed directly); realization `k` of `surrogate` and `correct` uses
//! `realization_seed(root, k)`; `oracle` experiments take the root seed and
//! the Monte Carlo check of rate pair `i` uses `derive_seed(root, 9, i)`.

use std::fs;
use std::path::PathBuf;

use log::{info, warn};
use serde_json::{json, Value};

use srcrqa::generators::{generate_ar1_ramp, generate_gamma_axis, generate_model, GammaAxisConfig};
use srcrqa::io;
use srcrqa::medit::DistanceMatrix;
use srcrqa::oracles::{
    deletion_cost_matrix, derive_seed, rate_shifting_experiment, size_shifting_experiment,
    skellam_check, RateExperiment, SizeExperiment, SKELLAM_MAX_RATE,
};
use srcrqa::pipeline::{analyze_series, ensemble_det, PipelineParams};
use srcrqa::preprocess::{downsample_uniform, gaussian_detrend};
use srcrqa::presets::reference_ramp;
use srcrqa::recurrence::threshold_by_rate;
use srcrqa::series::{segment, segment_sizes};
use srcrqa::surrogates::{generate_src_surrogate, realization_seed};
use srcrqa::{IrregularSeries, SegmentationConfig};

use crate::config::{
    parse_range, pipeline_params, CorrectOpts, CostOpts, GenerateOpts, Layered, MatrixFormat,
    OracleOpts, RqaOpts, RqaOutputOpts, SegmentOpts, SeriesOpts, SurrogateOpts,
};
use crate::error::CliError;

/// Collects written files and writes the manifest last.
pub struct Run {
    pub command: &'static str,
    pub output: PathBuf,
    pub config: Layered,
    outputs: Vec<String>,
    results: Value,
}

impl Run {
    pub fn new(command: &'static str, output: PathBuf, config: Layered) -> Result<Self, CliError> {
        fs::create_dir_all(&output)?;
        Ok(Self {
            command,
            output,
            config,
            outputs: Vec::new(),
            results: json!({}),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.output.join(name)
    }

    fn result(&mut self, key: &str, value: Value) {
        self.results[key] = value;
    }

    pub fn finish(self) -> Result<(), CliError> {
        let mut manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let cfg: Value = self.config.extract()?;
        if let (Value::Object(m), Value::Object(c)) = (&mut manifest, cfg) {
            m.extend(c);
        }
        manifest["outputs"] = json!(self.outputs);
        manifest["results"] = self.results;
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.output.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn load_series(opts: &SeriesOpts) -> Result<IrregularSeries, CliError> {
    let path = opts.input.as_ref().expect("resolved input");
    let mut s = io::read_series_file(path)?;
    if let Some(b) = opts.detrend {
        s = gaussian_detrend(&s, b)?;
    }
    if let Some(k) = opts.downsample.filter(|&k| k > 1) {
        s = downsample_uniform(&s, k)?;
    }
    info!("loaded {} samples from {}", s.len(), path.display());
    Ok(s)
}

pub fn generate(run: &mut Run, gen: GenerateOpts, seed: u64) -> Result<(), CliError> {
    run.config.overlay(&gen);
    let series = if gen.preset.is_some() {
        generate_ar1_ramp(&reference_ramp(seed))?
    } else {
        let system = gen
            .system
            .expect("resolved system")
            .model(gen.tau, gen.frequency, gen.noise);
        let axis = generate_gamma_axis(&GammaAxisConfig::new(
            gen.gamma_skew.unwrap_or(2.0),
            gen.gamma_scale.unwrap_or(0.2),
            gen.period.unwrap_or(10_000.0),
            seed,
        ))?;
        generate_model(system, &axis, derive_seed(seed, 1, 0))?
    };
    let p = run.path("series.csv");
    io::write_series_file(&series, &p)?;
    run.result("samples", json!(series.len()));
    info!("wrote {} samples", series.len());
    Ok(())
}

/// Clamps the sliding window to the record when it is shorter.
fn fit_window(params: &mut PipelineParams, segments: usize, run: &mut Run) {
    if params.window.size > segments {
        warn!(
            "window of {} segments exceeds the record ({segments}); using one window",
            params.window.size
        );
        params.window.size = segments;
        run.config.set("window-size", segments);
    }
}

pub struct AnalysisOpts {
    pub series: SeriesOpts,
    pub seg: SegmentOpts,
    pub cost: CostOpts,
    pub rqa: RqaOpts,
}

impl AnalysisOpts {
    fn prepare(self, run: &mut Run) -> Result<(IrregularSeries, PipelineParams), CliError> {
        let series_opts = self.series.resolved()?;
        let seg = self.seg.resolved();
        let cost = self.cost.resolved();
        let rqa = self.rqa.resolved();
        run.config.overlay(&series_opts);
        run.config.overlay(&seg);
        run.config.overlay(&cost);
        run.config.overlay(&rqa);
        let series = load_series(&series_opts)?;
        let mut params = pipeline_params(&seg, &cost, &rqa)?;
        let n = segment(&series, &params.segmentation)?.len();
        fit_window(&mut params, n, run);
        Ok((series, params))
    }
}

pub fn rqa(run: &mut Run, a: AnalysisOpts, out: RqaOutputOpts) -> Result<(), CliError> {
    let (series, params) = a.prepare(run)?;
    let mut out = out;
    let format = *out.matrix_format.get_or_insert(MatrixFormat::Csv);
    let want_rp = *out.recurrence_plot.get_or_insert(false);
    run.config.overlay(&out);

    let analysis = analyze_series(&series, &params, None)?;
    info!(
        "Λ_S = {}, {} windows",
        analysis.costs.indel_cost,
        analysis.det.len()
    );
    if let Some(opt) = &analysis.optimization {
        let p = run.path("ks_curve.csv");
        io::to_file(&p, |w| io::write_ks_curve_csv(&opt.curve, w))?;
        run.result("ks_statistic", json!(opt.statistic));
    }
    let p = run.path("det.csv");
    io::to_file(&p, |w| io::write_det_csv(&analysis.det, w))?;

    if format != MatrixFormat::None || want_rp {
        let segments = segment(&series, &params.segmentation)?;
        let matrix = DistanceMatrix::from_segments(&segments, &analysis.costs);
        match format {
            MatrixFormat::Csv => {
                let p = run.path("distance_matrix.csv");
                io::to_file(&p, |w| io::write_matrix_csv(&matrix, w))?;
            }
            MatrixFormat::Binary => {
                let p = run.path("distance_matrix.medm");
                io::to_file(&p, |w| io::write_matrix_binary(&matrix, w))?;
            }
            MatrixFormat::None => {}
        }
        if want_rp {
            let rp = threshold_by_rate(&matrix, params.rqa.rate, params.rqa.theiler)?;
            let p = run.path("recurrence.csv");
            io::to_file(&p, |w| io::write_recurrence_csv(&rp, w))?;
            run.result("threshold", json!(rp.threshold));
        }
    }
    run.result("costs", serde_json::to_value(analysis.costs)?);
    Ok(())
}

/// Sizes preserved and every sample inside its window.
fn check_surrogate(
    real_sizes: &[usize],
    surrogate: &IrregularSeries,
    cfg: &SegmentationConfig,
    k: usize,
) -> Result<(), CliError> {
    let segs = segment(surrogate, cfg)?;
    if segment_sizes(&segs) != real_sizes {
        return Err(CliError::Constraint(format!(
            "realization {k} changed segment sizes"
        )));
    }
    for s in &segs {
        let end = cfg.window_start(s.index + 1);
        if s.abs_times().iter().any(|&t| t < s.start_time || t >= end) {
            return Err(CliError::Constraint(format!(
                "realization {k}, segment {} leaves its window",
                s.index
            )));
        }
    }
    Ok(())
}

/// Writes `count` realizations one by one, returning iteration statistics.
fn write_realizations(
    run: &mut Run,
    series: &IrregularSeries,
    cfg: &SegmentationConfig,
    sur: &SurrogateOpts,
    count: usize,
    seed: u64,
    dir: &str,
) -> Result<Value, CliError> {
    let scfg = sur.config()?;
    let real_sizes = segment_sizes(&segment(series, cfg)?);
    let out_dir = run.output.join(dir);
    fs::create_dir_all(&out_dir)?;
    let (mut max_it, mut total_it, mut segs) = (0usize, 0usize, 0usize);
    for k in 0..count {
        let s = generate_src_surrogate(series, cfg, &scfg, realization_seed(seed, k))?;
        check_surrogate(&real_sizes, &s.series, cfg, k)?;
        let p = io::realization_path(&out_dir, k);
        io::write_series_file(&s.series, &p)?;
        run.outputs.push(
            p.strip_prefix(&run.output)
                .unwrap_or(&p)
                .display()
                .to_string(),
        );
        let nonempty: Vec<usize> = s.iterations.iter().copied().filter(|&i| i > 0).collect();
        max_it = max_it.max(nonempty.iter().copied().max().unwrap_or(0));
        total_it += nonempty.iter().sum::<usize>();
        segs += nonempty.len();
    }
    Ok(json!({
        "realizations": count,
        "max_iterations": max_it,
        "mean_iterations": if segs > 0 { total_it as f64 / segs as f64 } else { 0.0 },
    }))
}

pub fn surrogate(
    run: &mut Run,
    series_opts: SeriesOpts,
    seg: SegmentOpts,
    sur: SurrogateOpts,
    seed: u64,
) -> Result<(), CliError> {
    let series_opts = series_opts.resolved()?;
    let seg = seg.resolved();
    let sur = sur.resolved(10);
    run.config.overlay(&series_opts);
    run.config.overlay(&seg);
    run.config.overlay(&sur);
    let series = load_series(&series_opts)?;
    let count = sur.realizations.unwrap_or(10);
    if count == 0 {
        return Err(CliError::Validation("--realizations must be >= 1".into()));
    }
    let stats = write_realizations(run, &series, &seg.config(), &sur, count, seed, "ensemble")?;
    run.result("iterations", stats);
    Ok(())
}

pub fn correct(
    run: &mut Run,
    a: AnalysisOpts,
    sur: SurrogateOpts,
    corr: CorrectOpts,
    seed: u64,
) -> Result<(), CliError> {
    let sur = sur.resolved(200);
    let corr = corr.resolved();
    run.config.overlay(&sur);
    run.config.overlay(&corr);
    let (series, params) = a.prepare(run)?;
    let cfg = corr.config(&sur)?;
    let e = ensemble_det(&series, &params, &cfg, seed)?;
    info!(
        "real Λ_S = {}, surrogate Λ_S = {}",
        e.real.costs.indel_cost, e.surrogate_lambda_s
    );
    let p = run.path("corrected.csv");
    io::to_file(&p, |w| io::write_corrected_csv(&e.corrected, w))?;
    let p = run.path("det_real.csv");
    io::to_file(&p, |w| io::write_det_csv(&e.real.det, w))?;
    if corr.write_ensemble == Some(true) {
        let stats = write_realizations(
            run,
            &series,
            &params.segmentation,
            &sur,
            cfg.realizations,
            seed,
            "ensemble",
        )?;
        run.result("iterations", stats);
    }
    run.result("lambda_s_real", json!(e.real.costs.indel_cost));
    run.result("lambda_s_surrogate", json!(e.surrogate_lambda_s));
    run.result("max_iterations", json!(e.max_iterations));
    Ok(())
}

fn write_matrix(
    run: &mut Run,
    name: &str,
    m: &srcrqa::oracles::CostMatrixResult,
) -> Result<(), CliError> {
    let p = run.path(name);
    io::to_file(&p, |w| io::write_cost_matrix_csv(m, w))?;
    Ok(())
}

pub fn oracle(run: &mut Run, opts: OracleOpts, seed: u64) -> Result<(), CliError> {
    let o = opts.resolved()?;
    run.config.overlay(&o);
    let rates = parse_range(o.rates.as_deref().unwrap_or("0.5:8:0.5"))?.values()?;
    let indel = o.indel_cost.unwrap_or(1.0);

    if o.deletion == Some(true) {
        let mode = o.deletion_mode.expect("resolved mode").into();
        let m = deletion_cost_matrix(&rates, indel, mode)?;
        write_matrix(run, "deletion_cost.csv", &m)?;
    }
    if o.skellam_check == Some(true) {
        let usable: Vec<f64> = rates
            .iter()
            .copied()
            .filter(|&r| r <= SKELLAM_MAX_RATE)
            .collect();
        let draws = o.draws.unwrap_or(1_000_000);
        let mut rows = Vec::new();
        let mut idx = 0u64;
        for &l1 in &usable {
            for &l2 in &usable {
                rows.push(skellam_check(l1, l2, draws, derive_seed(seed, 9, idx))?);
                idx += 1;
            }
        }
        let p = run.path("skellam_check.csv");
        io::to_file(&p, |mut w| {
            use std::io::Write;
            writeln!(w, "lambda1,lambda2,pmf_sum,expected_closed,expected_direct,expected_monte_carlo,max_bin_z")?;
            for c in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    c.lambda1,
                    c.lambda2,
                    c.pmf_sum,
                    c.expected_closed,
                    c.expected_direct,
                    c.expected_monte_carlo,
                    c.max_bin_z
                )?;
            }
            w.flush()?;
            Ok(())
        })?;
        let worst =
            |f: fn(&srcrqa::oracles::SkellamCheck) -> f64| rows.iter().map(f).fold(0.0, f64::max);
        run.result(
            "skellam",
            json!({
                "max_normalization_error": worst(|c| (c.pmf_sum - 1.0).abs()),
                "max_direct_error": worst(|c| (c.expected_direct - c.expected_closed).abs()),
                "max_monte_carlo_error": worst(|c| (c.expected_monte_carlo - c.expected_closed).abs()),
                "max_bin_z": worst(|c| c.max_bin_z),
            }),
        );
    }
    if o.shifting == Some(true) {
        let cfg = RateExperiment {
            rates: rates.clone(),
            replications: o.replications.unwrap_or(100),
            period: o.oracle_period.unwrap_or(10_000.0),
            indel_cost: indel,
            seed,
            ..RateExperiment::default()
        };
        let m = rate_shifting_experiment(&cfg)?;
        write_matrix(run, "shifting_total.csv", &m.total)?;
        write_matrix(run, "shifting_per_operation.csv", &m.per_operation)?;
    }
    if o.size_matrices == Some(true) {
        let system = o.system.expect("resolved system").model(None, None, None);
        let cfg = SizeExperiment {
            sizes: (1..=o.max_size.unwrap_or(20)).collect(),
            axes: o.axes.unwrap_or(100),
            replications: o.replications.unwrap_or(100),
            period: o.oracle_period.unwrap_or(10_000.0),
            seed,
            ..SizeExperiment::new(system)
        };
        let r = size_shifting_experiment(&cfg)?;
        let tag = system.name();
        write_matrix(run, &format!("size_{tag}_total.csv"), &r.matrices.total)?;
        write_matrix(
            run,
            &format!("size_{tag}_per_operation.csv"),
            &r.matrices.per_operation,
        )?;
        run.result("size_costs", serde_json::to_value(r.costs)?);
    }
    Ok(())
}
