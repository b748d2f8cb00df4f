// SPDX-License-Identifier: MIT OR Apache-2.0

//! `srcrqa` command line: synthetic data, sliding-window RQA, SRC
//! surrogates, surrogate-corrected DET and the analytic cost oracles.
//! Every run writes `manifest.json` next to its outputs; passing it back
//! with `--config` repeats the run.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use commands::{AnalysisOpts, Run};
use config::{
    known_keys, CorrectOpts, CostOpts, GenerateOpts, Layered, OracleOpts, RqaOpts, RqaOutputOpts,
    SegmentOpts, SeriesOpts, SurrogateOpts,
};
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "srcrqa",
    version,
    about = "Recurrence analysis of irregularly sampled series"
)]
struct Cli {
    /// JSON file of long-flag keys; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; drawn from the OS and recorded when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "srcrqa-out")]
    output: PathBuf,
    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a model system on a gamma-distributed time axis.
    Generate(GenerateOpts),
    /// Sliding-window DET of one series.
    Rqa {
        #[command(flatten)]
        series: SeriesOpts,
        #[command(flatten)]
        seg: SegmentOpts,
        #[command(flatten)]
        cost: CostOpts,
        #[command(flatten)]
        rqa: RqaOpts,
        #[command(flatten)]
        out: RqaOutputOpts,
    },
    /// Write an SRC surrogate ensemble.
    Surrogate {
        #[command(flatten)]
        series: SeriesOpts,
        #[command(flatten)]
        seg: SegmentOpts,
        #[command(flatten)]
        sur: SurrogateOpts,
    },
    /// DET of the series against the upper quantile of its surrogates.
    Correct {
        #[command(flatten)]
        series: SeriesOpts,
        #[command(flatten)]
        seg: SegmentOpts,
        #[command(flatten)]
        cost: CostOpts,
        #[command(flatten)]
        rqa: RqaOpts,
        #[command(flatten)]
        sur: SurrogateOpts,
        #[command(flatten)]
        corr: CorrectOpts,
    },
    /// Closed-form and Monte Carlo cost matrices.
    Oracle(OracleOpts),
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Generate(_) => "generate",
        Command::Rqa { .. } => "rqa",
        Command::Surrogate { .. } => "surrogate",
        Command::Correct { .. } => "correct",
        Command::Oracle(_) => "oracle",
    }
}

/// Overlays `flags` on the file layer and reads the group back.
fn merged<T>(layer: &mut Layered, flags: &T) -> Result<T, CliError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    layer.overlay(flags);
    layer.extract()
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut layer = match &cli.config {
        Some(p) => Layered::from_file(&std::fs::read_to_string(p)?, &known_keys())?,
        None => Layered::default(),
    };
    if let Some(s) = cli.seed {
        layer.set("seed", s);
    }
    if let Some(t) = cli.threads {
        layer.set("threads", t);
    }
    let seed = match layer.get::<u64>("seed") {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            layer.set("seed", s);
            s
        }
    };
    if let Some(t) = layer.get::<usize>("threads") {
        if t == 0 {
            return Err(CliError::Validation("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }

    let command = name(&cli.command);
    let mut run = Run::new(command, cli.output.clone(), Layered::default())?;
    match cli.command {
        Command::Generate(g) => {
            let g = merged(&mut layer, &g)?.resolved();
            run.config = layer;
            commands::generate(&mut run, g, seed)?;
        }
        Command::Rqa {
            series,
            seg,
            cost,
            rqa,
            out,
        } => {
            let a = AnalysisOpts {
                series: merged(&mut layer, &series)?,
                seg: merged(&mut layer, &seg)?,
                cost: merged(&mut layer, &cost)?,
                rqa: merged(&mut layer, &rqa)?,
            };
            let out = merged(&mut layer, &out)?;
            run.config = layer;
            commands::rqa(&mut run, a, out)?;
        }
        Command::Surrogate { series, seg, sur } => {
            let series = merged(&mut layer, &series)?;
            let seg = merged(&mut layer, &seg)?;
            let sur = merged(&mut layer, &sur)?;
            run.config = layer;
            commands::surrogate(&mut run, series, seg, sur, seed)?;
        }
        Command::Correct {
            series,
            seg,
            cost,
            rqa,
            sur,
            corr,
        } => {
            let a = AnalysisOpts {
                series: merged(&mut layer, &series)?,
                seg: merged(&mut layer, &seg)?,
                cost: merged(&mut layer, &cost)?,
                rqa: merged(&mut layer, &rqa)?,
            };
            let sur = merged(&mut layer, &sur)?;
            let corr = merged(&mut layer, &corr)?;
            run.config = layer;
            commands::correct(&mut run, a, sur, corr, seed)?;
        }
        Command::Oracle(o) => {
            let o = merged(&mut layer, &o)?;
            run.config = layer;
            commands::oracle(&mut run, o, seed)?;
        }
    }
    run.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
