//! Experiment driver. Every subcommand is a thin wrapper over the library:
//! it assembles a configuration, calls the corresponding library routines,
//! writes plot-ready CSV artifacts plus a JSON manifest, prints a summary
//! table, and exits nonzero when a check-mode threshold is violated.

mod commands;
mod config;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spinharm", version, about = "Spin harmonic and needlet frame experiments")]
struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed for all randomness in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct CommonOverrides {
    #[arg(long)]
    spin: Option<i32>,
    #[arg(long = "lmax")]
    l_max: Option<u32>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "reps")]
    n_reps: Option<usize>,
    /// Comma-separated scale list, e.g. "-8,-10,-12".
    #[arg(long = "j-list", value_delimiter = ',', allow_hyphen_values = true)]
    j_list: Option<Vec<i32>>,
}

impl CommonOverrides {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            spin: self.spin,
            l_max: self.l_max,
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            c: self.c,
            n_reps: self.n_reps,
            j_list: self.j_list.clone(),
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Orthonormality residuals of the harmonic basis under quadrature.
    HarmonicsCheck {
        #[command(flatten)]
        common: CommonOverrides,
        /// Spins to check, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,0,2")]
        spins: Vec<i32>,
        /// Failure threshold on the Gram residual.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Build a needlet frame and write its description.
    FrameBuild {
        #[command(flatten)]
        common: CommonOverrides,
        /// Also estimate frame bounds with this many random trials.
        #[arg(long, default_value_t = 8)]
        trials: usize,
        /// Write the full per-scale partitions (cell lists) as JSON.
        #[arg(long)]
        cells: bool,
        /// Output file name for the frame description.
        #[arg(long, default_value = "frame.json")]
        frame_out: String,
    },
    /// Re-check a stored frame: bound estimates and the sandwich inequality.
    FrameCheck {
        /// Frame description produced by frame-build.
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value_t = 16)]
        trials: usize,
    },
    /// Sample Gaussian isotropic fields and write the ensemble.
    Simulate {
        #[command(flatten)]
        common: CommonOverrides,
    },
    /// Needlet kernel localization: amplitude scaling and far-zone decay.
    Localization {
        #[command(flatten)]
        common: CommonOverrides,
        /// Scales t = a^j to probe, as j values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        j_probe: Option<Vec<i32>>,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Allowed relative spread of amplitude * t^2 across scales.
        #[arg(long, default_value_t = 0.15)]
        amp_tol: f64,
        /// Required far-zone decay exponent (at most this).
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        slope_max: f64,
    },
    /// Wavelet-coefficient correlation across scales for a point pair.
    Uncorrelation {
        #[command(flatten)]
        common: CommonOverrides,
        /// Geodesic distance of the probe pair (radians).
        #[arg(long, default_value_t = 0.5)]
        distance: f64,
        /// Require the final-scale |corr| to fall below this.
        #[arg(long, default_value_t = 0.1)]
        corr_max: f64,
    },
    /// Central-limit trend of the standardized scale statistic.
    Clt {
        #[command(flatten)]
        common: CommonOverrides,
        /// Fail if the finest-scale KS distance exceeds this (0 = report only).
        #[arg(long, default_value_t = 0.0)]
        ks_max: f64,
        /// Also write the standardized samples per scale.
        #[arg(long)]
        dump_samples: bool,
    },
    /// Calibration of the standardized scale test.
    SjTest {
        #[command(flatten)]
        common: CommonOverrides,
        /// Scale to test at (defaults to the first entry of j-list).
        #[arg(long, allow_hyphen_values = true)]
        j: Option<i32>,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        /// Spectrum scaling of the data-generating model (1 = null).
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Allowed deviation of the rejection rate from the level under the
        /// null (0 = report only).
        #[arg(long, default_value_t = 0.0)]
        rate_tol: f64,
        /// Also build the frame and fill the gamma_tilde column of the
        /// per-scale table.
        #[arg(long)]
        with_frame: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    base.seed = cli.seed.or(base.seed);
    base.out_dir = cli.out.clone().or(base.out_dir.clone());

    match cli.command {
        Command::HarmonicsCheck {
            common,
            spins,
            tolerance,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::harmonics_check(&cfg, &spins, tolerance)
        }
        Command::FrameBuild {
            common,
            trials,
            cells,
            frame_out,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::frame_build(&cfg, trials, cells, &frame_out)
        }
        Command::FrameCheck { frame, trials } => commands::frame_check(&base, &frame, trials),
        Command::Simulate { common } => {
            let cfg = base.merged_with(&common.to_config());
            commands::simulate(&cfg)
        }
        Command::Localization {
            common,
            j_probe,
            samples,
            amp_tol,
            slope_max,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::localization(&cfg, j_probe, samples, amp_tol, slope_max)
        }
        Command::Uncorrelation {
            common,
            distance,
            corr_max,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::uncorrelation(&cfg, distance, corr_max)
        }
        Command::Clt {
            common,
            ks_max,
            dump_samples,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::clt(&cfg, ks_max, dump_samples)
        }
        Command::SjTest {
            common,
            j,
            level,
            scale,
            rate_tol,
            with_frame,
        } => {
            let cfg = base.merged_with(&common.to_config());
            commands::sj_test(&cfg, j, level, scale, rate_tol, with_frame)
        }
    }
}
