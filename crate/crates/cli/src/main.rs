//! `reid-temporal`: evaluate, filter and re-rank person re-identification
//! results; fit transit-time priors; generate and benchmark synthetic data.

mod commands;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(name = "reid-temporal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Directory receiving every output file.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Worker threads for distance and scoring loops. Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Clone)]
pub struct DataArgs {
    /// Manifest listing query and gallery filenames.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Feature file, binary (RIDF) or CSV.
    #[arg(long)]
    pub features: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Appearance-only mAP/CMC under the same-identity-same-camera exclusion.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        /// Camera topology CSV; validated and recorded.
        #[arg(long)]
        topology: Option<PathBuf>,
        #[arg(long, default_value = "euclidean")]
        metric: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate with the gallery reduced to a time window after each query.
    Filter {
        #[command(flatten)]
        data: DataArgs,
        /// Window in minutes, `MIN:MAX`, half-open.
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value = "euclidean")]
        metric: String,
        #[command(flatten)]
        common: Common,
    },
    /// Posterior re-ranking with a temporal and optional spatial prior.
    Rerank {
        #[command(flatten)]
        data: DataArgs,
        /// Appearance standard deviation.
        #[arg(long)]
        sigma: f64,
        /// Temporal prior as JSON (`{"family": ..., "shape": ..., "loc": ..., "scale": ...}`).
        #[arg(long)]
        prior_json: PathBuf,
        /// off, laplace or prop.
        #[arg(long, default_value = "off")]
        spatial: String,
        /// Spatial scale in meters for the laplace mode.
        #[arg(long, default_value_t = 50.0)]
        sigma_s: f64,
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Restrict to a time window `MIN:MAX` (minutes) before re-ranking.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Use within-camera frame gaps instead of timestamps.
        #[arg(long)]
        frame_mode: bool,
        /// JSON object mapping camera id to frames per second.
        #[arg(long)]
        fps: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Maximum-likelihood fits of transit-time priors.
    FitPriors {
        /// Time gaps in minutes, whitespace separated, `#` comments allowed.
        #[arg(long, conflicts_with_all = ["manifest", "features"])]
        samples: Option<PathBuf>,
        /// Derive gaps from matched query/gallery pairs instead.
        #[arg(long, requires = "features")]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest")]
        features: Option<PathBuf>,
        /// Comma-separated families; all by default.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
        /// Fix the location instead of profiling it.
        #[arg(long, allow_hyphen_values = true)]
        loc: Option<f64>,
        #[arg(long, default_value_t = 20)]
        grid_points: usize,
        /// Fit laplace and friends with the optimizer rather than closed forms.
        #[arg(long)]
        no_closed_form: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic camera network dataset.
    Synth {
        /// Generator config JSON; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare appearance, window, temporal and spatial+temporal ranking on synthetic data.
    Bench {
        /// JSON with optional `synth` and `bench` sections.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed; repeats use seed, seed+1, ...
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Evaluate { common, .. }
            | Command::Filter { common, .. }
            | Command::Rerank { common, .. }
            | Command::FitPriors { common, .. }
            | Command::Synth { common, .. }
            | Command::Bench { common, .. } => common,
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evaluate {
            data,
            topology,
            metric,
            common,
        } => commands::evaluate(&data, topology.as_deref(), &metric, &common),
        Command::Filter {
            data,
            window,
            metric,
            common,
        } => commands::filter(&data, &window, &metric, &common),
        Command::Rerank {
            data,
            sigma,
            prior_json,
            spatial,
            sigma_s,
            topology,
            window,
            frame_mode,
            fps,
            common,
        } => commands::rerank(
            &data,
            &commands::RerankArgs {
                sigma,
                prior_json,
                spatial,
                sigma_s,
                topology,
                window,
                frame_mode,
                fps,
            },
            &common,
        ),
        Command::FitPriors {
            samples,
            manifest,
            features,
            families,
            loc,
            grid_points,
            no_closed_form,
            common,
        } => {
            let data = match (manifest, features) {
                (Some(manifest), Some(features)) => Some(DataArgs { manifest, features }),
                _ => None,
            };
            commands::fit_priors(
                samples.as_deref(),
                data.as_ref(),
                &families,
                loc,
                grid_points,
                !no_closed_form,
                &common,
            )
        }
        Command::Synth { config, seed, common } => commands::synth(config.as_deref(), seed, &common),
        Command::Bench {
            config,
            seed,
            repeat,
            common,
        } => commands::bench(config.as_deref(), seed, repeat, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::new("Usage", e.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let threads = cli.command.common().threads;
    let result = match threads {
        Some(0) => Err(CliError::new("InvalidConfig", "--threads must be positive")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(CliError::new("InvalidConfig", e.to_string())),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
