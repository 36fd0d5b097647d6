use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cnm::cli::{
    cmd_bench, cmd_estimate_gamma, cmd_eval, cmd_sweep, cmd_train, DataSource, ExperimentConfig,
    Family, FileFormat,
};
use cnm::error::Error;
use cnm::eval::KMode;

#[derive(Parser)]
#[command(name = "cnm", version, about = "Nonlinear feature-map training and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a flat key=value config file
    #[arg(long)]
    config: PathBuf,
    /// Override config entries, e.g. --set k=16 --set lambda=0.01
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Dataset path (sparse index:value format, or CSV)
    #[arg(long)]
    data: PathBuf,
    /// Force input format instead of inferring from the extension
    #[arg(long, value_parser = ["libsvm", "csv"])]
    format: Option<String>,
    /// CSV column holding the label
    #[arg(long, default_value_t = 0)]
    label_col: usize,
    /// CSV file has a header row
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource, Error> {
        if !self.data.exists() {
            return Err(Error::Config(format!(
                "data: no such file `{}`",
                self.data.display()
            )));
        }
        let format = match self.format.as_deref() {
            Some("csv") => FileFormat::Csv,
            Some(_) => FileFormat::Libsvm,
            None => {
                if self.data.extension().is_some_and(|e| e == "csv") {
                    FileFormat::Csv
                } else {
                    FileFormat::Libsvm
                }
            }
        };
        Ok(DataSource::File {
            path: self.data.clone(),
            format,
            label_col: self.label_col,
            header: self.header,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a feature-map family and write maps, models, traces and a manifest
    Train(ConfigArgs),
    /// Accuracy/MSE sweep over families, feature counts and seeds
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated families to sweep (defaults to the config's family)
        #[arg(long)]
        families: Option<String>,
    },
    /// Time dense vs circulant projections
    Bench {
        /// Input dimensions to benchmark
        #[arg(long, value_delimiter = ',', default_values_t = vec![512usize, 2048, 8192])]
        d_list: Vec<usize>,
        /// Feature count per dimension: d or 2d
        #[arg(long, default_value = "d", value_parser = ["d", "2d"])]
        k_mode: String,
        /// Timing repetitions (median is reported; minimum 5)
        #[arg(long, default_value_t = 7)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an RBF bandwidth from nearest-neighbor distances
    EstimateGamma {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1000)]
        sample_n: usize,
        #[arg(long, default_value_t = 50)]
        nn_rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a saved map + model on a dataset
    Eval {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
    },
}

fn parse_sets(args: &ConfigArgs) -> Result<Vec<(String, String)>, Error> {
    let mut overrides = Vec::new();
    for s in &args.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(out) = &args.out {
        overrides.push(("out".into(), out.display().to_string()));
    }
    Ok(overrides)
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => {
            let overrides = parse_sets(&args)?;
            let config = ExperimentConfig::from_file(&args.config, &overrides)?;
            cmd_train(&config)?;
            println!("wrote artifacts to {}", config.out_dir.display());
        }
        Command::Sweep { config, families } => {
            let overrides = parse_sets(&config)?;
            let config = ExperimentConfig::from_file(&config.config, &overrides)?;
            let families = match families {
                Some(list) => list
                    .split(',')
                    .map(|s| Family::parse(s.trim()))
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![config.family],
            };
            cmd_sweep(&config, &families)?;
            println!("wrote sweep to {}", config.out_dir.join("sweep.csv").display());
        }
        Command::Bench {
            d_list,
            k_mode,
            reps,
            seed,
            out,
        } => {
            let mode = if k_mode == "2d" { KMode::Double } else { KMode::Equal };
            cmd_bench(&d_list, mode, reps, seed, out.as_deref())?;
        }
        Command::EstimateGamma {
            data,
            sample_n,
            nn_rank,
            seed,
        } => {
            let gamma = cmd_estimate_gamma(&data.source()?, sample_n, nn_rank, seed)?;
            println!("{gamma}");
        }
        Command::Eval { map, model, data } => {
            let report = cmd_eval(&map, &model, &data.source()?)?;
            println!(
                "accuracy {} mean_hinge {} n {}",
                report.accuracy, report.mean_hinge, report.n_test
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) | Error::Io { .. } | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
