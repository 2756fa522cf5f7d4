use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use twmd_core::error::{Error, Result};
use twmd_core::pipeline::{self, ConfigEntries, PipelineConfig, Report};

/// Through-wall human motion radar pipeline.
#[derive(Debug, Parser)]
#[command(name = "twmd", version)]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scene seed (also the first evaluation seed for `classify`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Clutter filter: none, mean_sub or rpca.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Feature kind: ms_rm, rpca_rm, ms_spec, rpca_spec or all.
    #[arg(long, global = true)]
    feature: Option<String>,
    /// Number of 2D-PCA components.
    #[arg(long, global = true)]
    components: Option<usize>,
    /// Neighbours for k-NN.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Training fraction per class.
    #[arg(long, global = true)]
    train_frac: Option<f64>,
    /// Override any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scene, or the labelled dataset with --batch.
    Simulate {
        /// Generate every class of the dataset and write a manifest.
        #[arg(long)]
        batch: bool,
        /// Motion template for a single scene.
        #[arg(long)]
        template: Option<String>,
    },
    /// Remove stationary clutter from a range-map archive.
    Filter {
        input: PathBuf,
        /// Also write the low-rank part (rpca only).
        #[arg(long)]
        save_low_rank: bool,
    },
    /// Micro-Doppler spectrogram of an archive as CSV and PGM.
    Spectrogram { input: PathBuf },
    /// Evaluate the classifier on a simulated dataset.
    Classify { manifest: PathBuf },
    /// Range-map magnitude as CSV and PGM.
    Export { input: PathBuf },
}

fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut entries = match &cli.config {
        Some(path) => ConfigEntries::load(path)?,
        None => ConfigEntries::default(),
    };
    for item in &cli.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
        entries.set(key.trim(), value.trim())?;
    }
    if let Some(v) = cli.seed {
        entries.set("seed", v.to_string())?;
    }
    if let Some(v) = &cli.out {
        entries.set("out", v.display().to_string())?;
    }
    if let Some(v) = &cli.method {
        entries.set("filter", v.as_str())?;
    }
    if let Some(v) = &cli.feature {
        entries.set("feature", v.as_str())?;
    }
    if let Some(v) = cli.components {
        entries.set("classify.components", v.to_string())?;
    }
    if let Some(v) = cli.k {
        entries.set("classify.k", v.to_string())?;
    }
    if let Some(v) = cli.train_frac {
        entries.set("classify.train_frac", v.to_string())?;
    }
    if let Command::Simulate { template: Some(t), .. } = &cli.command {
        entries.set("motion.template", t.as_str())?;
    }
    PipelineConfig::from_entries(entries)
}

fn run(cli: &Cli) -> Result<Report> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Simulate { batch, .. } => pipeline::cmd_simulate(&cfg, *batch),
        Command::Filter { input, save_low_rank } => pipeline::cmd_filter(&cfg, input, *save_low_rank),
        Command::Spectrogram { input } => pipeline::cmd_spectrogram(&cfg, input),
        Command::Classify { manifest } => pipeline::cmd_classify(&cfg, manifest),
        Command::Export { input } => pipeline::cmd_export(&cfg, input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for path in &report.written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("twmd: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
