//! Command-line front end: configuration, presets and file emission for
//! every stage of the atomic Ferris wheel pipeline.

pub mod commands;
pub mod config;
pub mod error;
pub mod field_io;
pub mod image;
pub mod presets;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, Result, EXIT_OK};
use crate::presets::{Figure, Preset};

#[derive(Debug, Parser)]
#[command(name = "ferriswheel", version, about = "Atomic Ferris wheel beam simulator")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// INI configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Built-in configuration to start from.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Grid samples per axis (overrides grid.nx).
    #[arg(long, global = true, value_name = "NX")]
    pub grid: Option<usize>,

    /// Grid half extent in m (overrides grid.half_extent).
    #[arg(long, global = true, value_name = "M")]
    pub extent: Option<f64>,

    /// Emitted files: csv, csv+pgm or csv+png (overrides output.format).
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Spiral mask intensity grid.
    Mask,
    /// Dipole potential grid.
    Potential,
    /// Imprinted wave packet (complex field).
    Imprint,
    /// Diffraction order fields and population table.
    Orders,
    /// Ferris wheel density for one order pair.
    Ferris {
        /// Order index; defaults to ferris.m.
        #[arg(long = "m", allow_hyphen_values = true)]
        m: Option<i32>,
    },
    /// Focal scan of the configured orders.
    Propagate,
    /// Raman-Nath validity report.
    Validate,
    /// Reproduce a figure from its built-in preset.
    Figure {
        #[arg(value_enum)]
        name: Figure,
    },
}

/// Merges preset or file, environment and flags into one configuration.
pub fn load_config<I>(opts: &GlobalOpts, command: &Command, env: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = (String, String)>,
{
    let preset = match command {
        Command::Figure { name } => Some(name.preset()),
        _ => opts.preset,
    };
    let mut cfg = match (preset, &opts.config) {
        (Some(_), Some(_)) => {
            return Err(CliError::config("use either --config or a preset, not both"));
        }
        (Some(p), None) => RunConfig::from_ini(p.text(), p.name())?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RunConfig::from_ini(&text, &path.display().to_string())?
        }
        (None, None) => return Err(CliError::config("no configuration: pass --config <path> or --preset <name>")),
    };
    cfg.apply_env(env)?;
    if let Some(nx) = opts.grid {
        cfg.set("grid", "nx", &nx.to_string())?;
    }
    if let Some(extent) = opts.extent {
        cfg.set("grid", "half_extent", &format!("{extent:e}"))?;
    }
    if let Some(format) = opts.format {
        cfg.set("output", "format", &format.to_string())?;
    }
    if let Some(out) = &opts.out {
        cfg.set("output", "dir", &out.display().to_string())?;
    }
    Ok(cfg)
}

/// Runs one command to completion without touching the file system.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Mask => commands::mask(cfg),
        Command::Potential => commands::potential(cfg),
        Command::Imprint => commands::imprint(cfg),
        Command::Orders => commands::orders(cfg),
        Command::Ferris { m } => commands::ferris(cfg, *m),
        Command::Propagate => commands::propagate(cfg),
        Command::Validate => commands::validate(cfg),
        Command::Figure { name: Figure::Fig1 } => commands::mask(cfg),
        Command::Figure { .. } => commands::ferris(cfg, None),
    }
}

/// Report text and written paths of a successful run.
#[derive(Debug)]
pub struct RunSummary {
    pub report: String,
    pub files: Vec<PathBuf>,
}

pub fn run<I>(cli: &Cli, env: I) -> Result<RunSummary>
where
    I: IntoIterator<Item = (String, String)>,
{
    let cfg = load_config(&cli.opts, &cli.command, env)?;
    let output = execute(&cli.command, &cfg)?;
    let files = output.write_to(&PathBuf::from(cfg.output_dir()))?;
    Ok(RunSummary {
        report: output.report,
        files,
    })
}

/// Parses `args`, runs, prints the report and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli, std::env::vars()) {
        Ok(summary) => {
            print!("{}", summary.report);
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
