//! Argument parsing and the subcommands.

use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use umbd_core::appio::defaults_for;
use umbd_core::heterogeneity::Method;
use umbd_core::scales::EffectKind;
use umbd_core::sensitivity::{default_grid, sweep, to_csv, SweepDimension, SweepSpec};
use umbd_core::{parse_config, run_analysis, AnalysisConfig, Error};

#[derive(Debug, Parser)]
#[command(name = "umbd", version, about = "Utility-based magnitude decisions from an effect estimate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one analysis and write its report.
    Analyze {
        /// JSON config file, or `-` for stdin.
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        mc: McOverride,
    },
    /// Re-run the analysis over values of one input.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        dimension: SweepDimension,
        /// Comma-separated values; a built-in grid when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Side effect varied by `side_effect_points`.
        #[arg(long, default_value_t = 0)]
        side_effect_index: usize,
        /// CSV destination (stdout by default).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the JSON sweep report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        mc: McOverride,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, env = "UMBD_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Print the built-in threshold, series and prior for an effect type.
    Defaults {
        #[arg(long = "type")]
        effect_type: EffectKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Monte Carlo overrides. Giving either switches heterogeneity to simulation.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct McOverride {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub draws: Option<u64>,
}

impl McOverride {
    pub fn apply(self, config: &mut AnalysisConfig) {
        if self.seed.is_none() && self.draws.is_none() {
            return;
        }
        if let Some(seed) = self.seed {
            config.mc.seed = seed;
        }
        if let Some(draws) = self.draws {
            config.mc.draws = draws;
        }
        if let Some(h) = config.heterogeneity.as_mut() {
            h.method = Method::MonteCarlo;
        }
    }
}

enum Failure {
    Input(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Computation(_) => Failure::Computation(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// 1 for input problems, 2 for computation failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation { .. } | Error::Domain { .. } => 1,
        Error::Computation(_) => 2,
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    0
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Computation(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let text = if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    text.map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let res = match dest {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Analyze { config, format, output, mc } => {
            let mut cfg = parse_config(&read_input(&config)?)?;
            mc.apply(&mut cfg);
            let report = run_analysis(&cfg)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            emit(&with_newline(text), output.as_deref(), out)
        }
        Command::Sweep { config, dimension, values, side_effect_index, output, report, mc } => {
            let mut cfg = parse_config(&read_input(&config)?)?;
            mc.apply(&mut cfg);
            let values = if values.is_empty() { default_grid(&cfg, dimension)? } else { values };
            let result = sweep(&SweepSpec { config: cfg, dimension, values, side_effect_index })?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&result).map_err(|e| Failure::Computation(e.to_string()))?;
                emit(&with_newline(json), Some(&path), out)?;
            }
            emit(&to_csv(&result)?, output.as_deref(), out)
        }
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Computation(e.to_string()))?;
            rt.block_on(crate::server::serve(SocketAddr::new(host, port)))
                .map_err(|e| Failure::Input(format!("cannot serve on {host}:{port}: {e}")))
        }
        Command::Defaults { effect_type } => {
            let json = serde_json::to_string_pretty(&defaults_for(effect_type)).map_err(|e| Failure::Computation(e.to_string()))?;
            emit(&with_newline(json), None, out)
        }
    }
}
