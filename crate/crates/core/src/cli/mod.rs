//! The `tcsde` command line.
//!
//! ```text
//! tcsde <clock|validate|simulate|stability|lyapunov> [--config FILE] [--preset NAME]
//!       [--beta F] [--dt F] [--op-step F] [--t-max F] [--paths N] [--seed N]
//!       [--out PATH] [--format csv|json] [--method direct|duality|closed_form]
//! ```
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage, configuration or I/O
//! error. The primary output depends only on the configuration; the run
//! time and the resolved configuration go to `<out>.meta.json`.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::sde::Method;
use commands::Output;
use config::{Format, Overrides, Preset, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tcsde", version, about = "SDEs driven by time-changed Brownian motion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inverse stable subordinator path or ensemble moments.
    Clock(Common),
    /// Run the oracle suite.
    Validate(Common),
    /// Integrate one trajectory.
    Simulate(Common),
    /// Monte Carlo stability estimates.
    Stability(Common),
    /// Scan the Lyapunov conditions.
    Lyapunov(Common),
}

fn parse_method(s: &str) -> Result<Method> {
    s.parse()
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    op_step: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            beta: self.beta,
            dt: self.dt,
            op_step: self.op_step,
            t_max: self.t_max,
            n_paths: self.paths,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            method: self.method,
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().map(OsString::from).unwrap_or_default();
    name.push(format!(".{suffix}"));
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

fn write_outputs(name: &str, cfg: &RunConfig, out: &Output) -> Result<PathBuf> {
    let path = cfg.output_path(name);
    if cfg.out.is_none() {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(&path, &out.primary)?;
    for (suffix, contents) in &out.extra {
        fs::write(sibling(&path, suffix), contents)?;
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": created,
        "passed": out.passed,
        "config": cfg,
    });
    let mut meta_path = path.clone().into_os_string();
    meta_path.push(".meta.json");
    fs::write(meta_path, serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))? + "\n")?;
    Ok(path)
}

fn run(command: Command) -> Result<(PathBuf, bool)> {
    type Handler = fn(&RunConfig) -> Result<Output>;
    let (name, common, f): (&str, Common, Handler) = match command {
        Command::Clock(c) => ("clock", c, commands::cmd_clock),
        Command::Validate(c) => ("validate", c, commands::cmd_validate),
        Command::Simulate(c) => ("simulate", c, commands::cmd_simulate),
        Command::Stability(c) => ("stability", c, commands::cmd_stability),
        Command::Lyapunov(c) => ("lyapunov", c, commands::cmd_lyapunov),
    };
    let cfg = RunConfig::resolve(common.config.as_deref(), common.preset, &common.overrides())?;
    let out = f(&cfg)?;
    let path = write_outputs(name, &cfg, &out)?;
    Ok((path, out.passed))
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok((path, true)) => {
            println!("{}", path.display());
            EXIT_OK
        }
        Ok((path, false)) => {
            eprintln!("check failed; see {}", path.display());
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
