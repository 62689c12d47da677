//! `czreach`: backward reachable sets, Minkowski differences and the
//! acceptance suite from the command line.
//!
//! Exit codes: 0 success, 1 a validation criterion failed, 2 the config is
//! invalid, 3 the computation failed. Errors are printed to stderr as a JSON
//! document (and written to `<out>/error.json` when `--out` is given).

mod config;
mod failure;
mod minkdiff;
mod output;
mod reach;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;

#[derive(Parser)]
#[command(name = "czreach", version, about = "Constrained-zonotope reachability and Minkowski differences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Backward reachable sets (scaling or splitting) from a problem file.
    Reach(Common),
    /// Two-step, rich-representation and oracle Minkowski differences.
    Minkdiff(Common),
    /// The acceptance suite; the config (tolerances, subset, seed) is optional.
    Validate(Common),
}

#[derive(Args)]
pub struct Common {
    /// JSON config document.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`; default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write `plot_<i>_<j>.svg`.
    #[arg(long)]
    pub svg: bool,
}

impl Common {
    pub fn config_path(&self) -> Result<&Path, Failure> {
        self.config
            .as_deref()
            .ok_or_else(|| Failure::schema("", "this subcommand needs --config <path>"))
    }
}

pub fn out_dir(common: &Common, from_config: Option<&str>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| from_config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, common) = match &cli.command {
        Command::Reach(c) => (reach::cmd(c).map(|_| true), c),
        Command::Minkdiff(c) => (minkdiff::cmd(c).map(|_| true), c),
        Command::Validate(c) => (validate::cmd(c), c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let doc = f.document();
            eprintln!("{doc}");
            if let Some(dir) = &common.out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = std::fs::write(dir.join("error.json"), format!("{doc}\n"));
                }
            }
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
