use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hopf_crf::commands::{self, EXIT_CONFIG};
use hopf_crf::config::{ConfigBuilder, Preset, RunConfig};

#[derive(Parser)]
#[command(name = "hopf-crf", version, about = "LCK metrics on Hopf surfaces and their Chern-Ricci flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the closed-form tensors against identities and finite differences.
    Verify(Common),
    /// Integrate the reduced flow and write the monitor time series.
    Flow(Common),
    /// Tabulate the static tensors over a grid.
    Static(Common),
    /// Run the flow over a grid of moduli.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Moduli preset (overrides `abs_alpha`, `abs_beta`).
    #[arg(long)]
    preset: Option<Preset>,
    /// RNG seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` setting, applied last. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn build_config(c: &Common, needs_moduli: bool) -> hopf_crf::Result<RunConfig> {
    let mut b = ConfigBuilder::new();
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path)?;
        b = b.parse_text(&text)?;
    }
    b = b.apply_env(std::env::vars())?;
    if let Some(p) = c.preset {
        b = b.preset(p);
    }
    if let Some(seed) = c.seed {
        b.set("seed", &seed.to_string())?;
    }
    if let Some(out) = &c.out {
        b.set("out_dir", &out.to_string_lossy())?;
    }
    for kv in &c.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| hopf_crf::Error::ConfigRange { key: kv.clone(), message: "expected KEY=VALUE".into() })?;
        b.set(k.trim(), v)?;
    }
    if needs_moduli {
        b.build()
    } else {
        b.build_without_moduli()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&RunConfig) -> hopf_crf::Result<i32>) = match &cli.command {
        Command::Verify(c) => (c, commands::cmd_verify),
        Command::Flow(c) => (c, commands::cmd_flow),
        Command::Static(c) => (c, commands::cmd_static),
        Command::Sweep(c) => (c, commands::cmd_sweep),
    };
    let needs_moduli = !matches!(cli.command, Command::Sweep(_));
    let cfg = match build_config(common, needs_moduli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let code = match commands::with_threads(cfg.threads, || run(&cfg)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) | Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
