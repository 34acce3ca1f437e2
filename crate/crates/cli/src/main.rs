use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use otto_cli::config::{merge, RunConfig, Severity};
use otto_cli::presets;
use otto_cli::runner::{execute, CliError};

#[derive(Parser)]
#[command(name = "otto", version, about = "Trapped-ion Otto engine with a phonon battery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and/or config file; writes CSV + JSON artifacts.
    Run {
        /// Named preset, see `list-presets`.
        #[arg(long)]
        preset: Option<String>,
        /// JSON config; overlays the preset field-by-field when both given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// RNG seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep points (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a config file, print diagnostics, run nothing.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List named presets with one-line descriptions.
    ListPresets,
}

fn load_config(preset: Option<&str>, config: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let mut value = match preset {
        Some(name) => {
            let cfg = presets::preset(name).ok_or_else(|| {
                CliError::Config(format!("unknown preset {name:?}; see `otto list-presets`"))
            })?;
            serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => json!({}),
    };
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let overlay: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut value, overlay);
    } else if preset.is_none() {
        return Err(CliError::Config("need --preset and/or --config".into()));
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { preset, config, out, seed, jobs } => {
            let mut cfg = load_config(preset.as_deref(), config.as_ref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let summary = execute(&cfg, preset.as_deref(), &out, jobs)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "wrote {} files to {}",
                summary.files.len(),
                summary.out_dir.display()
            );
            for f in &summary.files {
                println!("  {f}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(None, Some(&config))?;
            let diags = cfg.validate();
            let payload = serde_json::to_string_pretty(&diags)
                .map_err(|e| CliError::Io(e.to_string()))?;
            println!("{payload}");
            if diags.iter().any(|d| d.severity == Severity::Error) {
                Err(CliError::Config("config has errors".into()))
            } else {
                Ok(())
            }
        }
        Command::ListPresets => {
            for name in presets::PRESET_NAMES {
                println!("{name:10} {}", presets::describe(name).unwrap_or(""));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match &e {
                CliError::Config(_) => "config",
                CliError::Numerics(_) => "numerics",
                CliError::Io(_) => "io",
            };
            let detail = match &e {
                CliError::Config(m) | CliError::Numerics(m) | CliError::Io(m) => {
                    // diagnostics arrive pre-serialized; pass them through
                    serde_json::from_str::<serde_json::Value>(m)
                        .unwrap_or(serde_json::Value::String(m.clone()))
                }
            };
            eprintln!("{}", json!({ "error": { "kind": kind, "detail": detail } }));
            ExitCode::from(e.exit_code())
        }
    }
}
