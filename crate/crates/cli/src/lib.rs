//! Command implementations behind the `cookiezeta` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod table;

use std::path::{Path, PathBuf};

pub use commands::{Command, RunOutput};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("ConfigError: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cookiezeta::Error),
    #[error("NumericFailure: {0}")]
    Numeric(String),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for a numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) | CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Where a run reads and writes.
#[derive(Debug, Clone, Default)]
pub struct Paths {
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
}

impl Paths {
    /// `--out`, then the config, then `cookiezeta-out`; `--cache` (or
    /// `COOKIEZETA_CACHE`), then the config.
    pub fn resolve(config: &RunConfig, out: Option<PathBuf>, cache: Option<PathBuf>) -> Self {
        Paths {
            out: out
                .or_else(|| config.out.clone())
                .unwrap_or_else(|| PathBuf::from("cookiezeta-out")),
            cache: cache.or_else(|| config.cache.clone()),
        }
    }
}

/// Runs `command` and writes `<out>/<table>.csv` plus
/// `<out>/<command>.summary.json`.
pub fn execute(command: Command, config: &RunConfig, paths: &Paths) -> Result<RunOutput, CliError> {
    let output = commands::run(command, config, paths)?;
    write_output(&paths.out, command, config, &output)?;
    Ok(output)
}

fn write_output(
    dir: &Path,
    command: Command,
    config: &RunConfig,
    output: &RunOutput,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let hash = config.hash();
    let rendered: Vec<(String, String)> = output
        .tables
        .iter()
        .map(|t| Ok((format!("{}.csv", t.name), t.to_csv(&hash)?)))
        .collect::<Result<_, CliError>>()?;
    for (name, text) in rendered {
        std::fs::write(dir.join(name), text)?;
    }
    let mut summary = output.summary.clone();
    if let Some(map) = summary.as_object_mut() {
        map.insert("command".into(), command.name().into());
        map.insert("config_hash".into(), hash.into());
        map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    }
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Numeric(e.to_string()))?;
    std::fs::write(
        dir.join(format!("{}.summary.json", command.name())),
        text + "\n",
    )?;
    Ok(())
}
