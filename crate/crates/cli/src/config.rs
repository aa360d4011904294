use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use symlen_core::milnor::{DEFAULT_BFS_CAP, DEFAULT_TENSOR_CAP};
use symlen_core::scheme::DEFAULT_STRATA_CAP;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Flags shared by every subcommand; anything left unset falls back to the
/// config file and then to the defaults.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Scheme expression, e.g. "product(RC,laurent(F2))".
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Pfister degree.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on enumerated Pfister tuples and subspaces.
    #[arg(long, global = true)]
    pub cap_enum: Option<u64>,
    /// Cap on k_n elements visited by the symbol-length search.
    #[arg(long, global = true)]
    pub cap_bfs: Option<u64>,
    /// Cap on the tensor space behind k_n.
    #[arg(long, global = true)]
    pub cap_kn: Option<u64>,
    /// Raw value-set table, used instead of --scheme.
    #[arg(long, global = true, value_name = "FILE")]
    pub unsafe_table: Option<PathBuf>,
    #[arg(long, global = true)]
    pub max_d: Option<usize>,
    /// Number of random sums sampled by `verify`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// key=value file with the same settings.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scheme: Option<String>,
    pub unsafe_table: Option<PathBuf>,
    pub n: Option<usize>,
    pub format: Format,
    pub seed: u64,
    pub cap_enum: u64,
    pub cap_bfs: u64,
    pub cap_kn: u64,
    pub max_d: usize,
    pub samples: usize,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::invalid(format!("config: bad value {value:?} for {key}")))
}

fn read_file(path: &Path) -> Result<CommonArgs, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut out = CommonArgs::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::invalid(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let (key, value) = (key.trim().replace('-', "_"), value.trim());
        match key.as_str() {
            "scheme" => out.scheme = Some(value.to_string()),
            "n" => out.n = Some(parse_value(&key, value)?),
            "format" => out.format = Some(Format::from_str(value, true).map_err(CliError::invalid)?),
            "seed" => out.seed = Some(parse_value(&key, value)?),
            "cap_enum" => out.cap_enum = Some(parse_value(&key, value)?),
            "cap_bfs" => out.cap_bfs = Some(parse_value(&key, value)?),
            "cap_kn" => out.cap_kn = Some(parse_value(&key, value)?),
            "max_d" => out.max_d = Some(parse_value(&key, value)?),
            "samples" => out.samples = Some(parse_value(&key, value)?),
            "unsafe_table" => out.unsafe_table = Some(PathBuf::from(value)),
            _ => return Err(CliError::invalid(format!("{}:{}: unknown key {key}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn resolve(args: CommonArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => CommonArgs::default(),
        };
        let config = RunConfig {
            scheme: args.scheme.or(file.scheme),
            unsafe_table: args.unsafe_table.or(file.unsafe_table),
            n: args.n.or(file.n),
            format: args.format.or(file.format).unwrap_or(Format::Json),
            seed: args.seed.or(file.seed).unwrap_or(0),
            cap_enum: args.cap_enum.or(file.cap_enum).unwrap_or(DEFAULT_STRATA_CAP),
            cap_bfs: args.cap_bfs.or(file.cap_bfs).unwrap_or(DEFAULT_BFS_CAP),
            cap_kn: args.cap_kn.or(file.cap_kn).unwrap_or(DEFAULT_TENSOR_CAP),
            max_d: args.max_d.or(file.max_d).unwrap_or(4),
            samples: args.samples.or(file.samples).unwrap_or(200),
        };
        if config.cap_enum == 0 || config.cap_bfs == 0 || config.cap_kn == 0 {
            return Err(CliError::invalid("caps must be positive"));
        }
        Ok(config)
    }

    pub fn degree(&self) -> Result<usize, CliError> {
        match self.n {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(CliError::invalid(format!("--n must be at least 2, got {n}"))),
            None => Err(CliError::invalid("--n is required")),
        }
    }
}
