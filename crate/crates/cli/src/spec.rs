use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tverberg_core::ColorfulPartition;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Generate,
    Check,
    Tolerance,
    Search,
    Attack,
    Capacity,
    Constants,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Generate => "generate",
            CommandKind::Check => "check",
            CommandKind::Tolerance => "tolerance",
            CommandKind::Search => "search",
            CommandKind::Attack => "attack",
            CommandKind::Capacity => "capacity",
            CommandKind::Constants => "constants",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GeneratorKind {
    PerfectSplit,
    Clustered,
    NestedPairs,
    Random,
    FromFile,
}

impl GeneratorKind {
    pub fn is_seeded(self) -> bool {
        matches!(self, GeneratorKind::PerfectSplit | GeneratorKind::Clustered | GeneratorKind::Random)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CapacityModeKind {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

/// Everything a run depends on. Every field is optional in a spec file;
/// command-line flags fill in or override.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Option<CommandKind>,
    pub generator: Option<GeneratorKind>,
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub d: Option<usize>,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub target: Option<i64>,
    pub partition: Option<ColorfulPartition>,
    pub capacity_mode: Option<CapacityModeKind>,
    pub budget_subsets: Option<u64>,
    pub budget_families: Option<u64>,
    pub budget_partitions: Option<u64>,
    pub max_r: Option<usize>,
    pub max_d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

pub const DEFAULT_BUDGET_FAMILIES: u64 = 2_000_000;
pub const DEFAULT_BUDGET_PARTITIONS: u64 = 100_000;

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Input(format!("spec: {e}")))
    }

    /// Fields set in `top` win.
    pub fn overlay(mut self, top: ExperimentSpec) -> Self {
        overlay!(
            self, top, command, generator, n, r, d, config_path, seed, trials, target, partition,
            capacity_mode, budget_subsets, budget_families, budget_partitions, max_r, max_d, out,
            format
        );
        self
    }

    pub fn command(&self) -> Result<CommandKind, CliError> {
        self.command.ok_or_else(|| CliError::Input("no command given".into()))
    }

    pub fn seed_required(&self, why: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Input(format!("{why} is randomized: a seed is required (--seed)")))
    }

    pub fn budget_families(&self) -> u64 {
        self.budget_families.unwrap_or(DEFAULT_BUDGET_FAMILIES)
    }

    pub fn budget_partitions(&self) -> u64 {
        self.budget_partitions.unwrap_or(DEFAULT_BUDGET_PARTITIONS)
    }

    /// Range checks that do not need the configuration.
    pub fn validate(&self) -> Result<(), CliError> {
        let command = self.command()?;
        if let Some(r) = self.r {
            if r < 2 {
                return Err(CliError::Input(format!("r must be at least 2, got {r}")));
            }
        }
        if let Some(d) = self.d {
            if d < 1 {
                return Err(CliError::Input(format!("d must be at least 1, got {d}")));
            }
        }
        if let Some(n) = self.n {
            if n < 1 {
                return Err(CliError::Input(format!("N must be at least 1, got {n}")));
            }
        }
        if self.trials == Some(0) {
            return Err(CliError::Input("trials must be positive".into()));
        }
        if command == CommandKind::Constants {
            return Ok(());
        }
        match self.generator {
            None => Err(CliError::Input("a generator is required (--generator)".into())),
            Some(GeneratorKind::FromFile) if self.config_path.is_none() => {
                Err(CliError::Input("from_file needs --config FILE".into()))
            }
            Some(GeneratorKind::FromFile) => Ok(()),
            Some(g) => {
                if self.n.is_none() {
                    return Err(CliError::Input("generator needs -n".into()));
                }
                if g != GeneratorKind::NestedPairs && (self.r.is_none() || self.d.is_none()) {
                    return Err(CliError::Input("generator needs -r and -d".into()));
                }
                if g == GeneratorKind::NestedPairs && (self.r.unwrap_or(2) != 2 || self.d.unwrap_or(1) != 1) {
                    return Err(CliError::Input("nested_pairs lives in r = 2, d = 1".into()));
                }
                if g.is_seeded() {
                    self.seed_required("this generator")?;
                }
                Ok(())
            }
        }
    }
}
