use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use tverberg_cli::{
    csv_text, run, write_outputs, CapacityModeKind, CliError, CommandKind, ExperimentSpec, Format,
    GeneratorKind, OUT_DIR_ENV,
};
use tverberg_core::ColorfulPartition;

/// Exact experiments on colorful Tverberg partitions with tolerance.
///
/// Exit status: 0 all checks pass, 2 property violation, 3 budget
/// exhausted, 4 input error.
#[derive(Parser, Debug)]
#[command(name = "tverberg", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandKind,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// JSON experiment spec; flags override its fields.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on removal sets examined per tolerance computation.
    #[arg(long)]
    budget_subsets: Option<u64>,
    /// Cap on candidate families for exact split capacity.
    #[arg(long)]
    budget_families: Option<u64>,
    /// Cap on colorful partitions enumerated.
    #[arg(long)]
    budget_partitions: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    #[arg(short = 'n', long = "classes")]
    n: Option<usize>,
    #[arg(short = 'r', long)]
    r: Option<usize>,
    #[arg(short = 'd', long)]
    d: Option<usize>,
    /// Configuration file for `--generator from_file`.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    target: Option<i64>,
    /// Partition as JSON, e.g. '[[0,1],[1,0]]'.
    #[arg(long)]
    partition: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<CapacityModeKind>,
    #[arg(long)]
    max_r: Option<usize>,
    #[arg(long)]
    max_d: Option<usize>,
}

fn build_spec(cli: Cli) -> Result<ExperimentSpec, CliError> {
    let o = cli.opts;
    let base = match &o.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            ExperimentSpec::from_json(&text)?
        }
        None => ExperimentSpec::default(),
    };
    let partition = o
        .partition
        .as_deref()
        .map(|s| {
            serde_json::from_str::<ColorfulPartition>(s).map_err(|e| CliError::Input(format!("--partition: {e}")))
        })
        .transpose()?;
    Ok(base.overlay(ExperimentSpec {
        command: Some(cli.command),
        generator: o.generator,
        n: o.n,
        r: o.r,
        d: o.d,
        config_path: o.config,
        seed: o.seed,
        trials: o.trials,
        target: o.target,
        partition,
        capacity_mode: o.mode,
        budget_subsets: o.budget_subsets,
        budget_families: o.budget_families,
        budget_partitions: o.budget_partitions,
        max_r: o.max_r,
        max_d: o.max_d,
        out: o.out,
        format: o.format,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = build_spec(cli).and_then(|spec| {
        let report = run(&spec)?;
        let format = spec.format.unwrap_or_default();
        match &spec.out {
            Some(dir) => {
                for path in write_outputs(&report, dir, format)? {
                    eprintln!("wrote {}", path.display());
                }
            }
            None => {
                if matches!(format, Format::Json | Format::Both) {
                    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                }
                if matches!(format, Format::Csv | Format::Both) {
                    print!("{}", csv_text(&report.results));
                }
            }
        }
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        Ok(report.exit_code())
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("tverberg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
