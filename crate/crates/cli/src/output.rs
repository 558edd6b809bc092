use std::fs;
use std::path::{Path, PathBuf};

use itertools::Itertools;
use tverberg_core::formulas::ConstantsRow;
use tverberg_core::probabilistic::{AttackReport, SearchReport};
use tverberg_core::rational::format_rational;
use tverberg_core::ToleranceReport;

use crate::commands::Results;
use crate::spec::Format;
use crate::{CliError, RunReport};

fn perms(p: &tverberg_core::ColorfulPartition) -> String {
    p.perms().iter().map(|q| q.iter().join("")).join("|")
}

/// Header and rows of the flat summary for a run. Lists inside a cell are
/// `;`-separated; partitions are per-class permutations joined by `|`.
pub fn csv_rows(results: &Results) -> (String, Vec<String>) {
    match results {
        Results::Generate { config, .. } => {
            let mut rows = Vec::new();
            for (c, class) in config.classes().iter().enumerate() {
                for (i, p) in class.iter().enumerate() {
                    rows.push(format!("{c},{i},{}", p.iter().map(format_rational).join(";")));
                }
            }
            ("class,point,coords".into(), rows)
        }
        Results::Check { suites } => (
            "suite,checked,failures".into(),
            suites.iter().map(|s| format!("{},{},{}", s.name, s.checked, s.failures.len())).collect(),
        ),
        Results::Tolerance {
            partition,
            exhaustive,
            report,
            hyperplane_break,
        } => (
            format!("partition,exhaustive,{},hyperplane_removed", ToleranceReport::CSV_HEADER),
            vec![format!(
                "{},{exhaustive},{},{}",
                perms(partition),
                report.csv_row(),
                hyperplane_break.as_ref().map(|b| b.removed.len().to_string()).unwrap_or_default()
            )],
        ),
        Results::Search { report } => (SearchReport::CSV_HEADER.into(), vec![report.csv_row()]),
        Results::Attack { attacks, removal_bound, .. } => (
            format!("partition,removal_bound,{}", AttackReport::CSV_HEADER),
            attacks
                .iter()
                .map(|a| format!("{},{removal_bound},{}", perms(&a.partition), a.report.csv_row()))
                .collect(),
        ),
        Results::Capacity { capacity, n_prime, bound } => (
            "f,exhaustive,families_examined,split_classes,n_prime,bound_t".into(),
            vec![format!(
                "{},{},{},{},{},{}",
                capacity.f,
                capacity.exhaustive,
                capacity.families_examined,
                capacity.certificate.split_classes.iter().join(";"),
                n_prime.map(|n| n.to_string()).unwrap_or_default(),
                bound.t
            )],
        ),
        Results::Constants { rows } => (
            ConstantsRow::CSV_HEADER.into(),
            rows.iter().map(ConstantsRow::csv_row).collect(),
        ),
    }
}

pub fn csv_text(results: &Results) -> String {
    let (header, rows) = csv_rows(results);
    let mut out = header;
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

/// Write `<command>.json` / `<command>.csv` (and `config.json` for
/// `generate`) under `dir`; returns the paths written.
pub fn write_outputs(report: &RunReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let name = report.spec.command()?.name();
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, serde_json::to_string_pretty(report).expect("report serializes") + "\n")?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, csv_text(&report.results))?;
        written.push(path);
    }
    if let Results::Generate { config, .. } = &report.results {
        let path = dir.join("config.json");
        fs::write(&path, config.to_json() + "\n")?;
        written.push(path);
    }
    Ok(written)
}
