//! Pivot tables over a run directory's emitted JSON. Nothing is recomputed;
//! every consumed file is listed with its checksum.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use emofed::fedsim::{Algorithm, PartitionMode, RoundLog};
use emofed::io::{read_json, read_jsonl, write_json};
use emofed::metrics::percent;
use emofed::{Error, Result};

use crate::commands::{sha256_file, CellResult, CentralEntry, CELLS_DIR, CENTRAL_FILE, RESULT_FILE, ROUNDS_FILE};
use crate::config::Balancing;

pub const MARKDOWN_FILE: &str = "report.md";
pub const CSV_FILE: &str = "report.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const SOURCES_FILE: &str = "sources.json";

const METRICS: [&str; 3] = ["P", "R", "F1"];

#[derive(Default)]
struct Collected {
    central: Option<Vec<CentralEntry>>,
    cells: Vec<(String, CellResult, Vec<RoundLog>)>,
    incomplete: Vec<String>,
    sources: BTreeMap<String, String>,
}

fn rel(dir: &Path, path: &Path) -> String {
    path.strip_prefix(dir).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

fn collect(dir: &Path) -> Result<Collected> {
    let mut out = Collected::default();
    let central = dir.join(CENTRAL_FILE);
    if central.exists() {
        out.sources.insert(rel(dir, &central), sha256_file(&central)?);
        out.central = Some(read_json(&central)?);
    }
    let cells = dir.join(CELLS_DIR);
    if cells.is_dir() {
        let mut names: Vec<PathBuf> = std::fs::read_dir(&cells)
            .map_err(|e| Error::io(&cells, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        names.sort();
        for cell in names {
            let name = cell.file_name().unwrap().to_string_lossy().into_owned();
            let (result, rounds) = (cell.join(RESULT_FILE), cell.join(ROUNDS_FILE));
            if !result.exists() || !rounds.exists() {
                out.incomplete.push(name);
                continue;
            }
            match (read_json::<CellResult>(&result), read_jsonl::<RoundLog>(&rounds)) {
                (Ok(r), Ok(logs)) => {
                    out.sources.insert(rel(dir, &result), sha256_file(&result)?);
                    out.sources.insert(rel(dir, &rounds), sha256_file(&rounds)?);
                    out.cells.push((name, r, logs));
                }
                _ => out.incomplete.push(name),
            }
        }
    }
    Ok(out)
}

/// Column key of a federated cell: client fraction in percent, then IID first.
type Column = (u64, bool);

fn column_of(r: &CellResult) -> Column {
    ((r.client_fraction * 100.0).round() as u64, r.partition == PartitionMode::NonIid)
}

fn column_label(c: Column) -> String {
    let mode = if c.1 { PartitionMode::NonIid } else { PartitionMode::Iid };
    format!("c={}% {}", c.0, mode.label())
}

/// Renders one pivot table; the best value of each column is bolded.
fn markdown_table(out: &mut String, header: &[String], rows: &[(String, Vec<Option<f64>>)]) {
    let best: Vec<Option<f64>> = (0..header.len())
        .map(|j| rows.iter().filter_map(|r| r.1[j]).reduce(f64::max))
        .collect();
    let _ = writeln!(out, "| Balancing | {} |", header.join(" | "));
    let _ = writeln!(out, "|---|{}", "---:|".repeat(header.len()));
    for (label, values) in rows {
        let cells: Vec<String> = values
            .iter()
            .zip(&best)
            .map(|(v, b)| match (v, b) {
                (Some(v), Some(b)) if v == b => format!("**{}**", percent(*v)),
                (Some(v), _) => percent(*v),
                (None, _) => "n/a".into(),
            })
            .collect();
        let _ = writeln!(out, "| {label} | {} |", cells.join(" | "));
    }
    out.push('\n');
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::io(path, e.into())
}

pub fn report(dir: &Path) -> Result<()> {
    let c = collect(dir)?;
    if c.central.is_none() && c.cells.is_empty() {
        return Err(Error::Config(format!("{}: no completed runs found", dir.display())));
    }
    let mut md = String::from("# Results\n\nWeighted precision (P), recall (R) and F1 on the test split, in percent.\n\n");

    let csv_path = dir.join(CSV_FILE);
    let mut csv = csv_writer(&csv_path)?;
    csv.write_record([
        "setting",
        "algorithm",
        "balancing",
        "client_fraction",
        "partition",
        "precision",
        "recall",
        "f1_weighted",
        "accuracy",
        "rounds_to_target",
    ])
    .map_err(csv_err(&csv_path))?;

    if let Some(central) = &c.central {
        md.push_str("## Centralized\n\n");
        let header: Vec<String> = METRICS.iter().map(|m| m.to_string()).collect();
        let rows: Vec<(String, Vec<Option<f64>>)> = central
            .iter()
            .map(|e| {
                (
                    e.balancing.label().to_string(),
                    vec![Some(e.test.precision), Some(e.test.recall), Some(e.test.f1)],
                )
            })
            .collect();
        markdown_table(&mut md, &header, &rows);
        for e in central {
            csv.write_record([
                "centralized".to_string(),
                String::new(),
                e.balancing.slug().to_string(),
                String::new(),
                String::new(),
                e.test.precision.to_string(),
                e.test.recall.to_string(),
                e.test.f1.to_string(),
                e.test.accuracy.to_string(),
                String::new(),
            ])
            .map_err(csv_err(&csv_path))?;
        }
    }

    let mut by_alg: BTreeMap<Algorithm, Vec<&CellResult>> = BTreeMap::new();
    for (_, r, _) in &c.cells {
        by_alg.entry(r.algorithm).or_default().push(r);
    }
    // Order-independent of directory naming: sort cells semantically.
    for cells in by_alg.values_mut() {
        cells.sort_by_key(|r| (r.balancing, column_of(r)));
    }
    for (algorithm, cells) in &by_alg {
        let _ = writeln!(md, "## {}\n", algorithm.label());
        let mut columns: Vec<Column> = cells.iter().map(|r| column_of(r)).collect();
        columns.sort();
        columns.dedup();
        let mut balancings: Vec<Balancing> = cells.iter().map(|r| r.balancing).collect();
        balancings.sort();
        balancings.dedup();
        let header: Vec<String> = columns
            .iter()
            .flat_map(|&col| METRICS.iter().map(move |m| format!("{} {m}", column_label(col))))
            .collect();
        let rows: Vec<(String, Vec<Option<f64>>)> = balancings
            .iter()
            .map(|&b| {
                let values = columns
                    .iter()
                    .flat_map(|&col| {
                        let hit = cells.iter().find(|r| r.balancing == b && column_of(r) == col);
                        [
                            hit.map(|r| r.test.precision),
                            hit.map(|r| r.test.recall),
                            hit.map(|r| r.test.f1),
                        ]
                    })
                    .collect();
                (b.label().to_string(), values)
            })
            .collect();
        markdown_table(&mut md, &header, &rows);
        for r in cells {
            csv.write_record([
                "federated".to_string(),
                algorithm.label().to_string(),
                r.balancing.slug().to_string(),
                r.client_fraction.to_string(),
                r.partition.label().to_string(),
                r.test.precision.to_string(),
                r.test.recall.to_string(),
                r.test.f1.to_string(),
                r.test.accuracy.to_string(),
                r.rounds_to_target.map_or_else(String::new, |n| n.to_string()),
            ])
            .map_err(csv_err(&csv_path))?;
        }
    }
    csv.flush().map_err(|e| Error::io(&csv_path, e))?;

    if !c.cells.is_empty() {
        let curves_path = dir.join(CURVES_FILE);
        let mut curves = csv_writer(&curves_path)?;
        curves
            .write_record(["cell", "round", "val_precision", "val_recall", "val_f1_weighted", "val_accuracy", "update_norm"])
            .map_err(csv_err(&curves_path))?;
        for (name, r, logs) in &c.cells {
            let v = &r.initial_val;
            curves
                .write_record([
                    name.clone(),
                    "0".into(),
                    v.precision.to_string(),
                    v.recall.to_string(),
                    v.f1_weighted.to_string(),
                    v.accuracy.to_string(),
                    String::new(),
                ])
                .map_err(csv_err(&curves_path))?;
            for log in logs {
                let v = &log.val;
                curves
                    .write_record([
                        name.clone(),
                        log.round.to_string(),
                        v.precision.to_string(),
                        v.recall.to_string(),
                        v.f1_weighted.to_string(),
                        v.accuracy.to_string(),
                        log.update_norm.to_string(),
                    ])
                    .map_err(csv_err(&curves_path))?;
            }
        }
        curves.flush().map_err(|e| Error::io(&curves_path, e))?;
    }

    if !c.incomplete.is_empty() {
        md.push_str("## Incomplete runs\n\n");
        for name in &c.incomplete {
            let _ = writeln!(md, "- {name}");
            eprintln!("warning: incomplete run {name}");
        }
        md.push('\n');
    }
    md.push_str("## Sources\n\n");
    for (path, sum) in &c.sources {
        let _ = writeln!(md, "- `{path}` sha256 `{sum}`");
    }

    let md_path = dir.join(MARKDOWN_FILE);
    std::fs::write(&md_path, &md).map_err(|e| Error::io(&md_path, e))?;
    write_json(&dir.join(SOURCES_FILE), &c.sources)?;
    print!("{md}");
    Ok(())
}
