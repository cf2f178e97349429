//! CSV, JSON and report-bundle writers. Numbers in CSV files carry six
//! significant digits; JSON keeps full precision.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ceda_core::mfs::{CeTable, Evidence, MajorFactorReport};
use ceda_core::odds::{LocalityOdds, MajorityEval, TripletChoice};
use ceda_core::partition::ConditionalCeTable;
use ceda_core::{CodedColumn, ContingencyTable, MceMatrix, ProtocolConfig};
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..15).contains(&e) {
        format!("{:.*}", (5 - e).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")
        .and_then(|_| f.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Row labels down the first column, column labels across the header.
pub fn write_table(t: &ContingencyTable, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![format!("{}\\{}", t.row_name, t.col_name)];
    header.extend(t.col_labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in t.row_labels.iter().zip(t.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn write_ce_table(t: &CeTable, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "rank",
        "set",
        "ce",
        "ce_drop",
        "table_rows",
        "occupied_cells",
        "avg_cell_count",
        "reliable",
    ])?;
    for (i, e) in t.entries.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            e.set.label(),
            sig6(e.ce),
            sig6(e.ce_drop),
            e.table_rows.to_string(),
            e.occupied_cells.to_string(),
            sig6(e.avg_cell_count),
            e.reliable.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_bins(cols: &[&CodedColumn], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["feature", "bin", "lower_edge", "upper_edge", "count"])?;
    for c in cols {
        for r in c.bin_rows().into_iter().flatten() {
            w.write_record([
                c.name.clone(),
                r.bin.to_string(),
                sig6(r.lower_edge),
                sig6(r.upper_edge),
                r.count.to_string(),
            ])?;
        }
    }
    finish(w, path)
}

/// Matrix in leaf order, with each feature's original position.
pub fn write_mce(m: &MceMatrix, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["feature".to_string(), "leaf".to_string()];
    header.extend(m.order.iter().map(|&i| m.names[i].clone()));
    w.write_record(&header)?;
    for (leaf, &i) in m.order.iter().enumerate() {
        let mut rec = vec![m.names[i].clone(), leaf.to_string()];
        rec.extend(m.order.iter().map(|&j| sig6(m.values[i][j])));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn write_odds(rows: &[LocalityOdds], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "locality",
        "expansion",
        "n",
        "count_col0",
        "count_col1",
        "p0",
        "p1",
        "odds",
    ])?;
    for r in rows {
        w.write_record([
            r.locality.clone(),
            r.expansion.clone(),
            r.row.n().to_string(),
            r.row.count_col0.to_string(),
            r.row.count_col1.to_string(),
            sig6(r.row.prob_vector.0),
            sig6(r.row.prob_vector.1),
            sig6(r.row.odds),
        ])?;
    }
    finish(w, path)
}

pub fn write_triplets(rows: &[TripletChoice], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["locality", "n", "triplet", "ce_drop"])?;
    for r in rows {
        w.write_record([
            r.locality.clone(),
            r.n.to_string(),
            r.triplet.as_ref().map_or("NA".into(), |t| t.join("+")),
            r.ce_drop.map_or("NA".into(), sig6),
        ])?;
    }
    finish(w, path)
}

pub fn write_majority(m: &MajorityEval, path: &Path) -> Result<()> {
    write_json(m, path)
}

/// File-name-safe version of a category label.
pub fn safe_name(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// One CSV per reported locality and k, plus `weighted.json`.
pub fn write_deassoc(t: &ConditionalCeTable, dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    for l in &t.localities {
        for table in &l.tables {
            let p = dir.join(format!("locality_{}_k{}.csv", safe_name(&l.label), table.k));
            write_ce_table(table, &p)?;
            written.push(p);
        }
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        conditioning: &'a [String],
        response: &'a str,
        n_rows: usize,
        min_cell: usize,
        reported: Vec<(&'a str, usize)>,
        skipped: &'a [(String, usize)],
        weighted: &'a std::collections::BTreeMap<usize, Vec<ceda_core::partition::WeightedEntry>>,
    }
    let summary = Summary {
        conditioning: &t.conditioning,
        response: &t.response,
        n_rows: t.n_rows,
        min_cell: t.min_cell,
        reported: t.localities.iter().map(|l| (l.label.as_str(), l.n)).collect(),
        skipped: &t.skipped,
        weighted: &t.weighted,
    };
    let p = dir.join("weighted.json");
    write_json(&summary, &p)?;
    written.push(p);
    Ok(written)
}

/// Report JSON, the config that reproduces it and the factor list. With
/// `full`, also every CE table, the MCE matrix, bin edges and a heatmap.
pub fn write_report(
    report: &MajorFactorReport,
    frame: &ceda_core::CodedFrame,
    cfg: &ProtocolConfig,
    dir: &Path,
    full: bool,
) -> Result<()> {
    create_dir(dir)?;
    write_json(report, &dir.join("report.json"))?;
    write_text(&crate::config::to_text(cfg), &dir.join("config.conf"))?;
    let path = dir.join("factors.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["factor", "order", "members"])?;
    for (i, f) in report.factors.iter().enumerate() {
        w.write_record([(i + 1).to_string(), f.order.to_string(), f.members.join("+")])?;
    }
    finish(w, &path)?;
    if !full {
        return Ok(());
    }
    for e in &report.evidence {
        match e {
            Evidence::CeTable { table } => write_ce_table(table, &dir.join(format!("ce_k{}.csv", table.k)))?,
            Evidence::Mce { matrix } => {
                write_mce(matrix, &dir.join("mce.csv"))?;
                write_text(&crate::svg::heatmap(matrix), &dir.join("mce.svg"))?;
            }
            _ => {}
        }
    }
    let mut cols: Vec<&CodedColumn> = vec![&frame.response];
    cols.extend(frame.covariates.iter());
    write_bins(&cols, &dir.join("bins.csv"))
}
