//! Flat-file results: a summary table, one per-trial table per degree, and
//! a manifest that pins the RNG, seed, config hash and file digests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::{CampaignSummary, DegreeSummary, OutputFormat, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::RNG_ALGORITHM;

pub const TRIAL_COLUMNS: [&str; 13] = [
    "trial_index",
    "seed",
    "l1_q",
    "deg_q",
    "height_q2",
    "ratio_num",
    "ratio_den",
    "product_num",
    "product_den",
    "flag_E",
    "flag_D",
    "num_Ek",
    "first_Ek_index",
];

/// The first twelve columns are the fixed interface; the rest are extra
/// diagnostics appended after them.
pub const SUMMARY_COLUMNS: [&str; 33] = [
    "degree",
    "alpha",
    "epsilon",
    "trials",
    "freq_E",
    "freq_Ek",
    "freq_D",
    "freq_clean",
    "mean_product_num",
    "mean_product_den_proxy",
    "bound_E_raw",
    "bound_E_clamped",
    "mean_product",
    "c0",
    "count_E",
    "count_Ek",
    "count_D",
    "count_clean",
    "count_empty",
    "freq_l1_two_sided",
    "mc_se_E",
    "mean_l1_q",
    "min_l1_q",
    "max_l1_q",
    "mean_deg_q",
    "min_deg_q",
    "max_deg_q",
    "min_product",
    "max_product",
    "mean_sparsity_clean",
    "tail_bound_exact_mean",
    "parent_product",
    "implication_failures",
];

#[derive(Clone, Debug, PartialEq)]
enum Cell {
    Int(u64),
    /// Fixed 12-digit decimal.
    Decimal(f64),
    /// Shortest round-trip representation.
    Float(f64),
    /// Scientific with 12 digits, for values that may underflow.
    Sci(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Decimal(v) if v.is_finite() => format!("{v:.12}"),
            Cell::Float(v) if v.is_finite() => format!("{v}"),
            Cell::Sci(v) if v.is_finite() => format!("{v:.12e}"),
            Cell::Text(s) => s.clone(),
            _ => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Decimal(v) | Cell::Float(v) | Cell::Sci(v) if v.is_finite() => json!(v),
            Cell::Text(s) => json!(s),
            _ => Value::Null,
        }
    }
}

fn opt_int(v: Option<u64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Int)
}

fn trial_cells(r: &TrialRecord) -> Vec<Cell> {
    vec![
        Cell::Int(r.trial_index),
        Cell::Int(r.seed),
        Cell::Int(r.l1_q),
        opt_int(r.deg_q),
        Cell::Int(r.height_q2),
        opt_int(r.ratio.map(|x| *x.numer())),
        opt_int(r.ratio.map(|x| *x.denom())),
        opt_int(r.product.map(|x| *x.numer())),
        opt_int(r.product.map(|x| *x.denom())),
        Cell::Int(u64::from(r.flag_e)),
        Cell::Int(u64::from(r.flag_d)),
        Cell::Int(r.num_ek),
        opt_int(r.first_ek_index),
    ]
}

fn summary_cells(s: &DegreeSummary) -> Vec<Cell> {
    let product_sum = if s.product.count == 0 {
        f64::NAN
    } else {
        s.product.mean * s.product.count as f64
    };
    vec![
        Cell::Int(s.degree),
        Cell::Float(s.alpha),
        Cell::Float(s.epsilon),
        Cell::Int(s.trials),
        Cell::Decimal(s.freq_e),
        Cell::Decimal(s.freq_ek),
        Cell::Decimal(s.freq_d),
        Cell::Decimal(s.freq_clean),
        Cell::Decimal(product_sum),
        Cell::Int(s.product.count),
        Cell::Sci(s.bound_e_raw),
        Cell::Sci(s.bound_e_clamped),
        Cell::Decimal(s.product.mean),
        Cell::Text(s.c0.clone()),
        Cell::Int(s.count_e),
        Cell::Int(s.count_ek),
        Cell::Int(s.count_d),
        Cell::Int(s.count_clean),
        Cell::Int(s.count_empty),
        Cell::Decimal(if s.trials == 0 { 0.0 } else { s.count_l1_two_sided as f64 / s.trials as f64 }),
        Cell::Decimal(s.mc_se_e),
        Cell::Decimal(s.l1_q.mean),
        Cell::Decimal(s.l1_q.min),
        Cell::Decimal(s.l1_q.max),
        Cell::Decimal(s.deg_q.mean),
        Cell::Decimal(s.deg_q.min),
        Cell::Decimal(s.deg_q.max),
        Cell::Decimal(s.product.min),
        Cell::Decimal(s.product.max),
        Cell::Decimal(s.sparsity_clean.mean),
        Cell::Sci(s.tail_bound_exact_mean),
        Cell::Decimal(s.parent_product),
        Cell::Int(s.implication_failures),
    ]
}

fn render_csv(columns: &[&str], rows: impl Iterator<Item = Vec<Cell>>) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn render_json(columns: &[&str], rows: impl Iterator<Item = Vec<Cell>>) -> Result<String> {
    let rows: Vec<Value> = rows
        .map(|row| {
            let map: Map<String, Value> = columns
                .iter()
                .zip(&row)
                .map(|(c, cell)| ((*c).to_string(), cell.json()))
                .collect();
            Value::Object(map)
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows)?;
    text.push('\n');
    Ok(text)
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    render_csv(&TRIAL_COLUMNS, records.iter().map(trial_cells))
}

pub fn summary_csv(summary: &CampaignSummary) -> String {
    render_csv(&SUMMARY_COLUMNS, summary.runs.iter().map(|r| summary_cells(&r.summary)))
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
    rows: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'static str,
    version: &'static str,
    rng_algorithm: &'static str,
    master_seed: u64,
    config_hash: &'a str,
    config: &'a str,
    format: &'static str,
    files: Vec<FileEntry>,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the summary, per-degree trial tables and `manifest.json` into
/// `dir`, returning the paths written (manifest last).
pub fn emit_results(summary: &CampaignSummary, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let render = |columns: &[&str], rows: Vec<Vec<Cell>>| -> Result<String> {
        match format {
            OutputFormat::Csv => Ok(render_csv(columns, rows.into_iter())),
            OutputFormat::Json => render_json(columns, rows.into_iter()),
        }
    };

    let mut outputs: Vec<(String, String, usize)> = Vec::new();
    let summary_rows: Vec<Vec<Cell>> = summary.runs.iter().map(|r| summary_cells(&r.summary)).collect();
    let n_summary = summary_rows.len();
    outputs.push((format!("summary.{ext}"), render(&SUMMARY_COLUMNS, summary_rows)?, n_summary));
    for run in &summary.runs {
        let rows: Vec<Vec<Cell>> = run.trials.iter().map(trial_cells).collect();
        let n = rows.len();
        outputs.push((format!("trials_N{}.{ext}", run.summary.degree), render(&TRIAL_COLUMNS, rows)?, n));
    }

    let mut written = Vec::new();
    let mut files = Vec::new();
    for (name, contents, rows) in &outputs {
        written.push(write_file(dir, name, contents)?);
        files.push(FileEntry {
            name: name.clone(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
            rows: *rows,
        });
    }
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        rng_algorithm: RNG_ALGORITHM,
        master_seed: summary.seed,
        config_hash: &summary.config_hash,
        config: &summary.config_text,
        format: ext,
        files,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    written.push(write_file(dir, "manifest.json", &text)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_campaign, CampaignConfig};

    fn demo() -> CampaignSummary {
        let config = CampaignConfig {
            degree_ladder: vec![100, 400],
            trials_per_degree: 7,
            epsilon: Some(0.3),
            seed: 5,
            ..CampaignConfig::default()
        };
        run_campaign(&config).unwrap()
    }

    #[test]
    fn empty_summary_writes_headers_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let empty = CampaignSummary {
            config_text: String::new(),
            config_hash: String::new(),
            seed: 0,
            runs: Vec::new(),
        };
        let written = emit_results(&empty, dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(written.len(), 2);
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text, format!("{}\n", SUMMARY_COLUMNS.join(",")));
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn cardinality_and_headers() {
        let dir = tempfile::tempdir().unwrap();
        let s = demo();
        emit_results(&s, dir.path(), OutputFormat::Csv).unwrap();
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 3);
        let total: usize = [100, 400]
            .iter()
            .map(|n| {
                let t = fs::read_to_string(dir.path().join(format!("trials_N{n}.csv"))).unwrap();
                assert_eq!(t.lines().next().unwrap(), TRIAL_COLUMNS.join(","));
                t.lines().count() - 1
            })
            .sum();
        assert_eq!(total, 2 * 7);
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let dir = tempfile::tempdir().unwrap();
        emit_results(&demo(), dir.path(), OutputFormat::Json).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        let row = v.as_array().unwrap()[0].as_object().unwrap();
        let keys: Vec<&str> = row.keys().map(String::as_str).collect();
        assert_eq!(keys, SUMMARY_COLUMNS.to_vec());
        let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["master_seed"], 5);
        assert_eq!(manifest["files"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        emit_results(&demo(), a.path(), OutputFormat::Csv).unwrap();
        emit_results(&demo(), b.path(), OutputFormat::Csv).unwrap();
        for name in ["summary.csv", "trials_N100.csv", "trials_N400.csv", "manifest.json"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
    }

    #[test]
    fn unwritable_path_errors() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        fs::write(&file, "x").unwrap();
        assert!(matches!(
            emit_results(&demo(), &file.join("sub"), OutputFormat::Csv),
            Err(Error::Io { .. })
        ));
    }
}
