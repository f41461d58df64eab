use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::manifest::ArtifactWriter;
use crate::error::{QslError, Result};

#[derive(Clone, Debug, Default)]
pub struct PlotOutcome {
    pub written: Vec<String>,
    pub warnings: Vec<String>,
}

type Rows = Vec<HashMap<String, String>>;

fn read_rows(path: &Path) -> Result<Rows> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| QslError::Format(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| QslError::Format(e.to_string()))?.clone();
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| QslError::Format(e.to_string()))?;
            Ok(headers.iter().map(String::from).zip(rec.iter().map(String::from)).collect())
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> Option<f64> {
    row.get(key).and_then(|v| v.parse().ok())
}

/// Long-format `(x, y, series)` rows.
struct Long(String);

impl Long {
    fn new() -> Self {
        Long(String::from("x,y,series\n"))
    }
    fn push(&mut self, x: f64, y: f64, series: &str) {
        self.0.push_str(&format!("{x:.16e},{y:.16e},{series}\n"));
    }
}

fn contraction(rows: &Rows) -> Long {
    let mut out = Long::new();
    for r in rows {
        if let (Some(n), Some(ratio)) = (num(r, "n"), num(r, "ratio")) {
            out.push(n, ratio, "ratio");
        }
    }
    out
}

fn smoothing(rows: &Rows) -> Long {
    let mut out = Long::new();
    for r in rows {
        if let (Some(j), Some(ratio)) = (num(r, "j"), num(r, "ratio")) {
            out.push(j, ratio, "ratio");
        }
    }
    out
}

fn estimates(rows: &Rows) -> Long {
    let mut out = Long::new();
    for r in rows.iter().filter(|r| r.get("skipped").map(String::as_str) != Some("true")) {
        if let (Some(i), Some(ratio)) = (num(r, "index"), num(r, "ratio")) {
            let series = format!(
                "{}@{}",
                r.get("estimate").map(String::as_str).unwrap_or("?"),
                r.get("n").map(String::as_str).unwrap_or("?")
            );
            out.push(i, ratio, &series);
        }
    }
    out
}

fn envelopes(rows: &Rows) -> Long {
    let mut out = Long::new();
    for key in ["a_j", "b_j"] {
        for r in rows {
            if let (Some(j), Some(v)) = (num(r, "j"), num(r, key)) {
                out.push(j, v, key);
            }
        }
    }
    out
}

const SOURCES: [(&str, &str, fn(&Rows) -> Long); 4] = [
    ("history.csv", "plot_contraction.csv", contraction),
    ("smoothing.csv", "plot_local_smoothing.csv", smoothing),
    ("campaign.csv", "plot_estimate_ratios.csv", estimates),
    ("envelopes.csv", "plot_envelopes.csv", envelopes),
];

/// Convert the known report files found in `inputs` (directories) into
/// plot-ready CSVs. Missing inputs are skipped with a warning.
pub fn emit_plotdata(inputs: &[PathBuf], w: &mut ArtifactWriter) -> Result<PlotOutcome> {
    let mut outcome = PlotOutcome::default();
    if inputs.is_empty() {
        outcome.warnings.push("no report directories given".into());
    }
    let many = inputs.len() > 1;
    for (i, dir) in inputs.iter().enumerate() {
        let mut found = false;
        for (src, dst, convert) in SOURCES {
            let path = dir.join(src);
            if !path.is_file() {
                continue;
            }
            found = true;
            let rows = read_rows(&path)?;
            let table = convert(&rows);
            if table.0.lines().count() <= 1 {
                outcome.warnings.push(format!("{} has no plottable rows", path.display()));
                continue;
            }
            let name = if many { format!("{i}_{dst}") } else { dst.to_string() };
            w.write(&name, table.0.as_bytes())?;
            outcome.written.push(name);
        }
        if !found {
            outcome.warnings.push(format!("no known reports in {}", dir.display()));
        }
    }
    Ok(outcome)
}
