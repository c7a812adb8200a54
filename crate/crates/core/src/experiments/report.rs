use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One table cell. Numbers are written with Rust's shortest round-trip
/// formatting, so a CSV re-read yields the identical `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            Cell::Num(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(raw: &str) -> Self {
        match raw.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(raw.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in {}", self.name);
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column by name; text cells read as NaN.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| r[c].as_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Text column by name; numeric cells are rendered.
    pub fn texts(&self, name: &str) -> Vec<String> {
        let Some(c) = self.column_index(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[c].render()).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(&self.columns)
            .map_err(|e| csv_error(path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path, name: &str) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let columns = r
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            rows.push(record.iter().map(Cell::parse).collect());
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
        })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let location = match e.position() {
        Some(p) => format!("{}:{}", path.display(), p.line()),
        None => path.display().to_string(),
    };
    Error::Parse {
        location,
        message: e.to_string(),
    }
}

/// A checked property, its tolerance and the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, tolerance: f64, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            tolerance,
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical TOML form of the experiment settings.
    pub config_hash: String,
    pub seeds: Vec<u64>,
}

/// Data for one optional SVG figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    pub scatter: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment_id: String,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub provenance: Provenance,
    pub plots: Vec<Plot>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Svg,
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment_id: &'a str,
    passed: bool,
    config_hash: &'a str,
    // Decimal strings: TOML integers stop at i64::MAX.
    seeds: Vec<String>,
}

/// Writes the report into directory `dir`.
///
/// CSV: `<id>_<table>.csv` for every table, `<id>_verdicts.csv` and
/// `<id>_meta.toml`. SVG: `<id>_<plot>.svg` for every plot. Returns the
/// written paths.
pub fn write_report(
    r: &ExperimentReport,
    dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let id = &r.experiment_id;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            for t in &r.tables {
                let path = dir.join(format!("{id}_{}.csv", t.name));
                t.write_csv(&path)?;
                written.push(path);
            }
            let mut verdicts = Table::new("verdicts", &["name", "tolerance", "passed", "detail"]);
            for v in &r.verdicts {
                verdicts.push(vec![
                    v.name.as_str().into(),
                    v.tolerance.into(),
                    if v.passed { "true" } else { "false" }.into(),
                    v.detail.as_str().into(),
                ]);
            }
            let path = dir.join(format!("{id}_verdicts.csv"));
            verdicts.write_csv(&path)?;
            written.push(path);
            let meta = Meta {
                experiment_id: id,
                passed: r.passed(),
                config_hash: &r.provenance.config_hash,
                seeds: r.provenance.seeds.iter().map(u64::to_string).collect(),
            };
            let text = toml::to_string(&meta).map_err(|e| Error::invalid(e.to_string()))?;
            let path = dir.join(format!("{id}_meta.toml"));
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        ReportFormat::Svg => {
            for p in &r.plots {
                let path = dir.join(format!("{id}_{}.svg", p.name));
                fs::write(&path, render_svg(p, &r.provenance.config_hash))
                    .map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

fn render_svg(plot: &Plot, config_hash: &str) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 60.0);
    let finite = plot
        .series
        .iter()
        .flat_map(|(_, pts)| pts.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        (w - right + left) / 2.0,
        escape(&plot.name)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - bottom,
        w - right,
        h - bottom
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        h - bottom
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            sx(fx),
            h - bottom + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (w - right + left) / 2.0,
        h - bottom + 36.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (h - bottom + top) / 2.0,
        (h - bottom + top) / 2.0,
        escape(&plot.y_label)
    );
    for (k, (label, pts)) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = pts
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if plot.scatter {
            for (x, y) in &pts {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    sx(*x),
                    sy(*y)
                );
            }
        } else if !pts.is_empty() {
            let path: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            w - right + 12.0,
            ly,
            w - right + 26.0,
            ly + 9.0,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="9" fill="gray">config {}</text>"#,
        left,
        h - 8.0,
        escape(config_hash)
    );
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
