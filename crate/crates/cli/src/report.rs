//! Scan reports: rows of per-cell statistics, power-law fits, and emission as
//! CSV, a JSON mirror, and self-contained SVG log-log plots. File names are
//! deterministic functions of the config hash, and row serialization is
//! byte-stable, so identical configs produce identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Row {
    pub suite: String,
    pub body: String,
    pub n: usize,
    /// Subspace dimension; 0 when not applicable.
    pub l: usize,
    pub statistic: String,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub noise_floor: f64,
    pub seed: u64,
    /// Populated only on error rows; carried by the JSON mirror.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fit {
    /// `<statistic>:<body>`; the statistic part references row statistics.
    pub statistic: String,
    pub c_hat: f64,
    pub kappa_hat: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<Row>,
    pub fits: Vec<Fit>,
}

impl ScanReport {
    /// Structural invariants: CI brackets the value on every non-error row and
    /// every fit references an existing statistic.
    pub fn validate(&self) -> Result<(), CliError> {
        for row in &self.rows {
            if row.message.is_none() && !(row.ci_low <= row.value && row.value <= row.ci_high) {
                return Err(CliError::Runtime(format!(
                    "row {}/{}/{}: CI [{}, {}] does not bracket value {}",
                    row.suite, row.body, row.statistic, row.ci_low, row.ci_high, row.value
                )));
            }
        }
        for fit in &self.fits {
            let stat = fit.statistic.split(':').next().unwrap_or("");
            if !self.rows.iter().any(|r| r.statistic == stat) {
                return Err(CliError::Runtime(format!(
                    "fit {} references no row statistic",
                    fit.statistic
                )));
            }
        }
        Ok(())
    }

    pub fn error_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.message.is_some())
    }
}

pub const CSV_HEADER: &str = "suite,body,n,l,statistic,value,ci_low,ci_high,noise_floor,seed";

pub fn to_csv(report: &ScanReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.suite, r.body, r.n, r.l, r.statistic, r.value, r.ci_low, r.ci_high, r.noise_floor,
            r.seed
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV report".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(CliError::Config(format!(
            "unexpected CSV header {header:?}; expected {CSV_HEADER:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(CliError::Config(format!(
                "CSV line {}: expected 10 fields, got {}",
                i + 2,
                parts.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64, CliError> {
            s.parse()
                .map_err(|e| CliError::Config(format!("CSV line {}: bad float {s:?}: {e}", i + 2)))
        };
        rows.push(Row {
            suite: parts[0].to_string(),
            body: parts[1].to_string(),
            n: parts[2]
                .parse()
                .map_err(|e| CliError::Config(format!("CSV line {}: bad n: {e}", i + 2)))?,
            l: parts[3]
                .parse()
                .map_err(|e| CliError::Config(format!("CSV line {}: bad l: {e}", i + 2)))?,
            statistic: parts[4].to_string(),
            value: parse_f(parts[5])?,
            ci_low: parse_f(parts[6])?,
            ci_high: parse_f(parts[7])?,
            noise_floor: parse_f(parts[8])?,
            seed: parts[9]
                .parse()
                .map_err(|e| CliError::Config(format!("CSV line {}: bad seed: {e}", i + 2)))?,
            message: None,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse_list(s: &str) -> Result<Vec<Format>, CliError> {
        s.split(',')
            .map(|t| match t.trim() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                "svg" => Ok(Format::Svg),
                other => Err(CliError::Config(format!("unknown format {other:?}"))),
            })
            .collect()
    }
}

fn sanitize(stat: &str) -> String {
    stat.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Writes the requested formats into `out_dir`; returns the paths written.
pub fn emit_report(
    report: &ScanReport,
    formats: &[Format],
    out_dir: &Path,
    config_hash: &str,
) -> Result<Vec<PathBuf>, CliError> {
    report.validate()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    let io_err =
        |p: &Path, e: std::io::Error| CliError::Runtime(format!("write {}: {e}", p.display()));
    for format in formats {
        match format {
            Format::Csv => {
                let path = out_dir.join(format!("scan_{config_hash}.csv"));
                let mut f = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
                f.write_all(to_csv(report).as_bytes())
                    .map_err(|e| io_err(&path, e))?;
                written.push(path);
            }
            Format::Json => {
                let path = out_dir.join(format!("scan_{config_hash}.json"));
                let json = serde_json::to_string_pretty(report)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                std::fs::write(&path, json).map_err(|e| io_err(&path, e))?;
                written.push(path);
            }
            Format::Svg => {
                for fit in &report.fits {
                    let stat = fit.statistic.split(':').next().unwrap_or("");
                    let body = fit.statistic.split(':').nth(1).unwrap_or("");
                    let points: Vec<&Row> = report
                        .rows
                        .iter()
                        .filter(|r| {
                            r.statistic == stat && r.body == body && r.value > 0.0
                        })
                        .collect();
                    if points.len() < 2 {
                        continue;
                    }
                    let path =
                        out_dir.join(format!("fit_{}_{config_hash}.svg", sanitize(&fit.statistic)));
                    std::fs::write(&path, render_loglog_svg(&fit.statistic, &points, fit))
                        .map_err(|e| io_err(&path, e))?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

/// Minimal self-contained log-log plot: axis frame, tick labels at the data
/// points, CI whiskers, and the fitted power law as a straight line.
fn render_loglog_svg(title: &str, points: &[&Row], fit: &Fit) -> String {
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let xs: Vec<f64> = points.iter().map(|r| (r.n as f64).ln()).collect();
    let ys_all: Vec<f64> = points
        .iter()
        .flat_map(|r| {
            let lo = if r.ci_low > 0.0 { r.ci_low } else { r.value };
            let hi = if r.ci_high > 0.0 { r.ci_high } else { r.value };
            [lo.ln(), hi.ln(), r.value.ln()]
        })
        .collect();
    let min_max = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 0.05 * (hi - lo).max(1e-9);
        (lo - pad, hi + pad)
    };
    let (x0, x1) = min_max(&xs);
    let (y0, y1) = min_max(&ys_all);
    let px = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let py = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mt - mb);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"monospace\" font-size=\"15\">{} : value = {:.4} n^-{:.4} (r2 = {:.4})</text>\n",
        ml, title, fit.c_hat, fit.kappa_hat, fit.r_squared
    ));
    // Axis frame.
    s.push_str(&format!(
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        w - ml - mr,
        h - mt - mb
    ));
    // X ticks at the data points.
    for r in points {
        let x = px((r.n as f64).ln());
        s.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            h - mb,
            h - mb + 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            h - mb + 18.0,
            r.n
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">n (log scale)</text>\n",
        (ml + w - mr) / 2.0,
        h - 12.0
    ));
    // Y ticks: 4 evenly spaced in log space.
    for k in 0..=3 {
        let y = y0 + (y1 - y0) * k as f64 / 3.0;
        let yy = py(y);
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{yy:.1}\" x2=\"{ml}\" y2=\"{yy:.1}\" stroke=\"black\"/>\n",
            ml - 5.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">{:.3e}</text>\n",
            ml - 8.0,
            yy + 4.0,
            y.exp()
        ));
    }
    // Fitted line.
    let fit_y = |lx: f64| fit.c_hat.ln() - fit.kappa_hat * lx;
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>\n",
        px(x0),
        py(fit_y(x0)),
        px(x1),
        py(fit_y(x1))
    ));
    // CI whiskers and points.
    for r in points {
        let x = px((r.n as f64).ln());
        if r.ci_low > 0.0 && r.ci_high > 0.0 {
            s.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#336\" stroke-width=\"1.5\"/>\n",
                py(r.ci_low.ln()),
                py(r.ci_high.ln())
            ));
        }
        s.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"#336\"/>\n",
            py(r.value.ln())
        ));
    }
    s.push_str("</svg>\n");
    s
}
